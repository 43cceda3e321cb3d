// SPDX-License-Identifier: Apache-2.0

#include "blockdialect/formatbook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace blockdialect {

bool DialectValueSet::contains(HalfUnit v) const {
  return std::find(values.begin(), values.end(), v) != values.end();
}

const DialectValueSet& Formatbook::dialect(int id) const {
  if (id < 0 || id >= kNumDialects) {
    throw std::domain_error("dialect id " + std::to_string(id) + " outside [0, 15]");
  }
  return dialects[static_cast<std::size_t>(id)];
}

FormatbookError::FormatbookError(const std::string& what, std::vector<FormatbookViolation> violations)
    : std::runtime_error(what), violations_(std::move(violations)) {}

namespace {

bool is_base_value(int v) {
  return std::find(kBaseHalfUnits.begin(), kBaseHalfUnits.end(), v) != kBaseHalfUnits.end();
}

DialectValueSet make_dialect(int differing, int max) {
  std::array<int, kValuesPerDialect> v{};
  std::copy(kBaseHalfUnits.begin(), kBaseHalfUnits.end(), v.begin());
  v[6] = differing;
  v[7] = max;
  std::sort(v.begin(), v.end());
  DialectValueSet d;
  std::transform(v.begin(), v.end(), d.values.begin(), [](int x) { return static_cast<HalfUnit>(x); });
  return d;
}

}  // namespace

Formatbook build_default_formatbook() {
  // Differing values are scaled from the 6.5-max pair (5.0 / 4.0), then moved
  // off collisions: even steps up, odd steps down.
  Formatbook fb;
  for (int p = 0; p < kNumPairs; ++p) {
    const int max = kMaxHalfUnit - p;
    int even = static_cast<int>(std::lround(max * 10.0 / 13.0));
    while (is_base_value(even) || even == max) ++even;
    int odd = static_cast<int>(std::lround(max * 8.0 / 13.0));
    while (is_base_value(odd) || odd == max || odd == even) --odd;
    if (even >= max || odd <= 0) {
      throw std::logic_error("default formatbook construction failed for pair " + std::to_string(p));
    }
    fb.dialects[static_cast<std::size_t>(2 * p)] = make_dialect(even, max);
    fb.dialects[static_cast<std::size_t>(2 * p + 1)] = make_dialect(odd, max);
  }
  return fb;
}

int pair_index_for_max(HalfUnit block_max) {
  if (block_max < 8 || block_max > kMaxHalfUnit) {
    throw std::domain_error("block maximum " + std::to_string(block_max) + " half-units outside [8, 15]");
  }
  return kMaxHalfUnit - block_max;
}

HalfUnit differing_value(const Formatbook& fb, int dialect) {
  const auto& own = fb.dialect(dialect);
  const auto& other = fb.dialect(partner_of(dialect));
  for (HalfUnit v : own.values) {
    if (!other.contains(v)) return v;
  }
  throw std::logic_error("dialect " + std::to_string(dialect) + " is identical to its partner");
}

namespace {

BeneficialRange range_around(HalfUnit d, const std::set<int>& merged) {
  auto it = merged.find(d);
  const int below = *std::prev(it);
  const int above = *std::next(it);
  return {static_cast<QuarterCode>(below + d), static_cast<QuarterCode>(d + above)};
}

}  // namespace

PairRanges beneficial_ranges(const Formatbook& fb, int pair) {
  if (pair < 0 || pair >= kNumPairs) {
    throw std::domain_error("pair index " + std::to_string(pair) + " outside [0, 7]");
  }
  const auto& even = fb.dialect(2 * pair);
  const auto& odd = fb.dialect(2 * pair + 1);
  std::set<int> merged(even.values.begin(), even.values.end());
  merged.insert(odd.values.begin(), odd.values.end());
  return {range_around(differing_value(fb, 2 * pair), merged),
          range_around(differing_value(fb, 2 * pair + 1), merged)};
}

std::vector<FormatbookViolation> validate_formatbook(const Formatbook& fb) {
  std::vector<FormatbookViolation> out;
  auto report = [&out](int id, std::string msg) { out.push_back({id, std::move(msg)}); };

  std::array<bool, kNumDialects> well_formed{};
  for (int id = 0; id < kNumDialects; ++id) {
    const auto& d = fb.dialects[static_cast<std::size_t>(id)];
    bool ok = true;
    if (d.values[0] != 0) {
      report(id, "first value is not zero");
      ok = false;
    }
    if (!std::is_sorted(d.values.begin(), d.values.end(), std::less_equal<>{})) {
      report(id, "values not strictly ascending");
      ok = false;
    }
    if (d.max() < 8 || d.max() > kMaxHalfUnit) {
      report(id, "max outside [8, 15]");
      ok = false;
    }
    well_formed[static_cast<std::size_t>(id)] = ok;
  }

  for (int p = 0; p < kNumPairs; ++p) {
    const int e = 2 * p;
    const int o = 2 * p + 1;
    if (!well_formed[static_cast<std::size_t>(e)] || !well_formed[static_cast<std::size_t>(o)]) continue;
    const auto& even = fb.dialects[static_cast<std::size_t>(e)];
    const auto& odd = fb.dialects[static_cast<std::size_t>(o)];
    if (even.max() != odd.max()) {
      report(e, "pair members have different maxima");
      continue;
    }
    if (even.max() != kMaxHalfUnit - p) {
      report(e, "pair maximum does not match pair index");
    }
    int only_even = 0;
    int only_odd = 0;
    for (int i = 0; i < kValuesPerDialect; ++i) {
      only_even += odd.contains(even.values[static_cast<std::size_t>(i)]) ? 0 : 1;
      only_odd += even.contains(odd.values[static_cast<std::size_t>(i)]) ? 0 : 1;
    }
    if (only_even == 0) {
      report(e, "pair members are identical");
      continue;
    }
    if (only_even > 1 || only_odd > 1) {
      report(e, "pair differs in more than one value");
      continue;
    }
    if (differing_value(fb, e) <= differing_value(fb, o)) {
      report(e, "even differing value not greater than odd differing value");
    }
  }
  return out;
}

Formatbook load_formatbook(std::string_view text) {
  Formatbook fb;
  std::array<bool, kNumDialects> seen{};
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;

    std::istringstream fields(line);
    std::vector<long> numbers;
    std::string token;
    while (fields >> token) {
      std::size_t used = 0;
      long v = 0;
      try {
        v = std::stol(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) {
        throw FormatbookError("line " + std::to_string(line_no) + ": not an integer: '" + token + "'");
      }
      numbers.push_back(v);
    }
    if (numbers.size() != 1 + kValuesPerDialect) {
      throw FormatbookError("line " + std::to_string(line_no) + ": expected dialect index and 8 values, got " +
                            std::to_string(numbers.size()) + " fields");
    }
    const long id = numbers[0];
    if (id < 0 || id >= kNumDialects) {
      throw FormatbookError("line " + std::to_string(line_no) + ": dialect index outside [0, 15]");
    }
    if (seen[static_cast<std::size_t>(id)]) {
      throw FormatbookError("line " + std::to_string(line_no) + ": dialect " + std::to_string(id) + " listed twice");
    }
    seen[static_cast<std::size_t>(id)] = true;
    for (int i = 0; i < kValuesPerDialect; ++i) {
      const long v = numbers[static_cast<std::size_t>(i + 1)];
      if (v < 0 || v > 255) {
        throw FormatbookError("line " + std::to_string(line_no) + ": value out of range");
      }
      fb.dialects[static_cast<std::size_t>(id)].values[static_cast<std::size_t>(i)] = static_cast<HalfUnit>(v);
    }
  }
  const auto listed = std::count(seen.begin(), seen.end(), true);
  if (listed != kNumDialects) {
    throw FormatbookError("expected 16 dialects, found " + std::to_string(listed));
  }

  auto violations = validate_formatbook(fb);
  if (!violations.empty()) {
    std::string msg = "invalid formatbook:";
    for (const auto& v : violations) msg += " [dialect " + std::to_string(v.dialect) + ": " + v.message + "]";
    throw FormatbookError(msg, std::move(violations));
  }
  return fb;
}

Formatbook load_formatbook_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw FormatbookError("cannot open formatbook '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return load_formatbook(buf.str());
}

std::string format_formatbook(const Formatbook& fb) {
  std::ostringstream out;
  out << "# dialect  values (half-units, ascending)\n";
  for (int id = 0; id < kNumDialects; ++id) {
    out << id;
    for (HalfUnit v : fb.dialects[static_cast<std::size_t>(id)].values) out << ' ' << static_cast<int>(v);
    out << '\n';
  }
  return out.str();
}

}  // namespace blockdialect
