// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "blockdialect/commands.hpp"
#include "blockdialect/formatbook.hpp"
#include "blockdialect/io.hpp"
#include "blockdialect/random.hpp"

namespace bd = blockdialect;

namespace {

constexpr int kExitInputError = 2;
constexpr int kExitInvariant = 3;

void emit_text(const std::string& text, const std::string& out) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream f(out, std::ios::trunc);
  if (!f) throw bd::FormatError("cannot write '" + out + "'");
  f << text;
}

bd::BlockAxis parse_axis(const std::string& s) {
  if (s == "cols") return bd::BlockAxis::cols;
  if (s == "rows") return bd::BlockAxis::rows;
  throw std::invalid_argument("unknown axis '" + s + "' (expected rows or cols)");
}

bd::AccumulatorMode parse_mode(const std::string& s) {
  if (s == "exact") return bd::AccumulatorMode::exact;
  if (s == "fp16") return bd::AccumulatorMode::fp16;
  throw std::invalid_argument("unknown mode '" + s + "' (expected exact or fp16)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BlockDialect 4-bit block quantization toolkit"};
  app.require_subcommand(1);

  std::size_t block_size = 32;
  std::string format = "dialect";
  std::string formatbook_path;
  std::string mode = "exact";
  std::uint64_t seed = 0;
  std::string out;
  std::string input;
  std::string axis = "cols";
  std::vector<std::string> formats = {"dialect", "dialect-oracle", "mx", "nv"};
  std::string a_path;
  std::string w_path;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::string dist = "gaussian";
  double scale = 1.0;
  std::string dtype = "f64";

  auto add_block = [&](CLI::App* c) { c->add_option("--block-size,-b", block_size, "Block size (1-64)")->capture_default_str(); };
  auto add_fb = [&](CLI::App* c) { c->add_option("--formatbook", formatbook_path, "Formatbook document replacing the default"); };
  auto add_out = [&](CLI::App* c, bool required) {
    auto* o = c->add_option("--out,-o", out, "Output path");
    if (required) o->required();
  };

  auto* profile = app.add_subcommand("profile", "Scaled-magnitude and block-maximum histograms (CSV)");
  profile->add_option("input", input, "Tensor file")->required();
  add_block(profile);
  add_out(profile, false);

  auto* quantize = app.add_subcommand("quantize", "Quantize a tensor file");
  quantize->add_option("input", input, "Tensor file")->required();
  add_block(quantize);
  quantize->add_option("--format,-f", format, "dialect | mx | nv")->capture_default_str();
  quantize->add_option("--axis", axis, "Direction blocks run along: cols | rows")->capture_default_str();
  add_fb(quantize);
  add_out(quantize, true);

  auto* dequantize = app.add_subcommand("dequantize", "Dequantize a quantized file to a binary64 tensor");
  dequantize->add_option("input", input, "Quantized file")->required();
  add_fb(dequantize);
  add_out(dequantize, true);

  auto* compare = app.add_subcommand("compare", "Per-format block MSE and relative error (CSV)");
  compare->add_option("input", input, "Tensor file")->required();
  add_block(compare);
  compare->add_option("--format,-f", formats, "Methods: dialect dialect-oracle mx nv")->capture_default_str();
  add_fb(compare);
  add_out(compare, false);

  auto* select = app.add_subcommand("select-report", "Dialect selection frequencies, two-stage vs oracle (CSV)");
  select->add_option("input", input, "Tensor file")->required();
  add_block(select);
  add_fb(select);
  add_out(select, false);

  auto* gemm_check = app.add_subcommand("gemm-check", "Quantized GEMM against full precision (CSV)");
  gemm_check->add_option("a", a_path, "Left operand tensor (M x K)")->required();
  gemm_check->add_option("w", w_path, "Right operand tensor (K x N)")->required();
  add_block(gemm_check);
  gemm_check->add_option("--format,-f", format, "dialect | mx | nv")->capture_default_str();
  gemm_check->add_option("--mode", mode, "exact | fp16")->capture_default_str();
  add_fb(gemm_check);
  add_out(gemm_check, false);

  auto* generate = app.add_subcommand("generate", "Write a seeded random tensor");
  generate->add_option("--rows", rows)->required();
  generate->add_option("--cols", cols)->required();
  generate->add_option("--dist", dist, "gaussian | student-t3")->capture_default_str();
  generate->add_option("--scale", scale)->capture_default_str();
  generate->add_option("--seed", seed)->capture_default_str();
  generate->add_option("--dtype", dtype, "f32 | f64")->capture_default_str();
  add_out(generate, true);

  auto* to_csv = app.add_subcommand("to-csv", "Convert a tensor file to CSV");
  to_csv->add_option("input", input, "Tensor file")->required();
  add_out(to_csv, false);

  auto* from_csv = app.add_subcommand("from-csv", "Convert CSV to a binary64 tensor file");
  from_csv->add_option("input", input, "CSV file")->required();
  add_out(from_csv, true);

  auto* show_fb = app.add_subcommand("formatbook", "Print the formatbook in its document format");
  add_fb(show_fb);
  add_out(show_fb, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInputError;
  }

  try {
    const bd::Formatbook fb =
        formatbook_path.empty() ? bd::build_default_formatbook() : bd::load_formatbook_file(formatbook_path);

    if (*profile) {
      emit_text(bd::profile_csv(bd::cmd_profile(bd::read_tensor_file(input), block_size)), out);
    } else if (*quantize) {
      bd::write_file(out, bd::cmd_quantize(bd::read_tensor_file(input), block_size, parse_axis(axis),
                                           bd::parse_format(format), fb));
    } else if (*dequantize) {
      bd::write_tensor_file(out, bd::cmd_dequantize(bd::read_file(input), fb));
    } else if (*compare) {
      emit_text(bd::compare_csv(bd::cmd_compare(bd::read_tensor_file(input), block_size, formats, fb)), out);
    } else if (*select) {
      emit_text(bd::select_report_csv(bd::cmd_select_report(bd::read_tensor_file(input), block_size, fb)), out);
    } else if (*gemm_check) {
      const auto report = bd::cmd_gemm_check(bd::read_tensor_file(a_path), bd::read_tensor_file(w_path), block_size,
                                             bd::parse_format(format), parse_mode(mode), fb);
      emit_text(bd::gemm_check_csv(report), out);
    } else if (*generate) {
      bd::Distribution d;
      if (dist == "gaussian") {
        d = bd::Distribution::gaussian;
      } else if (dist == "student-t3") {
        d = bd::Distribution::student_t3;
      } else {
        throw std::invalid_argument("unknown distribution '" + dist + "'");
      }
      if (dtype != "f32" && dtype != "f64") throw std::invalid_argument("unknown dtype '" + dtype + "'");
      bd::SplitMix64 rng(seed);
      auto t = bd::Tensor::from_matrix(bd::random_matrix(rng, rows, cols, d, scale),
                                       dtype == "f32" ? bd::DType::f32 : bd::DType::f64);
      if (t.dtype == bd::DType::f32) {
        for (auto& v : t.values) v = static_cast<double>(static_cast<float>(v));
      }
      bd::write_tensor_file(out, t);
    } else if (*to_csv) {
      emit_text(bd::matrix_to_csv(bd::read_tensor_file(input).as_matrix()), out);
    } else if (*from_csv) {
      const auto bytes = bd::read_file(input);
      bd::write_tensor_file(out, bd::Tensor::from_matrix(bd::matrix_from_csv(
                                     std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()))));
    } else if (*show_fb) {
      emit_text(bd::format_formatbook(fb), out);
    }
  } catch (const bd::InvariantViolation& e) {
    std::cerr << "invariant violated: " << e.what() << '\n';
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  return 0;
}
