#pragma once

// JSON forms of circle functions and experiment configurations.
//
// Circle function: {"label": "1-z", "coeffs": [[1, 0], [-1, 0]],
//                   "zeros": [[0, 1, 1]], "offset": 0}
// coeffs[k] multiplies z^(k + offset); offset may be negative, so real
// trigonometric polynomials such as 3 + z + 1/z fit. "offset" is optional.
//
// Experiment configuration:
//   {"function": {...} | "function_file": "path",
//    "x": "golden", "theta": 1, "n_grid": [100, 1000],
//    "samples_per_n": 10000, "seed": 42, "mode": "feller",
//    "center": true, "char_fn_grid": [[1, 0], [0, 1]],
//    "quadrature": {"panels_per_gap": 2, "abs_tolerance": 1e-10}}

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ewclt/circle_function.hpp"
#include "ewclt/errors.hpp"
#include "ewclt/evaluation_point.hpp"
#include "ewclt/experiment.hpp"
#include "ewclt/statistic.hpp"

namespace ewclt {

// I/O failure (missing or unreadable file); distinct from bad content.
class io_error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline nlohmann::json to_json(const CircleFunction &f) {
  nlohmann::json coeffs = nlohmann::json::array();
  for (const auto c : f.coeffs()) {
    coeffs.push_back({c.real(), c.imag()});
  }
  nlohmann::json zeros = nlohmann::json::array();
  for (const auto &z : f.zeros()) {
    zeros.push_back({z.p, z.q, z.multiplicity});
  }
  nlohmann::json j{{"label", f.label()}, {"coeffs", coeffs}, {"zeros", zeros}};
  if (f.offset() != 0) {
    j["offset"] = f.offset();
  }
  return j;
}

inline CircleFunction circle_function_from_json(const nlohmann::json &j) {
  try {
    std::vector<complex> coeffs;
    for (const auto &c : j.at("coeffs")) {
      if (c.is_number()) {
        coeffs.emplace_back(c.get<double>(), 0.0);
      } else {
        coeffs.emplace_back(c.at(0).get<double>(), c.at(1).get<double>());
      }
    }
    std::vector<DeclaredZero> zeros;
    if (j.contains("zeros")) {
      for (const auto &z : j.at("zeros")) {
        zeros.push_back({z.at(0).get<std::int64_t>(), z.at(1).get<std::int64_t>(),
                         z.at(2).get<int>()});
      }
    }
    return CircleFunction(std::move(coeffs), std::move(zeros), j.value("label", "f"),
                          j.value("offset", 0),
                          j.value("zero_tolerance", default_zero_tolerance));
  } catch (const nlohmann::json::exception &e) {
    throw invalid_argument(std::string("malformed circle function: ") + e.what());
  }
}

inline std::string read_text_file(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot read '" + path + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline nlohmann::json read_json_file(const std::string &path) {
  const std::string text = read_text_file(path);
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error &e) {
    throw invalid_argument("'" + path + "' is not valid JSON: " + e.what());
  }
}

inline CircleFunction load_circle_function(const std::string &path) {
  return circle_function_from_json(read_json_file(path));
}

struct LoadedConfig {
  ExperimentConfig experiment;
  std::vector<std::pair<double, double>> char_fn_grid;
  nlohmann::json canonical; // config with the function inlined
};

// Parses a configuration; relative function_file paths resolve against
// base_dir.
inline LoadedConfig config_from_json(nlohmann::json j, const std::string &base_dir = ".") {
  LoadedConfig out;
  auto &cfg = out.experiment;
  try {
    if (j.contains("function_file")) {
      std::filesystem::path p = j.at("function_file").get<std::string>();
      if (p.is_relative()) {
        p = std::filesystem::path(base_dir) / p;
      }
      j["function"] = read_json_file(p.string());
      j.erase("function_file");
    }
    cfg.f = circle_function_from_json(j.at("function"));
    cfg.x = parse_evaluation_point(j.at("x").get<std::string>());
    cfg.theta = j.value("theta", 1.0);
    cfg.n_grid = j.at("n_grid").get<std::vector<std::uint64_t>>();
    cfg.samples_per_n = j.value("samples_per_n", std::uint64_t{1000});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.mode = parse_sampling_mode(j.value("mode", std::string("feller")));
    cfg.center = j.value("center", true);
    if (j.contains("quadrature")) {
      const auto &q = j.at("quadrature");
      cfg.quadrature.panels_per_gap = q.value("panels_per_gap", cfg.quadrature.panels_per_gap);
      cfg.quadrature.abs_tolerance = q.value("abs_tolerance", cfg.quadrature.abs_tolerance);
    }
    if (j.contains("char_fn_grid")) {
      for (const auto &p : j.at("char_fn_grid")) {
        out.char_fn_grid.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
      }
    } else {
      out.char_fn_grid = default_char_fn_grid();
    }
  } catch (const nlohmann::json::exception &e) {
    throw invalid_argument(std::string("malformed configuration: ") + e.what());
  }
  cfg.validate();
  j["function"] = to_json(cfg.f);
  out.canonical = j;
  return out;
}

inline LoadedConfig load_config(const std::string &path) {
  const auto base = std::filesystem::path(path).parent_path();
  return config_from_json(read_json_file(path), base.empty() ? "." : base.string());
}

} // namespace ewclt
