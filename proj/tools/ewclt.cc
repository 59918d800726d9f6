// ewclt: command-line driver.
//
//   ewclt sample --n 6 --theta 1 --samples 100000 --seed 7
//   ewclt limit --function configs/one_minus_z.json --x golden --theta 1
//   ewclt clt --config configs/one_minus_z_golden.json
//   ewclt discrepancy --t golden --n 100000
//   ewclt wasserstein --config configs/one_minus_z_golden.json
//
// Exit codes: 0 success, 2 usage, 3 I/O, 4 hypothesis violation.

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "ewclt/ewclt.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_io = 3;
constexpr int exit_hypothesis = 4;

struct Common {
  std::string out;
  unsigned threads = ewclt::default_thread_count();
};

std::string output_dir(const Common &c) {
  if (!c.out.empty()) {
    return c.out;
  }
  if (const char *env = std::getenv("EWCLT_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return ".";
}

void write_file(const fs::path &path, const std::string &content) {
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << content) || !out.flush()) {
    throw ewclt::io_error("cannot write '" + path.string() + "'");
  }
}

void write_json(const fs::path &path, const json &j) { write_file(path, j.dump(2) + "\n"); }

// CSV with the manifest as a leading comment line.
void write_csv(const fs::path &path, const json &manifest, const std::string &body) {
  write_file(path, "# manifest: " + manifest.dump() + "\n" + body);
}

void finish(const Common &c, const ewclt::cli::RunManifest &m) {
  write_json(fs::path(output_dir(c)) / "run_manifest.json", m.with_times());
}

std::string type_label(const ewclt::CycleCounts &cc) {
  std::ostringstream s;
  for (std::uint64_t m = 1; m <= cc.n(); ++m) {
    if (m > 1) {
      s << ' ';
    }
    s << cc[m];
  }
  return s.str();
}

int cmd_sample(const Common &c, std::uint64_t n, double theta, std::uint64_t samples,
               std::uint64_t seed) {
  if (n == 0 || samples == 0) {
    throw ewclt::invalid_argument("--n and --samples must be positive");
  }
  const ewclt::EwensParams params(theta);
  ewclt::cli::RunManifest man;
  man.command = "sample";
  man.inputs = {{"n", n}, {"theta", theta}, {"samples", samples}, {"seed", seed}};
  man.seed = seed;
  const json embedded = man.embedded();

  const ewclt::RngStream base(seed, 0);
  std::vector<double> sum(n, 0.0), sum_sq(n, 0.0);
  const bool enumerate = n <= ewclt::max_enumeration_n;
  std::map<std::vector<std::uint64_t>, std::size_t> index;
  std::vector<ewclt::CycleType> types;
  std::vector<std::uint64_t> observed;
  if (enumerate) {
    types = ewclt::enumerate_cycle_types(n, params);
    for (std::size_t i = 0; i < types.size(); ++i) {
      index[types[i].counts.raw()] = i;
    }
    observed.assign(types.size(), 0);
  }
  for (std::uint64_t s = 0; s < samples; ++s) {
    auto rng = base.substream(s);
    const auto bits = ewclt::sample_feller_bits(n, params, rng);
    const auto cc = ewclt::cycle_counts_from_bits(bits, n);
    for (std::uint64_t m = 1; m <= n; ++m) {
      const double v = static_cast<double>(cc[m]);
      sum[m - 1] += v;
      sum_sq[m - 1] += v * v;
    }
    if (enumerate) {
      ++observed[index.at(cc.raw())];
    }
  }
  std::ostringstream csv;
  csv.precision(17);
  csv << "m,mean_count,expected_count,standard_error\n";
  const double ns = static_cast<double>(samples);
  for (std::uint64_t m = 1; m <= n; ++m) {
    const double mean = sum[m - 1] / ns;
    const double var = samples > 1 ? (sum_sq[m - 1] - ns * mean * mean) / (ns - 1.0) : 0.0;
    csv << m << ',' << mean << ',' << ewclt::expected_cycle_count(m, n, params) << ','
        << std::sqrt(std::max(var, 0.0) / ns) << '\n';
  }
  const fs::path dir = output_dir(c);
  write_csv(dir / "sample_counts.csv", embedded, csv.str());
  json sidecar{{"manifest", embedded}, {"n", n}, {"theta", theta}, {"samples", samples}};
  if (enumerate) {
    std::ostringstream pmf;
    pmf.precision(17);
    pmf << "cycle_type,permutation_count,pmf,empirical\n";
    std::vector<double> probs;
    for (std::size_t i = 0; i < types.size(); ++i) {
      probs.push_back(types[i].pmf);
      pmf << '"' << type_label(types[i].counts) << "\"," << types[i].permutation_count << ','
          << types[i].pmf << ',' << static_cast<double>(observed[i]) / ns << '\n';
    }
    write_csv(dir / "sample_pmf.csv", embedded, pmf.str());
    const auto chi = ewclt::chi_square_test(observed, probs);
    sidecar["chi_square"] = {{"statistic", chi.statistic},
                             {"dof", chi.dof},
                             {"cells", chi.cells},
                             {"p_value", chi.p_value}};
  }
  write_json(dir / "sample.json", sidecar);
  finish(c, man);
  return exit_ok;
}

json validation_json(const ewclt::ValidationReport &v) {
  return {{"valid", v.valid},
          {"message", v.message},
          {"common_denominator", v.common_denominator},
          {"undeclared_zeros", v.undeclared_zeros}};
}

int cmd_limit(const Common &c, const std::string &function_file, const std::string &x_spec,
              double theta) {
  const auto f = ewclt::load_circle_function(function_file);
  const auto x = ewclt::parse_evaluation_point(x_spec);
  ewclt::cli::RunManifest man;
  man.command = "limit";
  man.inputs = {{"function", ewclt::to_json(f)}, {"x", x_spec}, {"theta", theta}};
  const auto validation = f.validate();
  if (!validation.valid) {
    throw ewclt::hypothesis_violation(validation.message);
  }
  const auto lp = ewclt::covariance_parameters(f, theta, x);
  const auto verdict = ewclt::sigma_singularity_test(lp);
  json out{{"manifest", man.embedded()},
           {"x", x.describe()},
           {"validation", validation_json(validation)},
           {"limit", ewclt::to_json(lp)},
           {"singular", verdict.singular},
           {"gram_determinant", verdict.gram_determinant}};
  write_json(fs::path(output_dir(c)) / "limit.json", out);
  finish(c, man);
  return exit_ok;
}

int cmd_clt(const Common &c, const std::string &config_path) {
  const auto loaded = ewclt::load_config(config_path);
  const auto &cfg = loaded.experiment;
  ewclt::cli::RunManifest man;
  man.command = "clt";
  man.inputs = loaded.canonical;
  man.seed = cfg.seed;
  const json embedded = man.embedded();
  const auto validation = cfg.f.validate();
  if (!validation.valid) {
    throw ewclt::hypothesis_violation(validation.message);
  }
  const auto lp = ewclt::covariance_parameters(cfg.f, cfg.theta, cfg.x, cfg.quadrature);
  const auto reports = ewclt::run_experiment(cfg, c.threads);
  json reps = json::array();
  for (const auto &r : reports) {
    reps.push_back(ewclt::to_json(r));
  }
  json grids = json::array();
  for (const auto n : cfg.n_grid) {
    grids.push_back(ewclt::to_json(
        ewclt::exact_char_fn(ewclt::LogTable(cfg.f, cfg.x, n), cfg.theta, lp, loaded.char_fn_grid)));
  }
  const fs::path dir = output_dir(c);
  write_json(dir / "clt.json", {{"manifest", embedded},
                                {"limit", ewclt::to_json(lp)},
                                {"mode", ewclt::to_string(cfg.mode)},
                                {"reports", reps},
                                {"char_fn", grids}});
  std::ostringstream csv;
  ewclt::write_moment_csv(csv, reports);
  write_csv(dir / "clt.csv", embedded, csv.str());
  finish(c, man);
  return exit_ok;
}

int cmd_discrepancy(const Common &c, const std::string &t_spec, std::uint64_t n,
                    std::vector<std::uint64_t> grid, double gamma, double K, bool csv) {
  if (n == 0) {
    throw ewclt::invalid_argument("--n must be positive");
  }
  const auto t = ewclt::parse_evaluation_point(t_spec, true);
  ewclt::cli::RunManifest man;
  man.command = "discrepancy";
  man.inputs = {{"t", t_spec}, {"n", n}, {"grid", grid}, {"gamma", gamma}, {"K", K}};
  const json embedded = man.embedded();
  const auto seq = ewclt::frac_parts(t, n);
  json out{{"manifest", embedded},
           {"t", t.describe()},
           {"precision_bound", seq.precision_bound},
           {"report", ewclt::to_json(ewclt::star_discrepancy(seq))}};
  if (!t.is_rational()) {
    if (t.as_irrational().from_decimal) {
      out["warning"] = "decimal t: type unknown, finite-type scan skipped";
    } else {
      out["finite_type"] = ewclt::to_json(ewclt::finite_type_scan(t, gamma, K, n));
    }
    if (grid.empty()) {
      for (std::uint64_t g = 100; g <= n; g *= 10) {
        grid.push_back(g);
      }
    }
    if (grid.size() >= 2) {
      out["decay_fit"] = ewclt::to_json(ewclt::discrepancy_decay_fit(t, grid));
    }
  }
  const fs::path dir = output_dir(c);
  write_json(dir / "discrepancy.json", out);
  if (csv) {
    std::ostringstream body;
    ewclt::write_csv(body, seq);
    write_csv(dir / "sequence.csv", embedded, body.str());
  }
  finish(c, man);
  return exit_ok;
}

int cmd_wasserstein(const Common &c, const std::string &config_path) {
  const auto loaded = ewclt::load_config(config_path);
  const auto &cfg = loaded.experiment;
  ewclt::cli::RunManifest man;
  man.command = "wasserstein";
  man.inputs = loaded.canonical;
  man.seed = cfg.seed;
  const auto validation = cfg.f.validate();
  if (!validation.valid) {
    throw ewclt::hypothesis_violation(validation.message);
  }
  const auto lp = ewclt::covariance_parameters(cfg.f, cfg.theta, cfg.x, cfg.quadrature);
  // the Stein check uses the real parts a_m = log|f(x^m)|
  json reps = json::array();
  for (const auto n : cfg.n_grid) {
    const ewclt::LogTable table(cfg.f, cfg.x, n);
    if (table.infinite_count() > 0) {
      throw ewclt::hypothesis_violation("f(x^m) = 0 at m = " +
                                        std::to_string(table.first_infinite()));
    }
    std::vector<double> a(n);
    for (std::uint64_t m = 1; m <= n; ++m) {
      a[m - 1] = table[m].real();
    }
    auto rep = ewclt::stein_bound_check(a, cfg.theta, n, cfg.samples_per_n,
                                        ewclt::RngStream(cfg.seed, n));
    reps.push_back(ewclt::to_json(rep));
  }
  // rate trend of d_W(Re statistic, N(0, theta V_a)) from the configured sampler
  const auto moments = ewclt::run_experiment(cfg, c.threads);
  json limit_reps = json::array();
  std::vector<double> d_w;
  for (const auto &r : moments) {
    limit_reps.push_back(ewclt::to_json(r));
    d_w.push_back(r.d_w_re);
  }
  json out{{"manifest", man.embedded()},
           {"limit", ewclt::to_json(lp)},
           {"stein", reps},
           {"moments", limit_reps}};
  if (cfg.n_grid.size() >= 3) {
    out["trend"] = ewclt::to_json(ewclt::rate_trend(cfg.n_grid, d_w));
  }
  write_json(fs::path(output_dir(c)) / "wasserstein.json", out);
  finish(c, man);
  return exit_ok;
}

} // namespace

int main(int argc, char **argv) {
  CLI::App app{"Ewens-measure class functions: sampling, limit constants and CLT checks"};
  app.require_subcommand(1);
  Common common;
  app.add_option("--out", common.out, "output directory (default: $EWCLT_OUT_DIR or .)");
  app.add_option("--threads", common.threads, "worker threads")->check(CLI::PositiveNumber);

  std::uint64_t n = 0, samples = 100000, seed = 0;
  double theta = 1.0;
  auto *sample = app.add_subcommand("sample", "sample cycle counts via the Feller coupling");
  sample->add_option("--n", n, "permutation size")->required();
  sample->add_option("--theta", theta, "Ewens parameter");
  sample->add_option("--samples", samples, "number of draws");
  sample->add_option("--seed", seed, "random seed");

  std::string function_file, x_spec;
  auto *limit = app.add_subcommand("limit", "centering constant and limiting covariance");
  limit->add_option("--function", function_file, "circle function JSON")->required();
  limit->add_option("--x", x_spec, "evaluation point: golden, sqrt2, e-frac, p/q, cf:...")
      ->required();
  limit->add_option("--theta", theta, "Ewens parameter");

  std::string config;
  auto *clt = app.add_subcommand("clt", "Monte Carlo moments and characteristic functions");
  clt->add_option("--config", config, "experiment JSON")->required();

  std::string t_spec;
  std::uint64_t disc_n = 0;
  std::vector<std::uint64_t> grid;
  double gamma = 1.01, K = 0.2;
  bool csv = false;
  auto *disc = app.add_subcommand("discrepancy", "discrepancy of {m t} and type diagnostics");
  disc->add_option("--t", t_spec, "golden, sqrt2, e-frac, p/q, cf:..., decimal:x")->required();
  disc->add_option("--n", disc_n, "sequence length")->required();
  disc->add_option("--grid", grid, "n values for the decay fit")->delimiter(',');
  disc->add_option("--gamma", gamma, "finite-type exponent");
  disc->add_option("--K", K, "finite-type constant");
  disc->add_flag("--csv", csv, "also write the sequence as CSV");

  auto *wass = app.add_subcommand("wasserstein", "Wasserstein distances and rate trend");
  wass->add_option("--config", config, "experiment JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int code = app.exit(e);
    return code == 0 ? exit_ok : exit_usage;
  }

  try {
    if (*sample) {
      return cmd_sample(common, n, theta, samples, seed);
    }
    if (*limit) {
      return cmd_limit(common, function_file, x_spec, theta);
    }
    if (*clt) {
      return cmd_clt(common, config);
    }
    if (*disc) {
      return cmd_discrepancy(common, t_spec, disc_n, grid, gamma, K, csv);
    }
    if (*wass) {
      return cmd_wasserstein(common, config);
    }
  } catch (const ewclt::io_error &e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_io;
  } catch (const ewclt::hypothesis_violation &e) {
    std::cerr << "hypothesis violation: " << e.what() << '\n';
    return exit_hypothesis;
  } catch (const ewclt::infinite_value_error &e) {
    std::cerr << "hypothesis violation: " << e.what() << '\n';
    return exit_hypothesis;
  } catch (const ewclt::invalid_argument &e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return exit_usage;
}
