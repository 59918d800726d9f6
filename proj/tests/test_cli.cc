#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = EWCLT_CLI_PATH;
const std::string configs = EWCLT_CONFIG_DIR;

fs::path fresh_dir(const std::string &name) {
  const fs::path dir = fs::temp_directory_path() / ("ewclt_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(const std::string &args) {
  const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const fs::path &p) { return nlohmann::json::parse(slurp(p)); }

} // namespace

TEST(Cli, SampleWritesCsvAndChiSquare) {
  const auto dir = fresh_dir("sample");
  ASSERT_EQ(run("--out " + dir.string() + " sample --n 6 --theta 1 --samples 100000 --seed 7"), 0);
  const auto j = read_json(dir / "sample.json");
  EXPECT_GT(j.at("chi_square").at("p_value").get<double>(), 0.001);
  EXPECT_EQ(j.at("manifest").at("seed").get<int>(), 7);
  EXPECT_EQ(j.at("manifest").at("config_digest").get<std::string>().size(), 64u);
  EXPECT_TRUE(fs::exists(dir / "sample_counts.csv"));
  EXPECT_TRUE(fs::exists(dir / "sample_pmf.csv"));
  EXPECT_EQ(slurp(dir / "sample_counts.csv").rfind("# manifest: ", 0), 0u);
  EXPECT_TRUE(read_json(dir / "run_manifest.json").contains("finished"));
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto a = fresh_dir("rerun_a");
  const auto b = fresh_dir("rerun_b");
  const std::string args = " sample --n 8 --theta 0.7 --samples 5000 --seed 3";
  ASSERT_EQ(run("--out " + a.string() + args), 0);
  ASSERT_EQ(run("--out " + b.string() + " --threads 3" + args), 0);
  for (const char *f : {"sample.json", "sample_counts.csv", "sample_pmf.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
  }
  const std::string clt = " clt --config " + configs + "/two_minus_z_rational.json";
  ASSERT_EQ(run("--out " + a.string() + " --threads 1" + clt), 0);
  ASSERT_EQ(run("--out " + b.string() + " --threads 2" + clt), 0);
  EXPECT_EQ(slurp(a / "clt.json"), slurp(b / "clt.json"));
  EXPECT_EQ(slurp(a / "clt.csv"), slurp(b / "clt.csv"));
}

TEST(Cli, UsageErrorsExitTwo) {
  const auto dir = fresh_dir("usage");
  EXPECT_EQ(run("--out " + dir.string() + " sample --n 0"), 2);
  EXPECT_EQ(run("--out " + dir.string() + " sample"), 2);
  EXPECT_EQ(run("--out " + dir.string() + " nonsense"), 2);
  EXPECT_EQ(run("--out " + dir.string() + " limit --function " + configs +
                "/one_minus_z.json --x banana"),
            2);
}

TEST(Cli, IoErrorsExitThree) {
  const auto dir = fresh_dir("io");
  EXPECT_EQ(run("--out " + dir.string() + " limit --function /nonexistent.json --x golden"), 3);
  // --out pointing at a regular file cannot be written into
  std::ofstream(dir / "file") << "x";
  EXPECT_EQ(run("--out " + (dir / "file").string() + " sample --n 3 --samples 10"), 3);
}

TEST(Cli, LimitOutputsAndHypothesisViolations) {
  const auto dir = fresh_dir("limit");
  ASSERT_EQ(run("--out " + dir.string() + " limit --function " + configs +
                "/one_minus_z.json --x golden --theta 1"),
            0);
  const auto j = read_json(dir / "limit.json");
  EXPECT_NEAR(j.at("limit").at("V_a").get<double>(), 0.8224670334241132, 1e-8);
  EXPECT_NEAR(j.at("limit").at("V_b").get<double>(), 0.8224670334241132, 1e-8);
  EXPECT_NEAR(j.at("limit").at("E_ab").get<double>(), 0.0, 1e-10);
  EXPECT_FALSE(j.at("singular").get<bool>());

  EXPECT_EQ(run("--out " + dir.string() + " limit --function " + configs +
                "/one_minus_z.json --x 1/2"),
            4);
  ASSERT_EQ(run("--out " + dir.string() + " limit --function " + configs +
                "/constant_two.json --x \"rational 1/3\""),
            0);
  EXPECT_NEAR(read_json(dir / "limit.json").at("limit").at("m_f").at(0).get<double>(),
              std::log(2.0), 1e-15);
}

TEST(Cli, CltDiscrepancyWasserstein) {
  const auto dir = fresh_dir("pipeline");
  ASSERT_EQ(run("--out " + dir.string() + " clt --config " + configs + "/one_minus_z_golden.json"),
            0);
  const auto clt = read_json(dir / "clt.json");
  EXPECT_EQ(clt.at("reports").size(), 3u);
  EXPECT_EQ(clt.at("char_fn").size(), 3u);

  ASSERT_EQ(run("--out " + dir.string() + " discrepancy --t golden --n 100000 --csv"), 0);
  const auto d = read_json(dir / "discrepancy.json");
  EXPECT_TRUE(d.contains("decay_fit"));
  EXPECT_TRUE(d.at("finite_type").at("holds").get<bool>());
  EXPECT_TRUE(fs::exists(dir / "sequence.csv"));
  ASSERT_EQ(run("--out " + dir.string() + " discrepancy --t decimal:0.3819 --n 1000"), 0);
  EXPECT_TRUE(read_json(dir / "discrepancy.json").contains("warning"));

  ASSERT_EQ(run("--out " + dir.string() + " wasserstein --config " + configs +
                "/one_minus_z_golden.json"),
            0);
  const auto w = read_json(dir / "wasserstein.json");
  EXPECT_EQ(w.at("stein").size(), 3u);
  EXPECT_TRUE(w.contains("trend"));
}

TEST(Cli, OutDirFromEnvironment) {
  const auto dir = fresh_dir("env");
  const std::string cmd = "EWCLT_OUT_DIR=" + dir.string() + " " + cli +
                          " discrepancy --t sqrt2 --n 100 > /dev/null 2>&1";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  EXPECT_TRUE(fs::exists(dir / "discrepancy.json"));
}
