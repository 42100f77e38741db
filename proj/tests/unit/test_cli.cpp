#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "sublap/io.hpp"
#include "sublap/polynomial.hpp"

namespace sublap {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("sublap_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(const std::string& args) const {
    const std::string cmd = std::string("\"") + SUBLAP_CLI_PATH + "\" " + args + " > \"" + (dir_ / "stdout.txt").string() +
                            "\" 2> \"" + (dir_ / "stderr.txt").string() + "\"";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path write_config(const std::string& name, const Json& j) const {
    const fs::path p = dir_ / name;
    write_atomic(p, dump(j));
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

Json p2_config() {
  return {{"schema_version", kSchemaVersion},
          {"p", 2.0},
          {"delta", 1.0},
          {"epsilon", 0.0},
          {"source", to_json(4.0 * PolyField::entry(3, 2, 0, 0, Part::Real))}};
}

TEST_F(Cli, Algebra) {
  ASSERT_EQ(run("algebra --n 3 --out \"" + (dir_ / "out").string() + "\""), 0);
  const Json j = read_json_file(dir_ / "out" / "algebra.json");
  EXPECT_EQ(j["dimension"], 8);
  EXPECT_LT(j["frame_structure_residual"].get<double>(), 1e-12);
}

TEST_F(Cli, Roots) {
  ASSERT_EQ(run("roots --n 4 --out \"" + (dir_ / "out").string() + "\""), 0);
  const Json j = read_json_file(dir_ / "out" / "roots.json");
  EXPECT_EQ(j["positive_roots"].size(), 6u);
  EXPECT_EQ(j["homogeneous_dimension"], 18);
}

TEST_F(Cli, SolveEigenfunction) {
  const fs::path cfg = write_config("solve.json", p2_config());
  ASSERT_EQ(run("solve --config \"" + cfg.string() + "\" --out \"" + (dir_ / "out").string() + "\""), 0);
  const PolyField u = polyfield_from_json(read_json_file(dir_ / "out" / "coefficients.json"));
  const PolyField expected = PolyField::entry(3, 2, 0, 0, Part::Real);
  EXPECT_LT((u.coefficients() - expected.coefficients()).lpNorm<Eigen::Infinity>(), 1e-8);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "energy_trace.csv"));
  EXPECT_EQ(read_json_file(dir_ / "out" / "solution.json")["report"]["status"], "converged");
}

TEST_F(Cli, CcdistIdentity) {
  ASSERT_EQ(run("ccdist --out \"" + (dir_ / "out").string() + "\""), 0);
  const Json j = read_json_file(dir_ / "out" / "ccdist.json");
  EXPECT_EQ(j["T"].get<double>(), 0.0);
  EXPECT_TRUE(j["feasible"].get<bool>());
}

TEST_F(Cli, ValidationExitCodes) {
  Json bad = p2_config();
  bad["unknown_key"] = 1;
  EXPECT_EQ(run("solve --config \"" + write_config("a.json", bad).string() + "\" --out \"" + dir_.string() + "\""), 2);
  bad = p2_config();
  bad["schema_version"] = 99;
  EXPECT_EQ(run("solve --config \"" + write_config("b.json", bad).string() + "\" --out \"" + dir_.string() + "\""), 2);
  EXPECT_EQ(run("solve --out \"" + dir_.string() + "\""), 2);
  EXPECT_EQ(run("solve --config \"" + (dir_ / "missing.json").string() + "\""), 2);
  EXPECT_EQ(run("nonsense"), 2);
  EXPECT_EQ(run("algebra --n 1 --out \"" + dir_.string() + "\""), 2);
}

TEST_F(Cli, NonConvergenceExitsThree) {
  Json cfg = p2_config();
  cfg["p"] = 3.0;
  cfg["max_iter"] = 1;
  cfg["quadrature"] = {{"points", 2000}};
  EXPECT_EQ(run("solve --config \"" + write_config("c.json", cfg).string() + "\" --out \"" + (dir_ / "out").string() + "\""), 3);
  EXPECT_NE(read_json_file(dir_ / "out" / "solution.json")["report"]["status"], "converged");
}

TEST_F(Cli, ThreadCountDoesNotChangeOutput) {
  Json cfg = p2_config();
  cfg["p"] = 3.0;
  cfg["epsilon"] = 0.5;
  cfg["quadrature"] = {{"points", 4000}};
  const fs::path path = write_config("d.json", cfg);
  for (int t : {1, 4})
    ASSERT_EQ(run("solve --seed 3 --threads " + std::to_string(t) + " --config \"" + path.string() + "\" --out \"" +
                  (dir_ / ("t" + std::to_string(t))).string() + "\""),
              0);
  for (const char* f : {"solution.json", "coefficients.json", "energy_trace.csv"})
    EXPECT_EQ(slurp(dir_ / "t1" / f), slurp(dir_ / "t4" / f)) << f;
}

}  // namespace
}  // namespace sublap
