#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include "annulus_fixpoint/cli.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using annulus::cli::run_cli;

namespace {

int run(std::initializer_list<std::string> args) {
  std::vector<std::string> store{"annulus_fixpoint"};
  store.insert(store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& s : store) argv.push_back(s.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("annulus_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, AnalyzePerturbedTwistCertifies) {
  const int code = run({"analyze", "--map", "perturbed_twist", "--eps", "0.05", "--nx", "64", "--ny", "16",
                        "--out", path("out")});
  EXPECT_EQ(code, 0);
  const auto report = nlohmann::json::parse(slurp(dir_ / "out" / "report.json"));
  EXPECT_EQ(report["verdict"], "certified");
  EXPECT_EQ(report["fixed_points"]["certificates"].size(), 2u);
  for (const char* f : {"timings.json", "displacement.csv", "decomposition.json", "recurrent_boxes.csv",
                        "lyapunov.csv", "chain.json"}) {
    EXPECT_TRUE(fs::exists(dir_ / "out" / f)) << f;
  }
}

TEST_F(Cli, AnalyzeDriftTwistEmitsWitnessCurve) {
  const int code = run({"analyze", "--map", "drift_twist", "--eps", "0.1", "--out", path("out")});
  EXPECT_EQ(code, 2);
  const std::string curve = slurp(dir_ / "out" / "witness_curve.csv");
  ASSERT_FALSE(curve.empty());
  EXPECT_EQ(curve.substr(0, curve.find('\n')), "x,y");
  EXPECT_FALSE(fs::exists(dir_ / "out" / "chain.json"));
}

TEST_F(Cli, MissingMapIsAnError) {
  EXPECT_EQ(run({"analyze", "--out", path("out")}), 1);
  EXPECT_EQ(run({"analyze", "--map", "no_such_map", "--out", path("out")}), 1);
}

TEST_F(Cli, BadOptionsAreErrors) {
  EXPECT_EQ(run({"analyze", "--map", "pure_twist", "--bogus"}), 1);
  EXPECT_EQ(run({"analyze", "--map", "pure_twist", "--collar", "0.9", "--out", path("out")}), 1);
  EXPECT_EQ(run({"analyze", "--map", "pure_twist", "--param", "eps", "--out", path("out")}), 1);
  EXPECT_EQ(run({}), 1);
}

TEST_F(Cli, ExportGraphIsDeterministic) {
  ASSERT_EQ(run({"export-graph", "--map", "pure_twist", "--nx", "8", "--ny", "4", "--out", path("a.txt")}), 0);
  ASSERT_EQ(run({"export-graph", "--map", "pure_twist", "--nx", "8", "--ny", "4", "--out", path("b.txt")}), 0);
  const std::string a = slurp(path("a.txt"));
  EXPECT_EQ(a, slurp(path("b.txt")));
  EXPECT_NE(a.find("nodes 32\n"), std::string::npos);
  const auto parsed = oracle::parse_edge_list(a);
  EXPECT_EQ(parsed.nodes, 32);
  EXPECT_FALSE(parsed.edges.empty());
}

TEST_F(Cli, ExportGraphRejectsTooFewColumns) {
  EXPECT_EQ(run({"export-graph", "--map", "pure_twist", "--nx", "3", "--ny", "4", "--out", path("g.txt")}), 1);
  EXPECT_FALSE(fs::exists(path("g.txt")));
}

TEST_F(Cli, RotationNumberOfPureTwist) {
  ASSERT_EQ(run({"rotation-number", "--map", "pure_twist", "--iterations", "10000", "--out", path("r.json")}), 0);
  const auto j = nlohmann::json::parse(slurp(path("r.json")));
  EXPECT_NEAR(j["upper"]["value"].get<double>(), 0.5, 1e-4);
  EXPECT_NEAR(j["lower"]["value"].get<double>(), -0.5, 1e-4);
  EXPECT_EQ(run({"rotation-number", "--map", "pure_twist", "--iterations", "5"}), 1);
}

TEST_F(Cli, ReversibleCheck) {
  EXPECT_EQ(run({"reversible-check", "--map", "pure_twist", "--nx", "32", "--ny", "8", "--out", path("rev")}), 0);
  const auto j = nlohmann::json::parse(slurp(dir_ / "rev" / "reversibility.json"));
  EXPECT_LT(j["reversibility"]["residual"].get<double>(), 1e-12);
  EXPECT_EQ(run({"reversible-check", "--map", "drift_twist", "--nx", "32", "--ny", "8", "--out", path("rev2")}), 3);
}

TEST_F(Cli, ConfigFileDrivesRun) {
  {
    std::ofstream cfg(path("run.cfg"));
    cfg << "# small run\nname = perturbed_twist\neps = 0.05\nnx = 32\nny = 8\nmax_depth = 5\n";
  }
  ASSERT_EQ(run({"analyze", "--config", path("run.cfg"), "--out", path("out")}), 0);
  const auto report = nlohmann::json::parse(slurp(dir_ / "out" / "report.json"));
  EXPECT_EQ(report["config"]["nx"], 32);
  EXPECT_EQ(report["config"]["ny"], 8);

  // Command-line values override the file.
  ASSERT_EQ(run({"analyze", "--config", path("run.cfg"), "--nx", "16", "--out", path("out2")}), 0);
  EXPECT_EQ(nlohmann::json::parse(slurp(dir_ / "out2" / "report.json"))["config"]["nx"], 16);

  {
    std::ofstream bad(path("bad.cfg"));
    bad << "name = perturbed_twist\neps = lots\n";
  }
  EXPECT_EQ(run({"analyze", "--config", path("bad.cfg"), "--out", path("out3")}), 1);
}

TEST_F(Cli, CustomSampledFromCsv) {
  {
    std::ofstream csv(path("grid.csv"));
    annulus::write_sample_csv(csv, annulus::sample_map(annulus::perturbed_twist(0.05), 32, 9));
    std::ofstream cfg(path("custom.cfg"));
    cfg << "name = custom_sampled\nsamples = grid.csv\nnx = 32\nny = 8\nmax_depth = 5\n";
  }
  EXPECT_EQ(run({"analyze", "--config", path("custom.cfg"), "--out", path("out")}), 0);
}

TEST_F(Cli, AnalyzeReportsAreByteIdentical) {
  for (const char* d : {"a", "b"}) {
    ASSERT_EQ(run({"analyze", "--map", "perturbed_twist", "--nx", "32", "--ny", "8", "--max-depth", "5", "--out",
                   path(d)}),
              0);
  }
  for (const char* f : {"report.json", "decomposition.json", "lyapunov.csv", "chain.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
}
