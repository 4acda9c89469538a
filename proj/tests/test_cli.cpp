#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "skewflow/cli.hpp"

using namespace skewflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "skewflow");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli::main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("skewflow_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string write_config(const json& j, const std::string& name = "config.json") {
    const auto p = dir_ / name;
    std::ofstream(p) << j.dump(2);
    return p.string();
  }
  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }

  fs::path dir_;
};

json torus_config() {
  return json::parse(R"({
    "geometry": {"kind": "perturbed_torus", "a": 1.0, "b": 0.6, "eps": 0.05, "seed": 7},
    "grid": {"sizes": [16, 16]},
    "flow": {"kind": "SMCF", "scheme": "RK4", "dt": 0.001, "t_end": 0.01, "output_every": 5},
    "converge": {"resolutions": [16, 32, 64], "dt_factor": 0.1}
  })");
}

}  // namespace

TEST(Config, ParsesAllFields) {
  const auto cfg = cli::parse_config(json::parse(R"({
    "task": "simulate", "verify_name": "codazzi", "output_dir": "x", "snapshots": true,
    "geometry": {"kind": "perturbed_torus", "a": 2.0, "b": 0.5, "eps": 0.1, "seed": 3},
    "grid": {"sizes": [8, 10]},
    "flow": {"kind": "MCF", "scheme": "Euler", "dt": 0.01, "t_end": 1.0, "output_every": 3, "seed": 4,
             "stability_factor": 0.0},
    "converge": {"resolutions": [8, 16, 32], "dt_factor": 0.2, "h_list": [0.1, 0.01]}
  })"));
  EXPECT_EQ(cfg.geometry.m, 2);
  EXPECT_DOUBLE_EQ(cfg.geometry.a, 2.0);
  EXPECT_EQ(cfg.geometry.seed, 3u);
  EXPECT_EQ(cfg.sizes, (std::vector<int>{8, 10}));
  EXPECT_EQ(cfg.flow.kind, flow::FlowKind::MCF);
  EXPECT_EQ(cfg.flow.scheme, flow::Scheme::Euler);
  EXPECT_EQ(cfg.flow.output_every, 3);
  EXPECT_EQ(cfg.flow.stability_factor, 0.0);
  EXPECT_EQ(cfg.verify_name, "codazzi");
  EXPECT_TRUE(cfg.snapshots);
  EXPECT_EQ(cfg.h_list.size(), 2u);
  EXPECT_NO_THROW(cli::validate(cfg));
}

TEST(Config, ReportsEveryBadField) {
  try {
    auto cfg = cli::parse_config(json::parse(R"({
      "geometry": {"kind": "circle", "r": -1},
      "grid": {"sizes": [7, 8]},
      "flow": {"dt": -1, "output_every": 0}
    })"));
    cli::validate(cfg);
    FAIL() << "expected ValidationError";
  } catch (const cli::ValidationError& e) {
    const std::string msg = e.what();
    for (const char* field : {"geometry.r", "grid.sizes", "flow.dt", "flow.output_every"})
      EXPECT_NE(msg.find(field), std::string::npos) << field;
  }
  try {
    cli::parse_config(json::parse(R"({"geometry": {"kind": 3}, "flow": {"kind": "XYZ", "dt": "fast"}})"));
    FAIL() << "expected ValidationError";
  } catch (const cli::ValidationError& e) {
    const std::string msg = e.what();
    for (const char* field : {"geometry.kind", "flow.kind", "flow.dt"})
      EXPECT_NE(msg.find(field), std::string::npos) << field;
  }
}

TEST(Config, GeometryMustMatchGridDimension) {
  auto cfg = cli::parse_config(json::parse(R"({"geometry": {"kind": "product_torus"}, "grid": {"sizes": [16]}})"));
  EXPECT_THROW(cli::validate(cfg), cli::ValidationError);
  cfg = cli::parse_config(json::parse(R"({"geometry": {"kind": "sphere"}})"));
  EXPECT_THROW(cli::validate(cfg), cli::ValidationError);
  cfg = cli::parse_config(json::parse(R"({"geometry": {"kind": "file", "path": "x.csv", "m": 3}})"));
  EXPECT_THROW(cli::validate(cfg), cli::ValidationError);
}

TEST(Config, ShippedExamplesAreValid) {
  for (const auto& e : fs::directory_iterator(SKEWFLOW_SOURCE_DIR "/configs")) {
    SCOPED_TRACE(e.path().string());
    EXPECT_NO_THROW(cli::validate(cli::load_config(e.path().string())));
  }
}

TEST_F(CliTest, UsageErrorsExitWithOne) {
  EXPECT_EQ(run_cli({}).code, 1);
  EXPECT_EQ(run_cli({"simulate"}).code, 1);
  EXPECT_EQ(run_cli({"frobnicate", "--config", "x"}).code, 1);
  EXPECT_EQ(run_cli({"simulate", "--config", out("missing.json")}).code, 1);
  std::ofstream(dir_ / "broken.json") << "{ not json";
  EXPECT_EQ(run_cli({"simulate", "--config", out("broken.json")}).code, 1);
  const auto cfg = write_config(torus_config());
  const auto r = run_cli({"verify", "--config", cfg, "--verify-name", "nonsense", "--out", out("o")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("verify_name"), std::string::npos);
  EXPECT_EQ(run_cli({"simulate", "--config", cfg, "--n", "9"}).code, 1);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST_F(CliTest, DegenerateInputExitsWithTwo) {
  std::ofstream csv(dir_ / "flat.csv");
  for (int i = 0; i < 16; ++i) csv << "1,0,0\n";
  csv.close();
  json j = json::parse(R"({"geometry": {"kind": "file", "m": 1}, "grid": {"sizes": [16]},
                           "flow": {"dt": 0.01, "t_end": 0.1}})");
  j["geometry"]["path"] = (dir_ / "flat.csv").string();
  const auto r = run_cli({"simulate", "--config", write_config(j), "--out", out("o")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("degenerate"), std::string::npos) << r.err;
}

TEST_F(CliTest, SimulateCircleKeepsLength) {
  const json j = json::parse(R"({"geometry": {"kind": "circle", "r": 1.0}, "grid": {"sizes": [64]},
                                 "flow": {"dt": 0.001, "t_end": 0.05, "output_every": 10}})");
  ASSERT_EQ(run_cli({"simulate", "--config", write_config(j), "--out", out("o")}).code, 0);
  const auto rows = read_csv(dir_ / "o" / "diagnostics.csv");
  ASSERT_EQ(rows.size(), 7u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "volume", "min_sv"}));
  const double v0 = std::stod(rows[1][1]);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    ASSERT_EQ(rows[i].size(), 3u);
    EXPECT_NEAR(std::stod(rows[i][1]) / v0, 1.0, 1e-6);
  }
  EXPECT_DOUBLE_EQ(std::stod(rows.back()[0]), 0.05);
}

TEST_F(CliTest, SimulateTorusWritesRadiiAndSnapshots) {
  json j = json::parse(R"({"geometry": {"kind": "product_torus", "a": 1.0, "b": 0.7}, "grid": {"sizes": [16, 16]},
                           "flow": {"dt": 0.01, "t_end": 0.02}, "snapshots": true})");
  ASSERT_EQ(run_cli({"simulate", "--config", write_config(j), "--out", out("o")}).code, 0);
  const auto rows = read_csv(dir_ / "o" / "diagnostics.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "volume", "min_sv", "a", "b"}));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].size(), 5u);
  EXPECT_NEAR(std::stod(rows.back()[3]) * std::stod(rows.back()[4]), 0.7, 1e-10);
  const auto snap = dir_ / "o" / "snapshot_00002.csv";
  ASSERT_TRUE(fs::exists(snap));
  const auto loaded = geometry::load_csv<2>(snap.string(), geometry::PeriodicGrid<2>({16, 16}));
  EXPECT_EQ(loaded.F.size(), 256u);
}

TEST_F(CliTest, VerifyWritesReportAndResidualField) {
  const auto cfg = write_config(torus_config());
  const auto r = run_cli({"verify", "--config", cfg, "--out", out("o"), "--verify-name", "theorem1"});
  ASSERT_EQ(r.code, 0) << r.err;
  json report;
  std::ifstream(dir_ / "o" / "theorem1_report.json") >> report;
  EXPECT_EQ(report["name"], "theorem1");
  ASSERT_TRUE(report["norms"]["max"].is_number());
  EXPECT_TRUE(std::isfinite(report["norms"]["max"].get<double>()));
  EXPECT_EQ(report["params"]["grid_sizes"], json::array({16, 16}));
  EXPECT_TRUE(report["observed_order"].is_null());
  const auto rows = read_csv(dir_ / "o" / "theorem1_residual.csv");
  EXPECT_EQ(rows[0], (std::vector<std::string>{"node", "i1", "i2", "residual"}));
  EXPECT_EQ(rows.size(), 257u);
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].size(), 4u);

  for (const char* name : {"codazzi", "identify", "theorem2", "conservation"}) {
    const auto v = run_cli({"verify", "--config", cfg, "--out", out("o"), "--verify-name", name});
    EXPECT_EQ(v.code, 0) << name << ": " << v.err;
    EXPECT_TRUE(fs::exists(dir_ / "o" / (std::string(name) + "_report.json"))) << name;
    EXPECT_TRUE(fs::exists(dir_ / "o" / (std::string(name) + "_residual.csv"))) << name;
  }
}

TEST_F(CliTest, VerifyMcfUsesHeatFlowIdentity) {
  auto j = torus_config();
  j["flow"]["kind"] = "MCF";
  ASSERT_EQ(run_cli({"verify", "--config", write_config(j), "--out", out("o")}).code, 0);
  json report;
  std::ifstream(dir_ / "o" / "theorem1_report.json") >> report;
  EXPECT_EQ(report["params"]["identity"], "dt_rho = tau(rho)");
}

TEST_F(CliTest, ConvergeReportsOrder) {
  const auto cfg = write_config(torus_config());
  const auto r = run_cli({"converge", "--config", cfg, "--out", out("o")});
  ASSERT_EQ(r.code, 0) << r.err;
  json table;
  std::ifstream(dir_ / "o" / "theorem1_convergence.json") >> table;
  EXPECT_EQ(table["rows"].size(), 3u);
  EXPECT_EQ(table["status"], "ok");
  EXPECT_GE(table["observed_order"].get<double>(), 1.9);

  auto circle = json::parse(R"({"geometry": {"kind": "circle"}, "grid": {"sizes": [16]}})");
  EXPECT_EQ(run_cli({"converge", "--config", write_config(circle, "c.json"), "--out", out("o")}).code, 1);
}

TEST_F(CliTest, RerunsAreByteIdentical) {
  const auto cfg = write_config(torus_config());
  for (const auto& args : std::vector<std::vector<std::string>>{
           {"verify", "--verify-name", "theorem1"}, {"verify", "--verify-name", "theorem2"}, {"converge"}}) {
    std::vector<std::string> a = args, b = args;
    a.insert(a.end(), {"--config", cfg, "--out", out("a")});
    b.insert(b.end(), {"--config", cfg, "--out", out("b")});
    const auto ra = run_cli(a), rb = run_cli(b);
    ASSERT_EQ(ra.code, 0);
    EXPECT_EQ(ra.out, rb.out);
  }
  for (const auto& e : fs::directory_iterator(dir_ / "a"))
    EXPECT_EQ(slurp(e.path()), slurp(dir_ / "b" / e.path().filename())) << e.path();
}

TEST_F(CliTest, SeedOverrideChangesPerturbation) {
  const auto cfg = write_config(torus_config());
  const auto a = run_cli({"verify", "--config", cfg, "--out", out("a"), "--verify-name", "codazzi", "--seed", "1"});
  const auto b = run_cli({"verify", "--config", cfg, "--out", out("b"), "--verify-name", "codazzi", "--seed", "2"});
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  EXPECT_NE(a.out, b.out);
}
