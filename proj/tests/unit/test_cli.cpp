#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "hcfm_cli/config.hpp"
#include "hcfm_cli/csv.hpp"
#include "hcfm_cli/dispatch.hpp"
#include "hermite_cfm/error.hpp"

using namespace hcfm;
using namespace hcfm::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("hcfm_cli_test_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const auto p = dir / name;
  std::ofstream(p) << text;
  return p.string();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string origin_of(const Config& c, const std::string& key) {
  for (const auto& p : c.provenance)
    if (p.key == key) return p.origin;
  return "";
}

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal1d = R"({
  // comment lines are allowed
  "dimension": 1, "problem": "standing-1d", "m": 2, "meshes": [20, 40]
})";

}  // namespace

TEST(Config, MinimalDefaults) {
  const auto c = parse_config_text(kMinimal1d);
  EXPECT_EQ(c.k, 4);
  EXPECT_DOUBLE_EQ(c.cfl, 0.9);
  EXPECT_DOUBLE_EQ(c.c_h, 1.0);
  EXPECT_EQ(c.q, 5);
  EXPECT_EQ(c.quad_points, 7);
  EXPECT_DOUBLE_EQ(c.problem.omega, 10.0);
  EXPECT_EQ(c.domain.type, "interval");
  EXPECT_EQ(origin_of(c, "k"), "literature");
  EXPECT_EQ(origin_of(c, "cfl"), "literature");
  EXPECT_EQ(origin_of(c, "beta"), "project default");
  EXPECT_EQ(origin_of(c, "m"), "config");
  const auto s = c.solver_params();
  EXPECT_EQ(s.cfm.k, 4);
  EXPECT_EQ(c.make_problem().dim, 1);
}

TEST(Config, Rejections) {
  EXPECT_NE(error_of(R"({"dimension":1,"problem":"standing-1d","m":1,"k":1,"meshes":[20]})")
                .find("k >= 2m required"),
            std::string::npos);
  const auto bc = error_of(R"({"dimension":1,"problem":"standing-1d","m":1,"bc":"periodic","meshes":[20]})");
  EXPECT_NE(bc.find("pec, pmc, impedance"), std::string::npos);
  EXPECT_NE(error_of(R"({"dimension":2,"problem":"nope","m":1,"meshes":[20]})").find("allowed"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"dimension":2,"problem":"standing-2d","m":1,"meshes":[20],
                         "domain":{"type":"cross","bounds":[0,1,0,1]}})")
                .find("grid line"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"dimension":1,"problem":"standing-1d","m":1})").find("meshes"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"dimension":1,"problem":"standing-1d","m":1,"meshes":[20],"c_h":0})")
                .find("c_h"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"dimension":1,"problem":"standing-1d","m":1,"meshes":[20],"cfl":1.0})")
                .find("cfl"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"dimension":1,"problem":"standing-1d","m":1,"meshes":[20],"mesh":3})")
                .find("unknown config key"),
            std::string::npos);
  EXPECT_NE(error_of(R"({"dimension":2,"problem":"standing-1d","m":1,"meshes":[20]})")
                .find("dimension"),
            std::string::npos);
  EXPECT_NE(error_of("{ not json").find("JSON"), std::string::npos);
}

TEST(Config, CrossAlignedMeshesAccepted) {
  const auto c = parse_config_text(R"({"dimension":2,"problem":"gaussian","m":1,"meshes":[24,48],
      "domain":{"type":"cross","bounds":[0,1,0,1]},"reference":192})");
  EXPECT_TRUE(c.make_problem().domain.is_cross());
  EXPECT_EQ(c.reference, 192);
}

TEST(Csv, RoundTripIsExact) {
  CsvTable t;
  t.comments = {"a = 1 (config)"};
  t.header = {"h", "error"};
  t.add_row({0.1, 1.0 / 3.0});
  t.add_row({1e-300, std::nan("")});
  std::stringstream s;
  write_csv(s, t);
  const auto r = read_csv(s);
  EXPECT_EQ(r.comments, t.comments);
  EXPECT_EQ(r.header, t.header);
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_EQ(r.rows[0][1], 1.0 / 3.0);
  EXPECT_EQ(r.rows[1][0], 1e-300);
  EXPECT_TRUE(std::isnan(r.rows[1][1]));
  EXPECT_EQ(format_number(0.1), "0.10000000000000001");
  EXPECT_THROW(t.add_row({1.0}), InvalidArgument);
  std::stringstream bad("a,b\n1,2,3\n");
  EXPECT_THROW(read_csv(bad), InvalidArgument);
  std::stringstream junk("a\nxyz\n");
  EXPECT_THROW(read_csv(junk), InvalidArgument);
}

TEST(Dispatch, RunOnZeroProblemHasZeroError) {
  const auto dir = scratch_dir("run");
  const auto cfg = write_file(dir, "c.json",
                              R"({"dimension":2,"problem":"zero","m":1,"meshes":[9],"tf":0.2})");
  std::ostringstream log, err;
  EXPECT_EQ(dispatch("run", cfg, (dir / "out").string(), std::nullopt, log, err), kOk) << err.str();
  const auto t = read_csv((dir / "out" / "run_final.csv").string());
  EXPECT_EQ(t.column_values("error").at(0), 0.0);
  const auto steps = read_csv((dir / "out" / "run_steps.csv").string());
  EXPECT_GT(steps.rows.size(), 1u);
}

TEST(Dispatch, ExitCodes) {
  const auto dir = scratch_dir("codes");
  std::ostringstream log, err;
  const auto bad = write_file(dir, "bad.json", R"({"dimension":1,"problem":"standing-1d","m":1,"k":1,"meshes":[20]})");
  EXPECT_EQ(dispatch("converge", bad, dir.string(), std::nullopt, log, err), kConfigFailure);
  EXPECT_EQ(dispatch("run", (dir / "missing.json").string(), dir.string(), std::nullopt, log, err),
            kConfigFailure);
  const auto two = write_file(dir, "two.json", R"({"dimension":2,"problem":"zero","m":1,"meshes":[6]})");
  EXPECT_EQ(dispatch("stability", two, dir.string(), std::nullopt, log, err), kConfigFailure);
  const auto blow = write_file(dir, "blow.json",
                               R"({"dimension":1,"problem":"zero","m":5,"cfl":0.9,"meshes":[20],"steps":5000})");
  err.str("");
  EXPECT_EQ(dispatch("longrun", blow, dir.string(), std::nullopt, log, err), kNumericalFailure);
  EXPECT_NE(err.str().find("numerical failure"), std::string::npos);
}

TEST(Dispatch, ConvergeCsvFeedsRateFit) {
  const auto dir = scratch_dir("converge");
  const auto cfg = write_file(dir, "c.json", R"({"dimension":1,"problem":"standing-1d","m":1,"meshes":[20,40,80]})");
  std::ostringstream log, err;
  ASSERT_EQ(dispatch("converge", cfg, dir.string(), std::nullopt, log, err), kOk) << err.str();
  const auto t = read_csv((dir / "converge.csv").string());
  ASSERT_EQ(t.rows.size(), 3u);
  const auto fit = fit_rate(t.column_values("h"), t.column_values("error"));
  EXPECT_NEAR(fit.slope, 3.0, 0.4);
  bool has_provenance = false;
  for (const auto& c : t.comments) has_provenance |= c.find("cfl = 0.9") != std::string::npos;
  EXPECT_TRUE(has_provenance);
}

TEST(Dispatch, DeterministicOutput) {
  const auto dir = scratch_dir("det");
  const auto cfg = write_file(dir, "c.json",
                              R"({"dimension":2,"problem":"zero","m":1,"meshes":[6],"steps":30,"record_every":5,
                                  "domain":{"type":"cross","bounds":[0,1,0,1]}})");
  std::ostringstream log, err;
  ASSERT_EQ(dispatch("longrun", cfg, (dir / "a").string(), 77ull, log, err), kOk) << err.str();
  ASSERT_EQ(dispatch("longrun", cfg, (dir / "b").string(), 77ull, log, err), kOk);
  ASSERT_EQ(dispatch("longrun", cfg, (dir / "c").string(), 78ull, log, err), kOk);
  const auto a = slurp(dir / "a" / "longrun.csv");
  EXPECT_EQ(a, slurp(dir / "b" / "longrun.csv"));
  EXPECT_NE(a, slurp(dir / "c" / "longrun.csv"));
  EXPECT_NE(a.find("seed = 77 (command line)"), std::string::npos);
}

TEST(Dispatch, StabilityAndCondTables) {
  const auto dir = scratch_dir("stab");
  const auto cfg = write_file(dir, "c.json", R"({"dimension":1,"problem":"zero","m":1,"meshes":[20,40],
      "sweep":{"parameter":"c_h","values":[1,0.1]}})");
  std::ostringstream log, err;
  ASSERT_EQ(dispatch("stability", cfg, dir.string(), std::nullopt, log, err), kOk) << err.str();
  const auto s = read_csv((dir / "stability.csv").string());
  EXPECT_EQ(s.rows.size(), 2u);
  for (double v : s.column_values("stable")) EXPECT_EQ(v, 1.0);
  ASSERT_EQ(dispatch("cond", cfg, dir.string(), std::nullopt, log, err), kOk) << err.str();
  const auto c = read_csv((dir / "cond.csv").string());
  EXPECT_EQ(c.header.at(0), "c_h");
  const auto k = c.column_values("kappa_max");
  EXPECT_GT(k.at(1), k.at(0));
}
