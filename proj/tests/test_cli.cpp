#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"

using namespace hardy;
using cli::json;
namespace fs = std::filesystem;

namespace {

struct Invocation {
  int code = 0;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "hardylab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Invocation r;
  r.code = cli::main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(f), {});
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("hardylab_test_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, GitBlobHashMatchesGit) {
  // Reference values from `git hash-object`.
  EXPECT_EQ(cli::git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(cli::git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Cli, HashChangesExactlyWithConfig) {
  cli::ExperimentConfig a;
  a.experiment = "growth";
  a = cli::normalize(a);
  auto b = a;
  EXPECT_EQ(cli::config_hash(a), cli::config_hash(b));
  b.out = "elsewhere";
  EXPECT_NE(cli::config_hash(a), cli::config_hash(b));
  b = a;
  b.params["tau"] = 5.0;
  EXPECT_NE(cli::config_hash(a), cli::config_hash(b));
  auto c = a;
  c.fk.seed += 1;
  EXPECT_NE(cli::config_hash(a), cli::config_hash(c));
  const auto back = cli::normalize(cli::config_from(cli::to_json(a)));
  EXPECT_EQ(cli::config_hash(back), cli::config_hash(a));
}

TEST(Cli, NormalizeFillsDefaultsAndRejectsUnknown) {
  cli::ExperimentConfig cfg;
  cfg.experiment = "approx-identity";
  cfg.params = {{"resolution", 8}};
  const auto n = cli::normalize(cfg);
  EXPECT_EQ(n.params.at("resolution"), 8);
  EXPECT_EQ(n.params.at("box_radius"), 1.5);
  cfg.params = {{"resolutoin", 8}};
  try {
    cli::normalize(cfg);
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_NE(std::string(e.what()).find("'params.resolutoin'"), std::string::npos);
  }
  cfg.params = {{"resolution", "many"}};
  EXPECT_THROW(cli::normalize(cfg), std::invalid_argument);
}

TEST(Cli, ErrorsNameTheField) {
  const auto dir = scratch("errors");
  const auto bad_tau = invoke({"growth", "--out", dir.string(), "--tau", "-1"});
  EXPECT_EQ(bad_tau.code, 2);
  EXPECT_NE(bad_tau.err.find("'params.tau'"), std::string::npos);

  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"fk": {"paths": 100, "stpes": 4}})";
  const auto typo = invoke({"kato-check", "--config", (dir / "cfg.json").string()});
  EXPECT_EQ(typo.code, 2);
  EXPECT_NE(typo.err.find("'fk.stpes'"), std::string::npos);

  std::ofstream(dir / "other.json") << R"({"experiment": "growth"})";
  const auto mismatch = invoke({"kato-check", "--config", (dir / "other.json").string()});
  EXPECT_EQ(mismatch.code, 2);
  EXPECT_NE(mismatch.err.find("'experiment'"), std::string::npos);

  const auto point = invoke({"omega-profile", "--out", dir.string(), "--from", "1,2"});
  EXPECT_EQ(point.code, 2);
  EXPECT_NE(point.err.find("'params.from'"), std::string::npos);

  const auto unknown = invoke({"frobnicate"});
  EXPECT_EQ(unknown.code, 2);
  EXPECT_NE(unknown.err.find("frobnicate"), std::string::npos);
}

TEST(Cli, RerunsAreByteIdentical) {
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  const std::vector<std::string> common{"omega-profile", "--points", "3", "--paths", "500", "--steps", "32"};
  auto args = common;
  args.insert(args.end(), {"--out", a.string()});
  ASSERT_EQ(invoke(args).code, 0);
  args = common;
  args.insert(args.end(), {"--out", b.string(), "--serial"});
  ASSERT_EQ(invoke(args).code, 0);
  EXPECT_EQ(slurp(a / "omega-profile.csv"), slurp(b / "omega-profile.csv"));

  const auto first_csv = slurp(a / "omega-profile.csv");
  const auto first_json = slurp(a / "omega-profile.json");
  args = common;
  args.insert(args.end(), {"--out", a.string()});
  ASSERT_EQ(invoke(args).code, 0);
  EXPECT_EQ(slurp(a / "omega-profile.csv"), first_csv);
  EXPECT_EQ(slurp(a / "omega-profile.json"), first_json);

  const auto manifest = json::parse(slurp(a / "omega-profile.manifest.json"));
  EXPECT_EQ(manifest.at("outputs").at(0).at("sha1"), cli::git_blob_sha1(slurp(a / "omega-profile.csv")));
  EXPECT_EQ(manifest.at("config").at("params").at("points"), 3);
  EXPECT_GE(manifest.at("wall_time_seconds").get<double>(), 0.0);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
  const auto dir = scratch("precedence");
  fs::create_directories(dir);
  std::ofstream(dir / "cfg.json") << R"({"out": ")" << dir.string()
                                  << R"(", "params": {"t": [0.5, 0.05], "resolution": 6}})";
  const auto r = invoke({"approx-identity", "--config", (dir / "cfg.json").string(), "--resolution", "8"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto manifest = json::parse(slurp(dir / "approx-identity.manifest.json"));
  EXPECT_EQ(manifest.at("config").at("params").at("resolution"), 8);
  EXPECT_EQ(manifest.at("config").at("params").at("t").size(), 2u);
  const auto csv = slurp(dir / "approx-identity.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
}

TEST(Cli, EverySubcommandRunsSmall) {
  const auto dir = scratch("all");
  const std::string out = dir.string();
  const std::vector<std::vector<std::string>> runs{
      {"kato-check"},
      {"omega-profile", "--points", "2", "--paths", "200", "--steps", "16"},
      {"oscillation", "--n", "3", "--paths", "100", "--steps-per-n2", "2", "--horizon", "4"},
      {"kernel-bounds", "--pairs", "2", "--paths", "500", "--steps", "32"},
      {"perturbation-check", "--u2", "box:0.2,0,0,0.5,1", "--paths", "200", "--node-paths", "50", "--steps", "16"},
      {"decompose", "--method", "split", "--omega", "unit"},
      {"decompose", "--samples", "1000"},
      {"growth", "--n", "4,8,16", "--reflection-samples", "50"},
      {"approx-identity", "--resolution", "6", "--t", "0.1"}};
  for (auto args : runs) {
    args.insert(args.end(), {"--out", out});
    const auto r = invoke(args);
    EXPECT_TRUE(r.code == 0 || r.code == 3) << args.front() << ": " << r.err;
    EXPECT_TRUE(fs::exists(dir / (args.front() + ".csv"))) << args.front();
    EXPECT_TRUE(fs::exists(dir / (args.front() + ".manifest.json"))) << args.front();
  }
  const auto dec = json::parse(slurp(dir / "decompose.json"));
  EXPECT_LE(dec.at("summary").at("reconstruction_error").get<double>(), 1e-12);
  EXPECT_TRUE(dec.at("summary").contains("telescope"));
}

TEST(Cli, DecomposeReadsAtomFile) {
  const auto dir = scratch("atomfile");
  fs::create_directories(dir);
  std::ofstream(dir / "atom.json") << R"({"kind": "q", "support": {"center": [0,0,0], "radius": 1},
    "terms": [{"coef": 1, "center": [-0.5,0,0], "radius": 0.5}, {"coef": -1, "center": [0.5,0,0], "radius": 0.5}]})";
  const auto r = invoke({"decompose", "--atom", (dir / "atom.json").string(), "--omega", "unit", "--method",
                         "split", "--out", dir.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto res = json::parse(slurp(dir / "decompose.json"));
  EXPECT_TRUE(res.at("summary").at("validation").at("cancel_ok").get<bool>());
  EXPECT_LE(res.at("summary").at("reconstruction_error").get<double>(), 1e-12);
}
