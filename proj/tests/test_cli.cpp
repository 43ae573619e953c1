#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "driftsel/cli.hpp"

using namespace driftsel;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "driftsel");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("driftsel_cli_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Cli, StatsLine) {
  const auto r = run({"stats", "--rho", "0.5", "--n", "100"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream in(r.out);
  std::string header, line;
  std::getline(in, header);
  std::getline(in, line);
  EXPECT_EQ(header, "rho,abs_sum,op_norm");
  ASSERT_EQ(line.rfind("0.5,", 0), 0u) << line;
  const double abs_sum = std::stod(line.substr(4));
  const double op = std::stod(line.substr(line.rfind(',') + 1));
  EXPECT_NEAR(abs_sum, 2.96, 0.01);
  EXPECT_NEAR(op, 2.99, 0.05);
}

TEST(Cli, UnknownCommand) {
  const auto r = run({"frobnicate"});
  EXPECT_EQ(r.code, exit_code::config);
  EXPECT_NE(r.err.find("simulate"), std::string::npos);  // usage lists subcommands
  EXPECT_EQ(run({}).code, exit_code::config);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, ExitCodes) {
  const auto dir = scratch("codes");
  EXPECT_EQ(run({"simulate", "--out", dir.string(), "--rho", "1.5"}).code, exit_code::config);
  EXPECT_EQ(run({"simulate", "--out", dir.string(), "--config", (dir / "missing.toml").string()}).code,
            exit_code::io);
  EXPECT_EQ(run({"fit", "--out", dir.string(), "--m", "3", "--input", (dir / "none.bin").string()}).code,
            exit_code::io);
  // Euler explosion is a numerical failure.
  EXPECT_EQ(run({"simulate", "--out", dir.string(), "--N", "3", "--dt", "2", "--T", "2000"}).code,
            exit_code::numerical);
}

TEST(Cli, SimulateFitSelect) {
  const auto dir = scratch("pipeline");
  auto r = run({"simulate", "--out", dir.string(), "--N", "20", "--T", "10", "--rho", "0.5", "--csv", "--seed", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  ASSERT_TRUE(fs::exists(dir / "ensemble.bin"));
  ASSERT_TRUE(fs::exists(dir / "ensemble.csv"));
  const auto ens = read_ensemble_binary(dir / "ensemble.bin");
  EXPECT_EQ(ens.n_paths(), 20u);
  EXPECT_EQ(ens.n_steps(), 100u);
  EXPECT_EQ(ens.seed, 5u);

  r = run({"fit", "--out", dir.string(), "--m", "4", "--input", (dir / "ensemble.bin").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(dir / "theta.csv").substr(0, 8), "j,theta\n");
  EXPECT_EQ(slurp(dir / "fit_curve.csv").substr(0, 10), "x,b_hat,b\n");

  r = run({"select", "--out", dir.string(), "--input", (dir / "ensemble.bin").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("m_hat="), std::string::npos);
  const std::string crit = slurp(dir / "criterion.csv");
  EXPECT_EQ(crit.substr(0, crit.find('\n')), "m,norm_sq,penalty,criterion,admissible");
  EXPECT_EQ(std::count(crit.begin(), crit.end(), '\n'), 11);  // header + m = 1..10

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["command"], "select");
  EXPECT_EQ(manifest["seed"], 1);
  for (const auto& o : manifest["outputs"]) {
    EXPECT_EQ(file_checksum(o["path"].get<std::string>()), o["fnv1a64"].get<std::string>());
  }
}

TEST(Cli, SelectIsByteIdentical) {
  const auto a = scratch("same_a"), b = scratch("same_b");
  for (const auto& d : {a, b}) {
    ASSERT_EQ(run({"select", "--out", d.string(), "--N", "20", "--T", "20", "--basis", "cosine"}).code, 0);
  }
  for (const char* f : {"criterion.csv", "theta.csv", "select_curve.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Cli, BenchOutputs) {
  const auto dir = scratch("bench");
  const auto cfg = dir.string() + ".toml";
  {
    std::ofstream out(cfg);
    out << "model = [\"ex1\"]\nbasis = [\"hermite\", \"cosine\"]\nN = 10\nT = 10\nreplicates = 3\n"
           "correlation = { kind = \"toeplitz\", rho = [0, 0.5] }\n";
  }
  const auto r = run({"bench", "--config", cfg, "--out", dir.string(), "--parametric-reps", "2000"});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"table1.csv", "replicates.csv", "tab0.csv", "parametric.csv", "manifest.json",
                        "beams_ex1_hermite_rho0.csv", "beams_ex1_cosine_rho0.5.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  const std::string table = slurp(dir / "table1.csv");
  EXPECT_EQ(table.substr(0, table.find('\n')), "model,basis,rho,mean_mise_x100,std_mise_x100,mean_dim,std_dim");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 5);
  const std::string beams = slurp(dir / "beams_ex1_hermite_rho0.csv");
  EXPECT_EQ(beams.substr(0, beams.find('\n')), "x,b,b_hat_1,b_hat_2,b_hat_3");

  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(manifest["command"], "bench");
  EXPECT_EQ(parse_config_text(manifest["config"].get<std::string>()).replicates, 3);
  fs::remove(cfg);
}

TEST(Cli, EnvAndFlagPrecedence) {
  const auto dir = scratch("env");
  ::setenv("DRIFTSEL_SEED", "77", 1);
  ASSERT_EQ(run({"simulate", "--out", dir.string(), "--N", "3", "--T", "1"}).code, 0);
  EXPECT_EQ(read_ensemble_binary(dir / "ensemble.bin").seed, 77u);
  ASSERT_EQ(run({"simulate", "--out", dir.string(), "--N", "3", "--T", "1", "--seed", "8"}).code, 0);
  EXPECT_EQ(read_ensemble_binary(dir / "ensemble.bin").seed, 8u);
  ::setenv("DRIFTSEL_SEED", "x", 1);
  EXPECT_EQ(run({"simulate", "--out", dir.string(), "--N", "3", "--T", "1"}).code, exit_code::config);
  ::unsetenv("DRIFTSEL_SEED");

  ::setenv("DRIFTSEL_THREADS", "2", 1);
  ASSERT_EQ(run({"simulate", "--out", dir.string(), "--N", "3", "--T", "1"}).code, 0);
  const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(parse_config_text(manifest["config"].get<std::string>()).threads, 2u);
  ::unsetenv("DRIFTSEL_THREADS");

  // Flags override file keys.
  const auto cfg = dir / "c.toml";
  {
    std::ofstream out(cfg);
    out << "[experiment]\nN = 4\nT = 1\nseed = 3\n";
  }
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", dir.string(), "--N", "6"}).code, 0);
  const auto ens = read_ensemble_binary(dir / "ensemble.bin");
  EXPECT_EQ(ens.n_paths(), 6u);
  EXPECT_EQ(ens.seed, 3u);
}

TEST(Cli, Executable) {
  const char* exe = std::getenv("DRIFTSEL_CLI");
  if (exe == nullptr) GTEST_SKIP() << "DRIFTSEL_CLI not set";
  const std::string base = std::string("\"") + exe + "\"";
  EXPECT_EQ(WEXITSTATUS(std::system((base + " stats --rho 0.9 > /dev/null").c_str())), 0);
  EXPECT_EQ(WEXITSTATUS(std::system((base + " bogus > /dev/null 2>&1").c_str())), 2);
}
