#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "driftsel/config.hpp"

using namespace driftsel;

namespace {

std::string error_of(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, MinimalGetsDefaults) {
  const auto cfg = parse_config_text("model = \"ex1\"\nbasis = \"hermite\"\n");
  EXPECT_EQ(cfg.models, std::vector<ModelId>{ModelId::Ex1});
  EXPECT_EQ(cfg.bases, std::vector<BasisFamily>{BasisFamily::Hermite});
  EXPECT_EQ(cfg.n_paths, 100u);
  EXPECT_EQ(cfg.horizon, 100.0);
  EXPECT_EQ(cfg.rhos, std::vector<double>{0.0});
  EXPECT_EQ(cfg.kappa, 2.0);
  EXPECT_EQ(cfg.dt, 0.1);
  EXPECT_EQ(cfg.mise_grid, 500);
  EXPECT_EQ(cfg.gate, GateKind::Empirical);
  EXPECT_EQ(cfg.gate_p, 12.0);
  EXPECT_EQ(cfg.replicates, 25);
  EXPECT_FALSE(cfg.m_max.has_value());
}

TEST(Config, RhoOutOfRange) {
  const std::string e = error_of("correlation = { kind = \"toeplitz\", rho = 1.5 }\n");
  EXPECT_NE(e.find("rho must lie in (-1,1)"), std::string::npos) << e;
  EXPECT_NE(e.find("correlation.rho"), std::string::npos) << e;
  EXPECT_NE(error_of("rho = [0, -1]\n").find("rho must lie in (-1,1)"), std::string::npos);
}

TEST(Config, ErrorsNameTheKey) {
  EXPECT_NE(error_of("kapa = 2\n").find("kapa"), std::string::npos);
  EXPECT_NE(error_of("model = \"ex9\"\n").find("model"), std::string::npos);
  EXPECT_NE(error_of("N = \"many\"\n").find("N"), std::string::npos);
  EXPECT_NE(error_of("dt = 0.3\nT = 1\n").find("T/dt"), std::string::npos);
  EXPECT_NE(error_of("p = 4\n").find("p"), std::string::npos);
  EXPECT_NE(error_of("correlation = { kind = \"toeplitz\", sigma = 2 }\n").find("correlation.sigma"),
            std::string::npos);
  EXPECT_NE(error_of("gate = \"loose\"\n").find("gate"), std::string::npos);
}

TEST(Config, SyntaxErrorsCarryLine) {
  EXPECT_NE(error_of("model = \"ex1\"\nbasis = \n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("[experiment\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("a = 1 2\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("seed = 1\nseed = 2\n").find("duplicate"), std::string::npos);
  EXPECT_NE(error_of("x = \"open\n").find("unterminated"), std::string::npos);
}

TEST(Config, SectionsCommentsAndArrays) {
  const auto cfg = parse_config_text(R"(# study
[experiment]
model = ["ex1", "ex4"]   # two models
basis = ["hermite", "cosine"]
N = 50
T = 20.0
replicates = 3
seed = 9
m_max = 8
x0 = 0.25
route = "latent"
gate = "theoretical"
p = 14
penalty = "theoretical"

[correlation]
kind = "tridiagonal"
a = [
  0.1,
  0.5,
]
)");
  EXPECT_EQ(cfg.models, (std::vector<ModelId>{ModelId::Ex1, ModelId::Ex4}));
  EXPECT_EQ(cfg.bases, (std::vector<BasisFamily>{BasisFamily::Hermite, BasisFamily::Cosine}));
  EXPECT_EQ(cfg.n_paths, 50u);
  EXPECT_EQ(cfg.horizon, 20.0);
  EXPECT_EQ(cfg.replicates, 3);
  EXPECT_EQ(cfg.seed, 9u);
  EXPECT_EQ(cfg.m_max, 8);
  EXPECT_EQ(cfg.x0, 0.25);
  EXPECT_EQ(cfg.route, SimulationRoute::Latent);
  EXPECT_EQ(cfg.gate, GateKind::Theoretical);
  EXPECT_EQ(cfg.gate_p, 14.0);
  EXPECT_EQ(cfg.penalty, PenaltyKind::Theoretical);
  EXPECT_EQ(cfg.correlation, CorrelationFamily::Tridiagonal);
  EXPECT_EQ(cfg.rhos, (std::vector<double>{0.1, 0.5}));
}

TEST(Config, ScalarRhoAndKindString) {
  const auto cfg = parse_config_text("correlation = \"equicorrelated\"\nrho = 0.25\n");
  EXPECT_EQ(cfg.correlation, CorrelationFamily::Equicorrelated);
  EXPECT_EQ(cfg.rhos, std::vector<double>{0.25});
}

TEST(Config, TableOneRoundTrip) {
  ExperimentConfig cfg;
  cfg.models = {ModelId::Ex1, ModelId::Ex2, ModelId::Ex3, ModelId::Ex4, ModelId::Ex5};
  cfg.bases = {BasisFamily::Hermite, BasisFamily::Cosine};
  cfg.rhos = {0.0, 0.5, 0.9};
  cfg.kappa = 2.0;
  cfg.seed = 20240101;
  cfg.threads = 4;
  const std::string text = serialize_config(cfg);
  EXPECT_EQ(parse_config_text(text), cfg) << text;

  ExperimentConfig odd = cfg;
  odd.rhos = {0.1, 1.0 / 3.0, -0.7};
  odd.kappa = 2.0000000000000004;
  odd.m_max = 7;
  odd.x0 = -0.125;
  odd.dt = 0.05;
  odd.horizon = 12.5;
  odd.gate = GateKind::Theoretical;
  odd.penalty = PenaltyKind::Theoretical;
  odd.route = SimulationRoute::Direct;
  EXPECT_EQ(parse_config_text(serialize_config(odd)), odd) << serialize_config(odd);
}

TEST(Config, FileIo) {
  const auto path = std::filesystem::temp_directory_path() / "driftsel_cfg_test.toml";
  {
    std::ofstream out(path);
    out << "model = \"ex2\"\nN = 10\n";
  }
  EXPECT_EQ(parse_config(path).models, std::vector<ModelId>{ModelId::Ex2});
  std::filesystem::remove(path);
  EXPECT_THROW(parse_config(path), IoError);
}
