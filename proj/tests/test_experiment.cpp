#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "wlssub/experiment.hpp"

using namespace wlssub;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(RunRefine, OneFaceConstantData) {
  const auto dir = std::filesystem::temp_directory_path() / "wlssub_one_face";
  std::filesystem::create_directories(dir);
  {
    std::ofstream m(dir / "face.off");
    m << "OFF\n3 1 0\n0 0 0\n1 0 0\n0.5 0.8660254037844386 0\n3 0 1 2\n";
  }
  ExperimentConfig cfg;
  cfg.mesh = (dir / "face.off").string();
  cfg.function = "constant";
  cfg.noise_sd = 0.0;
  cfg.iterations = 1;
  cfg.output_dir = dir / "out";
  const auto out = run_refine(cfg);
  ASSERT_EQ(out.result.values.size(), 6u);
  for (double v : out.result.values) EXPECT_NEAR(v, 1.0, 1e-14);
  EXPECT_TRUE(std::filesystem::exists(dir / "out" / "provenance.json"));
  const auto prov = nlohmann::json::parse(slurp(dir / "out" / "provenance.json"));
  EXPECT_EQ(prov["weight"], "hat");
  EXPECT_EQ(prov["levels"].size(), 2u);
  EXPECT_EQ(prov["levels"][1]["vertices"], 6);
  std::filesystem::remove_all(dir);
}

TEST(RunRefine, DeterministicOutputs) {
  const auto base = std::filesystem::temp_directory_path() / "wlssub_det";
  ExperimentConfig cfg;
  cfg.L = 1.0;
  cfg.iterations = 2;
  cfg.seed = 5;
  cfg.output_dir = base / "a";
  run_refine(cfg);
  cfg.output_dir = base / "b";
  run_refine(cfg);
  for (const char* f : {"refined.off", "refined_values.csv", "provenance.json", "initial_values.csv"}) {
    EXPECT_EQ(slurp(base / "a" / f), slurp(base / "b" / f)) << f;
  }
  std::filesystem::remove_all(base);
}

TEST(RunRefine, ExplicitLMustExceedDiameter) {
  ExperimentConfig cfg;
  cfg.L = 0.5;
  cfg.iterations = 1;
  EXPECT_THROW(run_refine(cfg), Error);
}

TEST(RunRefine, NegativeIterationsRejected) {
  ExperimentConfig cfg;
  cfg.iterations = -1;
  EXPECT_THROW(run_refine(cfg), Error);
}

TEST(Experiment, NoiseFreeLinearDataIsReproduced) {
  ExperimentConfig cfg;
  cfg.function = "linear";
  cfg.noise_sd = 0.0;
  cfg.iterations = 2;
  const std::vector<Method> methods{Method::subdivision, Method::mls};
  const std::vector<WeightFunction> weights{WeightFunction::hat()};
  const std::vector<double> Ls{1.0};
  const auto table = run_experiment_6_2(cfg, methods, weights, Ls);
  ASSERT_EQ(table.rows.size(), 3u);
  EXPECT_LT(table.rows[0].e2, 1e-10);
  EXPECT_LT(table.rows[1].e2, 1e-10);
  EXPECT_EQ(table.initial().method, "initial");
  EXPECT_EQ(table.initial().e2, 0.0);
}

TEST(Experiment, SinCosTableHasExpectedShape) {
  ExperimentConfig cfg;
  cfg.seed = 2;
  cfg.iterations = 3;
  const std::vector<Method> methods{Method::subdivision, Method::shepard, Method::mls};
  const std::vector<WeightFunction> weights{WeightFunction::hat(), WeightFunction::gaussian()};
  const std::vector<double> Ls{1.0, 2.0};
  const auto table = run_experiment_6_2(cfg, methods, weights, Ls);
  EXPECT_EQ(table.rows.size(), 13u);
  const auto& init = table.initial();
  EXPECT_GT(init.e2, 0.08);
  EXPECT_LT(init.e2, 0.35);
  for (std::size_t i = 0; i + 1 < table.rows.size(); ++i) {
    EXPECT_GT(table.rows[i].e2, 0.0);
    EXPECT_LT(table.rows[i].e2, 0.5);
    EXPECT_GE(table.rows[i].einf, table.rows[i].e2);
  }
}

TEST(Experiment, UnknownNamesAreRejected) {
  EXPECT_THROW(parse_method("rbf"), Error);
  EXPECT_THROW(test_function("franke"), Error);
  EXPECT_THROW(make_mesh("random:abc", 1), Error);
}

TEST(Experiment, NoiseIsSeeded) {
  const std::vector<double> z(10, 0.0);
  EXPECT_EQ(add_gaussian_noise(z, 1.0, 3), add_gaussian_noise(z, 1.0, 3));
  EXPECT_NE(add_gaussian_noise(z, 1.0, 3), add_gaussian_noise(z, 1.0, 4));
}
