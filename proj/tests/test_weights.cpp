#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "oracles.hpp"
#include "wlssub/weights.hpp"

using namespace wlssub;

TEST(Weights, ConstantIsOne) {
  const auto w = WeightFunction::constant();
  for (double d : {0.0, 0.3, 1.1, 1.59}) EXPECT_EQ(evaluate_weight(w, d, 0, 1.6), 1.0);
}

TEST(Weights, HatEndpoints) {
  const auto w = WeightFunction::hat();
  EXPECT_EQ(evaluate_weight(w, 0.0, 2, 1.6), 1.0);
  const double eps = 1e-6;
  const double r = std::ldexp(1.6, -2);
  EXPECT_NEAR(evaluate_weight(w, r * (1 - eps), 2, 1.6), eps, 1e-15);
}

TEST(Weights, GaussianAtPointFour) {
  const auto w = WeightFunction::gaussian();
  const double r = std::ldexp(2.0, -3);
  EXPECT_NEAR(evaluate_weight(w, 0.4 * r, 3, 2.0), oracle::kGaussianAt04, 1e-15);
}

TEST(Weights, OutOfDomainIsAnError) {
  const auto w = WeightFunction::hat();
  for (double d : {-0.1, 1.0, 1.5}) {
    try {
      evaluate_weight(w, d, 0, 1.0);
      FAIL() << d;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::weight_domain);
    }
  }
}

TEST(Weights, PositiveOnDomain) {
  for (const auto& w : {WeightFunction::constant(), WeightFunction::hat(), WeightFunction::gaussian()}) {
    for (int i = 0; i < 1000; ++i) {
      const double t = i / 1000.0;
      const double v = w(t);
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  }
}

TEST(Weights, ScaleInvariance) {
  const auto w = WeightFunction::gaussian();
  for (double h : {1e-3, 0.5, 7.0}) {
    for (double d : {0.0, 0.2, 0.7}) {
      EXPECT_NEAR(evaluate_weight(w, h * d, 1, h * 1.6), evaluate_weight(w, d, 1, 1.6), 1e-15);
    }
  }
}

TEST(Weights, LevelShift) {
  const auto w = WeightFunction::hat();
  for (double d : {0.0, 0.3, 0.7}) {
    EXPECT_EQ(evaluate_weight(w, d / 2, 2, 1.6), evaluate_weight(w, d, 1, 1.6));
  }
}

TEST(Weights, ZeroExtension) {
  const auto w = WeightFunction::gaussian();
  EXPECT_EQ(w.zero_extended(1.0), 0.0);
  EXPECT_EQ(w.zero_extended(3.0), 0.0);
  EXPECT_EQ(w.zero_extended(0.4), w(0.4));
}

TEST(Weights, TabulatedInterpolatesLinearly) {
  const auto w = WeightFunction::tabulated({1.0, 0.5, 0.25});
  EXPECT_EQ(w(0.0), 1.0);
  EXPECT_NEAR(w(0.25), 0.75, 1e-15);
  EXPECT_NEAR(w(0.5), 0.5, 1e-15);
  EXPECT_NEAR(w(0.75), 0.375, 1e-15);
}

TEST(Weights, TabulatedRejectsBadSamples) {
  EXPECT_THROW(WeightFunction::tabulated({1.0}), Error);
  EXPECT_THROW(WeightFunction::tabulated({1.0, -0.5}), Error);
  EXPECT_THROW(WeightFunction::tabulated({1.5, 0.5}), Error);
}

TEST(Weights, ParseNames) {
  EXPECT_EQ(WeightFunction::parse("constant").kind(), WeightFunction::Kind::constant);
  EXPECT_EQ(WeightFunction::parse("hat").kind(), WeightFunction::Kind::hat);
  EXPECT_EQ(WeightFunction::parse("gaussian").kind(), WeightFunction::Kind::gaussian);
  EXPECT_THROW(WeightFunction::parse("triangle"), Error);
}

TEST(Weights, ParseTableFile) {
  const auto path = std::filesystem::temp_directory_path() / "wlssub_weight_table.txt";
  {
    std::ofstream out(path);
    out << "1.0\n0.5\n0.25\n";
  }
  const auto w = WeightFunction::parse("table:" + path.string());
  EXPECT_EQ(w.kind(), WeightFunction::Kind::tabulated);
  EXPECT_NEAR(w(0.5), 0.5, 1e-15);
  std::filesystem::remove(path);
}
