#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "crowdsim/kernels.hpp"

using namespace crowdsim;

namespace {
const KernelParams kPaper{};  // defaults are the corridor experiment values
}

TEST(Kernels, DefaultsMatchCorridorExperiment) {
  EXPECT_EQ(kPaper.F_opp, 0.3);
  EXPECT_EQ(kPaper.F_own, 0.3);
  EXPECT_EQ(kPaper.R_r_opp, 2.0);
  EXPECT_EQ(kPaper.R_a_own, 2.0);
  EXPECT_EQ(kPaper.R_r_own, 0.5);
  EXPECT_EQ(kPaper.F_w, 0.5);
  EXPECT_EQ(kPaper.R_w, 0.5);
  EXPECT_EQ(kPaper.sigma, 0.5);
  EXPECT_TRUE(kPaper.check(20.0).empty());
}

TEST(FOpp, Values) {
  EXPECT_EQ(f_opp(2.0, kPaper), 0.0);
  EXPECT_EQ(f_opp(3.0, kPaper), 0.0);
  EXPECT_NEAR(f_opp(1.0, kPaper), -0.3 * (1.0 - 0.25), 1e-15);
  EXPECT_NEAR(f_opp(1.0, kPaper), -0.225, 1e-15);
  EXPECT_THROW(f_opp(0.0, kPaper), std::domain_error);
  EXPECT_THROW(f_opp(-1.0, kPaper), std::domain_error);
}

TEST(FOwn, Values) {
  EXPECT_EQ(f_own(0.5, kPaper), 0.0);
  EXPECT_EQ(f_own(2.0, kPaper), 0.0);
  EXPECT_NEAR(f_own(1.0, kPaper), 0.15, 1e-15);
  EXPECT_NEAR(f_own(0.25, kPaper), -0.3 * (4.0 - 2.0) * (4.0 - 0.5), 1e-14);
  EXPECT_NEAR(f_own(0.25, kPaper), -2.1, 1e-14);
  EXPECT_THROW(f_own(0.0, kPaper), std::domain_error);
}

TEST(GAniso, Values) {
  for (double sigma : {0.0, 0.3, 0.5, 1.0}) {
    KernelParams p;
    p.sigma = sigma;
    EXPECT_EQ(g_aniso(0.0, p), 1.0);
  }
  EXPECT_NEAR(g_aniso(std::numbers::pi, kPaper), 0.5, 1e-15);
  EXPECT_NEAR(g_aniso(std::numbers::pi / 2, kPaper), 0.75, 1e-15);
  // wraps: 2 pi + pi/2 behaves as pi/2
  EXPECT_NEAR(g_aniso(2.5 * std::numbers::pi, kPaper), 0.75, 1e-12);
}

TEST(FWall, Values) {
  EXPECT_EQ(f_wall(0.5, kPaper), 0.0);
  EXPECT_EQ(f_wall(1.0, kPaper), 0.0);
  EXPECT_NEAR(f_wall(0.25, kPaper), -0.5 * (16.0 - 4.0), 1e-13);
  EXPECT_NEAR(f_wall(0.25, kPaper), -6.0, 1e-13);
  EXPECT_EQ(f_wall(0.0, kPaper), f_wall(5e-4, kPaper));
  EXPECT_EQ(f_wall(-1.0, kPaper), f_wall(5e-4, kPaper));
  EXPECT_TRUE(std::isfinite(f_wall(0.0, kPaper)));
}

TEST(KernelProperties, CompactSupport) {
  for (int k = 1; k <= 200; ++k) {
    const double s = 2.0 + 0.05 * k;
    EXPECT_EQ(f_opp(s, kPaper), 0.0);
    EXPECT_EQ(f_own(s, kPaper), 0.0);
    EXPECT_EQ(f_wall(0.5 + 0.05 * k, kPaper), 0.0);
  }
}

TEST(KernelProperties, ContinuousAtSupportBoundaries) {
  constexpr double eps = 1e-8;
  for (double r : {kPaper.R_r_opp}) {
    EXPECT_LT(std::abs(f_opp(r - eps, kPaper)), 1e-6);
    EXPECT_LT(std::abs(f_opp(r + eps, kPaper)), 1e-6);
  }
  EXPECT_LT(std::abs(f_own(kPaper.R_a_own - eps, kPaper)), 1e-6);
  EXPECT_LT(std::abs(f_own(kPaper.R_a_own + eps, kPaper)), 1e-6);
  EXPECT_LT(std::abs(f_own(kPaper.R_r_own - eps, kPaper)), 1e-6);
  EXPECT_LT(std::abs(f_own(kPaper.R_r_own + eps, kPaper)), 1e-6);
  EXPECT_LT(std::abs(f_wall(kPaper.R_w - eps, kPaper)), 1e-6);
  EXPECT_LT(std::abs(f_wall(kPaper.R_w + eps, kPaper)), 1e-6);
}

TEST(KernelProperties, SignStructure) {
  for (int k = 1; k <= 4000; ++k) {
    const double s = 4.0 * k / 4000.0;  // (0, 2 radius]
    EXPECT_LE(f_opp(s, kPaper), 0.0);
    const double own = f_own(s, kPaper);
    if (s < kPaper.R_r_own) EXPECT_LE(own, 0.0) << s;
    else if (s < kPaper.R_a_own) EXPECT_GE(own, 0.0) << s;
    else EXPECT_EQ(own, 0.0) << s;
    EXPECT_LE(f_wall(0.5 * s, kPaper), 0.0);
  }
}

TEST(KernelProperties, AnisotropyEvenAndBounded) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    KernelParams p;
    p.sigma = unit(rng);
    const double a = angle(rng);
    EXPECT_EQ(g_aniso(a, p), g_aniso(-a, p));
    EXPECT_GE(g_aniso(a, p), p.sigma - 1e-15);
    EXPECT_LE(g_aniso(a, p), 1.0 + 1e-15);
  }
}

TEST(KernelParamsCheck, ReportsViolations) {
  KernelParams p;
  p.R_r_own = 2.0;
  p.R_a_own = 0.5;
  const auto problems = p.check(20.0);
  ASSERT_FALSE(problems.empty());
  EXPECT_NE(problems.front().find("0 < R_r_own < R_a_own"), std::string::npos);
  KernelParams wide;
  wide.R_r_opp = 6.0;
  EXPECT_FALSE(wide.check(20.0).empty());
  EXPECT_TRUE(wide.check(20.0, 0.5).empty());
}
