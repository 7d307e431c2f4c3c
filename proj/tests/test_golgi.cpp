#include <gtest/gtest.h>

#include <random>

#include "cerebellum/encoding.hpp"
#include "cerebellum/errors.hpp"
#include "cerebellum/golgi.hpp"
#include "oracles.hpp"

using namespace cerebellum;

namespace {

GolgiParams params(GolgiMode mode, std::size_t p) {
  GolgiParams g;
  g.mode = mode;
  g.p_syn = p;
  g.sigma = {0.5};
  return g;
}

std::vector<double> random_mossy(std::size_t p, std::mt19937_64& rng, double lo = 0.0, double hi = 2.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> m(p);
  for (auto& v : m) v = u(rng);
  return m;
}

}  // namespace

TEST(Golgi, SilentGranuleLayer) {
  for (auto mode : {GolgiMode::threshold, GolgiMode::gain}) {
    GolgiParams g = params(mode, 5);
    g.sigma = {3.0};
    g.theta = 2.0;
    g.h_go = 1.5;
    const auto r = golgi_output(g, std::vector<double>(5, 1.0), 0.0);
    EXPECT_EQ(r.y.active(), 0u);
    EXPECT_DOUBLE_EQ(r.rate, 3.0);
  }
}

TEST(Golgi, OpenLoopWhenCouplingIsZero) {
  std::mt19937_64 rng(1);
  const auto m = random_mossy(50, rng);
  GolgiParams g = params(GolgiMode::gain, 50);
  g.k_g = 0.0;
  g.g_gr = 1.7;
  const auto r = golgi_output_gain(g, m, 0.4);
  std::size_t s = 0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double y = std::max(0.0, (m[i] - 0.5) * 1.7);
    if (y > 0) {
      ASSERT_LT(s, r.y.active());
      EXPECT_EQ(r.y.indices[s], i);
      EXPECT_DOUBLE_EQ(r.y.values[s], y);
      ++s;
    }
  }
  EXPECT_EQ(s, r.y.active());
  GolgiParams t = params(GolgiMode::threshold, 50);
  t.k_th = 0.0;
  EXPECT_EQ(golgi_output_threshold(t, m, 0.0).y.active(), s);
}

TEST(Golgi, ModeMismatchAndSizeErrors) {
  GolgiParams g = params(GolgiMode::threshold, 3);
  EXPECT_THROW(golgi_output_gain(g, std::vector<double>(3, 1.0), 0.0), InputError);
  EXPECT_THROW(golgi_output(g, std::vector<double>(4, 1.0), 0.0), InputError);
}

TEST(Golgi, MatchesPlainIterationInContractiveRegime) {
  std::mt19937_64 rng(2);
  for (auto mode : {GolgiMode::threshold, GolgiMode::gain}) {
    for (int i = 0; i < 20; ++i) {
      const auto m = random_mossy(40, rng);
      GolgiParams g = params(mode, 40);
      g.k_th = g.k_g = 0.01;
      g.theta = 0.5 + 0.1 * i;
      const double expected = oracle::golgi_iterate(g, m, 0.3);
      const auto r = golgi_output(g, m, 0.3);
      EXPECT_NEAR(r.rate, expected, 1e-10);
    }
  }
}

TEST(Golgi, MatchesBisectionAtHighLoopGain) {
  // Loop gains far above the range where plain or half-damped iteration converge.
  std::mt19937_64 rng(3);
  for (auto mode : {GolgiMode::threshold, GolgiMode::gain}) {
    for (double k : {0.05, 0.5, 5.0}) {
      const auto m = random_mossy(100, rng);
      GolgiParams g = params(mode, 100);
      g.k_th = g.k_g = k;
      g.h_u = 2.0;
      const auto r = golgi_output(g, m, 1.0);
      const double expected = oracle::golgi_bisect(g, m, 1.0);
      EXPECT_NEAR(r.rate, expected, 1e-10 * std::max(1.0, expected));
      EXPECT_LT(r.iterations, 200u);
    }
  }
}

TEST(Golgi, ThresholdSuppressionIsMonotone) {
  std::mt19937_64 rng(4);
  const auto m = random_mossy(200, rng);
  GolgiParams g = params(GolgiMode::threshold, 200);
  g.k_th = 0.05;
  std::size_t prev = 201;
  for (double theta : {0.0, 5.0, 20.0, 80.0}) {
    for (double hgo : {1.0, 2.0}) {
      g.theta = theta;
      g.h_go = hgo;
      const auto n = golgi_output(g, m, 0.0).y.active();
      if (hgo == 1.0) {
        EXPECT_LE(n, prev);
        prev = n;
      }
    }
  }
}

TEST(Golgi, ClosedLoopSumExamples) {
  GolgiParams g = params(GolgiMode::gain, 10);
  g.k_th = g.k_g = 0.2;
  const double a = closed_loop_sum(g, 12.0, 3.0, 6, 0.0);
  EXPECT_DOUBLE_EQ(a, g.g_gr * (12.0 - 3.0 - 6 * g.k_th * g.h_go * g.theta) / (1 + loop_gain(g, 6)));
  EXPECT_LT(closed_loop_sum(g, 12.0, 3.0, 6, 2.0), a);
  // Input held fixed while the loop gain grows: the sum collapses towards zero.
  g.k_th = 0.0;
  double last = 1e300;
  for (double k : {1.0, 1e3, 1e6, 1e9}) {
    g.k_g = k;
    const double s = closed_loop_sum(g, 12.0, 3.0, 6, 0.0);
    EXPECT_LT(s, last);
    last = s;
  }
  EXPECT_LT(last, 1e-8);
}

TEST(Golgi, ClosedLoopSumMatchesEquilibrium) {
  // The closed form is exact when K_th = K_g and, in gain mode, active mossy sums are 1.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto mode : {GolgiMode::threshold, GolgiMode::gain}) {
    for (int i = 0; i < 30; ++i) {
      GolgiParams g = params(mode, 60);
      g.k_th = g.k_g = 0.002 + 0.1 * u(rng);
      g.g_gr = 0.5 + u(rng);
      g.h_u = 0.5 + u(rng);
      g.h_l = u(rng);
      g.h_go = 0.5 + u(rng);
      g.theta = u(rng);
      g.sigma = {0.2 * u(rng)};
      auto m = mode == GolgiMode::gain ? std::vector<double>(60, 1.0) : random_mossy(60, rng, 0.0, 3.0);
      if (mode == GolgiMode::gain) {
        for (int z = 0; z < 20; ++z) m[static_cast<std::size_t>(3 * z)] = 0.0;
      }
      const double r_sum = 0.5 * u(rng);
      const auto r = golgi_output(g, m, r_sum);
      ASSERT_GT(r.y.active(), 0u);
      EXPECT_NEAR(closed_loop_sum(g, m, r.y.indices, r_sum), r.y.sum(), 1e-8);
    }
  }
}

TEST(Golgi, LineParams) {
  GolgiParams g = params(GolgiMode::gain, 10);
  g.k_th = g.k_g = 0.1;
  g.h_l = 0.7;
  const auto lp = line_params(g, 4, 2.0);
  EXPECT_GT(lp.k1, 0.0);
  EXPECT_GE(lp.k3, 0.0);
  for (double mt : {3.0, 5.5}) {
    for (double r : {0.0, 1.3}) EXPECT_NEAR(closed_loop_sum(g, mt, 2.0, 4, r), lp.eval(mt, r), 1e-12);
  }
  // Hand rearrangement: k3 = G K_g H_Go m H_L / (1 + G K_g H_U H_Go m)
  EXPECT_NEAR(lp.k3, 1.0 * 0.1 * 1.0 * 4 * 0.7 / (1 + 0.4), 1e-15);
  g.k_g = 0.0;
  EXPECT_EQ(line_params(g, 4, 2.0).k3, 0.0);
  g.k_g = 0.1;
  g.h_l = 0.0;
  EXPECT_EQ(line_params(g, 4, 2.0).k3, 0.0);
}

TEST(Golgi, CalibrationReachesOnePercent) {
  const auto l = BasisLayout::uniform({-1.0, -1.0}, {1.0, 1.0}, 100, {10, 10});
  GolgiParams g = params(GolgiMode::threshold, l.cell_count());
  g.sigma = {0.0};
  std::mt19937_64 rng(6);
  std::vector<Eigen::VectorXd> states;
  for (int i = 0; i < 200; ++i) states.push_back(oracle::random_vec(2, 1.0, rng));
  const auto cal = calibrate_sparsity(l, g, states);
  const auto stats = active_fraction(l, cal, states);
  const double m = stats.mean_fraction * static_cast<double>(l.cell_count());
  EXPECT_GE(m, 50.0);
  EXPECT_LE(m, 200.0);
  // Brute force count over the same samples.
  double total = 0.0;
  for (const auto& x : states) {
    const auto r = golgi_output(cal, mossy_sums(l, std::span<const double>(x.data(), 2)), 0.0);
    total += static_cast<double>(r.y.active());
  }
  EXPECT_DOUBLE_EQ(total / states.size() / l.cell_count(), stats.mean_fraction);
}

TEST(Golgi, CalibrationNearFullActivity) {
  const auto l = BasisLayout::uniform({0.0}, {1.0}, 1, {2});
  GolgiParams g = params(GolgiMode::threshold, 2);
  g.sigma = {0.0};
  g.k_th = 0.0;
  g.sparsity_target = 0.99;
  std::vector<Eigen::VectorXd> states{Eigen::VectorXd::Constant(1, 0.3)};
  const auto cal = calibrate_sparsity(l, g, states);
  EXPECT_EQ(cal.sigma, g.sigma);
}

TEST(Golgi, CalibrationFailureReportsFraction) {
  // One cell per tiling: the fraction is 1/2 or 0, never 1%.
  const auto l = BasisLayout::uniform({0.0}, {1.0}, 1, {2});
  GolgiParams g = params(GolgiMode::threshold, 2);
  g.sparsity_target = 0.01;
  std::vector<Eigen::VectorXd> states{Eigen::VectorXd::Constant(1, 0.3)};
  try {
    calibrate_sparsity(l, g, states);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_NE(std::string(e.what()).find("closest"), std::string::npos);
  }
}

TEST(Golgi, Validation) {
  GolgiParams g;
  g.h_u = -1.0;
  EXPECT_THROW(validate(g), ConfigError);
  g = GolgiParams{};
  g.sparsity_target = 1.0;
  EXPECT_THROW(validate(g), ConfigError);
}
