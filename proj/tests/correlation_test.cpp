#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rbfim/correlation.hpp"
#include "rbfim/types.hpp"

namespace rbfim {
namespace {

double textbook_pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double n = double(x.size());
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxy += x[i] * y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// Ranks for distinct values by counting smaller entries.
std::vector<double> count_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (double v : x) {
      r[i] += v < x[i];
    }
    r[i] += 1;
  }
  return r;
}

double spearman_closed_form(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> rx = count_ranks(x);
  std::vector<double> ry = count_ranks(y);
  double n = double(x.size());
  double d2 = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d2 += (rx[i] - ry[i]) * (rx[i] - ry[i]);
  }
  return 1 - 6 * d2 / (n * (n * n - 1));
}

double tau_a(const std::vector<double>& x, const std::vector<double>& y) {
  double s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      s += (x[i] < x[j] ? 1 : -1) * (y[i] < y[j] ? 1 : -1);
    }
  }
  return s / (0.5 * double(x.size()) * double(x.size() - 1));
}

std::vector<double> random_vector(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0, 100);
  std::vector<double> v(n);
  for (double& x : v) {
    x = u(rng);
  }
  return v;
}

TEST(Ranks, AverageTies) {
  std::vector<double> x{10, 20, 10, 30, 20, 20};
  EXPECT_EQ(average_ranks(x), (std::vector<double>{1.5, 4, 1.5, 6, 4, 4}));
}

TEST(Correlations, AffineIsPerfect) {
  std::vector<double> pred{1, 4, 2, 8, 5, 7, 3};
  std::vector<double> mos;
  for (double p : pred) {
    mos.push_back(2 * p + 1);
  }
  correlation_stats s = compute_correlations(pred, mos);
  EXPECT_EQ(s.srocc, 1.0);
  EXPECT_EQ(s.krocc, 1.0);
  EXPECT_GE(s.plcc, 0.999);
  EXPECT_NEAR(s.plcc_raw, 1.0, 1e-15);
}

TEST(Correlations, ReversedIsMinusOne) {
  std::vector<double> pred{1, 2, 3, 4, 5, 6};
  std::vector<double> mos{6, 5, 4, 3, 2, 1};
  correlation_stats s = compute_correlations(pred, mos);
  EXPECT_EQ(s.srocc, -1.0);
  EXPECT_EQ(s.krocc, -1.0);
}

TEST(Correlations, MatchDirectFormulas) {
  std::mt19937_64 rng(10);
  for (int t = 0; t < 10; ++t) {
    std::vector<double> x = random_vector(rng, 10);
    std::vector<double> y = random_vector(rng, 10);
    EXPECT_NEAR(pearson(x, y), textbook_pearson(x, y), 1e-12);
    EXPECT_NEAR(spearman(x, y), spearman_closed_form(x, y), 1e-12);
    EXPECT_NEAR(kendall_tau_b(x, y), tau_a(x, y), 1e-12);
    correlation_stats s = compute_correlations(x, y);
    EXPECT_NEAR(s.plcc_raw, textbook_pearson(x, y), 1e-12);
    EXPECT_NEAR(s.srocc, spearman_closed_form(x, y), 1e-12);
  }
}

TEST(Correlations, TauBWithTies) {
  std::vector<double> x{1, 1, 2, 3};
  std::vector<double> y{1, 2, 2, 3};
  // pairs: (0,1) tie x, (0,2) C, (0,3) C, (1,2) tie y, (1,3) C, (2,3) C; n0 = 6, n1 = n2 = 1
  EXPECT_NEAR(kendall_tau_b(x, y), 4.0 / 5.0, 1e-15);
}

TEST(Correlations, InvariantToMonotoneTransform) {
  std::mt19937_64 rng(11);
  std::vector<double> x = random_vector(rng, 12);
  std::vector<double> y = random_vector(rng, 12);
  std::vector<double> ex;
  for (double v : x) {
    ex.push_back(std::exp(v / 20));
  }
  EXPECT_NEAR(spearman(x, y), spearman(ex, y), 1e-15);
  EXPECT_NEAR(kendall_tau_b(x, y), kendall_tau_b(ex, y), 1e-15);
  std::vector<double> ax;
  for (double v : x) {
    ax.push_back(3 * v - 7);
  }
  EXPECT_NEAR(pearson(x, y), pearson(ax, y), 1e-12);
}

TEST(Correlations, Rejects) {
  std::vector<double> a{1, 2, 3};
  std::vector<double> b{1, 2};
  EXPECT_THROW(compute_correlations(a, b), input_error);
  EXPECT_THROW(compute_correlations(b, b), input_error);
  std::vector<double> flat{2, 2, 2};
  EXPECT_THROW(compute_correlations(a, flat), input_error);
}

TEST(Logistic, PlantedParametersRoundTrip) {
  std::mt19937_64 rng(12);
  const logistic_params beta{4.0, 0.15, 30.0, 3.0};
  std::vector<double> pred = random_vector(rng, 40);
  std::vector<double> mos;
  for (double p : pred) {
    mos.push_back(logistic4(beta, p));
  }
  logistic_fit fit = fit_logistic(pred, mos);
  EXPECT_LE(rmse(fit.mapped, mos), 1e-6);
  for (std::size_t i = 0; i < pred.size(); ++i) {
    EXPECT_NEAR(logistic4(fit.beta, pred[i]), fit.mapped[i], 1e-9);
  }
}

TEST(Logistic, ConstantPredictorMapsToMean) {
  std::vector<double> pred(6, 3.0);
  std::vector<double> mos{1, 2, 3, 4, 5, 3};
  logistic_fit fit = fit_logistic(pred, mos);
  for (double m : fit.mapped) {
    EXPECT_DOUBLE_EQ(m, 3.0);
  }
}

TEST(Logistic, NeverWorseThanAffineResidual) {
  std::mt19937_64 rng(13);
  std::vector<double> pred = random_vector(rng, 20);
  std::vector<double> mos;
  for (double p : pred) {
    mos.push_back(0.04 * p + 1.0);
  }
  logistic_fit fit = fit_logistic(pred, mos);
  EXPECT_LE(rmse(fit.mapped, mos), rmse(pred, mos));
  EXPECT_LT(fit.iterations, kLogisticMaxIterations + 1);
}

TEST(Logistic, RejectsNonFinite) {
  std::vector<double> pred{1, std::nan(""), 3};
  std::vector<double> mos{1, 2, 3};
  EXPECT_THROW(fit_logistic(pred, mos), input_error);
}

}  // namespace
}  // namespace rbfim
