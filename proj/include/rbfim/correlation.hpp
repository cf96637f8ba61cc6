#pragma once

#include <array>
#include <span>
#include <vector>

namespace rbfim {

// 1-based ranks, ties receive the average of the ranks they span.
std::vector<double> average_ranks(std::span<const double> x);

// NaN when either side has zero variance.
double pearson(std::span<const double> x, std::span<const double> y);
double spearman(std::span<const double> x, std::span<const double> y);
// Kendall tau-b.
double kendall_tau_b(std::span<const double> x, std::span<const double> y);
double rmse(std::span<const double> x, std::span<const double> y);

using logistic_params = std::array<double, 4>;

// q(x) = b1 (0.5 - 1 / (1 + exp(b2 (x - b3)))) + b4
double logistic4(const logistic_params& beta, double x);

struct logistic_fit {
  logistic_params beta{};
  std::vector<double> mapped;
  int iterations = 0;
};

inline constexpr int kLogisticMaxIterations = 2000;

// Least-squares fit of logistic4 by Nelder-Mead from b1 = range(mos), b2 = 1 / std(pred),
// b3 = mean(pred), b4 = mean(mos).
logistic_fit fit_logistic(std::span<const double> pred, std::span<const double> mos,
                          int max_iterations = kLogisticMaxIterations);

struct correlation_stats {
  double plcc = 0.0;      // after logistic mapping
  double plcc_raw = 0.0;  // before
  double srocc = 0.0;
  double krocc = 0.0;
  double rmse = 0.0;  // after logistic mapping
  logistic_params beta{};
  std::size_t n = 0;
};

correlation_stats compute_correlations(std::span<const double> pred, std::span<const double> mos);

}  // namespace rbfim
