#include "rbfim/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rbfim/types.hpp"

namespace rbfim {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) {
    throw input_error("correlation inputs differ in length");
  }
}

double mean_of(std::span<const double> x) { return std::accumulate(x.begin(), x.end(), 0.0) / double(x.size()); }

double std_of(std::span<const double> x) {
  double m = mean_of(x);
  double s = 0.0;
  for (double v : x) {
    s += (v - m) * (v - m);
  }
  return std::sqrt(s / double(x.size()));
}

// Plain Nelder-Mead with restarts from the best vertex once the simplex collapses.
template <std::size_t N, class Cost>
std::pair<std::array<double, N>, int> nelder_mead(Cost&& cost, std::array<double, N> start, double step,
                                                  int max_iterations) {
  using point = std::array<double, N>;
  int iterations = 0;
  point best = start;
  double best_cost = cost(best);

  while (iterations < max_iterations) {
    std::array<point, N + 1> simplex;
    std::array<double, N + 1> values;
    simplex[0] = best;
    values[0] = best_cost;
    for (std::size_t j = 0; j < N; ++j) {
      simplex[j + 1] = best;
      simplex[j + 1][j] += step * std::max(1.0, std::abs(best[j]));
      values[j + 1] = cost(simplex[j + 1]);
    }
    const double restart_cost = best_cost;

    while (iterations < max_iterations) {
      ++iterations;
      std::array<std::size_t, N + 1> order;
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
      const std::size_t lo = order[0];
      const std::size_t hi = order[N];
      const std::size_t second = order[N - 1];

      double spread = std::abs(values[hi] - values[lo]);
      double size = 0.0;
      for (std::size_t v = 0; v <= N; ++v) {
        for (std::size_t j = 0; j < N; ++j) {
          size = std::max(size, std::abs(simplex[v][j] - simplex[lo][j]));
        }
      }
      if (spread <= 1e-30 + 1e-15 * std::abs(values[lo]) && size < 1e-12) {
        break;
      }

      point centroid{};
      for (std::size_t v = 0; v <= N; ++v) {
        if (v == hi) {
          continue;
        }
        for (std::size_t j = 0; j < N; ++j) {
          centroid[j] += simplex[v][j] / double(N);
        }
      }
      auto along = [&](double t) {
        point p;
        for (std::size_t j = 0; j < N; ++j) {
          p[j] = centroid[j] + t * (simplex[hi][j] - centroid[j]);
        }
        return p;
      };

      point reflected = along(-1.0);
      double fr = cost(reflected);
      if (fr < values[lo]) {
        point expanded = along(-2.0);
        double fe = cost(expanded);
        if (fe < fr) {
          simplex[hi] = expanded;
          values[hi] = fe;
        } else {
          simplex[hi] = reflected;
          values[hi] = fr;
        }
      } else if (fr < values[second]) {
        simplex[hi] = reflected;
        values[hi] = fr;
      } else {
        point contracted = fr < values[hi] ? along(-0.5) : along(0.5);
        double fc = cost(contracted);
        if (fc < std::min(fr, values[hi])) {
          simplex[hi] = contracted;
          values[hi] = fc;
        } else {
          for (std::size_t v = 0; v <= N; ++v) {
            if (v == lo) {
              continue;
            }
            for (std::size_t j = 0; j < N; ++j) {
              simplex[v][j] = simplex[lo][j] + 0.5 * (simplex[v][j] - simplex[lo][j]);
            }
            values[v] = cost(simplex[v]);
          }
        }
      }
    }

    std::size_t arg = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    if (values[arg] < best_cost) {
      best = simplex[arg];
      best_cost = values[arg];
    }
    if (!(best_cost < restart_cost)) {
      break;  // a restart made no progress
    }
    step *= 0.5;
  }
  return {best, iterations};
}

}  // namespace

std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && x[order[j]] == x[order[i]]) {
      ++j;
    }
    double rank = 0.5 * double(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) {
      ranks[order[k]] = rank;
    }
    i = j;
  }
  return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  if (x.empty()) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  double mx = mean_of(x);
  double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = x[i] - mx;
    double dy = y[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return sxy / std::sqrt(sxx * syy);
}

double spearman(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  std::vector<double> rx = average_ranks(x);
  std::vector<double> ry = average_ranks(y);
  return pearson(rx, ry);
}

double kendall_tau_b(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  const std::size_t n = x.size();
  long long concordant = 0;
  long long discordant = 0;
  long long ties_x = 0;
  long long ties_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool tx = x[i] == x[j];
      bool ty = y[i] == y[j];
      ties_x += tx;
      ties_y += ty;
      if (tx || ty) {
        continue;
      }
      if ((x[i] < x[j]) == (y[i] < y[j])) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  double pairs = 0.5 * double(n) * double(n - 1);
  double denom = std::sqrt((pairs - double(ties_x)) * (pairs - double(ties_y)));
  if (denom == 0.0) {
    return std::numeric_limits<double>::quiet_NaN();
  }
  return double(concordant - discordant) / denom;
}

double rmse(std::span<const double> x, std::span<const double> y) {
  require_same_length(x, y);
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += (x[i] - y[i]) * (x[i] - y[i]);
  }
  return std::sqrt(s / double(x.size()));
}

double logistic4(const logistic_params& b, double x) { return b[0] * (0.5 - 1.0 / (1.0 + std::exp(b[1] * (x - b[2])))) + b[3]; }

logistic_fit fit_logistic(std::span<const double> pred, std::span<const double> mos, int max_iterations) {
  require_same_length(pred, mos);
  if (pred.empty()) {
    throw input_error("fit_logistic: no samples");
  }
  auto finite = [](double v) { return std::isfinite(v); };
  if (!std::all_of(pred.begin(), pred.end(), finite) || !std::all_of(mos.begin(), mos.end(), finite)) {
    throw input_error("fit_logistic: non-finite input");
  }

  const double mx = mean_of(pred);
  const double sx = std_of(pred);
  const double mm = mean_of(mos);
  const double sm = std_of(mos);
  logistic_fit fit;
  if (sx == 0.0 || sm == 0.0) {
    fit.beta = {0.0, 0.0, mx, mm};
    fit.mapped.assign(pred.size(), mm);
    return fit;
  }

  // Fit in standardized units so the starting point is (range / sd, 1, 0, 0).
  std::vector<double> z(pred.size());
  std::vector<double> m(mos.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    z[i] = (pred[i] - mx) / sx;
    m[i] = (mos[i] - mm) / sm;
  }
  auto [lo, hi] = std::minmax_element(mos.begin(), mos.end());
  auto cost = [&](const logistic_params& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      double r = logistic4(b, z[i]) - m[i];
      s += r * r;
    }
    return std::isfinite(s) ? s : std::numeric_limits<double>::max();
  };
  auto [best, iterations] = nelder_mead<4>(cost, logistic_params{(*hi - *lo) / sm, 1.0, 0.0, 0.0}, 0.5, max_iterations);

  fit.beta = {sm * best[0], best[1] / sx, mx + sx * best[2], mm + sm * best[3]};
  fit.iterations = iterations;
  fit.mapped.resize(pred.size());
  for (std::size_t i = 0; i < pred.size(); ++i) {
    fit.mapped[i] = mm + sm * logistic4(best, z[i]);
  }
  return fit;
}

correlation_stats compute_correlations(std::span<const double> pred, std::span<const double> mos) {
  require_same_length(pred, mos);
  if (pred.size() < 3) {
    throw input_error("correlations need at least 3 samples");
  }
  if (std::all_of(mos.begin(), mos.end(), [&](double v) { return v == mos.front(); })) {
    throw input_error("correlations are undefined for constant MOS");
  }
  correlation_stats s;
  s.n = pred.size();
  s.srocc = spearman(pred, mos);
  s.krocc = kendall_tau_b(pred, mos);
  s.plcc_raw = pearson(pred, mos);
  logistic_fit fit = fit_logistic(pred, mos);
  s.beta = fit.beta;
  s.plcc = pearson(fit.mapped, mos);
  s.rmse = rmse(fit.mapped, mos);
  return s;
}

}  // namespace rbfim
