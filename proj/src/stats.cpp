#include "orbilab/stats.hpp"

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>
#include <stdexcept>

namespace orbilab {

std::pair<double, double> wilson_interval(long hits, long n) {
  if (n <= 0) throw std::invalid_argument("wilson_interval: n must be positive");
  const double z = 1.959963984540054;  // 97.5% normal quantile
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

double zero_hit_upper_bound(long n) {
  if (n <= 0) throw std::invalid_argument("zero_hit_upper_bound: n must be positive");
  return 1.0 - std::pow(0.05, 1.0 / n);
}

double chi_square_pvalue(double statistic, int dof) {
  if (dof <= 0) throw std::invalid_argument("chi_square_pvalue: dof must be positive");
  boost::math::chi_squared dist(dof);
  return boost::math::cdf(boost::math::complement(dist, std::max(0.0, statistic)));
}

double ks_two_sample_pvalue(std::vector<double> xs, std::vector<double> ys) {
  if (xs.empty() || ys.empty()) {
    throw std::invalid_argument("ks_two_sample_pvalue: empty sample");
  }
  std::sort(xs.begin(), xs.end());
  std::sort(ys.begin(), ys.end());
  const double nx = static_cast<double>(xs.size());
  const double ny = static_cast<double>(ys.size());
  double d = 0.0;
  std::size_t i = 0, j = 0;
  while (i < xs.size() && j < ys.size()) {
    if (xs[i] <= ys[j]) {
      ++i;
    } else {
      ++j;
    }
    d = std::max(d, std::abs(i / nx - j / ny));
  }
  const double en = std::sqrt(nx * ny / (nx + ny));
  // Kolmogorov asymptotic distribution with the Stephens finite-size correction.
  const double lambda = (en + 0.12 + 0.11 / en) * d;
  double p = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = 2.0 * std::pow(-1.0, k - 1) * std::exp(-2.0 * k * k * lambda * lambda);
    p += term;
    if (std::abs(term) < 1e-12) break;
  }
  return std::clamp(p, 0.0, 1.0);
}

double chi_square_gof_pvalue(const std::vector<long>& counts,
                             const std::vector<double>& probabilities, long total,
                             double min_expected) {
  if (counts.size() != probabilities.size() || counts.empty()) {
    throw std::invalid_argument("chi_square_gof_pvalue: size mismatch");
  }
  // Pool small-expectation cells into one overflow cell.
  std::vector<double> exp_counts;
  std::vector<double> obs_counts;
  double pooled_exp = 0.0, pooled_obs = 0.0;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    const double e = probabilities[i] * total;
    if (e < min_expected) {
      pooled_exp += e;
      pooled_obs += counts[i];
    } else {
      exp_counts.push_back(e);
      obs_counts.push_back(static_cast<double>(counts[i]));
    }
  }
  if (pooled_exp > 0.0) {
    exp_counts.push_back(pooled_exp);
    obs_counts.push_back(pooled_obs);
  }
  if (exp_counts.size() < 2) {
    throw std::invalid_argument("chi_square_gof_pvalue: too few usable cells");
  }
  double stat = 0.0;
  for (std::size_t i = 0; i < exp_counts.size(); ++i) {
    const double diff = obs_counts[i] - exp_counts[i];
    stat += diff * diff / exp_counts[i];
  }
  return chi_square_pvalue(stat, static_cast<int>(exp_counts.size()) - 1);
}

double regression_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("regression_slope: need at least two points");
  }
  const double mx = mean(x);
  const double my = mean(y);
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("regression_slope: degenerate x");
  return sxy / sxx;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("mean: empty");
  double s = 0.0;
  for (double x : v) s += x;
  return s / v.size();
}

double sample_std(const std::vector<double>& v) {
  if (v.size() < 2) throw std::invalid_argument("sample_std: need two points");
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (v.size() - 1));
}

}  // namespace orbilab
