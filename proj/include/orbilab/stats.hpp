#pragma once

#include <utility>
#include <vector>

namespace orbilab {

// 95% Wilson score interval for a binomial proportion.
std::pair<double, double> wilson_interval(long hits, long n);

// One-sided 95% upper confidence bound on p when zero hits were observed
// ("rule of three", exact form 1 - 0.05^{1/n}).
double zero_hit_upper_bound(long n);

// Survival function of the chi-square distribution.
double chi_square_pvalue(double statistic, int dof);

// Two-sample Kolmogorov-Smirnov test, asymptotic p-value.
double ks_two_sample_pvalue(std::vector<double> xs, std::vector<double> ys);

// Pearson chi-square goodness-of-fit against given cell probabilities,
// pooling tail cells with expected count below min_expected.
double chi_square_gof_pvalue(const std::vector<long>& counts,
                             const std::vector<double>& probabilities, long total,
                             double min_expected = 5.0);

// Least-squares slope of y against x.
double regression_slope(const std::vector<double>& x, const std::vector<double>& y);

double mean(const std::vector<double>& v);
double sample_std(const std::vector<double>& v);

}  // namespace orbilab
