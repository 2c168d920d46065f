#include "orbilab/sampling.hpp"

#include <Eigen/QR>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "orbilab/stats.hpp"

namespace orbilab {

namespace {

CMatrix ginibre(int n, RngStream& rng) {
  CMatrix g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      g(i, j) = rng.complex_normal();
    }
  }
  return g;
}

}  // namespace

UnitaryMatrix haar_unitary(int n, HaarGroup group, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("haar_unitary: dimension must be >= 1");
  if (group == HaarGroup::Torus) {
    CMatrix d = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      const double theta = 2.0 * std::numbers::pi * rng.uniform();
      d(i, i) = std::exp(Complex(0.0, theta));
    }
    return UnitaryMatrix(std::move(d));
  }
  Eigen::HouseholderQR<CMatrix> qr(ginibre(n, rng));
  CMatrix q = qr.householderQ();
  const CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Fix the phase ambiguity of QR: multiply each column by the phase of the
  // corresponding R diagonal so the draw is exactly Haar.
  for (int i = 0; i < n; ++i) {
    const Complex rii = r(i, i);
    const double a = std::abs(rii);
    q.col(i) *= (a > 0.0) ? rii / a : Complex(1.0, 0.0);
  }
  if (group == HaarGroup::SpecialUnitary) {
    const Complex det = q.determinant();
    const double phase = std::arg(det);
    q *= std::exp(Complex(0.0, -phase / n));
  }
  return UnitaryMatrix(std::move(q));
}

HermitianMatrix gue(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("gue: dimension must be >= 1");
  CMatrix h(n, n);
  const double off_scale = 1.0 / std::sqrt(2.0 * n);
  const double diag_scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int i = 0; i < n; ++i) {
    h(i, i) = rng.normal() * diag_scale;
    for (int j = i + 1; j < n; ++j) {
      const Complex z(rng.normal(), rng.normal());
      h(i, j) = z * off_scale;
      h(j, i) = std::conj(h(i, j));
    }
  }
  return HermitianMatrix(std::move(h));
}

std::vector<int> uniform_permutation(int n, RngStream& rng) {
  if (n < 1) throw std::invalid_argument("uniform_permutation: size must be >= 1");
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng.uniform_below(static_cast<std::uint64_t>(i) + 1));
    std::swap(perm[i], perm[j]);
  }
  return perm;
}

namespace {

// Inverse participation ratio of the leading column, invariant under the
// torus phase ambiguity of the eigenbasis.
double column_ipr(const CMatrix& u) {
  double s = 0.0;
  for (int i = 0; i < u.rows(); ++i) s += std::pow(std::abs(u(i, 0)), 4);
  return s;
}

// Chi-square GOF for 2x2 GUE eigenvalue pairs. Under the Vandermonde-weighted
// Gaussian density C (x1-x2)^2 exp(-(x1^2+x2^2)), the rotated coordinates
// s = (x1+x2)/sqrt2 and d = (x1-x2)/sqrt2 are independent with s ~ N(0, 1/2)
// and d^2 ~ Gamma(3/2, 1), which gives exact cell probabilities.
double vandermonde_gof(long samples, RngStream& rng) {
  const std::vector<double> s_edges = {-1.2, -0.8, -0.4, 0.0, 0.4, 0.8, 1.2};
  const std::vector<double> d_edges = {0.4, 0.7, 1.0, 1.3, 1.7};
  const std::size_t ns = s_edges.size() + 1;
  const std::size_t nd = d_edges.size() + 1;

  boost::math::normal s_dist(0.0, std::sqrt(0.5));
  auto s_cdf = [&](double x) { return boost::math::cdf(s_dist, x); };
  auto d_cdf = [&](double x) { return boost::math::gamma_p(1.5, x * x); };

  std::vector<double> probs(ns * nd, 0.0);
  for (std::size_t a = 0; a < ns; ++a) {
    const double slo = (a == 0) ? -1e30 : s_edges[a - 1];
    const double shi = (a == ns - 1) ? 1e30 : s_edges[a];
    const double ps = s_cdf(shi) - s_cdf(slo);
    for (std::size_t b = 0; b < nd; ++b) {
      const double dlo = (b == 0) ? 0.0 : d_edges[b - 1];
      const double dhi = (b == nd - 1) ? 1e30 : d_edges[b];
      probs[a * nd + b] = ps * (d_cdf(dhi) - d_cdf(dlo));
    }
  }

  std::vector<long> counts(ns * nd, 0);
  for (long k = 0; k < samples; ++k) {
    const HermitianMatrix a = gue(2, rng);
    const EighResult f = eigh(a);
    const double x1 = f.spectrum.values()(0);
    const double x2 = f.spectrum.values()(1);
    const double s = (x1 + x2) / std::sqrt(2.0);
    const double d = (x1 - x2) / std::sqrt(2.0);
    std::size_t ia = 0;
    while (ia < s_edges.size() && s >= s_edges[ia]) ++ia;
    std::size_t ib = 0;
    while (ib < d_edges.size() && d >= d_edges[ib]) ++ib;
    ++counts[ia * nd + ib];
  }
  return chi_square_gof_pvalue(counts, probs, samples);
}

}  // namespace

FactorizationReport check_factorization(int n, long samples, RngStream& rng) {
  if (samples < 1000) {
    throw std::invalid_argument("check_factorization: insufficient samples (" +
                                std::to_string(samples) + " < 1000)");
  }
  if (n < 1) throw std::invalid_argument("check_factorization: dimension must be >= 1");

  FactorizationReport report;
  report.sample_count = samples;

  // (a) eigenvalue part; analytic density available at size 2.
  report.vandermonde_gof_pvalue = vandermonde_gof(samples, rng);

  // (b) eigenvector part at the requested dimension: the eigenbasis of a GUE
  // draw must be indistinguishable from a fresh Haar draw.
  std::vector<double> from_gue, from_haar;
  from_gue.reserve(samples);
  from_haar.reserve(samples);
  for (long k = 0; k < samples; ++k) {
    const EighResult f = eigh(gue(n, rng));
    from_gue.push_back(column_ipr(f.basis.mat()));
    from_haar.push_back(column_ipr(haar_unitary(n, HaarGroup::Unitary, rng).mat()));
  }
  report.eigenvector_invariance_pvalue = ks_two_sample_pvalue(from_gue, from_haar);
  return report;
}

}  // namespace orbilab
