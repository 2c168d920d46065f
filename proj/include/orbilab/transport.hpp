#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "orbilab/linalg.hpp"
#include "orbilab/rng.hpp"

namespace orbilab {

// Discrete probability measure: weights over an implicit point registry.
struct DiscreteMeasure {
  std::vector<double> weights;

  void validate() const;  // non-negative, sums to one
};

struct TransportPlan {
  Eigen::MatrixXd coupling;  // pi_jk >= 0, row sums mu, column sums nu
  double cost = 0.0;
};

enum class OTMethod { Exact, Entropic };

struct W2Result {
  double distance = 0.0;  // sqrt(optimal squared-distance cost)
  TransportPlan plan;
  double gap = 0.0;  // primal minus dual bound (entropic only)
  bool converged = true;
};

// 2-Wasserstein distance between discrete measures for a squared-distance
// cost matrix. Exact mode solves the transportation linear program to
// optimality (<= 500 atoms per side); entropic mode runs log-domain
// Sinkhorn, rounds the plan to exact marginals, and reports the duality gap
// from a c-transform lower bound.
W2Result wasserstein2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const Eigen::MatrixXd& sq_cost, OTMethod method,
                      double reg = 0.0);

struct LipschitzReport {
  double lhs = 0.0;  // ||U xi U* - V xi V*||_HS
  double rhs = 0.0;  // 2 ||xi||_op ||U - V||_HS
  bool holds = false;
};

LipschitzReport conjugation_lipschitz_check(const HermitianMatrix& xi,
                                            const UnitaryMatrix& u,
                                            const UnitaryMatrix& v);

// Relative entropy of the restricted-normalized measure against the ambient
// one: -log(mass).
double relative_entropy_restricted(double gamma_mass);

struct MetricComparison {
  double d_hs = 0.0;          // Hilbert-Schmidt distance of the tuples
  double d_geod_upper = 0.0;  // sum of squared principal rotation angles
  bool ordered = false;       // d_hs <= d_geod_upper
  bool branch_ambiguous = false;  // some rotation angle at the pi cut
};

MetricComparison metric_comparison(const std::vector<CMatrix>& u,
                                   const std::vector<CMatrix>& v);

struct TalagrandReport {
  double gamma_mass_est = 0.0;
  double entropy = 0.0;    // S = -log mass
  double w2_est = 0.0;     // empirical W2 with HS cost (lower bound route)
  double bound = 0.0;      // sqrt(4 S / N)
  double allowance = 0.0;  // finite-sample bias from half-vs-half Haar
  bool holds_within_ci = false;
};

// Finite-N transportation-cost check on SU(N): estimates the mass of the
// restriction, compares the empirical W2 between the restricted-normalized
// cloud and a Haar cloud against sqrt(4 S / N) plus the self-distance
// allowance of the Haar cloud. Requires estimated mass >= 0.05 and at least
// 200 samples per side.
TalagrandReport talagrand_check(int n, const std::function<bool(const CMatrix&)>& restriction,
                                long samples, RngStream& rng);

}  // namespace orbilab
