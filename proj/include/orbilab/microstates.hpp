#pragma once

#include <optional>
#include <vector>

#include "orbilab/linalg.hpp"
#include "orbilab/ncalg.hpp"
#include "orbilab/rng.hpp"

namespace orbilab {

// Parameters of a microstate membership predicate: dimension N, maximal
// word degree m, tolerance delta, optional operator-norm cutoff R (absent
// means the cutoff-free variant).
struct MicrostateParams {
  int n = 1;
  int m = 1;
  double delta = 0.1;
  std::optional<double> cutoff;

  void validate() const;
};

// Membership of an ordered spectrum in the single-variable microstate set:
// the norm cutoff (when present) plus all moment windows up to degree m.
bool delta_set_contains(const DiagonalVector& d, const TracialSpec& target,
                        const MicrostateParams& p);

// Membership of a unitary tuple in the orbital microstate set: every mixed
// word of length <= m over the rotated references (and the presence
// unitaries, with adjoints, when given) matches the target moment within
// delta. Families 0..n-1 of `target` pair with `xi`; when `presence` is
// given, target must expose its tuple as families n..n+presence-1.
bool gamma_orb_contains(const std::vector<CMatrix>& u,
                        const std::vector<std::vector<CMatrix>>& xi,
                        const TracialSpec& target, const MicrostateParams& p,
                        const std::vector<CMatrix>* presence = nullptr);

struct OrbitalEstimate {
  long n_samples = 0;
  long hits = 0;
  double hit_fraction = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  bool zero_hits = false;
  // log(hit_fraction) / N^2; for zero hits the point estimate is -inf and
  // log_upper_per_n2 carries the one-sided 95% bound instead.
  double log_measure_per_n2 = 0.0;
  double log_upper_per_n2 = 0.0;
};

// Monte Carlo estimate of the Haar measure of the orbital microstate set:
// samples independent Haar tuples, applies gamma_orb_contains, reports the
// hit fraction with a 95% Wilson interval. Zero hits are reported with the
// -inf flag and the rule-of-three upper bound. Sample s draws from stream
// index rng.stream_index() + 1 + s, so results are independent of the
// worker count.
OrbitalEstimate estimate_orbital_measure(const TracialSpec& target,
                                         const std::vector<std::vector<CMatrix>>& xi,
                                         const MicrostateParams& p, long n_samples,
                                         const RngStream& rng,
                                         const std::vector<CMatrix>* presence = nullptr,
                                         int workers = 1);

// Deterministic reference microstates for a target at dimension n:
// quantile diagonals for catalog laws, block inflation for matrix models,
// per-factor references for free products.
std::vector<std::vector<CMatrix>> reference_microstates(const TracialSpec& target, int n);

struct AlignmentResult {
  CMatrix u;
  double residual = 0.0;
  bool converged = false;
};

// Best unitary conjugation aligning tuple a onto tuple b: minimizes
// sum_i ||U a_i U* - b_i||^2 in the normalized 2-norm via spectral
// initialization (matched sorted spectra of the tuple sums) refined by
// Cayley-parametrized ascent, with seeded random-weight restarts while the
// iteration budget lasts. The result is never worse than the spectral
// initialization; residual reports the p-norm objective.
AlignmentResult align_conjugation(const std::vector<CMatrix>& a,
                                  const std::vector<CMatrix>& b, double p_norm = 2.0,
                                  int budget = 500);

}  // namespace orbilab
