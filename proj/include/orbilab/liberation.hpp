#pragma once

#include <vector>

#include "orbilab/linalg.hpp"
#include "orbilab/microstates.hpp"
#include "orbilab/ncalg.hpp"
#include "orbilab/rng.hpp"

namespace orbilab {

enum class Retraction { Polar, Exponential };

// Finite-N paths of multiplicative unitary Brownian motion. unitaries[c][k]
// is copy c at times[k]; times[0] must be 0 where every copy is the identity.
struct FubmPath {
  int n = 0;
  std::vector<double> times;
  double step_size = 0.0;
  std::vector<std::vector<CMatrix>> unitaries;
};

// Euler-Maruyama integration of dU = i U dH - (1/2) U dt with Hermitian
// increments normalized so tr_N(dH^2) has mean dt, followed by a unitary
// retraction each step. Copies are driven by independent streams
// (rng.stream_index() + 1 + copy) and may run on parallel workers.
// Requires steps_per_unit >= 100 and an increasing grid starting at 0.
FubmPath simulate_fubm(int n, const std::vector<double>& t_grid, int steps_per_unit,
                       int n_copies, const RngStream& rng,
                       Retraction retraction = Retraction::Polar, int workers = 1);

struct FubmStats {
  std::vector<double> times;
  std::vector<Complex> mean_trace;          // mean tr_N U(t) over copies
  std::vector<double> mean_trace_se;        // standard error of the real part
  std::vector<double> mean_opnorm_dist;     // mean ||U(t) - 1||_op
  std::vector<double> mean_hs_dist;         // mean ||U(t) - 1||_{2,tr_N}
  std::vector<std::vector<long>> arg_hist;  // eigenvalue angles, 64 bins over [-pi, pi)
};

// with_spectra = false skips the per-copy eigendecompositions (distance and
// histogram fields stay empty), which matters for large copy counts.
FubmStats fubm_stats(const FubmPath& path, bool with_spectra = true);

// Per-family independent Brownian rotations applied to a reference tuple:
// rotated[k][i][j] = v_i(t_k) xi[i][j] v_i(t_k)^*.
struct LiberationTrajectory {
  std::vector<double> times;
  std::vector<std::vector<CMatrix>> rotors;            // [time][family]
  std::vector<std::vector<std::vector<CMatrix>>> rotated;  // [time][family][variable]
};

LiberationTrajectory liberation_trajectory(const std::vector<std::vector<CMatrix>>& xi,
                                           const std::vector<double>& t_grid,
                                           int steps_per_unit, const RngStream& rng,
                                           Retraction retraction = Retraction::Polar);

enum class CurveGenerator { Fubm, ExpSqrtT };

struct DimensionCurve {
  std::vector<double> epsilons;      // strictly decreasing, in (0, 1]
  std::vector<double> values;        // chi_orb estimate / |log eps^(1/2)|; -inf when flagged
  std::vector<bool> zero_hit;        // flagged points
  std::vector<double> upper_values;  // from the one-sided upper bound on the measure
  std::vector<double> hit_fractions;
};

// Finite-scale dimension curve: for each eps, rotate the references by
// simulated conjugators at time eps (Brownian paths, or exp(i sqrt(eps) G)
// with a GUE draw), estimate the orbital measure of the rotated target in
// the presence of the conjugators, and divide the per-N^2 log by
// |log eps^(1/2)|. Zero-hit points are flagged and keep the curve.
DimensionCurve delta0orb_curve(const TracialSpec& x_joint,
                               const std::vector<std::vector<CMatrix>>& xi,
                               const MicrostateParams& params,
                               const std::vector<double>& eps_grid, long n_samples,
                               const RngStream& rng, CurveGenerator generator,
                               int workers = 1, int steps_per_unit = 1000);

}  // namespace orbilab
