#include "orbilab/liberation.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "orbilab/sampling.hpp"
#include "orbilab/stats.hpp"
#include "orbilab/tolerances.hpp"

namespace orbilab {

namespace {

void validate_grid(const std::vector<double>& t_grid) {
  if (t_grid.empty() || t_grid.front() != 0.0) {
    throw std::invalid_argument("simulate_fubm: time grid must start at 0");
  }
  for (std::size_t k = 0; k + 1 < t_grid.size(); ++k) {
    if (!(t_grid[k] < t_grid[k + 1])) {
      throw std::invalid_argument("simulate_fubm: time grid must increase");
    }
  }
}

CMatrix retract(const CMatrix& m, Retraction retraction, const CMatrix& u_prev,
                const CMatrix& dh) {
  if (retraction == Retraction::Polar) return polar_unitary(m);
  // exponential retraction: U exp(i dH), exactly unitary; the Ito drift
  // emerges from the second-order term of the exponential
  return u_prev * unitary_exp(HermitianMatrix(dh)).mat();
}

// advances u in place from t_from to t_to
void integrate(CMatrix& u, double t_from, double t_to, int steps_per_unit,
               Retraction retraction, RngStream& stream) {
  const int n = static_cast<int>(u.rows());
  const double gap = t_to - t_from;
  const int steps = std::max(1, static_cast<int>(std::ceil(gap * steps_per_unit)));
  const double dt = gap / steps;
  const double sqrt_dt = std::sqrt(dt);
  const CMatrix eye = CMatrix::Identity(n, n);
  for (int s = 0; s < steps; ++s) {
    const CMatrix dh = sqrt_dt * gue(n, stream).mat();
    const CMatrix m = u * (eye + Complex(0.0, 1.0) * dh - 0.5 * dt * eye);
    // coarse pre-retraction guard: the Euler defect is O(dt) by
    // construction, so anything near unity signals a broken step size
    CMatrix defect = m.adjoint() * m;
    defect.diagonal().array() -= 1.0;
    if (defect.norm() / std::sqrt(static_cast<double>(n)) > 0.5) {
      throw std::runtime_error("simulate_fubm: step defect too large, reduce step size");
    }
    u = retract(m, retraction, u, dh);
    defect = u.adjoint() * u;
    defect.diagonal().array() -= 1.0;
    // Frobenius bounds the operator norm from above, cheap enough per step
    if (defect.norm() > 1e-6) {
      throw std::runtime_error("simulate_fubm: retraction failed to restore unitarity");
    }
  }
}

}  // namespace

FubmPath simulate_fubm(int n, const std::vector<double>& t_grid, int steps_per_unit,
                       int n_copies, const RngStream& rng, Retraction retraction,
                       int workers) {
  if (n < 1) throw std::invalid_argument("simulate_fubm: dimension must be >= 1");
  if (n_copies < 1) throw std::invalid_argument("simulate_fubm: need at least one copy");
  if (steps_per_unit < 100) {
    throw std::invalid_argument("simulate_fubm: need at least 100 steps per unit time");
  }
  validate_grid(t_grid);

  FubmPath path;
  path.n = n;
  path.times = t_grid;
  path.step_size = 1.0 / steps_per_unit;
  path.unitaries.assign(n_copies, {});

  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int c = next.fetch_add(1);
      if (c >= n_copies) return;
      RngStream stream(rng.master_seed(), rng.stream_index() + 1 + c);
      std::vector<CMatrix> snapshots;
      snapshots.reserve(t_grid.size());
      CMatrix u = CMatrix::Identity(n, n);
      snapshots.push_back(u);
      for (std::size_t k = 1; k < t_grid.size(); ++k) {
        integrate(u, t_grid[k - 1], t_grid[k], steps_per_unit, retraction, stream);
        snapshots.push_back(u);
      }
      path.unitaries[c] = std::move(snapshots);
    }
  };
  const int n_workers = std::max(1, workers);
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  return path;
}

FubmStats fubm_stats(const FubmPath& path, bool with_spectra) {
  if (path.unitaries.empty() || path.times.empty()) {
    throw std::invalid_argument("fubm_stats: empty path");
  }
  const int copies = static_cast<int>(path.unitaries.size());
  const int nt = static_cast<int>(path.times.size());
  const double nn = static_cast<double>(path.n);
  constexpr int kBins = 64;

  FubmStats stats;
  stats.times = path.times;
  stats.mean_trace.assign(nt, Complex(0.0, 0.0));
  stats.mean_trace_se.assign(nt, 0.0);
  stats.mean_opnorm_dist.assign(nt, 0.0);
  stats.mean_hs_dist.assign(nt, 0.0);
  stats.arg_hist.assign(nt, std::vector<long>(kBins, 0));

  for (int k = 0; k < nt; ++k) {
    std::vector<double> traces_re;
    traces_re.reserve(copies);
    for (int c = 0; c < copies; ++c) {
      const CMatrix& u = path.unitaries[c][k];
      const Complex tr = u.trace() / nn;
      stats.mean_trace[k] += tr;
      traces_re.push_back(tr.real());

      if (with_spectra) {
        Eigen::ComplexEigenSolver<CMatrix> solver(u);
        double worst = 0.0;
        for (Eigen::Index e = 0; e < u.rows(); ++e) {
          const Complex lambda = solver.eigenvalues()(e);
          worst = std::max(worst, std::abs(lambda - Complex(1.0, 0.0)));
          const double theta = std::arg(lambda);
          int bin =
              static_cast<int>((theta + std::numbers::pi) / (2 * std::numbers::pi) * kBins);
          bin = std::clamp(bin, 0, kBins - 1);
          stats.arg_hist[k][bin] += 1;
        }
        stats.mean_opnorm_dist[k] += worst;
        stats.mean_hs_dist[k] +=
            (u - CMatrix::Identity(path.n, path.n)).norm() / std::sqrt(nn);
      }
    }
    stats.mean_trace[k] /= static_cast<double>(copies);
    stats.mean_opnorm_dist[k] /= copies;
    stats.mean_hs_dist[k] /= copies;
    stats.mean_trace_se[k] =
        (copies > 1) ? sample_std(traces_re) / std::sqrt(static_cast<double>(copies)) : 0.0;
  }
  return stats;
}

LiberationTrajectory liberation_trajectory(const std::vector<std::vector<CMatrix>>& xi,
                                           const std::vector<double>& t_grid,
                                           int steps_per_unit, const RngStream& rng,
                                           Retraction retraction) {
  if (xi.empty()) throw std::invalid_argument("liberation_trajectory: empty reference");
  const int families = static_cast<int>(xi.size());
  const int n = static_cast<int>(xi[0][0].rows());
  // one independent path per family, one copy each
  std::vector<FubmPath> paths;
  for (int i = 0; i < families; ++i) {
    paths.push_back(simulate_fubm(n, t_grid, steps_per_unit, 1,
                                  rng.substream(rng.stream_index() + 101 + i), retraction));
  }
  LiberationTrajectory traj;
  traj.times = t_grid;
  traj.rotors.assign(t_grid.size(), std::vector<CMatrix>(families));
  traj.rotated.assign(t_grid.size(), {});
  for (std::size_t k = 0; k < t_grid.size(); ++k) {
    traj.rotated[k].resize(families);
    for (int i = 0; i < families; ++i) {
      const CMatrix& v = paths[i].unitaries[0][k];
      traj.rotors[k][i] = v;
      for (const CMatrix& x : xi[i]) {
        traj.rotated[k][i].push_back(v * x * v.adjoint());
      }
    }
  }
  return traj;
}

DimensionCurve delta0orb_curve(const TracialSpec& x_joint,
                               const std::vector<std::vector<CMatrix>>& xi,
                               const MicrostateParams& params,
                               const std::vector<double>& eps_grid, long n_samples,
                               const RngStream& rng, CurveGenerator generator,
                               int workers, int steps_per_unit) {
  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    if (!(eps_grid[k] > 0.0) || eps_grid[k] > 1.0) {
      throw std::invalid_argument("delta0orb_curve: eps grid must lie in (0, 1]");
    }
    if (k > 0 && !(eps_grid[k] < eps_grid[k - 1])) {
      throw std::invalid_argument("delta0orb_curve: eps grid must strictly decrease");
    }
  }
  const int families = x_joint.family_count();
  if (static_cast<int>(xi.size()) != families) {
    throw std::invalid_argument("delta0orb_curve: reference/family mismatch");
  }
  const int n = params.n;

  DimensionCurve curve;
  curve.epsilons = eps_grid;

  for (std::size_t k = 0; k < eps_grid.size(); ++k) {
    const double eps = eps_grid[k];

    // conjugators at time eps, one per family, independent seeds per point
    std::vector<CMatrix> rotors(families);
    std::vector<TracialSpec> v_marginals;
    RngStream point_rng(rng.master_seed(),
                        rng.stream_index() + 1000003ULL * (k + 1));
    for (int i = 0; i < families; ++i) {
      if (generator == CurveGenerator::Fubm) {
        const FubmPath path =
            simulate_fubm(n, {0.0, eps}, steps_per_unit, 1,
                          point_rng.substream(point_rng.stream_index() + i), Retraction::Polar);
        rotors[i] = path.unitaries[0].back();
        v_marginals.push_back(TracialSpec::fubm_unitary(eps));
      } else {
        RngStream gue_rng(point_rng.master_seed(), point_rng.stream_index() + i);
        const HermitianMatrix g = gue(n, gue_rng);
        rotors[i] = unitary_exp(HermitianMatrix(std::sqrt(eps) * g.mat())).mat();
        v_marginals.push_back(TracialSpec::exp_semicircular_unitary(eps));
      }
    }

    // rotated references and the joint target in the presence of the rotors
    std::vector<std::vector<CMatrix>> rotated(families);
    for (int i = 0; i < families; ++i) {
      for (const CMatrix& x : xi[i]) {
        rotated[i].push_back(rotors[i] * x * rotors[i].adjoint());
      }
    }
    const TracialSpec target = TracialSpec::liberated(x_joint, v_marginals);

    const OrbitalEstimate est =
        estimate_orbital_measure(target, rotated, params, n_samples,
                                 point_rng.substream(point_rng.stream_index() + 7777),
                                 &rotors, workers);

    const double scale = std::abs(std::log(std::sqrt(eps)));
    curve.hit_fractions.push_back(est.hit_fraction);
    curve.zero_hit.push_back(est.zero_hits);
    curve.values.push_back(est.zero_hits
                               ? -std::numeric_limits<double>::infinity()
                               : est.log_measure_per_n2 / scale);
    curve.upper_values.push_back(est.log_upper_per_n2 / scale);
  }
  return curve;
}

}  // namespace orbilab
