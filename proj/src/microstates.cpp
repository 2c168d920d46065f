#include "orbilab/microstates.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <thread>

#include "orbilab/sampling.hpp"
#include "orbilab/stats.hpp"

namespace orbilab {

void MicrostateParams::validate() const {
  if (n < 1) throw std::invalid_argument("MicrostateParams: N must be >= 1");
  if (m < 1) throw std::invalid_argument("MicrostateParams: m must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("MicrostateParams: delta must be > 0");
  if (cutoff && !(*cutoff > 0.0)) {
    throw std::invalid_argument("MicrostateParams: cutoff must be > 0 when present");
  }
}

bool delta_set_contains(const DiagonalVector& d, const TracialSpec& target,
                        const MicrostateParams& p) {
  p.validate();
  if (target.family_count() != 1 || target.variable_count(0) != 1 ||
      target.unitary_family(0)) {
    throw std::invalid_argument("delta_set_contains: single self-adjoint target required");
  }
  if (p.cutoff && d.sup_norm() > *p.cutoff) return false;
  for (int k = 1; k <= p.m; ++k) {
    const Complex tau = target.moment(Word::power(k));
    if (std::abs(d.power_trace(k) - tau) >= p.delta) return false;
  }
  return true;
}

namespace {

// Alphabet symbol: the letter it contributes to words plus, at evaluation
// time, the concrete matrix standing for it.
struct ChecklistSymbol {
  Letter letter;
};

struct Checklist {
  std::vector<ChecklistSymbol> symbols;
  int m = 1;
  std::vector<Complex> targets;  // DFS pre-order over all words of length 1..m
};

Checklist build_checklist(const TracialSpec& target, int n_rotated, int n_presence,
                          int m) {
  Checklist cl;
  cl.m = m;
  for (int i = 0; i < n_rotated; ++i) {
    for (int j = 0; j < target.variable_count(i); ++j) {
      cl.symbols.push_back({Letter{i, j, false}});
    }
  }
  for (int k = 0; k < n_presence; ++k) {
    cl.symbols.push_back({Letter{n_rotated + k, 0, false}});
    cl.symbols.push_back({Letter{n_rotated + k, 0, true}});
  }

  Word word;
  std::function<void(int)> dfs = [&](int depth) {
    for (const ChecklistSymbol& s : cl.symbols) {
      word.letters.push_back(s.letter);
      cl.targets.push_back(target.moment(word));
      if (depth + 1 < m) dfs(depth + 1);
      word.letters.pop_back();
    }
  };
  dfs(0);
  return cl;
}

// Evaluates the checklist against concrete symbol matrices; returns false at
// the first moment window violated (strict < delta, matching the set
// definitions).
bool run_checklist(const Checklist& cl, const std::vector<CMatrix>& mats, double delta) {
  const double nn = static_cast<double>(mats[0].rows());
  std::size_t idx = 0;
  const std::size_t n_sym = cl.symbols.size();

  std::function<bool(int, const CMatrix*)> dfs = [&](int depth,
                                                     const CMatrix* prefix) -> bool {
    for (std::size_t s = 0; s < n_sym; ++s) {
      Complex tr;
      CMatrix extended;
      const CMatrix* next = nullptr;
      if (depth == 0) {
        tr = mats[s].trace() / nn;
        next = &mats[s];
      } else if (depth + 1 < cl.m) {
        extended = (*prefix) * mats[s];
        tr = extended.trace() / nn;
        next = &extended;
      } else {
        tr = (prefix->array() * mats[s].transpose().array()).sum() / nn;
      }
      if (std::abs(tr - cl.targets[idx]) >= delta) return false;
      ++idx;
      if (depth + 1 < cl.m) {
        if (!dfs(depth + 1, next)) return false;
      }
    }
    return true;
  };
  return dfs(0, nullptr);
}

std::vector<CMatrix> symbol_matrices(const Checklist& cl,
                                     const std::vector<CMatrix>& u,
                                     const std::vector<std::vector<CMatrix>>& xi,
                                     const std::vector<CMatrix>* presence,
                                     int n_rotated) {
  std::vector<CMatrix> mats;
  mats.reserve(cl.symbols.size());
  std::vector<CMatrix> rotated_cache;  // per (family, variable), in symbol order
  for (const ChecklistSymbol& s : cl.symbols) {
    const Letter& l = s.letter;
    if (l.family < n_rotated) {
      mats.push_back(u[l.family] * xi[l.family][l.variable] * u[l.family].adjoint());
    } else {
      const CMatrix& v = (*presence)[l.family - n_rotated];
      mats.push_back(l.adjoint ? CMatrix(v.adjoint()) : v);
    }
  }
  return mats;
}

void check_gamma_inputs(const std::vector<CMatrix>& u,
                        const std::vector<std::vector<CMatrix>>& xi,
                        const TracialSpec& target, const MicrostateParams& p,
                        const std::vector<CMatrix>* presence) {
  p.validate();
  const int n_pres = presence ? static_cast<int>(presence->size()) : 0;
  const int n_rot = target.family_count() - n_pres;
  if (n_rot < 1 || static_cast<int>(u.size()) != n_rot ||
      static_cast<int>(xi.size()) != n_rot) {
    throw std::invalid_argument("gamma_orb: family count mismatch");
  }
  for (int i = 0; i < n_rot; ++i) {
    if (static_cast<int>(xi[i].size()) != target.variable_count(i)) {
      throw std::invalid_argument("gamma_orb: reference tuple shape mismatch at family " +
                                  std::to_string(i));
    }
    if (u[i].rows() != p.n || u[i].cols() != p.n) {
      throw std::invalid_argument("gamma_orb: unitary dimension mismatch at family " +
                                  std::to_string(i));
    }
    for (const CMatrix& x : xi[i]) {
      if (x.rows() != p.n || x.cols() != p.n) {
        throw std::invalid_argument("gamma_orb: reference dimension mismatch at family " +
                                    std::to_string(i));
      }
    }
  }
  for (int k = 0; k < n_pres; ++k) {
    if ((*presence)[k].rows() != p.n || (*presence)[k].cols() != p.n) {
      throw std::invalid_argument("gamma_orb: presence dimension mismatch");
    }
  }
}

}  // namespace

bool gamma_orb_contains(const std::vector<CMatrix>& u,
                        const std::vector<std::vector<CMatrix>>& xi,
                        const TracialSpec& target, const MicrostateParams& p,
                        const std::vector<CMatrix>* presence) {
  check_gamma_inputs(u, xi, target, p, presence);
  const int n_pres = presence ? static_cast<int>(presence->size()) : 0;
  const int n_rot = target.family_count() - n_pres;
  const Checklist cl = build_checklist(target, n_rot, n_pres, p.m);
  const std::vector<CMatrix> mats = symbol_matrices(cl, u, xi, presence, n_rot);
  return run_checklist(cl, mats, p.delta);
}

OrbitalEstimate estimate_orbital_measure(const TracialSpec& target,
                                         const std::vector<std::vector<CMatrix>>& xi,
                                         const MicrostateParams& p, long n_samples,
                                         const RngStream& rng,
                                         const std::vector<CMatrix>* presence,
                                         int workers) {
  if (n_samples < 100) {
    throw std::invalid_argument("estimate_orbital_measure: need at least 100 samples");
  }
  p.validate();
  const int n_pres = presence ? static_cast<int>(presence->size()) : 0;
  const int n_rot = target.family_count() - n_pres;
  {
    // Validate shapes once with identity rotations before spending samples.
    std::vector<CMatrix> eye(n_rot, CMatrix::Identity(p.n, p.n));
    check_gamma_inputs(eye, xi, target, p, presence);
  }
  const Checklist cl = build_checklist(target, n_rot, n_pres, p.m);

  std::vector<unsigned char> hit(n_samples, 0);
  const int n_workers = std::max(1, workers);
  std::vector<std::thread> pool;
  std::atomic<long> next_chunk{0};
  const long chunk = 16;

  auto work = [&]() {
    for (;;) {
      const long begin = next_chunk.fetch_add(chunk);
      if (begin >= n_samples) return;
      const long end = std::min(n_samples, begin + chunk);
      for (long s = begin; s < end; ++s) {
        RngStream stream(rng.master_seed(), rng.stream_index() + 1 + s);
        std::vector<CMatrix> u;
        u.reserve(n_rot);
        for (int i = 0; i < n_rot; ++i) {
          u.push_back(haar_unitary(p.n, HaarGroup::Unitary, stream).mat());
        }
        const std::vector<CMatrix> mats = symbol_matrices(cl, u, xi, presence, n_rot);
        hit[s] = run_checklist(cl, mats, p.delta) ? 1 : 0;
      }
    }
  };
  if (n_workers == 1) {
    work();
  } else {
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  OrbitalEstimate est;
  est.n_samples = n_samples;
  for (long s = 0; s < n_samples; ++s) est.hits += hit[s];
  est.hit_fraction = static_cast<double>(est.hits) / n_samples;
  std::tie(est.wilson_lo, est.wilson_hi) = wilson_interval(est.hits, n_samples);
  const double n2 = static_cast<double>(p.n) * p.n;
  if (est.hits == 0) {
    est.zero_hits = true;
    est.log_measure_per_n2 = -std::numeric_limits<double>::infinity();
    est.log_upper_per_n2 = std::log(zero_hit_upper_bound(n_samples)) / n2;
  } else {
    est.log_measure_per_n2 = std::log(est.hit_fraction) / n2;
    est.log_upper_per_n2 = std::log(est.wilson_hi) / n2;
  }
  return est;
}

namespace {

// CDF of the semicircle law of radius 2.
double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  return 0.5 + x * std::sqrt(4.0 - x * x) / (4.0 * std::numbers::pi) +
         std::asin(x / 2.0) / std::numbers::pi;
}

double semicircle_quantile(double q) {
  double lo = -2.0, hi = 2.0;
  for (int iter = 0; iter < 80; ++iter) {
    const double mid = 0.5 * (lo + hi);
    (semicircle_cdf(mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<int> largest_remainder_counts(const std::vector<double>& weights, int n) {
  std::vector<int> counts(weights.size());
  std::vector<std::pair<double, std::size_t>> rema;
  int assigned = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const double exact = weights[i] * n;
    counts[i] = static_cast<int>(std::floor(exact));
    assigned += counts[i];
    rema.push_back({exact - counts[i], i});
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (int k = 0; k < n - assigned; ++k) counts[rema[k % rema.size()].second] += 1;
  return counts;
}

CMatrix diagonal_from_values(const std::vector<double>& values,
                             const std::vector<int>& counts, int n) {
  std::vector<std::pair<double, int>> blocks;
  for (std::size_t i = 0; i < values.size(); ++i) blocks.push_back({values[i], counts[i]});
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.first > b.first; });
  CMatrix d = CMatrix::Zero(n, n);
  int pos = 0;
  for (const auto& [v, c] : blocks) {
    for (int k = 0; k < c; ++k) {
      d(pos, pos) = v;
      ++pos;
    }
  }
  return d;
}

CMatrix block_inflate(const CMatrix& m, int n) {
  const int d = static_cast<int>(m.rows());
  if (n % d != 0) {
    throw std::invalid_argument("reference_microstates: N=" + std::to_string(n) +
                                " not divisible by model size " + std::to_string(d));
  }
  const int r = n / d;
  CMatrix out = CMatrix::Zero(n, n);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < d; ++j) {
      for (int k = 0; k < r; ++k) out(i * r + k, j * r + k) = m(i, j);
    }
  }
  return out;
}

}  // namespace

std::vector<std::vector<CMatrix>> reference_microstates(const TracialSpec& target,
                                                        int n) {
  if (n < 1) throw std::invalid_argument("reference_microstates: N must be >= 1");
  const nlohmann::json j = target.to_json();
  const std::string kind = j.at("kind").get<std::string>();

  if (kind == "projection") {
    const double alpha = j.at("alpha").get<double>();
    const int ones = static_cast<int>(std::ceil(alpha * n));
    RVector v(n);
    for (int i = 0; i < n; ++i) v(i) = (i < ones) ? 1.0 : 0.0;
    return {{HermitianMatrix::diagonal(v).mat()}};
  }
  if (kind == "semicircular") {
    RVector v(n);
    for (int i = 0; i < n; ++i) {
      v(i) = semicircle_quantile((n - i - 0.5) / n);
    }
    return {{HermitianMatrix::diagonal(v).mat()}};
  }
  if (kind == "finite-atoms") {
    const auto values = j.at("values").get<std::vector<double>>();
    const auto weights = j.at("weights").get<std::vector<double>>();
    const std::vector<int> counts = largest_remainder_counts(weights, n);
    return {{diagonal_from_values(values, counts, n)}};
  }
  if (kind == "matrix-model") {
    std::vector<std::vector<CMatrix>> out;
    for (const auto& fam : j.at("families")) {
      std::vector<CMatrix> reference;
      for (const auto& mj : fam) {
        CMatrix m(static_cast<Eigen::Index>(mj.at("re").size()),
                  static_cast<Eigen::Index>(mj.at("re").size()));
        for (Eigen::Index a = 0; a < m.rows(); ++a) {
          for (Eigen::Index b = 0; b < m.cols(); ++b) {
            m(a, b) = Complex(mj.at("re").at(a).at(b).get<double>(),
                              mj.at("im").at(a).at(b).get<double>());
          }
        }
        reference.push_back(block_inflate(m, n));
      }
      out.push_back(std::move(reference));
    }
    return out;
  }
  if (kind == "free-product") {
    std::vector<std::vector<CMatrix>> out;
    for (const auto& factor : j.at("factors")) {
      auto sub = reference_microstates(TracialSpec::from_json(factor), n);
      for (auto& fam : sub) out.push_back(std::move(fam));
    }
    return out;
  }
  throw std::invalid_argument("reference_microstates: no deterministic reference for kind " +
                              kind);
}

namespace {

double alignment_objective(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b,
                           const CMatrix& u) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CMatrix diff = u * a[i] * u.adjoint() - b[i];
    const double norm2 = diff.squaredNorm() / a[i].rows();  // ||.||_{2,tr_N}^2
    s += norm2;
  }
  return s;
}

double alignment_residual(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b,
                          const CMatrix& u, double p) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CMatrix diff = u * a[i] * u.adjoint() - b[i];
    const double norm = matrix_norm(diff, NormKind::PTracial, p);
    s += norm * norm;
  }
  return std::sqrt(s);
}

CMatrix spectral_init(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b,
                      const std::vector<double>& weights) {
  CMatrix sa = CMatrix::Zero(a[0].rows(), a[0].cols());
  CMatrix sb = sa;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += weights[i] * a[i];
    sb += weights[i] * b[i];
  }
  const EighResult fa = eigh(HermitianMatrix((sa + sa.adjoint()) / 2.0));
  const EighResult fb = eigh(HermitianMatrix((sb + sb.adjoint()) / 2.0));
  return fb.basis.mat() * fa.basis.mat().adjoint();
}

// Cayley transform of a skew-Hermitian matrix; exactly unitary.
CMatrix cayley(const CMatrix& x) {
  const CMatrix eye = CMatrix::Identity(x.rows(), x.cols());
  return (eye - 0.5 * x).partialPivLu().solve(eye + 0.5 * x);
}

// Gradient ascent of sum_i Re Tr(U a_i U* b_i) on the unitary group.
// Returns iterations consumed; sets converged when the Riemannian gradient
// drops below tolerance.
int polish(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b, CMatrix& u,
           int budget, bool& converged) {
  const double nn = static_cast<double>(a[0].rows());
  double value = alignment_objective(a, b, u);
  double tau = 0.5;
  int used = 0;
  converged = false;
  while (used < budget) {
    CMatrix g = CMatrix::Zero(a[0].rows(), a[0].cols());
    for (std::size_t i = 0; i < a.size(); ++i) g += b[i] * u * a[i];
    const CMatrix gu = g * u.adjoint();
    const CMatrix skew = (gu - gu.adjoint()) / nn;
    if (skew.norm() < 1e-10) {
      converged = true;
      break;
    }
    bool improved = false;
    for (int tries = 0; tries < 8 && used < budget; ++tries, ++used) {
      const CMatrix candidate = cayley(tau * skew) * u;
      const double cand_value = alignment_objective(a, b, candidate);
      if (cand_value < value - 1e-15) {
        u = candidate;
        value = cand_value;
        tau = std::min(tau * 1.5, 8.0);
        improved = true;
        break;
      }
      tau *= 0.3;
    }
    if (!improved) {
      converged = true;  // no descent direction at line-search resolution
      break;
    }
  }
  return used;
}

}  // namespace

AlignmentResult align_conjugation(const std::vector<CMatrix>& a,
                                  const std::vector<CMatrix>& b, double p_norm,
                                  int budget) {
  if (a.empty() || a.size() != b.size()) {
    throw std::invalid_argument("align_conjugation: tuples must be non-empty, equal size");
  }
  const Eigen::Index n = a[0].rows();
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].rows() != n || a[i].cols() != n || b[i].rows() != n || b[i].cols() != n) {
      throw std::invalid_argument("align_conjugation: dimension mismatch at index " +
                                  std::to_string(i));
    }
  }
  if (p_norm < 1.0) throw std::invalid_argument("align_conjugation: p must be >= 1");

  const std::vector<double> ones(a.size(), 1.0);
  CMatrix best = spectral_init(a, b, ones);
  double best_value = alignment_objective(a, b, best);
  bool converged = false;

  int remaining = std::max(budget, 1);
  {
    CMatrix u = best;
    bool conv = false;
    remaining -= polish(a, b, u, remaining, conv);
    const double v = alignment_objective(a, b, u);
    if (v <= best_value) {
      best = u;
      best_value = v;
      converged = conv;
    }
  }

  // Random-weight restarts explore other spectral matchings of the tuple.
  RngStream restart_rng(0xA11C0117ULL, 0);
  while (remaining > 32 && a.size() > 1) {
    std::vector<double> w(a.size());
    for (double& x : w) x = restart_rng.normal();
    CMatrix u = spectral_init(a, b, w);
    bool conv = false;
    remaining -= polish(a, b, u, std::min(remaining, 64), conv);
    const double v = alignment_objective(a, b, u);
    if (v < best_value) {
      best = u;
      best_value = v;
      converged = conv;
    }
  }

  AlignmentResult result;
  result.u = best;
  result.residual = alignment_residual(a, b, best, p_norm);
  result.converged = converged;
  return result;
}

}  // namespace orbilab
