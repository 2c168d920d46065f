#include "orbilab/transport.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "orbilab/sampling.hpp"

namespace orbilab {

void DiscreteMeasure::validate() const {
  if (weights.empty()) throw std::invalid_argument("DiscreteMeasure: empty");
  double total = 0.0;
  for (double w : weights) {
    if (w < 0.0) throw std::invalid_argument("DiscreteMeasure: negative weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("DiscreteMeasure: weights sum to " + std::to_string(total));
  }
}

namespace {

struct BasicCell {
  int i, j;
  double x;
};

// Transportation simplex. Returns the optimal plan for min <pi, c> subject
// to the marginal constraints. Basic cells form a spanning tree of the
// bipartite source/sink graph throughout.
class TransportSimplex {
 public:
  TransportSimplex(std::vector<double> supply, std::vector<double> demand,
                   const Eigen::MatrixXd& cost)
      : a_(std::move(supply)), b_(std::move(demand)), c_(cost),
        m_(static_cast<int>(a_.size())), n_(static_cast<int>(b_.size())) {}

  bool solve() {
    northwest_init();
    const long max_iter = 200L * (m_ + n_) * (m_ + n_);
    const long bland_after = max_iter / 2;
    for (long iter = 0; iter < max_iter; ++iter) {
      compute_duals();
      int ei = -1, ej = -1;
      double most_negative = -1e-11;
      bool found = false;
      for (int i = 0; i < m_ && !(found && iter >= bland_after); ++i) {
        for (int j = 0; j < n_; ++j) {
          const double rc = c_(i, j) - u_[i] - v_[j];
          if (rc < most_negative) {
            most_negative = rc;
            ei = i;
            ej = j;
            found = true;
            if (iter >= bland_after) break;  // Bland: first improving cell
          }
        }
      }
      if (!found) return true;
      pivot(ei, ej);
    }
    return false;
  }

  Eigen::MatrixXd plan() const {
    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(m_, n_);
    for (const BasicCell& cell : basis_) p(cell.i, cell.j) += cell.x;
    return p;
  }

 private:
  void northwest_init() {
    std::vector<double> sa = a_, sb = b_;
    int i = 0, j = 0;
    while (i < m_ && j < n_) {
      const double x = std::min(sa[i], sb[j]);
      basis_.push_back({i, j, x});
      sa[i] -= x;
      sb[j] -= x;
      if (sa[i] <= 1e-15 && sb[j] <= 1e-15) {
        // keep the tree connected: advance a single index, the next cell
        // enters with a zero allocation
        if (i < m_ - 1) {
          ++i;
        } else {
          ++j;
        }
      } else if (sa[i] <= 1e-15) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  void compute_duals() {
    u_.assign(m_, 0.0);
    v_.assign(n_, 0.0);
    std::vector<char> known_u(m_, 0), known_v(n_, 0);
    known_u[0] = 1;
    std::deque<int> queue = {0};  // nodes: sources 0..m-1, sinks m..m+n-1
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      for (const BasicCell& cell : basis_) {
        if (node < m_ && cell.i == node && !known_v[cell.j]) {
          v_[cell.j] = c_(cell.i, cell.j) - u_[cell.i];
          known_v[cell.j] = 1;
          queue.push_back(m_ + cell.j);
        } else if (node >= m_ && cell.j == node - m_ && !known_u[cell.i]) {
          u_[cell.i] = c_(cell.i, cell.j) - v_[cell.j];
          known_u[cell.i] = 1;
          queue.push_back(cell.i);
        }
      }
    }
  }

  void pivot(int ei, int ej) {
    // unique path in the basis tree from source ei to sink ej
    const int nodes = m_ + n_;
    std::vector<int> prev_node(nodes, -1), prev_edge(nodes, -1);
    std::vector<char> seen(nodes, 0);
    std::deque<int> queue = {ei};
    seen[ei] = 1;
    while (!queue.empty()) {
      const int node = queue.front();
      queue.pop_front();
      if (node == m_ + ej) break;
      for (std::size_t e = 0; e < basis_.size(); ++e) {
        const int from = basis_[e].i;
        const int to = m_ + basis_[e].j;
        int next = -1;
        if (node == from && !seen[to]) next = to;
        if (node == to && !seen[from]) next = from;
        if (next >= 0) {
          seen[next] = 1;
          prev_node[next] = node;
          prev_edge[next] = static_cast<int>(e);
          queue.push_back(next);
        }
      }
    }
    // walk back from the sink, assembling the alternating cycle
    std::vector<int> path_edges;
    for (int node = m_ + ej; node != ei; node = prev_node[node]) {
      path_edges.push_back(prev_edge[node]);
    }
    // entering edge has sign +; path edges alternate -, +, ... starting at
    // the sink end of the entering edge
    double theta = std::numeric_limits<double>::infinity();
    int leaving = -1;
    for (std::size_t k = 0; k < path_edges.size(); ++k) {
      if (k % 2 == 0) {  // minus edge
        const BasicCell& cell = basis_[path_edges[k]];
        if (cell.x < theta - 1e-15 ||
            (std::abs(cell.x - theta) <= 1e-15 && path_edges[k] < leaving)) {
          theta = cell.x;
          leaving = path_edges[k];
        }
      }
    }
    for (std::size_t k = 0; k < path_edges.size(); ++k) {
      basis_[path_edges[k]].x += (k % 2 == 0) ? -theta : theta;
    }
    basis_[leaving] = {ei, ej, theta};
  }

  std::vector<double> a_, b_;
  const Eigen::MatrixXd& c_;
  int m_, n_;
  std::vector<BasicCell> basis_;
  std::vector<double> u_, v_;
};

W2Result sinkhorn(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                  const Eigen::MatrixXd& cost, double reg) {
  const int m = static_cast<int>(mu.weights.size());
  const int n = static_cast<int>(nu.weights.size());
  if (reg <= 0.0) {
    std::vector<double> values;
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) values.push_back(cost(i, j));
    }
    std::nth_element(values.begin(), values.begin() + values.size() / 2, values.end());
    reg = std::max(1e-12, 1e-2 * values[values.size() / 2]);
  }
  Eigen::VectorXd f = Eigen::VectorXd::Zero(m), g = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd log_mu(m), log_nu(n);
  for (int i = 0; i < m; ++i) log_mu(i) = std::log(std::max(mu.weights[i], 1e-300));
  for (int j = 0; j < n; ++j) log_nu(j) = std::log(std::max(nu.weights[j], 1e-300));

  auto lse_rows = [&](Eigen::VectorXd& out) {
    for (int i = 0; i < m; ++i) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int j = 0; j < n; ++j) mx = std::max(mx, (g(j) - cost(i, j)) / reg);
      double s = 0.0;
      for (int j = 0; j < n; ++j) s += std::exp((g(j) - cost(i, j)) / reg - mx);
      out(i) = mx + std::log(s);
    }
  };
  auto lse_cols = [&](Eigen::VectorXd& out) {
    for (int j = 0; j < n; ++j) {
      double mx = -std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i) mx = std::max(mx, (f(i) - cost(i, j)) / reg);
      double s = 0.0;
      for (int i = 0; i < m; ++i) s += std::exp((f(i) - cost(i, j)) / reg - mx);
      out(j) = mx + std::log(s);
    }
  };

  bool converged = false;
  Eigen::VectorXd tmp(std::max(m, n));
  for (int iter = 0; iter < 5000; ++iter) {
    Eigen::VectorXd lr(m);
    lse_rows(lr);
    f = reg * (log_mu - lr);
    Eigen::VectorXd lc(n);
    lse_cols(lc);
    g = reg * (log_nu - lc);
    if (iter % 10 == 9) {
      double err = 0.0;
      for (int i = 0; i < m; ++i) {
        double row = 0.0;
        for (int j = 0; j < n; ++j) row += std::exp((f(i) + g(j) - cost(i, j)) / reg);
        err = std::max(err, std::abs(row - mu.weights[i]));
      }
      if (err < 1e-10) {
        converged = true;
        break;
      }
    }
  }

  Eigen::MatrixXd plan(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) plan(i, j) = std::exp((f(i) + g(j) - cost(i, j)) / reg);
  }
  // round to exact marginals (scale rows, then columns, then a rank-one fix)
  for (int i = 0; i < m; ++i) {
    const double row = plan.row(i).sum();
    if (row > mu.weights[i] && row > 0.0) plan.row(i) *= mu.weights[i] / row;
  }
  for (int j = 0; j < n; ++j) {
    const double col = plan.col(j).sum();
    if (col > nu.weights[j] && col > 0.0) plan.col(j) *= nu.weights[j] / col;
  }
  Eigen::VectorXd row_err(m), col_err(n);
  for (int i = 0; i < m; ++i) row_err(i) = mu.weights[i] - plan.row(i).sum();
  for (int j = 0; j < n; ++j) col_err(j) = nu.weights[j] - plan.col(j).sum();
  const double total_err = row_err.sum();
  if (total_err > 1e-300) plan += (row_err * col_err.transpose()) / total_err;

  W2Result out;
  out.plan.coupling = plan;
  out.plan.cost = (plan.array() * cost.array()).sum();
  out.distance = std::sqrt(std::max(0.0, out.plan.cost));
  // Kantorovich dual lower bound from the c-transform of f
  double dual = 0.0;
  for (int i = 0; i < m; ++i) dual += f(i) * mu.weights[i];
  for (int j = 0; j < n; ++j) {
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) best = std::min(best, cost(i, j) - f(i));
    dual += best * nu.weights[j];
  }
  out.gap = out.plan.cost - dual;
  out.converged = converged;
  return out;
}

}  // namespace

W2Result wasserstein2(const DiscreteMeasure& mu, const DiscreteMeasure& nu,
                      const Eigen::MatrixXd& sq_cost, OTMethod method, double reg) {
  mu.validate();
  nu.validate();
  const int m = static_cast<int>(mu.weights.size());
  const int n = static_cast<int>(nu.weights.size());
  if (sq_cost.rows() != m || sq_cost.cols() != n) {
    throw std::invalid_argument("wasserstein2: cost matrix shape mismatch");
  }
  if (method == OTMethod::Entropic) {
    return sinkhorn(mu, nu, sq_cost, reg);
  }
  if (m > 500 || n > 500) {
    throw std::invalid_argument("wasserstein2: exact method limited to 500 atoms per side");
  }
  TransportSimplex simplex(mu.weights, nu.weights, sq_cost);
  W2Result out;
  out.converged = simplex.solve();
  out.plan.coupling = simplex.plan();
  out.plan.cost = (out.plan.coupling.array() * sq_cost.array()).sum();
  out.distance = std::sqrt(std::max(0.0, out.plan.cost));
  out.gap = 0.0;
  return out;
}

LipschitzReport conjugation_lipschitz_check(const HermitianMatrix& xi,
                                            const UnitaryMatrix& u,
                                            const UnitaryMatrix& v) {
  if (xi.dim() != u.dim() || u.dim() != v.dim()) {
    throw std::invalid_argument("conjugation_lipschitz_check: dimension mismatch");
  }
  LipschitzReport r;
  const CMatrix lhs = u.mat() * xi.mat() * u.mat().adjoint() -
                      v.mat() * xi.mat() * v.mat().adjoint();
  r.lhs = lhs.norm();
  r.rhs = 2.0 * operator_norm(xi.mat()) * (u.mat() - v.mat()).norm();
  r.holds = r.lhs <= r.rhs + 1e-9;
  return r;
}

double relative_entropy_restricted(double gamma_mass) {
  if (!(gamma_mass > 0.0) || gamma_mass > 1.0) {
    throw std::invalid_argument("relative_entropy_restricted: mass must lie in (0,1]");
  }
  return -std::log(gamma_mass);
}

MetricComparison metric_comparison(const std::vector<CMatrix>& u,
                                   const std::vector<CMatrix>& v) {
  if (u.empty() || u.size() != v.size()) {
    throw std::invalid_argument("metric_comparison: tuples must be non-empty, equal size");
  }
  MetricComparison r;
  double hs2 = 0.0, geod2 = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    if (u[i].rows() != v[i].rows() || u[i].cols() != v[i].cols()) {
      throw std::invalid_argument("metric_comparison: shape mismatch at index " +
                                  std::to_string(i));
    }
    hs2 += (u[i] - v[i]).squaredNorm();
    const CMatrix rel = u[i].adjoint() * v[i];
    Eigen::ComplexEigenSolver<CMatrix> solver(rel);
    if (solver.info() != Eigen::Success) {
      throw std::runtime_error("metric_comparison: eigensolver failed");
    }
    for (Eigen::Index k = 0; k < rel.rows(); ++k) {
      const double theta = std::arg(solver.eigenvalues()(k));
      if (std::abs(theta) > std::numbers::pi - 1e-6) r.branch_ambiguous = true;
      geod2 += theta * theta;
    }
  }
  r.d_hs = std::sqrt(hs2);
  r.d_geod_upper = std::sqrt(geod2);
  r.ordered = r.d_hs <= r.d_geod_upper + 1e-9;
  return r;
}

TalagrandReport talagrand_check(int n,
                                const std::function<bool(const CMatrix&)>& restriction,
                                long samples, RngStream& rng) {
  if (samples < 200) {
    throw std::invalid_argument("talagrand_check: need at least 200 samples per side");
  }
  if (samples > 500) {
    throw std::invalid_argument("talagrand_check: exact transport limited to 500 atoms");
  }

  // mass estimation and the restricted cloud in one sweep
  std::vector<CMatrix> restricted;
  restricted.reserve(samples);
  long total_draws = 0, accepted = 0;
  const long pilot = std::max<long>(4000, 4 * samples);
  const long cap = 400000;
  while ((total_draws < pilot ||
          static_cast<long>(restricted.size()) < samples) &&
         total_draws < cap) {
    const CMatrix u = haar_unitary(n, HaarGroup::SpecialUnitary, rng).mat();
    ++total_draws;
    if (restriction(u)) {
      ++accepted;
      if (static_cast<long>(restricted.size()) < samples) restricted.push_back(u);
    }
  }
  TalagrandReport r;
  r.gamma_mass_est = static_cast<double>(accepted) / total_draws;
  if (r.gamma_mass_est < 0.05 || static_cast<long>(restricted.size()) < samples) {
    throw std::invalid_argument("talagrand_check: restriction mass below the 0.05 floor");
  }
  r.entropy = relative_entropy_restricted(r.gamma_mass_est);
  r.bound = std::sqrt(4.0 * r.entropy / n);

  std::vector<CMatrix> haar_cloud;
  haar_cloud.reserve(samples);
  for (long k = 0; k < samples; ++k) {
    haar_cloud.push_back(haar_unitary(n, HaarGroup::SpecialUnitary, rng).mat());
  }

  auto sq_cost = [](const std::vector<CMatrix>& xs, const std::vector<CMatrix>& ys) {
    Eigen::MatrixXd c(xs.size(), ys.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      for (std::size_t j = 0; j < ys.size(); ++j) {
        c(i, j) = (xs[i] - ys[j]).squaredNorm();
      }
    }
    return c;
  };
  auto uniform = [](std::size_t k) {
    DiscreteMeasure d;
    d.weights.assign(k, 1.0 / static_cast<double>(k));
    return d;
  };

  r.w2_est = wasserstein2(uniform(restricted.size()), uniform(haar_cloud.size()),
                          sq_cost(restricted, haar_cloud), OTMethod::Exact)
                 .distance;

  // finite-sample allowance: self distance of the two Haar half-clouds
  const std::size_t half = haar_cloud.size() / 2;
  const std::vector<CMatrix> h1(haar_cloud.begin(), haar_cloud.begin() + half);
  const std::vector<CMatrix> h2(haar_cloud.begin() + half, haar_cloud.end());
  r.allowance = wasserstein2(uniform(h1.size()), uniform(h2.size()), sq_cost(h1, h2),
                             OTMethod::Exact)
                    .distance;
  r.holds_within_ci = r.w2_est <= r.bound + r.allowance;
  return r;
}

}  // namespace orbilab
