#include "orbilab/classical.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <thread>

#include "orbilab/sampling.hpp"
#include "orbilab/stats.hpp"

namespace orbilab {

void JointDistribution::validate() const {
  const auto a = static_cast<Eigen::Index>(support_x.size());
  const auto b = static_cast<Eigen::Index>(support_y.size());
  if (a == 0 || b == 0 || probs.rows() != a || probs.cols() != b) {
    throw std::invalid_argument("JointDistribution: support/probs shape mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < a; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      if (probs(i, j) < 0.0) {
        throw std::invalid_argument("JointDistribution: negative probability");
      }
      total += probs(i, j);
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw std::invalid_argument("JointDistribution: probabilities sum to " +
                                std::to_string(total));
  }
}

std::vector<double> JointDistribution::marginal_x() const {
  std::vector<double> m(support_x.size(), 0.0);
  for (Eigen::Index i = 0; i < probs.rows(); ++i) m[i] = probs.row(i).sum();
  return m;
}

std::vector<double> JointDistribution::marginal_y() const {
  std::vector<double> m(support_y.size(), 0.0);
  for (Eigen::Index j = 0; j < probs.cols(); ++j) m[j] = probs.col(j).sum();
  return m;
}

double JointDistribution::mixed_moment(int kx, int ky) const {
  double s = 0.0;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    for (Eigen::Index j = 0; j < probs.cols(); ++j) {
      s += probs(i, j) * std::pow(support_x[i], kx) * std::pow(support_y[j], ky);
    }
  }
  return s;
}

nlohmann::json JointDistribution::to_json() const {
  nlohmann::json j;
  j["schema"] = "joint/1";
  j["support_x"] = support_x;
  j["support_y"] = support_y;
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index k = 0; k < probs.cols(); ++k) row.push_back(probs(i, k));
    rows.push_back(std::move(row));
  }
  j["probs"] = std::move(rows);
  return j;
}

JointDistribution JointDistribution::from_json(const nlohmann::json& j) {
  if (j.at("schema").get<std::string>() != "joint/1") {
    throw std::invalid_argument("JointDistribution: unknown schema");
  }
  JointDistribution d;
  d.support_x = j.at("support_x").get<std::vector<double>>();
  d.support_y = j.at("support_y").get<std::vector<double>>();
  const auto& rows = j.at("probs");
  d.probs.resize(static_cast<Eigen::Index>(d.support_x.size()),
                 static_cast<Eigen::Index>(d.support_y.size()));
  for (Eigen::Index i = 0; i < d.probs.rows(); ++i) {
    for (Eigen::Index k = 0; k < d.probs.cols(); ++k) {
      d.probs(i, k) = rows.at(i).at(k).get<double>();
    }
  }
  d.validate();
  return d;
}

ContingencyTable ContingencyTable::from_counts(Eigen::MatrixXi counts) {
  ContingencyTable t;
  long total = 0;
  for (Eigen::Index i = 0; i < counts.rows(); ++i) {
    for (Eigen::Index j = 0; j < counts.cols(); ++j) {
      if (counts(i, j) < 0) {
        throw std::invalid_argument("ContingencyTable: negative count");
      }
      total += counts(i, j);
    }
  }
  t.counts = std::move(counts);
  t.total = total;
  return t;
}

std::vector<int> ContingencyTable::row_sums() const {
  std::vector<int> r(counts.rows(), 0);
  for (Eigen::Index i = 0; i < counts.rows(); ++i) r[i] = counts.row(i).sum();
  return r;
}

std::vector<int> ContingencyTable::col_sums() const {
  std::vector<int> c(counts.cols(), 0);
  for (Eigen::Index j = 0; j < counts.cols(); ++j) c[j] = counts.col(j).sum();
  return c;
}

namespace {

unsigned long long factorial_u64(int n) {
  if (n > 20) throw std::invalid_argument("factorial: N > 20 overflows exact counting");
  unsigned long long f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

unsigned long long binomial_u64(int n, int k) {
  unsigned long long b = 1;
  for (int i = 1; i <= k; ++i) {
    b = b * (n - k + i) / i;  // exact at each step
  }
  return b;
}

unsigned long long multinomial_u64(int n, const std::vector<int>& parts) {
  unsigned long long result = 1;
  int remaining = n;
  for (int p : parts) {
    result *= binomial_u64(remaining, p);
    remaining -= p;
  }
  return result;
}

}  // namespace

TypeCount exact_joint_type_count(const ContingencyTable& t, const std::vector<int>& x_type,
                                 const std::vector<int>& y_type) {
  TypeCount out;
  if (t.row_sums() != x_type || t.col_sums() != y_type) {
    return out;  // zero, feasible = false
  }
  out.feasible = true;
  if (t.total > 20) {
    throw std::invalid_argument("exact_joint_type_count: N > 20 overflows exact counting");
  }
  unsigned long long count = 1;
  for (Eigen::Index a = 0; a < t.counts.rows(); ++a) {
    std::vector<int> parts;
    for (Eigen::Index b = 0; b < t.counts.cols(); ++b) parts.push_back(t.counts(a, b));
    count *= multinomial_u64(x_type[a], parts);
  }
  for (int cb : y_type) count *= factorial_u64(cb);
  out.count = count;
  return out;
}

Eigen::MatrixXi round_type(const JointDistribution& joint, int n) {
  joint.validate();
  if (n < 1) throw std::invalid_argument("round_type: N must be >= 1");
  const Eigen::Index a = joint.probs.rows();
  const Eigen::Index b = joint.probs.cols();
  Eigen::MatrixXi counts(a, b);
  std::vector<std::pair<double, std::pair<Eigen::Index, Eigen::Index>>> remainders;
  int assigned = 0;
  for (Eigen::Index i = 0; i < a; ++i) {
    for (Eigen::Index j = 0; j < b; ++j) {
      const double exact = joint.probs(i, j) * n;
      counts(i, j) = static_cast<int>(std::floor(exact));
      assigned += counts(i, j);
      remainders.push_back({exact - counts(i, j), {i, j}});
    }
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& x, const auto& y) { return x.first > y.first; });
  for (int k = 0; k < n - assigned; ++k) {
    const auto [i, j] = remainders[k % remainders.size()].second;
    counts(i, j) += 1;
  }
  return counts;
}

namespace {

// Enumerate all contingency tables with the given margins, row by row.
void enumerate_tables(const std::vector<int>& row_margins,
                      const std::vector<int>& col_margins,
                      const std::function<void(const Eigen::MatrixXi&)>& visit) {
  const int a = static_cast<int>(row_margins.size());
  const int b = static_cast<int>(col_margins.size());
  Eigen::MatrixXi table = Eigen::MatrixXi::Zero(a, b);
  std::vector<int> col_left = col_margins;

  std::function<void(int, int, int)> fill = [&](int row, int col, int left) {
    if (row == a) {
      visit(table);
      return;
    }
    if (col == b - 1) {
      if (left <= col_left[col]) {
        table(row, col) = left;
        col_left[col] -= left;
        fill(row + 1, 0, row + 1 <= a - 1 ? row_margins[row + 1] : 0);
        col_left[col] += left;
        table(row, col) = 0;
      }
      return;
    }
    const int hi = std::min(left, col_left[col]);
    for (int v = 0; v <= hi; ++v) {
      table(row, col) = v;
      col_left[col] -= v;
      fill(row, col + 1, left - v);
      col_left[col] += v;
      table(row, col) = 0;
    }
  };
  if (a > 0) fill(0, 0, row_margins[0]);
}

}  // namespace

HSymExact h_sym_exact(const JointDistribution& joint, int n, double delta) {
  joint.validate();
  if (delta < 0.0) throw std::invalid_argument("h_sym_exact: delta must be >= 0");
  if (joint.support_x.size() > 6 || joint.support_y.size() > 6) {
    throw std::invalid_argument("h_sym_exact: exact path limited to supports of size <= 6");
  }
  const Eigen::MatrixXi target = round_type(joint, n);
  const ContingencyTable target_table = ContingencyTable::from_counts(target);
  const std::vector<int> x_type = target_table.row_sums();
  const std::vector<int> y_type = target_table.col_sums();

  HSymExact out;
  out.total_count = factorial_u64(n);

  enumerate_tables(x_type, y_type, [&](const Eigen::MatrixXi& table) {
    ++out.tables_feasible;
    double tv = 0.0;  // total variation between empirical and target joint types
    for (Eigen::Index i = 0; i < table.rows(); ++i) {
      for (Eigen::Index j = 0; j < table.cols(); ++j) {
        tv += std::abs(table(i, j) - target(i, j));
      }
    }
    tv /= 2.0 * n;
    if (tv <= delta + 1e-12) {
      ++out.tables_accepted;
      out.accepted_count +=
          exact_joint_type_count(ContingencyTable::from_counts(table), x_type, y_type)
              .count;
    }
  });

  if (out.accepted_count == 0) {
    out.neg_infinity = true;
    out.value = -std::numeric_limits<double>::infinity();
  } else {
    out.value = (std::log(static_cast<double>(out.accepted_count)) -
                 std::log(static_cast<double>(out.total_count))) /
                n;
  }
  return out;
}

HSymMC h_sym_mc(const JointDistribution& joint, int n, int m, double delta, long samples,
                const RngStream& rng, int workers) {
  joint.validate();
  if (samples < 1000) {
    throw std::invalid_argument("h_sym_mc: need at least 1000 samples");
  }
  if (m < 1) throw std::invalid_argument("h_sym_mc: m must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("h_sym_mc: delta must be > 0");

  // Canonical sorted type vectors: support values repeated per the rounded
  // marginal type, non-increasing.
  const Eigen::MatrixXi type = round_type(joint, n);
  const ContingencyTable tt = ContingencyTable::from_counts(type);
  const std::vector<int> x_type = tt.row_sums();
  const std::vector<int> y_type = tt.col_sums();

  auto sorted_vector = [n](const std::vector<double>& support,
                           const std::vector<int>& counts) {
    std::vector<std::pair<double, int>> blocks;
    for (std::size_t i = 0; i < support.size(); ++i) {
      blocks.push_back({support[i], counts[i]});
    }
    std::sort(blocks.begin(), blocks.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<double> v;
    v.reserve(n);
    for (const auto& [val, c] : blocks) {
      for (int k = 0; k < c; ++k) v.push_back(val);
    }
    return v;
  };
  const std::vector<double> vx = sorted_vector(joint.support_x, x_type);
  const std::vector<double> vy = sorted_vector(joint.support_y, y_type);

  struct Window {
    int kx, ky;
    double target;
  };
  std::vector<Window> windows;
  for (int kx = 0; kx <= m; ++kx) {
    for (int ky = 0; kx + ky <= m; ++ky) {
      if (kx + ky == 0) continue;
      windows.push_back({kx, ky, joint.mixed_moment(kx, ky)});
    }
  }

  std::vector<unsigned char> hit(samples, 0);
  const int n_workers = std::max(1, workers);
  std::atomic<long> next{0};
  auto work = [&]() {
    for (;;) {
      const long s = next.fetch_add(1);
      if (s >= samples) return;
      RngStream stream(rng.master_seed(), rng.stream_index() + 1 + s);
      const std::vector<int> perm = uniform_permutation(n, stream);
      bool ok = true;
      for (const Window& w : windows) {
        double acc = 0.0;
        for (int j = 0; j < n; ++j) {
          acc += std::pow(vx[j], w.kx) * std::pow(vy[perm[j]], w.ky);
        }
        if (std::abs(acc / n - w.target) >= delta) {
          ok = false;
          break;
        }
      }
      hit[s] = ok ? 1 : 0;
    }
  };
  if (n_workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  HSymMC out;
  out.n_samples = samples;
  for (long s = 0; s < samples; ++s) out.hits += hit[s];
  out.hit_fraction = static_cast<double>(out.hits) / samples;
  std::tie(out.wilson_lo, out.wilson_hi) = wilson_interval(out.hits, samples);
  if (out.hits == 0) {
    out.neg_infinity = true;
    out.value = -std::numeric_limits<double>::infinity();
    out.value_upper = std::log(zero_hit_upper_bound(samples)) / n;
  } else {
    out.value = std::log(out.hit_fraction) / n;
    out.value_upper = std::log(out.wilson_hi) / n;
  }
  return out;
}

double mutual_information(const JointDistribution& joint) {
  joint.validate();
  const std::vector<double> px = joint.marginal_x();
  const std::vector<double> qy = joint.marginal_y();
  double mi = 0.0;
  for (Eigen::Index i = 0; i < joint.probs.rows(); ++i) {
    for (Eigen::Index j = 0; j < joint.probs.cols(); ++j) {
      const double p = joint.probs(i, j);
      if (p > 0.0) mi += p * std::log(p / (px[i] * qy[j]));
    }
  }
  return std::max(0.0, mi);
}

}  // namespace orbilab
