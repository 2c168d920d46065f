#pragma once

#include <Eigen/Dense>
#include <boost/rational.hpp>
#include <functional>
#include <optional>
#include <vector>

#include "orbilab/rng.hpp"

#include "json.hpp"

namespace orbilab {

using Rational = boost::rational<long long>;

// Finite metric point set. Covering/packing solvers operate on the stored
// pairwise distances; exact modes use 64-bit masks, hence <= 64 points.
class PointCloud {
 public:
  explicit PointCloud(Eigen::MatrixXd distances);

  static PointCloud from_points(const std::vector<Eigen::VectorXd>& points);

  int size() const { return static_cast<int>(dist_.rows()); }
  double dist(int i, int j) const { return dist_(i, j); }

  // Spot-check the triangle inequality on random triples.
  void check_triangle(RngStream& rng, int triples = 1000) const;

 private:
  Eigen::MatrixXd dist_;
};

enum class SolveMode { Exact, Greedy };

// Minimum number of open eps-balls (centers in the cloud) covering it.
// Exact mode solves minimum set cover by branch and bound (<= 64 points);
// greedy returns an upper bound within the usual 1 + ln n factor.
long covering_number(const PointCloud& cloud, double eps, SolveMode mode);

// Maximum number of mutually disjoint open eps-balls in the cloud, balls
// taken as subsets of the cloud. Exact mode solves maximum independent set
// on the ball conflict graph; greedy returns a lower bound.
long packing_number(const PointCloud& cloud, double eps, SolveMode mode);

struct SandwichReport {
  long p_eps = 0;
  long k_2eps = 0;
  long p_4eps = 0;
  bool holds = false;  // P_eps >= K_2eps >= P_4eps
};

SandwichReport check_kp_sandwich(const PointCloud& cloud, double eps);

// Finite group with a bi-invariant metric, given by its multiplication
// table and distance matrix.
struct FiniteMetricGroup {
  std::vector<std::vector<int>> mul;
  Eigen::MatrixXd dist;

  int order() const { return static_cast<int>(mul.size()); }
  void validate() const;  // group axioms on the table + metric bi-invariance

  static FiniteMetricGroup cyclic(int n);  // Z_n with the cyclic metric
};

// All subgroups of the group (element lists, sorted).
std::vector<std::vector<int>> subgroups(const FiniteMetricGroup& g);

struct HomogeneousCoverReport {
  long k_eps_gamma = 0;
  long k_eps_h = 0;
  long p_2eps_quotient = 0;
  bool holds = false;  // K_eps(Gamma) >= K_eps(H) * P_2eps(pi(Gamma))
};

// The covering bound through a subgroup: Gamma must be a union of left
// cosets of H (checked); the quotient carries d_Q(g1 H, g2 H) =
// min_h d(g1, g2 h).
HomogeneousCoverReport homogeneous_covering_bound(const FiniteMetricGroup& g,
                                                  const std::vector<int>& subgroup,
                                                  const std::vector<int>& gamma,
                                                  double eps);

// Finite-dimensional profile of a hyperfinite algebra: diffuse weight plus
// matrix blocks (size m_k, trace weight); any remaining weight is the
// undetermined residual.
struct HyperfiniteProfile {
  Rational diffuse_weight{0};
  std::vector<std::pair<long, Rational>> atoms;  // (block size, weight)
  std::optional<long> residual_block_size;

  Rational residual() const;
  void validate() const;

  bool operator==(const HyperfiniteProfile&) const = default;

  nlohmann::json to_json() const;  // schema "profile/1"
  static HyperfiniteProfile from_json(const nlohmann::json& j);
};

struct Delta0Result {
  Rational value{0};
  bool residual_flagged = false;  // undeclared remainder excluded from the sum
};

// Exact free entropy dimension of the profile: 1 - sum weight_k^2 / m_k^2
// over the matrix blocks (the diffuse part subtracts nothing). A positive
// residual is treated as one more atom of the declared size, or flagged.
Delta0Result delta0_hyperfinite(const HyperfiniteProfile& profile);

enum class ComposeRelation { Free, Identical, Custom };

struct ComposeResult {
  Rational delta0_orb{0};
  Rational delta0_join{0};
};

// Exact composition d0(join) = d0_orb + sum_i d0(X_i): the orbital term is 0
// for free profiles, -(n-1) d0(X) for identical ones, or a supplied
// non-positive custom value.
ComposeResult delta0_compose(const std::vector<HyperfiniteProfile>& profiles,
                             ComposeRelation relation,
                             std::optional<Rational> custom_term = std::nullopt);

// Exact rational parsing: accepts "p/q" strings, integers, and decimal
// literals with up to 9 fractional digits.
Rational parse_rational(const nlohmann::json& j);
std::string rational_to_string(const Rational& r);

}  // namespace orbilab
