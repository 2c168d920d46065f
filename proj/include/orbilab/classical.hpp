#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "orbilab/rng.hpp"

#include "json.hpp"

namespace orbilab {

// Joint law of two bounded discrete real random variables.
struct JointDistribution {
  std::vector<double> support_x;
  std::vector<double> support_y;
  Eigen::MatrixXd probs;  // p_ab >= 0 summing to 1, rows = x atoms

  void validate() const;
  std::vector<double> marginal_x() const;
  std::vector<double> marginal_y() const;
  double mixed_moment(int kx, int ky) const;  // E[X^kx Y^ky]

  nlohmann::json to_json() const;  // schema "joint/1"
  static JointDistribution from_json(const nlohmann::json& j);
};

struct ContingencyTable {
  Eigen::MatrixXi counts;  // n_ab
  long total = 0;

  static ContingencyTable from_counts(Eigen::MatrixXi counts);
  std::vector<int> row_sums() const;
  std::vector<int> col_sums() const;
};

struct TypeCount {
  unsigned long long count = 0;
  bool feasible = false;  // margins matched the requested types
};

// With the first permutation fixed to the identity and sorted marginal type
// vectors, the number of second permutations realizing the table:
// prod_a multinomial(n_{a.}; (n_{ab})_b) * prod_b n_{.b}! .
// Tables whose margins do not match the given types count zero.
TypeCount exact_joint_type_count(const ContingencyTable& t,
                                 const std::vector<int>& x_type,
                                 const std::vector<int>& y_type);

// Deterministic largest-remainder rounding of N * probs to integer counts.
Eigen::MatrixXi round_type(const JointDistribution& joint, int n);

struct HSymExact {
  double value = 0.0;          // (1/N) log(accepted / N!)
  bool neg_infinity = false;   // no feasible table within delta
  unsigned long long accepted_count = 0;
  unsigned long long total_count = 0;  // N!
  long tables_accepted = 0;
  long tables_feasible = 0;
};

// Exact permutation-microstate entropy at size N: sums
// exact_joint_type_count over all tables with the rounded target margins
// whose joint type lies within total-variation delta of the target type.
// Exact integer arithmetic; requires N <= 20.
HSymExact h_sym_exact(const JointDistribution& joint, int n, double delta);

struct HSymMC {
  long n_samples = 0;
  long hits = 0;
  double hit_fraction = 0.0;
  double value = 0.0;  // (1/N) log hit_fraction
  bool neg_infinity = false;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
  double value_upper = 0.0;  // from the Wilson/rule-of-three upper bound
};

// Monte Carlo version with the literal moment-window membership test:
// the first permutation is fixed to the identity, the second is uniform,
// and a pair hits when every mixed moment up to total degree m matches the
// target expectation within delta. Requires samples >= 1000.
HSymMC h_sym_mc(const JointDistribution& joint, int n, int m, double delta,
                long samples, const RngStream& rng, int workers = 1);

// Sum p_ab log(p_ab / (p_a q_b)) with 0 log 0 = 0.
double mutual_information(const JointDistribution& joint);

}  // namespace orbilab
