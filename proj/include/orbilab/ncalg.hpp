#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "orbilab/linalg.hpp"

#include "json.hpp"

namespace orbilab {

// One letter of a non-commutative *-monomial: variable j of family i,
// optionally adjoined. Adjoints are meaningful only for unitary letters.
struct Letter {
  int family = 0;
  int variable = 0;
  bool adjoint = false;

  friend bool operator==(const Letter&, const Letter&) = default;
};

struct Word {
  std::vector<Letter> letters;

  static Word empty() { return Word{}; }
  static Word single_family(std::initializer_list<int> variables, int family = 0);
  static Word power(int k, int family = 0, int variable = 0);

  int length() const { return static_cast<int>(letters.size()); }
  Word rotated(int shift) const;  // cyclic rotation
  std::string key() const;        // canonical serialization (memo key)
};

// Moment oracle tau(word) for a target non-commutative distribution.
// Immutable and cheap to copy (shared representation). Kinds:
//   - catalog laws: semicircular (radius 2), projection(alpha),
//     finite atoms, and unitary marginals (free unitary Brownian motion at
//     time t, and exp(i sqrt(t) h) with h standard semicircular);
//   - matrix models: families of fixed matrices with tau = tr_N;
//   - free products of arbitrary factor specs (families concatenate);
//   - conjugated views v_i X_i v_i* with the conjugators appended as
//     additional unitary families.
class TracialSpec {
 public:
  static TracialSpec semicircular();
  static TracialSpec projection(double alpha);
  static TracialSpec finite_atoms(std::vector<double> values, std::vector<double> weights);
  static TracialSpec fubm_unitary(double t);
  static TracialSpec exp_semicircular_unitary(double t);
  static TracialSpec matrix_model(std::vector<std::vector<CMatrix>> families);
  static TracialSpec free_product(std::vector<TracialSpec> factors);

  // Families 0..n-1 of `x_joint` conjugated by fresh mutually free unitaries
  // v_0..v_{n-1} (one per family, distributed per v_marginals[i], free from
  // x_joint); the v_i themselves are exposed as families n..2n-1.
  static TracialSpec liberated(const TracialSpec& x_joint,
                               std::vector<TracialSpec> v_marginals);

  int family_count() const;
  int variable_count(int family) const;
  bool unitary_family(int family) const;
  double operator_bound() const;

  // The target mixed moment. Validates letters; throws on out-of-range
  // indices or adjoints applied to self-adjoint letters. Memoized.
  Complex moment(const Word& w) const;

  nlohmann::json to_json() const;               // schema "tracial-spec/1"
  static TracialSpec from_json(const nlohmann::json& j);

 private:
  struct Impl;
  explicit TracialSpec(std::shared_ptr<const Impl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<const Impl> impl_;
};

// tr_N of the word evaluated on concrete matrices. assignment[i][j] is the
// matrix for variable j of family i; all matrices must share one dimension
// (mismatches name the offending letter).
Complex eval_word(const Word& w, const std::vector<std::vector<CMatrix>>& assignment);

// phi^{*I} moment of the free product of the given marginal specs; letters
// of family i are evaluated in marginals[i]. Equivalent to
// TracialSpec::free_product(marginals).moment(w).
Complex free_product_moment(const std::vector<TracialSpec>& marginals, const Word& w);

// Smallest epsilon for which the concrete matrix families are (m, eps)-free:
// the maximum over all mixed words of length <= m of the gap between the
// actual normalized trace and the free-product prediction built from the
// families' own matrix marginals. Word enumeration is capped by `budget`.
double mf_free_deviation(const std::vector<std::vector<CMatrix>>& families, int m,
                         long budget = 1'000'000);

// Number of words of length 1..m over an alphabet of the given size.
long word_count(int alphabet, int m);

}  // namespace orbilab
