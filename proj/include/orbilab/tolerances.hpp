#pragma once

namespace orbilab {

// Global numeric tolerances. Single point of calibration for every
// invariant check in the library; keep new magic constants out of
// module code and add them here instead.
struct Tolerances {
  double hermitian_symmetry = 1e-12;   // |a_jk - conj(a_kj)|
  double unitarity = 1e-10;            // ||U*U - I||_op at construction
  double path_unitarity = 1e-8;        // ||U*U - I||_op along SDE paths
  double eigh_residual = 1e-9;         // ||UDU* - A||_HS / max(1, ||A||_HS)
  double spectrum_match = 1e-9;        // componentwise eigenvalue comparisons
  double trace_imag = 1e-10;           // imaginary part of nominally real moments
  double weight_sum = 1e-12;           // probability weights summing to one
  double plan_marginal = 1e-9;         // transport plan marginal mismatch
  double metric_slack = 1e-9;          // slack in exact metric inequalities
  double exact_value = 1e-12;          // equality of closed-form scalars
};

inline const Tolerances& tol() {
  static const Tolerances t{};
  return t;
}

}  // namespace orbilab
