#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

#include "orbilab/tolerances.hpp"

namespace orbilab {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;

// Normalized trace tr_N = Tr / N.
inline Complex normalized_trace(const CMatrix& a) {
  return a.trace() / static_cast<double>(a.rows());
}

// N x N self-adjoint matrix. Construction enforces a = a* entrywise
// within tolerance and then symmetrizes exactly.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(CMatrix entries);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const CMatrix& mat() const { return mat_; }

  static HermitianMatrix diagonal(const RVector& values);

 private:
  CMatrix mat_;
};

// N x N unitary matrix; ||U*U - I||_op must be below tolerance.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(CMatrix entries);

  int dim() const { return static_cast<int>(mat_.rows()); }
  const CMatrix& mat() const { return mat_; }

  static UnitaryMatrix identity(int n);

 private:
  CMatrix mat_;
};

// Ordered real spectrum: values non-increasing (the canonical diagonal
// part of the eigenvalue factorization).
class DiagonalVector {
 public:
  explicit DiagonalVector(RVector values);

  int dim() const { return static_cast<int>(values_.size()); }
  const RVector& values() const { return values_; }
  double sup_norm() const { return values_.cwiseAbs().maxCoeff(); }

  CMatrix as_matrix() const;

  // tr_N(D^k)
  double power_trace(int k) const;

 private:
  RVector values_;
};

struct EighResult {
  DiagonalVector spectrum;
  UnitaryMatrix basis;
};

// Spectral factorization A = U D U* with D sorted non-increasing.
// Throws on eigensolver failure or reconstruction residual above tolerance,
// naming the dimension and the residual.
EighResult eigh(const HermitianMatrix& a);

enum class NormKind {
  Operator,        // largest singular value
  HilbertSchmidt,  // Frobenius norm, unnormalized trace
  PTracial,        // (tr_N |a|^p)^(1/p), normalized trace
};

// Named matrix norm. p is used only for PTracial and must be >= 1.
double matrix_norm(const CMatrix& a, NormKind kind, double p = 2.0);

inline double operator_norm(const CMatrix& a) {
  return matrix_norm(a, NormKind::Operator);
}
inline double hs_norm(const CMatrix& a) { return a.norm(); }
inline double tracial_norm(const CMatrix& a, double p) {
  return matrix_norm(a, NormKind::PTracial, p);
}

// exp(iH) for Hermitian H; exactly unitary up to rounding.
UnitaryMatrix unitary_exp(const HermitianMatrix& h);

// Closest unitary in Frobenius norm (polar factor).
CMatrix polar_unitary(const CMatrix& m);

}  // namespace orbilab
