#include "orbilab/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace orbilab {

HermitianMatrix::HermitianMatrix(CMatrix entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw std::invalid_argument("HermitianMatrix: square non-empty matrix required");
  }
  const double gap = (entries - entries.adjoint()).cwiseAbs().maxCoeff();
  const double scale = std::max(1.0, entries.cwiseAbs().maxCoeff());
  if (gap > tol().hermitian_symmetry * scale) {
    throw std::invalid_argument("HermitianMatrix: symmetry violation " + std::to_string(gap));
  }
  mat_ = (entries + entries.adjoint()) / 2.0;
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& values) {
  CMatrix m = CMatrix::Zero(values.size(), values.size());
  for (int i = 0; i < values.size(); ++i) m(i, i) = values(i);
  return HermitianMatrix(std::move(m));
}

UnitaryMatrix::UnitaryMatrix(CMatrix entries) {
  if (entries.rows() == 0 || entries.rows() != entries.cols()) {
    throw std::invalid_argument("UnitaryMatrix: square non-empty matrix required");
  }
  CMatrix defect = entries.adjoint() * entries;
  defect.diagonal().array() -= 1.0;
  // Frobenius norm dominates the operator norm, so this gate is conservative
  // and avoids an SVD per construction.
  const double err = defect.norm();
  if (err > tol().unitarity) {
    throw std::invalid_argument("UnitaryMatrix: unitarity defect " + std::to_string(err));
  }
  mat_ = std::move(entries);
}

UnitaryMatrix UnitaryMatrix::identity(int n) {
  return UnitaryMatrix(CMatrix::Identity(n, n));
}

DiagonalVector::DiagonalVector(RVector values) {
  if (values.size() == 0) {
    throw std::invalid_argument("DiagonalVector: empty");
  }
  for (int i = 0; i + 1 < values.size(); ++i) {
    if (values(i) < values(i + 1)) {
      throw std::invalid_argument("DiagonalVector: values must be non-increasing");
    }
  }
  values_ = std::move(values);
}

CMatrix DiagonalVector::as_matrix() const {
  CMatrix m = CMatrix::Zero(dim(), dim());
  for (int i = 0; i < dim(); ++i) m(i, i) = values_(i);
  return m;
}

double DiagonalVector::power_trace(int k) const {
  double s = 0.0;
  for (int i = 0; i < dim(); ++i) s += std::pow(values_(i), k);
  return s / dim();
}

EighResult eigh(const HermitianMatrix& a) {
  const int n = a.dim();
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(a.mat());
  if (solver.info() != Eigen::Success) {
    throw std::runtime_error("eigh: eigensolver failed to converge at dimension " +
                             std::to_string(n));
  }
  // Eigen returns ascending order; the convention here is non-increasing.
  RVector d(n);
  CMatrix u(n, n);
  for (int i = 0; i < n; ++i) {
    d(i) = solver.eigenvalues()(n - 1 - i);
    u.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  const CMatrix recon = u * d.asDiagonal().toDenseMatrix().cast<Complex>() * u.adjoint();
  const double residual = (recon - a.mat()).norm();
  const double bound = tol().eigh_residual * std::max(1.0, a.mat().norm());
  if (residual > bound) {
    throw std::runtime_error("eigh: reconstruction residual " + std::to_string(residual) +
                             " exceeds bound at dimension " + std::to_string(n));
  }
  return EighResult{DiagonalVector(std::move(d)), UnitaryMatrix(std::move(u))};
}

double matrix_norm(const CMatrix& a, NormKind kind, double p) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("matrix_norm: square matrix required");
  }
  switch (kind) {
    case NormKind::HilbertSchmidt:
      return a.norm();
    case NormKind::Operator: {
      Eigen::JacobiSVD<CMatrix> svd(a);
      return svd.singularValues()(0);
    }
    case NormKind::PTracial: {
      if (p < 1.0) {
        throw std::invalid_argument("matrix_norm: p-tracial norm needs p >= 1, got " +
                                    std::to_string(p));
      }
      Eigen::JacobiSVD<CMatrix> svd(a);
      double s = 0.0;
      for (int i = 0; i < svd.singularValues().size(); ++i) {
        s += std::pow(svd.singularValues()(i), p);
      }
      return std::pow(s / a.rows(), 1.0 / p);
    }
  }
  throw std::logic_error("matrix_norm: unknown kind");
}

UnitaryMatrix unitary_exp(const HermitianMatrix& h) {
  const EighResult f = eigh(h);
  const int n = h.dim();
  if (!std::isfinite(f.spectrum.sup_norm())) {
    throw std::runtime_error("unitary_exp: non-finite spectrum");
  }
  CMatrix phases = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    phases(i, i) = std::exp(Complex(0.0, f.spectrum.values()(i)));
  }
  return UnitaryMatrix(f.basis.mat() * phases * f.basis.mat().adjoint());
}

CMatrix polar_unitary(const CMatrix& m) {
  // Newton iteration X <- (X + X^{-*})/2; quadratically convergent and
  // cheap when m is already near-unitary, which is the SDE use case.
  CMatrix x = m;
  for (int iter = 0; iter < 20; ++iter) {
    CMatrix next = 0.5 * (x + x.adjoint().inverse());
    const double step = (next - x).norm();
    x = std::move(next);
    if (step < 1e-14 * std::max(1.0, x.norm())) break;
  }
  return x;
}

}  // namespace orbilab
