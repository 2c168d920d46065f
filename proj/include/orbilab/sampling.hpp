#pragma once

#include <vector>

#include "orbilab/linalg.hpp"
#include "orbilab/rng.hpp"

namespace orbilab {

enum class HaarGroup {
  Unitary,         // U(N)
  SpecialUnitary,  // SU(N)
  Torus,           // T(N), diagonal unitaries
};

// Haar draw on the named group. U(N) via QR of a Ginibre matrix with the
// R-diagonal phase correction; SU(N) divides out a global N-th root of the
// determinant; T(N) draws independent uniform phases.
UnitaryMatrix haar_unitary(int n, HaarGroup group, RngStream& rng);

// GUE draw normalized so that tr_N(A^2) has mean one (semicircle of radius
// two in the limit): diagonal real variance 1/N, off-diagonal complex
// variance 1/N in total.
HermitianMatrix gue(int n, RngStream& rng);

// Fisher-Yates uniform permutation of {0..n-1}.
std::vector<int> uniform_permutation(int n, RngStream& rng);

struct FactorizationReport {
  double vandermonde_gof_pvalue = 0.0;
  double eigenvector_invariance_pvalue = 0.0;
  long sample_count = 0;
};

// Statistical check of the eigenvalue/eigenvector factorization of the GUE
// law: (a) chi-square goodness of fit of 2x2 eigenvalue pairs against the
// Vandermonde-weighted Gaussian density, (b) two-sample comparison of an
// eigenbasis statistic from diagonalized GUE draws against fresh Haar draws.
// The goodness-of-fit component requires n == 2; the invariance component
// runs at any n. Throws when samples < 1000.
FactorizationReport check_factorization(int n, long samples, RngStream& rng);

}  // namespace orbilab
