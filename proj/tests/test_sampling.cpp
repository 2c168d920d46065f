#include "orbilab/sampling.hpp"

#include <cmath>
#include <map>

#include "doctest.h"
#include "orbilab/stats.hpp"

using namespace orbilab;

TEST_CASE("special unitary draws have unit determinant") {
  RngStream rng(101, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const UnitaryMatrix u = haar_unitary(5, HaarGroup::SpecialUnitary, rng);
    CHECK(std::abs(u.mat().determinant() - Complex(1.0, 0.0)) < 1e-10);
  }
}

TEST_CASE("torus draws are diagonal with unit modulus") {
  RngStream rng(102, 0);
  const UnitaryMatrix u = haar_unitary(6, HaarGroup::Torus, rng);
  for (int i = 0; i < 6; ++i) {
    for (int j = 0; j < 6; ++j) {
      if (i == j) {
        CHECK(std::abs(std::abs(u.mat()(i, j)) - 1.0) < 1e-12);
      } else {
        CHECK(std::abs(u.mat()(i, j)) == 0.0);
      }
    }
  }
}

TEST_CASE("Haar trace statistics at N=8") {
  RngStream rng(103, 0);
  const long draws = 100000;
  Complex mean_tr = 0.0;
  double mean_abs2 = 0.0;
  for (long k = 0; k < draws; ++k) {
    const Complex tr = haar_unitary(8, HaarGroup::Unitary, rng).mat().trace();
    mean_tr += tr;
    mean_abs2 += std::norm(tr);
  }
  mean_tr /= static_cast<double>(draws);
  mean_abs2 /= static_cast<double>(draws);
  CHECK(std::abs(mean_tr) < 0.02);
  CHECK(mean_abs2 == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("GUE normalization") {
  RngStream rng(104, 0);

  SUBCASE("scalar case has unit variance") {
    const long draws = 100000;
    double var = 0.0;
    for (long k = 0; k < draws; ++k) {
      const double x = gue(1, rng).mat()(0, 0).real();
      var += x * x;
    }
    var /= draws;
    CHECK(var == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("mean tr_N A^2 is one at N=32") {
    const long draws = 10000;
    double m2 = 0.0;
    for (long k = 0; k < draws; ++k) {
      const CMatrix a = gue(32, rng).mat();
      m2 += a.squaredNorm() / 32.0;  // tr(A^2) = ||A||_F^2 for Hermitian A
    }
    m2 /= draws;
    CHECK(m2 == doctest::Approx(1.0).epsilon(0.02));
  }

  SUBCASE("mean tr_N A^4 approaches the Catalan moment at N=64") {
    const long draws = 10000;
    double m4 = 0.0;
    for (long k = 0; k < draws; ++k) {
      const CMatrix a = gue(64, rng).mat();
      const CMatrix a2 = a * a;
      m4 += a2.squaredNorm() / 64.0;
    }
    m4 /= draws;
    CHECK(m4 == doctest::Approx(2.0).epsilon(0.025));
  }
}

TEST_CASE("uniform permutations") {
  RngStream rng(105, 0);

  SUBCASE("singleton") {
    CHECK(uniform_permutation(1, rng) == std::vector<int>{0});
  }

  SUBCASE("all six permutations of three elements are equally likely") {
    const long draws = 60000;
    std::map<std::vector<int>, long> counts;
    for (long k = 0; k < draws; ++k) counts[uniform_permutation(3, rng)] += 1;
    CHECK(counts.size() == 6);
    for (const auto& [perm, c] : counts) {
      CHECK(static_cast<double>(c) / draws == doctest::Approx(1.0 / 6).epsilon(0.06));
    }
  }

  SUBCASE("identical seed and stream reproduce the draw") {
    RngStream a(7, 3), b(7, 3);
    CHECK(uniform_permutation(10, a) == uniform_permutation(10, b));
  }
}

TEST_CASE("reproducibility is bit exact across samplers") {
  RngStream a(99, 5), b(99, 5);
  const CMatrix ua = haar_unitary(6, HaarGroup::Unitary, a).mat();
  const CMatrix ub = haar_unitary(6, HaarGroup::Unitary, b).mat();
  CHECK((ua - ub).cwiseAbs().maxCoeff() == 0.0);
  const CMatrix ga = gue(6, a).mat();
  const CMatrix gb = gue(6, b).mat();
  CHECK((ga - gb).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("distinct streams differ") {
  RngStream a(99, 0), b(99, 1);
  CHECK(a.next_u64() != b.next_u64());
}

TEST_CASE("Haar invariance of trace power statistics") {
  RngStream rng(106, 0);
  const int n = 8;
  const long draws = 10000;
  const CMatrix w = haar_unitary(n, HaarGroup::Unitary, rng).mat();
  std::vector<std::vector<double>> plain(4), shifted(4);
  for (long k = 0; k < draws; ++k) {
    const CMatrix u = haar_unitary(n, HaarGroup::Unitary, rng).mat();
    const CMatrix wu = w * u;
    CMatrix pu = CMatrix::Identity(n, n);
    CMatrix pwu = pu;
    for (int p = 0; p < 4; ++p) {
      pu = pu * u;
      pwu = pwu * wu;
      plain[p].push_back((pu.trace() / static_cast<double>(n)).real());
      shifted[p].push_back((pwu.trace() / static_cast<double>(n)).real());
    }
  }
  for (int p = 0; p < 4; ++p) {
    CHECK(ks_two_sample_pvalue(plain[p], shifted[p]) > 0.01);
  }
}

TEST_CASE("factorization checks") {
  SUBCASE("rejects insufficient samples") {
    RngStream rng(107, 0);
    CHECK_THROWS_AS(check_factorization(2, 10, rng), std::invalid_argument);
  }

  SUBCASE("eigenvalue density and eigenvector invariance pass at the default seed") {
    RngStream rng(108, 0);
    const FactorizationReport r = check_factorization(2, 100000, rng);
    CHECK(r.vandermonde_gof_pvalue > 0.01);
    CHECK(r.eigenvector_invariance_pvalue > 0.01);
    CHECK(r.sample_count == 100000);
  }

  SUBCASE("invariance component at N=4") {
    RngStream rng(109, 0);
    const FactorizationReport r = check_factorization(4, 10000, rng);
    CHECK(r.eigenvector_invariance_pvalue > 0.01);
  }
}
