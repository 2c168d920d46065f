#include "orbilab/transport.hpp"

#include <cmath>
#include <numeric>

#include "doctest.h"
#include "orbilab/sampling.hpp"
#include "test_helpers.hpp"

using namespace orbilab;
using orbilab::testing::random_hermitian;

namespace {

// Brute-force oracle: enumerate every basis (spanning set of m+n-1 cells),
// solve the margin equations by leaf elimination, keep feasible vertices,
// and take the minimum cost over all extreme points of the polytope.
double brute_force_ot(const std::vector<double>& mu, const std::vector<double>& nu,
                      const Eigen::MatrixXd& cost) {
  const int m = static_cast<int>(mu.size());
  const int n = static_cast<int>(nu.size());
  const int cells = m * n;
  const int basis_size = m + n - 1;
  std::vector<int> pick(basis_size);
  std::iota(pick.begin(), pick.end(), 0);
  double best = std::numeric_limits<double>::infinity();

  auto evaluate = [&]() {
    std::vector<double> row_left = mu, col_left = nu;
    std::vector<double> alloc(basis_size, -1.0);
    std::vector<bool> solved(basis_size, false);
    int remaining = basis_size;
    while (remaining > 0) {
      bool progressed = false;
      for (int k = 0; k < basis_size; ++k) {
        if (solved[k]) continue;
        const int i = pick[k] / n;
        const int j = pick[k] % n;
        int row_open = 0, col_open = 0;
        for (int l = 0; l < basis_size; ++l) {
          if (solved[l]) continue;
          if (pick[l] / n == i) ++row_open;
          if (pick[l] % n == j) ++col_open;
        }
        if (row_open == 1) {
          alloc[k] = row_left[i];
          solved[k] = true;
          col_left[j] -= alloc[k];
          row_left[i] = 0.0;
        } else if (col_open == 1) {
          alloc[k] = col_left[j];
          solved[k] = true;
          row_left[i] -= alloc[k];
          col_left[j] = 0.0;
        } else {
          continue;
        }
        --remaining;
        progressed = true;
      }
      if (!progressed) return;  // cyclic support, not a basis
    }
    double total = 0.0;
    for (int k = 0; k < basis_size; ++k) {
      if (alloc[k] < -1e-12) return;  // infeasible vertex
      total += alloc[k] * cost(pick[k] / n, pick[k] % n);
    }
    // margins must close exactly
    for (double r : row_left) {
      if (std::abs(r) > 1e-9) return;
    }
    for (double c : col_left) {
      if (std::abs(c) > 1e-9) return;
    }
    best = std::min(best, total);
  };

  // iterate over all C(cells, basis_size) subsets
  while (true) {
    evaluate();
    int k = basis_size - 1;
    while (k >= 0 && pick[k] == cells - basis_size + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int l = k + 1; l < basis_size; ++l) pick[l] = pick[l - 1] + 1;
  }
  return best;
}

DiscreteMeasure random_measure(int atoms, RngStream& rng) {
  DiscreteMeasure d;
  double total = 0.0;
  for (int i = 0; i < atoms; ++i) {
    d.weights.push_back(rng.uniform() + 0.05);
    total += d.weights.back();
  }
  for (double& w : d.weights) w /= total;
  // renormalize exactly
  double sum = std::accumulate(d.weights.begin(), d.weights.end(), 0.0);
  d.weights.back() += 1.0 - sum;
  return d;
}

Eigen::MatrixXd random_sq_cost(int m, int n, RngStream& rng) {
  // squared distances of random points on the line (a genuine metric cost)
  std::vector<double> xs(m), ys(n);
  for (double& x : xs) x = rng.uniform() * 4.0;
  for (double& y : ys) y = rng.uniform() * 4.0;
  Eigen::MatrixXd c(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) c(i, j) = (xs[i] - ys[j]) * (xs[i] - ys[j]);
  }
  return c;
}

}  // namespace

TEST_CASE("wasserstein2 closed forms") {
  SUBCASE("identical measures have zero distance") {
    DiscreteMeasure mu{{0.3, 0.7}};
    Eigen::MatrixXd c(2, 2);
    c << 0.0, 1.0, 1.0, 0.0;
    const W2Result r = wasserstein2(mu, mu, c, OTMethod::Exact);
    CHECK(r.distance == doctest::Approx(0.0));
    CHECK(r.plan.coupling(0, 0) == doctest::Approx(0.3));
    CHECK(r.plan.coupling(1, 1) == doctest::Approx(0.7));
  }

  SUBCASE("point masses move the full distance") {
    DiscreteMeasure mu{{1.0}}, nu{{1.0}};
    Eigen::MatrixXd c(1, 1);
    c << 6.25;
    CHECK(wasserstein2(mu, nu, c, OTMethod::Exact).distance == doctest::Approx(2.5));
  }

  SUBCASE("half mass moved across two units costs sqrt 2") {
    DiscreteMeasure mu{{1.0}}, nu{{0.5, 0.5}};
    Eigen::MatrixXd c(1, 2);
    c << 0.0, 4.0;
    CHECK(wasserstein2(mu, nu, c, OTMethod::Exact).distance ==
          doctest::Approx(std::sqrt(2.0)));
  }
}

TEST_CASE("exact solver matches the brute-force vertex oracle") {
  RngStream rng(71, 0);
  for (int trial = 0; trial < 25; ++trial) {
    const int m = 2 + static_cast<int>(rng.uniform_below(3));
    const int n = 2 + static_cast<int>(rng.uniform_below(3));
    const DiscreteMeasure mu = random_measure(m, rng);
    const DiscreteMeasure nu = random_measure(n, rng);
    const Eigen::MatrixXd c = random_sq_cost(m, n, rng);
    const W2Result r = wasserstein2(mu, nu, c, OTMethod::Exact);
    const double oracle = brute_force_ot(mu.weights, nu.weights, c);
    CHECK(r.plan.cost == doctest::Approx(oracle).epsilon(1e-9));
    CHECK(r.converged);
  }
}

TEST_CASE("plan marginals match the inputs") {
  RngStream rng(72, 0);
  const DiscreteMeasure mu = random_measure(7, rng);
  const DiscreteMeasure nu = random_measure(5, rng);
  const Eigen::MatrixXd c = random_sq_cost(7, 5, rng);
  const W2Result r = wasserstein2(mu, nu, c, OTMethod::Exact);
  for (int i = 0; i < 7; ++i) {
    CHECK(std::abs(r.plan.coupling.row(i).sum() - mu.weights[i]) < 1e-9);
  }
  for (int j = 0; j < 5; ++j) {
    CHECK(std::abs(r.plan.coupling.col(j).sum() - nu.weights[j]) < 1e-9);
  }
}

TEST_CASE("distance is symmetric and satisfies the triangle inequality") {
  RngStream rng(73, 0);
  for (int trial = 0; trial < 30; ++trial) {
    const int atoms = 5 + static_cast<int>(rng.uniform_below(10));
    std::vector<double> pts(atoms);
    for (double& x : pts) x = rng.uniform() * 3.0;
    Eigen::MatrixXd c(atoms, atoms);
    for (int i = 0; i < atoms; ++i) {
      for (int j = 0; j < atoms; ++j) c(i, j) = (pts[i] - pts[j]) * (pts[i] - pts[j]);
    }
    const DiscreteMeasure a = random_measure(atoms, rng);
    const DiscreteMeasure b = random_measure(atoms, rng);
    const DiscreteMeasure d = random_measure(atoms, rng);
    const double ab = wasserstein2(a, b, c, OTMethod::Exact).distance;
    const double ba = wasserstein2(b, a, c.transpose(), OTMethod::Exact).distance;
    const double ad = wasserstein2(a, d, c, OTMethod::Exact).distance;
    const double db = wasserstein2(d, b, c, OTMethod::Exact).distance;
    CHECK(ab == doctest::Approx(ba).epsilon(1e-8));
    CHECK(ab <= ad + db + 1e-8);
  }
}

TEST_CASE("entropic value dominated by exact plus gap") {
  RngStream rng(74, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const DiscreteMeasure mu = random_measure(6, rng);
    const DiscreteMeasure nu = random_measure(6, rng);
    const Eigen::MatrixXd c = random_sq_cost(6, 6, rng);
    const W2Result exact = wasserstein2(mu, nu, c, OTMethod::Exact);
    const W2Result ent = wasserstein2(mu, nu, c, OTMethod::Entropic, 0.01);
    CHECK(ent.plan.cost >= exact.plan.cost - 1e-9);
    CHECK(ent.plan.cost >= exact.plan.cost - ent.gap - 1e-9);
    CHECK(ent.gap >= -1e-9);
    for (int i = 0; i < 6; ++i) {
      CHECK(std::abs(ent.plan.coupling.row(i).sum() - mu.weights[i]) < 1e-9);
    }
  }
}

TEST_CASE("infeasible weights rejected") {
  DiscreteMeasure bad{{0.5, 0.4}};
  Eigen::MatrixXd c(2, 2);
  c.setZero();
  CHECK_THROWS_AS(wasserstein2(bad, bad, c, OTMethod::Exact), std::invalid_argument);
}

TEST_CASE("conjugation Lipschitz bound") {
  RngStream rng(75, 0);

  SUBCASE("identical conjugations") {
    const HermitianMatrix xi = random_hermitian(4, rng);
    const UnitaryMatrix u = haar_unitary(4, HaarGroup::Unitary, rng);
    const LipschitzReport r = conjugation_lipschitz_check(xi, u, u);
    CHECK(r.lhs == doctest::Approx(0.0));
    CHECK(r.holds);
  }

  SUBCASE("central element") {
    const HermitianMatrix eye(CMatrix::Identity(4, 4));
    const UnitaryMatrix u = haar_unitary(4, HaarGroup::Unitary, rng);
    const UnitaryMatrix v = haar_unitary(4, HaarGroup::Unitary, rng);
    const LipschitzReport r = conjugation_lipschitz_check(eye, u, v);
    CHECK(r.lhs == doctest::Approx(0.0));
    CHECK(r.holds);
  }

  SUBCASE("holds on a thousand seeded instances") {
    for (int trial = 0; trial < 1000; ++trial) {
      const HermitianMatrix xi = random_hermitian(4, rng);
      const UnitaryMatrix u = haar_unitary(4, HaarGroup::Unitary, rng);
      const UnitaryMatrix v = haar_unitary(4, HaarGroup::Unitary, rng);
      CHECK(conjugation_lipschitz_check(xi, u, v).holds);
    }
  }
}

TEST_CASE("restricted relative entropy") {
  CHECK(relative_entropy_restricted(1.0) == doctest::Approx(0.0));
  CHECK(relative_entropy_restricted(0.5) == doctest::Approx(std::log(2.0)));
  CHECK(relative_entropy_restricted(0.1) == doctest::Approx(std::log(10.0)));
  CHECK_THROWS_AS(relative_entropy_restricted(0.0), std::invalid_argument);
  CHECK_THROWS_AS(relative_entropy_restricted(-0.2), std::invalid_argument);
}

TEST_CASE("metric comparison") {
  RngStream rng(76, 0);

  SUBCASE("coinciding tuples") {
    const CMatrix u = haar_unitary(3, HaarGroup::Unitary, rng).mat();
    const MetricComparison r = metric_comparison({u}, {u});
    CHECK(r.d_hs == doctest::Approx(0.0));
    CHECK(r.d_geod_upper == doctest::Approx(0.0).epsilon(1e-7));
    CHECK(r.ordered);
  }

  SUBCASE("scalar chord versus arc") {
    CMatrix one = CMatrix::Identity(1, 1);
    CMatrix phase(1, 1);
    phase(0, 0) = std::exp(Complex(0.0, 1.0));
    const MetricComparison r = metric_comparison({one}, {phase});
    CHECK(r.d_hs == doctest::Approx(2.0 * std::sin(0.5)));  // |e^i - 1| ~ 0.9589
    CHECK(r.d_geod_upper == doctest::Approx(1.0));
    CHECK(r.ordered);
  }

  SUBCASE("ordered on a thousand seeded pairs") {
    for (int trial = 0; trial < 1000; ++trial) {
      const MetricComparison r =
          metric_comparison({haar_unitary(3, HaarGroup::Unitary, rng).mat()},
                            {haar_unitary(3, HaarGroup::Unitary, rng).mat()});
      CHECK(r.ordered);
    }
  }
}

TEST_CASE("talagrand check") {
  SUBCASE("rejects too few samples") {
    RngStream rng(77, 0);
    CHECK_THROWS_AS(
        talagrand_check(2, [](const CMatrix&) { return true; }, 50, rng),
        std::invalid_argument);
  }

  SUBCASE("full restriction gives zero entropy and holds") {
    RngStream rng(78, 0);
    const TalagrandReport r =
        talagrand_check(2, [](const CMatrix&) { return true; }, 200, rng);
    CHECK(r.gamma_mass_est == doctest::Approx(1.0));
    CHECK(r.entropy == doctest::Approx(0.0));
    CHECK(r.bound == doctest::Approx(0.0));
    CHECK(r.holds_within_ci);  // cloud self-distance stays within the allowance
  }

  SUBCASE("half-mass benchmark on SU(2)") {
    RngStream rng(79, 0);
    const TalagrandReport r = talagrand_check(
        2, [](const CMatrix& u) { return u.trace().real() >= 0.0; }, 250, rng);
    CHECK(r.gamma_mass_est == doctest::Approx(0.5).epsilon(0.1));
    CHECK(r.bound == doctest::Approx(std::sqrt(2.0 * std::log(2.0))).epsilon(0.15));
    CHECK(r.holds_within_ci);
  }

  SUBCASE("nested restrictions increase entropy and distance") {
    RngStream rng(80, 0);
    const TalagrandReport half = talagrand_check(
        2, [](const CMatrix& u) { return u.trace().real() >= 0.0; }, 250, rng);
    const TalagrandReport quarter = talagrand_check(
        2,
        [](const CMatrix& u) {
          return u.trace().real() >= 0.0 && u(0, 0).imag() >= 0.0;
        },
        250, rng);
    CHECK(quarter.entropy > half.entropy);
    CHECK(quarter.w2_est > half.w2_est);
  }

  SUBCASE("mass below the floor is rejected") {
    RngStream rng(81, 0);
    CHECK_THROWS_AS(talagrand_check(
                        2, [](const CMatrix& u) { return u.trace().real() > 1.99; },
                        200, rng),
                    std::invalid_argument);
  }
}
