#include "orbilab/dimension.hpp"

#include "doctest.h"

using namespace orbilab;

namespace {

PointCloud line_cloud(int n) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(1);
    p << static_cast<double>(i);
    pts.push_back(p);
  }
  return PointCloud::from_points(pts);
}

PointCloud random_cloud(int n, RngStream& rng) {
  std::vector<Eigen::VectorXd> pts;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd p(2);
    p << rng.uniform(), rng.uniform();
    pts.push_back(p);
  }
  return PointCloud::from_points(pts);
}

HyperfiniteProfile diffuse_profile() {
  HyperfiniteProfile p;
  p.diffuse_weight = Rational(1);
  return p;
}

HyperfiniteProfile two_point_profile() {
  HyperfiniteProfile p;
  p.atoms = {{1, Rational(1, 2)}, {1, Rational(1, 2)}};
  return p;
}

HyperfiniteProfile m2_profile() {
  HyperfiniteProfile p;
  p.atoms = {{2, Rational(1)}};
  return p;
}

}  // namespace

TEST_CASE("covering numbers on the ten point line") {
  const PointCloud cloud = line_cloud(10);
  CHECK(covering_number(cloud, 1.0, SolveMode::Exact) == 10);
  CHECK(covering_number(cloud, 2.0, SolveMode::Exact) == 4);
  CHECK(packing_number(cloud, 1.0, SolveMode::Exact) == 10);
  CHECK(packing_number(cloud, 4.0, SolveMode::Exact) == 2);

  const PointCloud singleton = line_cloud(1);
  for (double eps : {0.1, 1.0, 100.0}) {
    CHECK(covering_number(singleton, eps, SolveMode::Exact) == 1);
    CHECK(packing_number(singleton, eps, SolveMode::Exact) == 1);
  }
}

TEST_CASE("sandwich on the line and on random clouds") {
  const SandwichReport r = check_kp_sandwich(line_cloud(10), 1.0);
  CHECK(r.p_eps == 10);
  CHECK(r.k_2eps == 4);
  CHECK(r.p_4eps == 2);
  CHECK(r.holds);

  const SandwichReport s = check_kp_sandwich(line_cloud(1), 1.0);
  CHECK(s.p_eps == 1);
  CHECK(s.k_2eps == 1);
  CHECK(s.p_4eps == 1);
  CHECK(s.holds);

  RngStream rng(61, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const PointCloud cloud = random_cloud(24, rng);
    std::vector<double> dists;
    for (int i = 0; i < cloud.size(); ++i) {
      for (int j = i + 1; j < cloud.size(); ++j) dists.push_back(cloud.dist(i, j));
    }
    std::sort(dists.begin(), dists.end());
    for (int q = 1; q <= 5; ++q) {
      const double eps = dists[dists.size() * q / 10] / 4.0;
      if (eps <= 0.0) continue;
      CHECK(check_kp_sandwich(cloud, eps).holds);
    }
  }
}

TEST_CASE("greedy bounds bracket the exact values") {
  RngStream rng(62, 0);
  for (int trial = 0; trial < 10; ++trial) {
    const PointCloud cloud = random_cloud(20, rng);
    for (double eps : {0.1, 0.2, 0.4}) {
      CHECK(covering_number(cloud, eps, SolveMode::Greedy) >=
            covering_number(cloud, eps, SolveMode::Exact));
      CHECK(packing_number(cloud, eps, SolveMode::Greedy) <=
            packing_number(cloud, eps, SolveMode::Exact));
    }
  }
}

TEST_CASE("covering and packing are non-increasing in eps") {
  RngStream rng(63, 0);
  const PointCloud cloud = random_cloud(24, rng);
  long prev_k = 1000, prev_p = 1000;
  for (double eps : {0.05, 0.1, 0.2, 0.4, 0.8}) {
    const long k = covering_number(cloud, eps, SolveMode::Exact);
    const long p = packing_number(cloud, eps, SolveMode::Exact);
    CHECK(k <= prev_k);
    CHECK(p <= prev_p);
    prev_k = k;
    prev_p = p;
  }
}

TEST_CASE("triangle spot check rejects a broken metric") {
  Eigen::MatrixXd d(3, 3);
  d << 0, 1, 5, 1, 0, 1, 5, 1, 0;  // d(0,2) > d(0,1) + d(1,2)
  const PointCloud cloud{d};
  RngStream rng(64, 0);
  CHECK_THROWS_AS(cloud.check_triangle(rng), std::invalid_argument);
}

TEST_CASE("subgroup covering bound on cyclic groups") {
  SUBCASE("the documented case on six elements") {
    const FiniteMetricGroup g = FiniteMetricGroup::cyclic(6);
    std::vector<int> gamma = {0, 1, 2, 3, 4, 5};
    const HomogeneousCoverReport r =
        homogeneous_covering_bound(g, {0, 2, 4}, gamma, 0.5);
    CHECK(r.k_eps_gamma == 6);
    CHECK(r.k_eps_h == 3);
    CHECK(r.p_2eps_quotient == 2);
    CHECK(r.holds);
  }

  SUBCASE("trivial subgroup reduces to covering vs packing") {
    const FiniteMetricGroup g = FiniteMetricGroup::cyclic(5);
    std::vector<int> gamma = {0, 1, 2, 3, 4};
    const HomogeneousCoverReport r = homogeneous_covering_bound(g, {0}, gamma, 0.9);
    CHECK(r.k_eps_h == 1);
    CHECK(r.holds);
  }

  SUBCASE("gamma equal to the subgroup gives the equality form") {
    const FiniteMetricGroup g = FiniteMetricGroup::cyclic(6);
    const std::vector<int> h = {0, 2, 4};
    const HomogeneousCoverReport r = homogeneous_covering_bound(g, h, h, 0.5);
    CHECK(r.p_2eps_quotient == 1);
    CHECK(r.k_eps_gamma == r.k_eps_h);
    CHECK(r.holds);
  }

  SUBCASE("all subgroups of small cyclic groups") {
    for (int n = 1; n <= 8; ++n) {
      const FiniteMetricGroup g = FiniteMetricGroup::cyclic(n);
      std::vector<int> gamma(n);
      for (int i = 0; i < n; ++i) gamma[i] = i;
      for (const auto& h : subgroups(g)) {
        for (double eps : {0.4, 0.9, 1.4}) {
          CHECK(homogeneous_covering_bound(g, h, gamma, eps).holds);
        }
      }
    }
  }

  SUBCASE("non-saturated gamma is rejected") {
    const FiniteMetricGroup g = FiniteMetricGroup::cyclic(6);
    CHECK_THROWS_AS(homogeneous_covering_bound(g, {0, 2, 4}, {0, 1}, 0.5),
                    std::invalid_argument);
  }
}

TEST_CASE("exact dimension of hyperfinite profiles") {
  CHECK(delta0_hyperfinite(diffuse_profile()).value == Rational(1));
  CHECK(delta0_hyperfinite(two_point_profile()).value == Rational(1, 2));
  CHECK(delta0_hyperfinite(m2_profile()).value == Rational(3, 4));

  SUBCASE("declared residual joins the sum") {
    HyperfiniteProfile p;
    p.atoms = {{1, Rational(1, 2)}};
    p.residual_block_size = 1;
    // residual 1/2 as a size-1 atom: 1 - 1/4 - 1/4 = 1/2
    CHECK(delta0_hyperfinite(p).value == Rational(1, 2));
  }

  SUBCASE("undeclared residual is flagged") {
    HyperfiniteProfile p;
    p.atoms = {{2, Rational(1, 2)}};
    const Delta0Result r = delta0_hyperfinite(p);
    CHECK(r.residual_flagged);
    CHECK(r.value == Rational(1) - Rational(1, 16));
  }

  SUBCASE("weights above one are rejected") {
    HyperfiniteProfile p;
    p.atoms = {{1, Rational(3, 4)}, {1, Rational(1, 2)}};
    CHECK_THROWS_AS(delta0_hyperfinite(p), std::invalid_argument);
  }
}

TEST_CASE("dimension composition") {
  SUBCASE("two free profiles of dimension one half") {
    const ComposeResult r =
        delta0_compose({two_point_profile(), two_point_profile()}, ComposeRelation::Free);
    CHECK(r.delta0_orb == Rational(0));
    CHECK(r.delta0_join == Rational(1));
  }

  SUBCASE("three identical profiles of dimension three quarters") {
    const ComposeResult r = delta0_compose({m2_profile(), m2_profile(), m2_profile()},
                                           ComposeRelation::Identical);
    CHECK(r.delta0_orb == Rational(-3, 2));
    CHECK(r.delta0_join == Rational(3, 4));
  }

  SUBCASE("single profile") {
    const ComposeResult r = delta0_compose({m2_profile()}, ComposeRelation::Free);
    CHECK(r.delta0_orb == Rational(0));
    CHECK(r.delta0_join == Rational(3, 4));
  }

  SUBCASE("free composition is additive") {
    const ComposeResult r = delta0_compose(
        {diffuse_profile(), two_point_profile(), m2_profile()}, ComposeRelation::Free);
    CHECK(r.delta0_join == Rational(1) + Rational(1, 2) + Rational(3, 4));
  }

  SUBCASE("identical mode requires equal profiles") {
    CHECK_THROWS_AS(
        delta0_compose({m2_profile(), two_point_profile()}, ComposeRelation::Identical),
        std::invalid_argument);
  }

  SUBCASE("positive custom terms are rejected") {
    CHECK_THROWS_AS(delta0_compose({m2_profile(), m2_profile()}, ComposeRelation::Custom,
                                   Rational(1, 4)),
                    std::invalid_argument);
    const ComposeResult r = delta0_compose({m2_profile(), m2_profile()},
                                           ComposeRelation::Custom, Rational(-1, 4));
    CHECK(r.delta0_orb == Rational(-1, 4));
    CHECK(r.delta0_join == Rational(-1, 4) + Rational(3, 2));
  }
}

TEST_CASE("profile JSON round trip and rational parsing") {
  HyperfiniteProfile p;
  p.diffuse_weight = Rational(1, 4);
  p.atoms = {{2, Rational(1, 2)}, {3, Rational(1, 4)}};
  const HyperfiniteProfile back = HyperfiniteProfile::from_json(p.to_json());
  CHECK(back == p);

  CHECK(parse_rational(nlohmann::json("3/4")) == Rational(3, 4));
  CHECK(parse_rational(nlohmann::json(1)) == Rational(1));
  CHECK(parse_rational(nlohmann::json(0.5)) == Rational(1, 2));
  CHECK_THROWS_AS(parse_rational(nlohmann::json("1/0")), std::invalid_argument);
}
