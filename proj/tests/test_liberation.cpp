#include "orbilab/liberation.hpp"

#include <cmath>

#include "doctest.h"
#include "orbilab/stats.hpp"

using namespace orbilab;

TEST_CASE("path basics") {
  RngStream rng(91, 0);
  const FubmPath path = simulate_fubm(16, {0.0, 0.1, 0.3}, 200, 3, rng);

  SUBCASE("starts at the identity") {
    for (const auto& copy : path.unitaries) {
      CHECK((copy[0] - CMatrix::Identity(16, 16)).norm() == 0.0);
    }
  }

  SUBCASE("stays unitary along the path") {
    for (const auto& copy : path.unitaries) {
      for (const CMatrix& u : copy) {
        CMatrix defect = u.adjoint() * u;
        defect.diagonal().array() -= 1.0;
        CHECK(operator_norm(defect) < 1e-8);
      }
    }
  }

  SUBCASE("identical seeds give bit-identical paths") {
    RngStream a(91, 0);
    const FubmPath again = simulate_fubm(16, {0.0, 0.1, 0.3}, 200, 3, a);
    for (std::size_t c = 0; c < path.unitaries.size(); ++c) {
      for (std::size_t k = 0; k < path.times.size(); ++k) {
        CHECK((path.unitaries[c][k] - again.unitaries[c][k]).cwiseAbs().maxCoeff() ==
              0.0);
      }
    }
  }

  SUBCASE("worker count does not change the draw") {
    RngStream a(91, 0), b(91, 0);
    const FubmPath one = simulate_fubm(8, {0.0, 0.2}, 150, 4, a, Retraction::Polar, 1);
    const FubmPath four = simulate_fubm(8, {0.0, 0.2}, 150, 4, b, Retraction::Polar, 4);
    for (int c = 0; c < 4; ++c) {
      CHECK((one.unitaries[c][1] - four.unitaries[c][1]).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  SUBCASE("grid validation") {
    RngStream a(91, 1);
    CHECK_THROWS_AS(simulate_fubm(8, {0.1, 0.2}, 200, 1, a), std::invalid_argument);
    CHECK_THROWS_AS(simulate_fubm(8, {0.0, 0.2}, 50, 1, a), std::invalid_argument);
  }
}

TEST_CASE("drift identity: mean trace follows exp(-t/2)") {
  RngStream rng(92, 0);
  const FubmPath path =
      simulate_fubm(48, {0.0, 0.25, 0.5, 1.0}, 250, 400, rng, Retraction::Polar, 8);
  const FubmStats stats = fubm_stats(path);
  for (std::size_t k = 1; k < stats.times.size(); ++k) {
    const double target = std::exp(-stats.times[k] / 2.0);
    const double gap = std::abs(stats.mean_trace[k].real() - target);
    CHECK(gap < 3.0 * stats.mean_trace_se[k] + 1e-4);
    CHECK(std::abs(stats.mean_trace[k].imag()) < 3.0 * stats.mean_trace_se[k] + 1e-4);
  }
}

TEST_CASE("both retractions satisfy the drift identity") {
  RngStream rng(93, 0);
  const FubmPath path =
      simulate_fubm(32, {0.0, 0.5}, 250, 300, rng, Retraction::Exponential, 8);
  const FubmStats stats = fubm_stats(path);
  const double target = std::exp(-0.25);
  CHECK(std::abs(stats.mean_trace[1].real() - target) <
        3.0 * stats.mean_trace_se[1] + 2e-4);
}

TEST_CASE("square-root scaling of the distance from the identity") {
  RngStream rng(94, 0);
  std::vector<double> grid = {0.0};
  for (int k = 0; k < 9; ++k) grid.push_back(1e-3 * std::pow(10.0, k / 4.0));
  const FubmPath path = simulate_fubm(32, grid, 1000, 100, rng, Retraction::Polar, 8);
  const FubmStats stats = fubm_stats(path);

  std::vector<double> log_t, log_d;
  for (std::size_t k = 1; k < grid.size(); ++k) {
    log_t.push_back(std::log(grid[k]));
    log_d.push_back(std::log(stats.mean_opnorm_dist[k]));
  }
  const double slope = regression_slope(log_t, log_d);
  CHECK(slope == doctest::Approx(0.5).epsilon(0.2));  // 0.5 +- 0.1

  SUBCASE("distance grows along the grid") {
    for (std::size_t k = 1; k + 1 < stats.times.size(); ++k) {
      CHECK(stats.mean_opnorm_dist[k] <= stats.mean_opnorm_dist[k + 1] + 1e-9);
    }
  }

  SUBCASE("small-time eigenvalue arguments concentrate near zero") {
    // at t = 1e-3 every eigenvalue argument sits within half a radian
    long outside = 0;
    const auto& hist = stats.arg_hist[1];
    const int bins = static_cast<int>(hist.size());
    for (int b = 0; b < bins; ++b) {
      const double left = -std::numbers::pi + 2 * std::numbers::pi * b / bins;
      if (std::abs(left) > 0.5) outside += hist[b];
    }
    CHECK(outside == 0);
  }
}

TEST_CASE("liberation trajectory") {
  RngStream rng(95, 0);
  CMatrix p = CMatrix::Zero(2, 2);
  p(0, 0) = 1.0;
  const TracialSpec pair = TracialSpec::matrix_model({{p}, {p}});
  const int n = 120;
  const auto xi = reference_microstates(pair, n);
  const LiberationTrajectory traj =
      liberation_trajectory(xi, {0.0, 0.5, 5.0}, 100, rng);

  SUBCASE("time zero leaves the references untouched") {
    for (int i = 0; i < 2; ++i) {
      CHECK((traj.rotated[0][i][0] - xi[i][0]).norm() == 0.0);
    }
  }

  SUBCASE("spectra are invariant along the path") {
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      for (int i = 0; i < 2; ++i) {
        const EighResult before = eigh(HermitianMatrix(xi[i][0]));
        const CMatrix& rot = traj.rotated[k][i][0];
        const EighResult after = eigh(HermitianMatrix((rot + rot.adjoint()) / 2.0));
        for (int e = 0; e < n; ++e) {
          CHECK(std::abs(before.spectrum.values()(e) - after.spectrum.values()(e)) <
                1e-9);
        }
      }
    }
  }

  SUBCASE("long times drive the families toward freeness") {
    const double dev = mf_free_deviation({traj.rotated[2][0], traj.rotated[2][1]}, 4);
    CHECK(dev < 0.15);
  }
}

TEST_CASE("dimension curve") {
  CMatrix p = CMatrix::Zero(2, 2);
  p(0, 0) = 1.0;

  SUBCASE("single family curve is identically zero") {
    const TracialSpec single = TracialSpec::projection(0.5);
    const auto xi = reference_microstates(single, 48);
    const DimensionCurve c = delta0orb_curve(
        single, xi, MicrostateParams{48, 4, 0.1, std::nullopt}, {0.5, 0.2}, 100,
        RngStream(96), CurveGenerator::Fubm, 4, 200);
    for (std::size_t k = 0; k < c.values.size(); ++k) {
      CHECK_FALSE(c.zero_hit[k]);
      CHECK(c.values[k] == 0.0);
    }
  }

  SUBCASE("free pair stays near zero, identical pair is flagged far below") {
    const int n = 64;
    const TracialSpec free_pair = TracialSpec::free_product(
        {TracialSpec::projection(0.5), TracialSpec::projection(0.5)});
    const TracialSpec identical_pair = TracialSpec::matrix_model({{p}, {p}});
    const MicrostateParams params{n, 4, 0.1, std::nullopt};
    const std::vector<double> grid = {0.2, 0.1};

    for (CurveGenerator gen : {CurveGenerator::Fubm, CurveGenerator::ExpSqrtT}) {
      const DimensionCurve cf =
          delta0orb_curve(free_pair, reference_microstates(free_pair, n), params, grid,
                          100, RngStream(97), gen, 4, 200);
      for (std::size_t k = 0; k < cf.values.size(); ++k) {
        CHECK_FALSE(cf.zero_hit[k]);
        CHECK(std::abs(cf.values[k]) < 0.2);
      }
      const DimensionCurve ci = delta0orb_curve(
          identical_pair, reference_microstates(identical_pair, n), params, grid, 100,
          RngStream(98), gen, 4, 200);
      for (std::size_t k = 0; k < ci.values.size(); ++k) {
        CHECK(ci.zero_hit[k]);
        CHECK(ci.values[k] <= -0.2);  // -inf satisfies the separation threshold
        CHECK(std::isinf(ci.values[k]));
      }
    }
  }

  SUBCASE("curves are deterministic given the seed") {
    const TracialSpec single = TracialSpec::projection(0.5);
    const auto xi = reference_microstates(single, 24);
    const MicrostateParams params{24, 3, 0.1, std::nullopt};
    const DimensionCurve a = delta0orb_curve(single, xi, params, {0.3}, 100,
                                             RngStream(99), CurveGenerator::Fubm, 2, 150);
    const DimensionCurve b = delta0orb_curve(single, xi, params, {0.3}, 100,
                                             RngStream(99), CurveGenerator::Fubm, 8, 150);
    CHECK(a.hit_fractions[0] == b.hit_fractions[0]);
  }

  SUBCASE("grid validation") {
    const TracialSpec single = TracialSpec::projection(0.5);
    const auto xi = reference_microstates(single, 8);
    const MicrostateParams params{8, 2, 0.1, std::nullopt};
    CHECK_THROWS_AS(delta0orb_curve(single, xi, params, {0.2, 0.5}, 100, RngStream(1),
                                    CurveGenerator::Fubm),
                    std::invalid_argument);
    CHECK_THROWS_AS(delta0orb_curve(single, xi, params, {1.5}, 100, RngStream(1),
                                    CurveGenerator::Fubm),
                    std::invalid_argument);
  }
}
