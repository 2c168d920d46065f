#include "orbilab/ncalg.hpp"

#include <cmath>

#include "doctest.h"
#include "orbilab/rng.hpp"
#include "test_helpers.hpp"

using namespace orbilab;
using orbilab::testing::random_hermitian;

namespace {

Word word_from(std::initializer_list<std::pair<int, int>> letters) {
  Word w;
  for (const auto& [fam, var] : letters) w.letters.push_back({fam, var, false});
  return w;
}

double catalan_oracle(int k) {
  // independent route: C_k = binom(2k, k) - binom(2k, k+1)
  auto binom = [](int n, int r) {
    double b = 1.0;
    for (int i = 0; i < r; ++i) b = b * (n - i) / (i + 1);
    return b;
  };
  return binom(2 * k, k) - binom(2 * k, k + 1);
}

}  // namespace

TEST_CASE("eval_word basics") {
  CMatrix p = CMatrix::Zero(2, 2);
  p(0, 0) = 1.0;
  std::vector<std::vector<CMatrix>> assign = {{p}};

  CHECK(eval_word(Word::empty(), assign) == Complex(1.0, 0.0));
  CHECK(eval_word(Word::power(2), assign).real() == doctest::Approx(0.5));

  SUBCASE("cyclic rotations agree on a seeded assignment") {
    RngStream rng(21, 0);
    std::vector<std::vector<CMatrix>> mats = {{random_hermitian(6, rng).mat()},
                                              {random_hermitian(6, rng).mat()}};
    const Word w = word_from({{0, 0}, {1, 0}, {0, 0}, {0, 0}, {1, 0}});
    const Complex base = eval_word(w, mats);
    for (int shift = 1; shift < w.length(); ++shift) {
      CHECK(std::abs(eval_word(w.rotated(shift), mats) - base) < 1e-12);
    }
  }

  SUBCASE("dimension mismatch names the letter") {
    std::vector<std::vector<CMatrix>> bad = {{p}, {CMatrix::Identity(3, 3)}};
    CHECK_THROWS_WITH_AS(eval_word(word_from({{0, 0}, {1, 0}}), bad),
                         doctest::Contains("letter 1"), std::invalid_argument);
  }
}

TEST_CASE("catalog moments") {
  const TracialSpec s = TracialSpec::semicircular();
  CHECK(s.moment(Word::power(4)).real() == doctest::Approx(2.0));
  for (int k = 1; k <= 5; ++k) {
    CHECK(s.moment(Word::power(2 * k)).real() == doctest::Approx(catalan_oracle(k)));
    CHECK(s.moment(Word::power(2 * k - 1)).real() == doctest::Approx(0.0));
  }

  const TracialSpec p = TracialSpec::projection(0.3);
  for (int k = 1; k <= 6; ++k) {
    CHECK(p.moment(Word::power(k)).real() == doctest::Approx(0.3));
  }

  const TracialSpec atoms = TracialSpec::finite_atoms({1.0, -1.0}, {0.5, 0.5});
  CHECK(atoms.moment(Word::power(2)).real() == doctest::Approx(1.0));
  CHECK(atoms.moment(Word::power(3)).real() == doctest::Approx(0.0));
}

TEST_CASE("free product moments") {
  SUBCASE("pair moment factorizes") {
    const TracialSpec f = TracialSpec::free_product(
        {TracialSpec::projection(1.0 / 3), TracialSpec::projection(0.5)});
    CHECK(f.moment(word_from({{0, 0}, {1, 0}})).real() == doctest::Approx(1.0 / 6));
  }

  SUBCASE("alternating centered words vanish: free Rademacher pair") {
    const TracialSpec f = TracialSpec::free_product(
        {TracialSpec::finite_atoms({1.0, -1.0}, {0.5, 0.5}),
         TracialSpec::finite_atoms({1.0, -1.0}, {0.5, 0.5})});
    CHECK(std::abs(f.moment(word_from({{0, 0}, {1, 0}, {0, 0}, {1, 0}}))) < 1e-14);
    CHECK(f.moment(word_from({{0, 0}, {0, 0}, {1, 0}, {1, 0}})).real() ==
          doctest::Approx(1.0));
  }

  SUBCASE("free projections at trace one half") {
    const TracialSpec f = TracialSpec::free_product(
        {TracialSpec::projection(0.5), TracialSpec::projection(0.5)});
    const Word pq = word_from({{0, 0}, {1, 0}});
    const Word pqpq = word_from({{0, 0}, {1, 0}, {0, 0}, {1, 0}});
    const Word pqppqp = word_from({{0, 0}, {1, 0}, {0, 0}, {0, 0}, {1, 0}, {0, 0}});
    const Word pqpqpqp =
        word_from({{0, 0}, {1, 0}, {0, 0}, {1, 0}, {0, 0}, {1, 0}, {0, 0}});

    CHECK(f.moment(pq).real() == doctest::Approx(0.25));
    CHECK(f.moment(pqpq).real() == doctest::Approx(3.0 / 16));
    // second moment of the compressed element pqp equals tau(pqpq)
    CHECK(f.moment(pqppqp).real() == doctest::Approx(3.0 / 16));
    // arcsine moments of pqp under the compressed trace: tau((pqp)^3) = 5/32
    CHECK(f.moment(pqpqpqp).real() == doctest::Approx(5.0 / 32));
  }

  SUBCASE("free semicircular pair") {
    const TracialSpec f = TracialSpec::free_product(
        {TracialSpec::semicircular(), TracialSpec::semicircular()});
    CHECK(std::abs(f.moment(word_from({{0, 0}, {1, 0}, {0, 0}, {1, 0}}))) < 1e-14);
    CHECK(f.moment(word_from({{0, 0}, {0, 0}, {1, 0}, {1, 0}})).real() ==
          doctest::Approx(1.0));
  }

  SUBCASE("single-family free product reduces to the marginal") {
    const TracialSpec f =
        TracialSpec::free_product({TracialSpec::semicircular()});
    for (int k = 1; k <= 8; ++k) {
      CHECK(f.moment(Word::power(k)).real() ==
            doctest::Approx(TracialSpec::semicircular().moment(Word::power(k)).real()));
    }
  }
}

TEST_CASE("traciality under cyclic rotation") {
  RngStream rng(22, 0);
  const TracialSpec spec = TracialSpec::free_product(
      {TracialSpec::projection(0.4), TracialSpec::semicircular(),
       TracialSpec::finite_atoms({2.0, -1.0}, {0.25, 0.75})});
  for (int trial = 0; trial < 200; ++trial) {
    const int len = 1 + static_cast<int>(rng.uniform_below(6));
    Word w;
    for (int i = 0; i < len; ++i) {
      w.letters.push_back({static_cast<int>(rng.uniform_below(3)), 0, false});
    }
    const Complex base = spec.moment(w);
    const int shift = 1 + static_cast<int>(rng.uniform_below(len));
    CHECK(std::abs(spec.moment(w.rotated(shift)) - base) < 1e-10);
  }
}

TEST_CASE("moment magnitude bounded by operator bound power") {
  RngStream rng(23, 0);
  const TracialSpec spec = TracialSpec::free_product(
      {TracialSpec::semicircular(), TracialSpec::finite_atoms({2.0, -1.0}, {0.5, 0.5})});
  const double r = spec.operator_bound();
  CHECK(r == doctest::Approx(2.0));
  for (int trial = 0; trial < 100; ++trial) {
    const int len = 1 + static_cast<int>(rng.uniform_below(6));
    Word w;
    for (int i = 0; i < len; ++i) {
      w.letters.push_back({static_cast<int>(rng.uniform_below(2)), 0, false});
    }
    CHECK(std::abs(spec.moment(w)) <= std::pow(r, len) + 1e-12);
  }
}

TEST_CASE("matrix model spec agrees with eval_word") {
  RngStream rng(24, 0);
  std::vector<std::vector<CMatrix>> fams = {{random_hermitian(5, rng).mat()},
                                            {random_hermitian(5, rng).mat()}};
  const TracialSpec spec = TracialSpec::matrix_model(fams);
  const Word w = word_from({{0, 0}, {1, 0}, {1, 0}, {0, 0}});
  CHECK(spec.moment(w) == eval_word(w, fams));
}

TEST_CASE("word validation") {
  const TracialSpec p = TracialSpec::projection(0.5);
  Word bad_family = word_from({{1, 0}});
  CHECK_THROWS_AS(p.moment(bad_family), std::invalid_argument);

  Word adjoint_on_projection;
  adjoint_on_projection.letters.push_back({0, 0, true});
  CHECK_THROWS_AS(p.moment(adjoint_on_projection), std::invalid_argument);

  // adjoints are fine on unitary letters
  const TracialSpec v = TracialSpec::fubm_unitary(0.5);
  CHECK_NOTHROW(v.moment(adjoint_on_projection));
}

TEST_CASE("free unitary Brownian motion marginal moments") {
  const double t = 0.3;
  const TracialSpec v = TracialSpec::fubm_unitary(t);
  CHECK(v.moment(Word::power(1)).real() == doctest::Approx(std::exp(-t / 2)));
  CHECK(v.moment(Word::power(2)).real() == doctest::Approx(std::exp(-t) * (1 - t)));
  CHECK(v.moment(Word::power(3)).real() ==
        doctest::Approx(std::exp(-1.5 * t) * (1 - 3 * t + 1.5 * t * t)));

  // words in v, v* reduce by the exponent sum
  Word vvstar;
  vvstar.letters.push_back({0, 0, false});
  vvstar.letters.push_back({0, 0, true});
  CHECK(v.moment(vvstar).real() == doctest::Approx(1.0));

  Word vvvstar;
  vvvstar.letters.push_back({0, 0, false});
  vvvstar.letters.push_back({0, 0, false});
  vvvstar.letters.push_back({0, 0, true});
  CHECK(v.moment(vvvstar).real() == doctest::Approx(std::exp(-t / 2)));
}

TEST_CASE("exponential-semicircular unitary marginal") {
  const double t = 0.25;
  const TracialSpec v = TracialSpec::exp_semicircular_unitary(t);
  const double s = std::sqrt(t);
  CHECK(v.moment(Word::power(1)).real() ==
        doctest::Approx(std::cyl_bessel_j(1, 2 * s) / s));
  CHECK(v.moment(Word::power(0)).real() == doctest::Approx(1.0));
}

TEST_CASE("liberated pair moment matches the closed form") {
  // tau(u p u* w p w*) = alpha^2 + c^4 (alpha - alpha^2) for u, w free
  // unitaries with first moment c, both free from the shared projection p.
  CMatrix proj = CMatrix::Zero(2, 2);
  proj(0, 0) = 1.0;
  const TracialSpec identical_pair = TracialSpec::matrix_model({{proj}, {proj}});
  const double alpha = 0.5;

  const Word y0y1 = word_from({{0, 0}, {1, 0}});

  SUBCASE("free unitary Brownian motion conjugators") {
    for (double t : {0.2, 0.5}) {
      const TracialSpec lib = TracialSpec::liberated(
          identical_pair, {TracialSpec::fubm_unitary(t), TracialSpec::fubm_unitary(t)});
      const double c = std::exp(-t / 2);
      const double expected = alpha * alpha + std::pow(c, 4) * (alpha - alpha * alpha);
      CHECK(lib.moment(y0y1).real() == doctest::Approx(expected));
    }
  }

  SUBCASE("exponential generator conjugators") {
    const double t = 0.2;
    const TracialSpec lib = TracialSpec::liberated(
        identical_pair, {TracialSpec::exp_semicircular_unitary(t),
                         TracialSpec::exp_semicircular_unitary(t)});
    const double c = std::cyl_bessel_j(1, 2 * std::sqrt(t)) / std::sqrt(t);
    const double expected = alpha * alpha + std::pow(c, 4) * (alpha - alpha * alpha);
    CHECK(lib.moment(y0y1).real() == doctest::Approx(expected));
  }

  SUBCASE("exact conjugation relations survive the rewriting") {
    const TracialSpec lib = TracialSpec::liberated(
        identical_pair,
        {TracialSpec::fubm_unitary(0.4), TracialSpec::fubm_unitary(0.4)});
    // v0* Y0 v0 = X0, so tau(v0* Y0 v0) = alpha exactly
    Word dressed;
    dressed.letters.push_back({2, 0, true});
    dressed.letters.push_back({0, 0, false});
    dressed.letters.push_back({2, 0, false});
    CHECK(lib.moment(dressed).real() == doctest::Approx(alpha));
    // and the dressed cross word recovers tau(X^2) = alpha exactly
    Word dressed_cross;
    dressed_cross.letters.push_back({2, 0, true});
    dressed_cross.letters.push_back({0, 0, false});
    dressed_cross.letters.push_back({2, 0, false});
    dressed_cross.letters.push_back({3, 0, true});
    dressed_cross.letters.push_back({1, 0, false});
    dressed_cross.letters.push_back({3, 0, false});
    CHECK(lib.moment(dressed_cross).real() == doctest::Approx(alpha));
  }
}

TEST_CASE("tracial spec JSON round trip") {
  RngStream rng(25, 0);
  std::vector<TracialSpec> specs;
  specs.push_back(TracialSpec::semicircular());
  specs.push_back(TracialSpec::projection(0.25));
  specs.push_back(TracialSpec::finite_atoms({1.5, -0.5}, {0.4, 0.6}));
  specs.push_back(TracialSpec::free_product(
      {TracialSpec::projection(0.5), TracialSpec::semicircular()}));
  specs.push_back(TracialSpec::matrix_model({{random_hermitian(3, rng).mat()}}));

  for (const TracialSpec& spec : specs) {
    const TracialSpec back = TracialSpec::from_json(spec.to_json());
    CHECK(back.family_count() == spec.family_count());
    for (int trial = 0; trial < 20; ++trial) {
      const int len = 1 + static_cast<int>(rng.uniform_below(4));
      Word w;
      for (int i = 0; i < len; ++i) {
        w.letters.push_back(
            {static_cast<int>(rng.uniform_below(spec.family_count())), 0, false});
      }
      CHECK(std::abs(spec.moment(w) - back.moment(w)) < 1e-12);
    }
  }
}

TEST_CASE("mf_free_deviation") {
  SUBCASE("scalar families are free from everything") {
    std::vector<std::vector<CMatrix>> fams = {
        {CMatrix::Identity(8, 8) * 1.7},
        {CMatrix::Identity(8, 8) * 0.3}};
    CHECK(mf_free_deviation(fams, 4) < 1e-12);
  }

  SUBCASE("coinciding sign matrices are far from free") {
    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 1.0;
    d(1, 1) = -1.0;
    std::vector<std::vector<CMatrix>> fams = {{d}, {d}};
    CHECK(mf_free_deviation(fams, 4) >= 1.0);
  }

  SUBCASE("budget exceeded reports the count") {
    std::vector<std::vector<CMatrix>> fams = {{CMatrix::Identity(2, 2)},
                                              {CMatrix::Identity(2, 2)}};
    CHECK_THROWS_WITH_AS(mf_free_deviation(fams, 12, 100),
                         doctest::Contains("budget"), std::runtime_error);
  }
}

TEST_CASE("word_count closed form") {
  CHECK(word_count(2, 4) == 30);
  CHECK(word_count(6, 4) == 6 + 36 + 216 + 1296);
}
