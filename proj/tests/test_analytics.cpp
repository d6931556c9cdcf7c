#include <doctest.h>

#include <cmath>

#include "rcuage/analytics.hpp"
#include "rcuage/random.hpp"

using namespace rcuage;

// Reference values below were computed once with mpmath at 30 digits by
// integrating alpha * exp(-b_k (1 - e^{-mu w})) e^{-alpha w} over w in
// [0, inf) directly, i.e. without the y-substitution or the Taylor series.
namespace ref {
constexpr double p_e1_111 = 0.786938680574733152792;
constexpr double p_e1_0p5_10_1 = 0.186470041663707786211;
constexpr double p_e1_1_10_1 = 0.198652410600182906581;
constexpr double complement_k40_111 = 4.54747350886326255555e-13;
constexpr double en_111 = 1.44988310829781094666;
constexpr double jensen_111 = 1.76449978034844420919;
constexpr double en_1_10_1 = 3.41197486208074112983;
constexpr double jensen_1_10_1 = 4.00964035040398366828;
constexpr double en_2_5_1 = 3.25005500209527915953;
constexpr double en_0p5_5_1 = 2.09882710073289093378;
}  // namespace ref

TEST_CASE("a_w") {
  CHECK(a_w(1, 0) == 1.0);
  CHECK(a_w(1, 1) == doctest::Approx(1 - std::exp(-1.0)).epsilon(1e-15));
  CHECK(a_w(1, 1) == doctest::Approx(0.632120558828557678).epsilon(1e-15));
  // (1 - e^{-50}) / 50 rounds to exactly 0.02 in double precision
  CHECK(a_w(1, 50) <= 0.02);
  CHECK(a_w(1, 51) < 0.02);
  CHECK(a_w(2, 1e-12) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(a_w(1, -1), DomainError);
  CHECK_THROWS_AS(a_w(0, 1), DomainError);

  double prev = 1.0;
  for (double w = 0.01; w < 100; w *= 1.3) {
    const double v = a_w(1.7, w);
    CHECK(v < prev);
    CHECK(v > 0);
    prev = v;
  }
}

TEST_CASE("lemma1_epsilon") {
  CHECK(lemma1_epsilon({1, 1, 1}, 1, 1e-12) == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(lemma1_epsilon({1, 7, 1}, 3, 1e-12) == doctest::Approx(0.875).epsilon(1e-10));
  CHECK(lemma1_epsilon({1, 1, 1}, 2, 1) == doctest::Approx(0.841969860292860580).epsilon(1e-14));
  CHECK_THROWS_AS(lemma1_epsilon({1, 1, 1}, 0, 1), DomainError);
  CHECK_THROWS_AS(lemma1_epsilon({1, 1, 1}, 1, 0), DomainError);

  const ModelParams p{0.7, 1, 1.3};
  for (std::int64_t k = 1; k < 10; ++k) {
    for (double w = 0.1; w < 20; w *= 2) {
      const double e = lemma1_epsilon(p, k, w);
      CHECK(e > 0);
      CHECK(e < 1);
      CHECK(lemma1_epsilon(p, k + 1, w) > e);
      CHECK(lemma1_epsilon(p, k, 2 * w) > e);
    }
  }
}

TEST_CASE("p_ek_given_w") {
  CHECK(p_ek_given_w({1, 0, 1}, 3, 5) == 1.0);
  CHECK(p_ek_given_w({2, 3, 1}, 1, 0) == 1.0);
  CHECK(p_ek_given_w({1, 1, 1}, 1, 60) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(p_ek_given_w({1, 1, 1}, 1, 60) == doctest::Approx(0.606530659712633).epsilon(1e-12));
  CHECK_THROWS_AS(p_ek_given_w({1, 1, 1}, 0, 1), DomainError);
  CHECK_THROWS_AS(p_ek_given_w({1, 1, 1}, 1, -1), DomainError);

  const ModelParams p{1, 4, 1};
  double prev = 1.0;
  for (double w = 0.05; w < 30; w *= 1.5) {
    const double v = p_ek_given_w(p, 2, w);
    CHECK(v <= prev);
    CHECK(v >= std::exp(-b_k(p, 2)));
    prev = v;
  }
}

TEST_CASE("p_ek_series matches the reference integral") {
  const SeriesControl ctrl;
  CHECK(p_ek_series({1, 0, 1}, 1, ctrl) == 1.0);
  // default tol is 1e-10 absolute
  CHECK(std::abs(p_ek_series({1, 1, 1}, 1, ctrl) - ref::p_e1_111) <= ctrl.tol);
  CHECK(std::abs(p_ek_series({0.5, 10, 1}, 1, ctrl) - ref::p_e1_0p5_10_1) <= ctrl.tol);
  CHECK(std::abs(p_ek_series({1, 10, 1}, 1, ctrl) - ref::p_e1_1_10_1) <= ctrl.tol);
  SeriesControl fine;
  fine.tol = 1e-15;
  CHECK(p_ek_series({1, 1, 1}, 1, fine) == doctest::Approx(ref::p_e1_111).epsilon(1e-14));
  CHECK(p_ek_series({1, 10, 1}, 1, fine) == doctest::Approx(ref::p_e1_1_10_1).epsilon(1e-13));

  const double p40 = p_ek_series({1, 1, 1}, 40, ctrl);
  CHECK(p40 >= 1 - 1e-6);
  const auto c40 = p_ek_complement({1, 1, 1}, 40, 1e-20, ctrl);
  CHECK(c40.value == doctest::Approx(ref::complement_k40_111).epsilon(1e-9));
  CHECK(c40.value <= b_k({1, 1, 1}, 40));
}

TEST_CASE("p_ek_complement reports an honest truncation bound") {
  SeriesControl ctrl;
  for (double lambda : {0.1, 3.0, 40.0, 700.0, 5000.0}) {
    CAPTURE(lambda);
    const ModelParams p{2, lambda, 1};
    const auto loose = p_ek_complement(p, 1, 1e-4, ctrl);
    const auto tight = p_ek_complement(p, 1, 1e-15, ctrl);
    CHECK(loose.truncation_bound < 1e-4);
    CHECK(tight.truncation_bound < 1e-15);
    CHECK(std::abs(tight.value - loose.value) <= loose.truncation_bound + 1e-14);
    CHECK(tight.value > 0);
    CHECK(tight.value < 1);
  }
  ctrl.max_j = 3;
  CHECK_THROWS_AS(p_ek_complement({1, 5000, 1}, 1, 1e-12, ctrl), ConvergenceError);
}

TEST_CASE("p_ek_quadrature") {
  const SeriesControl ctrl;
  CHECK(p_ek_quadrature({1, 0, 1}, 2, ctrl) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(p_ek_quadrature({1, 1, 1}, 1, ctrl) - ref::p_e1_111) < 1e-10);
  // alpha/mu < 1 exercises the endpoint substitution
  CHECK(std::abs(p_ek_quadrature({0.5, 10, 1}, 1, ctrl) - ref::p_e1_0p5_10_1) < 1e-10);
  CHECK(std::abs(p_ek_quadrature({0.5, 10, 1}, 1, ctrl) - p_ek_series({0.5, 10, 1}, 1, ctrl)) <
        1e-8);
  CHECK(std::abs(p_ek_quadrature({1.5, 2, 1}, 1, ctrl) - p_ek_series({1.5, 2, 1}, 1, ctrl)) <
        1e-8);
  CHECK_THROWS_AS(p_ek_quadrature({1, 1, 1}, 0, ctrl), DomainError);
}

TEST_CASE("series and quadrature agree over a parameter grid") {
  const SeriesControl ctrl;
  double worst = 0.0;
  for (double alpha : {0.1, 0.5, 0.9, 1.0, 1.3, 3.0, 20.0, 100.0}) {
    for (double lambda : {0.5, 5.0, 25.0}) {
      for (double mu : {0.5, 1.0, 2.0}) {
        const ModelParams p{alpha, lambda, mu};
        for (std::int64_t k = 1; k <= 20; ++k) {
          worst = std::max(worst,
                           std::abs(p_ek_series(p, k, ctrl) - p_ek_quadrature(p, k, ctrl)));
        }
      }
    }
  }
  CHECK(worst <= 1e-8);
}

TEST_CASE("en_exact reference values") {
  const SeriesControl ctrl;
  const auto r = en_exact({1, 1, 1}, ctrl);
  CHECK(std::abs(r.en_exact - ref::en_111) <= ctrl.tol);
  CHECK(std::abs(r.en_bound_jensen - ref::jensen_111) <= ctrl.tol);
  CHECK(r.en_bound_simple == 2.0);
  CHECK(r.truncation_bound <= ctrl.tol);
  CHECK(r.terms_used_k >= 1);

  CHECK(std::abs(en_exact({1, 10, 1}, ctrl).en_exact - ref::en_1_10_1) <= ctrl.tol);
  CHECK(std::abs(en_bound_jensen({1, 10, 1}, ctrl) - ref::jensen_1_10_1) <= ctrl.tol);
  CHECK(std::abs(en_exact({2, 5, 1}, ctrl).en_exact - ref::en_2_5_1) <= ctrl.tol);
  CHECK(std::abs(en_exact({0.5, 5, 1}, ctrl).en_exact - ref::en_0p5_5_1) <= ctrl.tol);

  SeriesControl fine;
  fine.tol = 1e-14;
  CHECK(en_exact({1, 1, 1}, fine).en_exact == doctest::Approx(ref::en_111).epsilon(1e-13));
  CHECK(en_exact({1, 1, 1}, fine).en_bound_jensen ==
        doctest::Approx(ref::jensen_111).epsilon(1e-13));
}

TEST_CASE("en_exact edge cases") {
  const SeriesControl ctrl;
  const auto none = en_exact({3, 0, 1}, ctrl);
  CHECK(none.en_exact == 1.0);
  CHECK(none.en_bound_jensen == 1.0);
  CHECK(none.en_bound_simple == 1.0);
  CHECK(none.terms_used_k == 0);
  CHECK(en_bound_jensen({3, 0, 1}, ctrl) == 1.0);

  const auto fast = en_exact({1000, 10, 1}, ctrl);
  CHECK(fast.en_exact > 10.5);
  CHECK(fast.en_exact < 11.0);

  // lambda -> 0
  CHECK(en_exact({1, 1e-9, 1}, ctrl).en_exact == doctest::Approx(1.0).epsilon(1e-8));

  SeriesControl tiny;
  tiny.max_k = 5;
  CHECK_THROWS_AS(en_exact({100, 10, 1}, tiny), ConvergenceError);
}

TEST_CASE("en_exact truncation bound stays within tol") {
  for (double tol : {1e-4, 1e-8, 1e-12}) {
    SeriesControl ctrl;
    ctrl.tol = tol;
    for (const ModelParams p : {ModelParams{0.2, 3, 1}, ModelParams{50, 10, 1},
                                ModelParams{1, 200, 0.5}}) {
      const auto r = en_exact(p, ctrl);
      CHECK(r.truncation_bound <= tol);
      SeriesControl fine;
      fine.tol = 1e-14;
      CHECK(std::abs(en_exact(p, fine).en_exact - r.en_exact) <= tol + 1e-12);
    }
  }
}

TEST_CASE("outer truncation is the first K whose geometric tail is below tol/2") {
  SeriesControl ctrl;
  ctrl.tol = 1e-6;
  const ModelParams p{1, 4, 1};
  const auto k = outer_terms(p, ctrl);
  CHECK(4 * std::pow(0.5, static_cast<double>(k)) < 0.5e-6);
  CHECK(4 * std::pow(0.5, static_cast<double>(k - 1)) >= 0.5e-6);
}

TEST_CASE("simple bound and age") {
  CHECK(en_bound_simple({1, 10, 1}) == 11.0);
  CHECK(en_bound_simple({1, 0, 1}) == 1.0);
  CHECK(en_bound_simple({1, 5, 2}) == 3.5);
  CHECK(avg_age({2, 1, 1}) == 1.0);
  CHECK(avg_age({0.5, 1, 1}) == 4.0);
  CHECK_THROWS_AS(avg_age({0, 1, 1}), DomainError);
}

TEST_CASE("bound chain holds on random parameter triples") {
  RandomSource rng(2024, "bound-chain");
  const SeriesControl ctrl;
  for (int i = 0; i < 200; ++i) {
    const ModelParams p{std::exp(rng.uniform(std::log(0.05), std::log(200.0))),
                        rng.uniform(0.0, 30.0),
                        std::exp(rng.uniform(std::log(0.1), std::log(10.0)))};
    CAPTURE(to_string(p));
    const auto r = en_exact(p, ctrl);
    CHECK(r.en_exact >= 1.0);
    CHECK(r.en_exact <= r.en_bound_jensen + 1e-9);
    CHECK(r.en_bound_jensen <= r.en_bound_simple + 1e-9);
  }
}

TEST_CASE("en_exact is nondecreasing in lambda and alpha") {
  const SeriesControl ctrl;
  for (double alpha : {0.2, 1.0, 5.0}) {
    double prev = 1.0;
    for (double lambda = 0; lambda <= 20; lambda += 0.5) {
      const double v = en_exact({alpha, lambda, 1}, ctrl).en_exact;
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  }
  for (double rho : {1.0, 5.0, 10.0}) {
    double prev = 1.0;
    for (double alpha = 0.1; alpha <= 100; alpha *= 1.2) {
      const double v = en_exact({alpha, rho, 1}, ctrl).en_exact;
      CHECK(v >= prev - 1e-12);
      CHECK(v <= 1 + rho + 1e-9);
      prev = v;
    }
  }
}

TEST_CASE("Jensen gap is largest for slow writers and vanishes as alpha grows") {
  // Reference from an independent scipy evaluation of the w-integral form.
  const SeriesControl ctrl;
  const auto slow = en_exact({0.1, 5, 1}, ctrl);
  CHECK(slow.en_exact == doctest::Approx(1.376148881768631).epsilon(1e-8));
  CHECK(slow.en_bound_jensen == doctest::Approx(2.1520202939015545).epsilon(1e-8));
  double prev_gap = INFINITY;
  for (double alpha : {1.0, 10.0, 100.0, 1000.0}) {
    const auto r = en_exact({alpha, 5, 1}, ctrl);
    const double gap = (r.en_bound_jensen - r.en_exact) / r.en_exact;
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
  CHECK(prev_gap < 0.01);
}
