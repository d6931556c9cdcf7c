#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "rcuage/core.hpp"
#include "rcuage/random.hpp"

using namespace rcuage;

TEST_CASE("validate derives q and rho") {
  auto d = validate({1, 1, 1});
  CHECK(d.q == 0.5);
  CHECK(d.rho == 1.0);

  d = validate({3, 10, 1});
  CHECK(d.q == 0.75);
  CHECK(d.rho == 10.0);

  d = validate({2, 0, 5});
  CHECK(d.rho == 0.0);
  CHECK(d.q > 0.0);
  CHECK(d.q < 1.0);
}

TEST_CASE("validate rejects out-of-domain rates") {
  const double inf = std::numeric_limits<double>::infinity();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(validate({0, 1, 1}), DomainError);
  CHECK_THROWS_AS(validate({-1, 1, 1}), DomainError);
  CHECK_THROWS_AS(validate({1, -0.1, 1}), DomainError);
  CHECK_THROWS_AS(validate({1, 1, 0}), DomainError);
  CHECK_THROWS_AS(validate({inf, 1, 1}), DomainError);
  CHECK_THROWS_AS(validate({1, nan, 1}), DomainError);
  CHECK_THROWS_AS(validate({1, 1, inf}), DomainError);
}

TEST_CASE("b_k examples") {
  CHECK(b_k({1, 1, 1}, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(b_k({1, 0, 1}, 3) == 0.0);
  CHECK(b_k({7, 0, 0.3}, 3) == 0.0);
  CHECK(b_k({1, 2, 1}, 2) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(b_k({1, 1, 1}, 0), DomainError);
  CHECK_THROWS_AS(b_k({1, 1, 1}, -4), DomainError);
}

TEST_CASE("b_k decays geometrically with ratio q") {
  RandomSource rng(7, "b_k-property");
  for (int trial = 0; trial < 200; ++trial) {
    const ModelParams p{rng.uniform(0.01, 50), rng.uniform(0, 50), rng.uniform(0.01, 50)};
    const double q = validate(p).q;
    for (std::int64_t k = 1; k < 60; ++k) {
      const double next = b_k(p, k + 1);
      const double here = b_k(p, k);
      CHECK(next == doctest::Approx(q * here).epsilon(1e-13));
      if (p.lambda > 0) CHECK(next < here);
    }
  }
}

TEST_CASE("SeriesControl checks its invariants") {
  SeriesControl ctrl;
  CHECK_NOTHROW(ctrl.check());
  ctrl.quad_points = 8;
  CHECK_THROWS_AS(ctrl.check(), DomainError);
  ctrl = {};
  ctrl.tol = 0;
  CHECK_THROWS_AS(ctrl.check(), DomainError);
  ctrl = {};
  ctrl.max_k = 0;
  CHECK_THROWS_AS(ctrl.check(), DomainError);
}

TEST_CASE("RandomSource is reproducible per (seed, stream)") {
  RandomSource a(123, "stream");
  RandomSource b(123, "stream");
  bool equal = true;
  for (int i = 0; i < 1'000'000; ++i) {
    equal = equal && (a.uniform() == b.uniform());
  }
  CHECK(equal);

  RandomSource c(123, "other");
  RandomSource d(124, "stream");
  RandomSource e(123, "stream");
  const double first = e.uniform();
  CHECK(c.uniform() != first);
  CHECK(d.uniform() != first);
}

TEST_CASE("seeding primitives match their reference values") {
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("uniform stays in the open unit interval") {
  RandomSource rng(1, "u");
  double lo = 1, hi = 0, sum = 0;
  const int n = 200'000;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    lo = std::min(lo, u);
    hi = std::max(hi, u);
    sum += u;
  }
  CHECK(lo > 0.0);
  CHECK(hi < 1.0);
  CHECK(sum / n == doctest::Approx(0.5).epsilon(0.01));
}

namespace {

struct Moments {
  double mean = 0;
  double var = 0;
};

template <class Draw>
Moments moments(int n, Draw draw) {
  double s = 0, ss = 0;
  for (int i = 0; i < n; ++i) {
    const double x = draw();
    s += x;
    ss += x * x;
  }
  const double m = s / n;
  return {m, ss / n - m * m};
}

}  // namespace

TEST_CASE("exponential sampler matches its moments") {
  RandomSource rng(3, "exp");
  const int n = 400'000;
  const auto m = moments(n, [&] { return rng.exponential(2.0); });
  // mean 0.5, sd 0.5: 4 standard errors
  CHECK(std::abs(m.mean - 0.5) < 4 * 0.5 / std::sqrt(n));
  CHECK(m.var == doctest::Approx(0.25).epsilon(0.02));
  CHECK_THROWS_AS(rng.exponential(0.0), DomainError);
}

TEST_CASE("poisson sampler: inversion and PTRS branches") {
  RandomSource rng(5, "poisson");
  for (double mean : {0.3, 4.0, 29.0, 30.0, 85.0, 1000.0}) {
    CAPTURE(mean);
    const int n = 200'000;
    const auto m = moments(n, [&] { return static_cast<double>(rng.poisson(mean)); });
    CHECK(std::abs(m.mean - mean) < 4 * std::sqrt(mean / n));
    CHECK(m.var == doctest::Approx(mean).epsilon(0.03));
  }
  CHECK(rng.poisson(0.0) == 0);
  CHECK_THROWS_AS(rng.poisson(-1.0), DomainError);
}

TEST_CASE("poisson PTRS reproduces the pmf at mean 40") {
  RandomSource rng(11, "ptrs");
  const double mean = 40.0;
  const int n = 400'000;
  std::vector<int> counts(120, 0);
  for (int i = 0; i < n; ++i) {
    const auto k = rng.poisson(mean);
    if (k < counts.size()) ++counts[k];
  }
  for (int k : {30, 35, 40, 45, 50}) {
    const double pmf = std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
    const double se = std::sqrt(pmf * (1 - pmf) / n);
    CAPTURE(k);
    CHECK(std::abs(counts[k] / static_cast<double>(n) - pmf) < 4.5 * se);
  }
}

TEST_CASE("integer gamma sampler has mean k/rate") {
  RandomSource rng(9, "gamma");
  const int n = 200'000;
  const auto m = moments(n, [&] { return rng.gamma_integer(3, 1.0); });
  CHECK(std::abs(m.mean - 3.0) < 3 * std::sqrt(3.0 / n));
  CHECK(m.var == doctest::Approx(3.0).epsilon(0.03));
  CHECK_THROWS_AS(rng.gamma_integer(0, 1.0), DomainError);
}
