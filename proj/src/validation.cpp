#include "rcuage/validation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "rcuage/analytics.hpp"
#include "rcuage/quadrature.hpp"
#include "rcuage/random.hpp"

namespace rcuage {

namespace {

constexpr std::uint64_t kMinSamples = 10'000;

void require_samples(std::uint64_t samples, const char* who) {
  if (samples < kMinSamples) {
    throw DomainError(std::string(who) + ": need at least 10^4 samples");
  }
}

// Standard error from the Beta(hits + 1, misses + 1) posterior: close to
// sqrt(p(1-p)/n) but never zero when every sample lands on one side.
McEstimate make_estimate(std::uint64_t hits, std::uint64_t samples) {
  const double n = static_cast<double>(samples);
  const double a = static_cast<double>(hits) + 1.0;
  const double b = n - static_cast<double>(hits) + 1.0;
  const double se = std::sqrt(a * b / ((a + b) * (a + b) * (a + b + 1.0)));
  return McEstimate{static_cast<double>(hits) / n, se, samples};
}

// Upper integration limit for Gamma(k, alpha): mean + 20 sd + 50/alpha
// leaves a tail far below 1e-12.
double gamma_upper_limit(double alpha, std::int64_t k) {
  const double kk = static_cast<double>(k);
  return (kk + 20.0 * std::sqrt(kk) + 50.0) / alpha;
}

std::string format_params(const ModelParams& p) { return to_string(p); }

}  // namespace

bool McEstimate::brackets(double value, double sigmas) const {
  return std::abs(estimate - value) <= sigmas * std_error;
}

double fy_density(double mu, double w, double y) {
  if (!(w > 0.0)) {
    throw DomainError("fy_density: w must be positive");
  }
  if (!(mu > 0.0)) {
    throw DomainError("fy_density: mu must be positive");
  }
  if (y < -w) {
    return 0.0;
  }
  if (y <= 0.0) {
    return -std::expm1(-mu * (w + y)) / w;
  }
  return (std::exp(-mu * y) - std::exp(-mu * (w + y))) / w;
}

double gamma_l_pdf(double alpha, std::int64_t k, double l) {
  if (!(alpha > 0.0)) {
    throw DomainError("gamma_l_pdf: alpha must be positive");
  }
  if (k < 1) {
    throw DomainError("gamma_l_pdf: k must be >= 1");
  }
  if (!(l >= 0.0)) {
    throw DomainError("gamma_l_pdf: l must be non-negative");
  }
  if (k == 1) {
    return alpha * std::exp(-alpha * l);
  }
  if (l == 0.0) {
    return 0.0;
  }
  const double kk = static_cast<double>(k);
  return std::exp(std::log(alpha) + (kk - 1.0) * std::log(alpha * l) - alpha * l -
                  std::lgamma(kk));
}

McEstimate mc_lemma1(const ModelParams& params, std::int64_t k, double w,
                     std::uint64_t samples, std::uint64_t seed) {
  validate(params);
  if (k < 1) throw DomainError("mc_lemma1: k must be >= 1");
  if (!(w > 0.0)) throw DomainError("mc_lemma1: w must be positive");
  require_samples(samples, "mc_lemma1");

  RandomSource rng(seed, "mc_lemma1");
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double u = rng.uniform(-w, 0.0);
    const double x = rng.exponential(params.mu);
    const double l = rng.gamma_integer(static_cast<std::uint64_t>(k), params.alpha);
    if (u + x <= l) ++hits;
  }
  return make_estimate(hits, samples);
}

McEstimate mc_p_ek(const ModelParams& params, std::int64_t k, std::uint64_t samples,
                   std::uint64_t seed) {
  validate(params);
  if (k < 1) throw DomainError("mc_p_ek: k must be >= 1");
  require_samples(samples, "mc_p_ek");

  RandomSource rng(seed, "mc_p_ek");
  std::uint64_t hits = 0;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double w = rng.exponential(params.alpha);
    const std::uint64_t readers = params.lambda > 0.0 ? rng.poisson(params.lambda * w) : 0;
    const double lag = rng.gamma_integer(static_cast<std::uint64_t>(k), params.alpha);
    double last_release = -w;
    for (std::uint64_t i = 0; i < readers; ++i) {
      last_release = std::max(last_release, rng.uniform(-w, 0.0) + rng.exponential(params.mu));
    }
    if (readers == 0 || last_release <= lag) ++hits;
  }
  return make_estimate(hits, samples);
}

namespace {

// sum_{n>=1} (-1)^{n+1} rho^n weight(n) / (r+1)_n
template <class Weight>
double alternating_rising(const ModelParams& params, Weight weight, const char* who) {
  const DerivedParams d = validate(params);
  if (d.rho == 0.0) return 0.0;
  const long double r = static_cast<long double>(params.alpha) / params.mu;
  const long double rho = d.rho;
  long double term = 1.0L;  // rho^n / (r+1)_n
  long double sum = 0.0L;
  long double biggest = 0.0L;
  for (int n = 1;; ++n) {
    term *= rho / (r + n);
    const long double t = term * weight(static_cast<long double>(n));
    sum += (n % 2 == 1) ? t : -t;
    biggest = std::max(biggest, t);
    if (n > rho && t <= 1e-19L * std::abs(sum)) break;
    if (n > 100000) throw ConvergenceError(std::string(who) + ": series did not converge");
  }
  if (biggest * 1e-18L > 1e-10L) {
    throw ConvergenceError(std::string(who) + ": cancellation too severe for " +
                           to_string(params));
  }
  return static_cast<double>(sum);
}

}  // namespace

double p_ek_lag_averaged(const ModelParams& params, std::int64_t k) {
  if (k < 1) throw DomainError("p_ek_lag_averaged: k must be >= 1");
  const long double r = static_cast<long double>(params.alpha) / params.mu;
  const long double kk = static_cast<long double>(k);
  const double complement = alternating_rising(
      params, [&](long double n) { return std::exp(-kk * std::log1p(n / r)); },
      "p_ek_lag_averaged");
  return 1.0 - complement;
}

double en_lag_averaged(const ModelParams& params) {
  const long double r = static_cast<long double>(params.alpha) / params.mu;
  return 1.0 + alternating_rising(params, [&](long double n) { return r / n; },
                                  "en_lag_averaged");
}

double p_ek_lag_averaged_quadrature(const ModelParams& params, std::int64_t k) {
  const DerivedParams d = validate(params);
  if (k < 1) throw DomainError("p_ek_lag_averaged_quadrature: k must be >= 1");
  const double r = params.alpha / params.mu;
  const double mu = params.mu;

  // P(still active | c) = 1 - E_w[exp(-c (1 - e^{-mu w}))]. With t = e^{-mu w}
  // the law of t has density r t^{r-1}; for r < 1 integrate in u = t^r instead.
  const auto breaks = quad::graded_breaks(30, 32);
  auto active_given = [r, &breaks](double c) {
    if (c == 0.0) return 0.0;
    if (r >= 1.0) {
      return quad::composite(
          [c, r](double t) { return -std::expm1(c * (t - 1.0)) * r * std::pow(t, r - 1.0); },
          breaks);
    }
    return quad::composite(
        [c, r](double u) { return -std::expm1(c * (std::pow(u, 1.0 / r) - 1.0)); }, breaks);
  };

  const double kk = static_cast<double>(k);
  const double lo = std::max(0.0, (kk - 12.0 * std::sqrt(kk)) / params.alpha);
  const double hi = (kk + 12.0 * std::sqrt(kk) + 40.0) / params.alpha;
  const double complement = quad::uniform_panels(
      [&](double l) {
        return gamma_l_pdf(params.alpha, k, l) * active_given(d.rho * std::exp(-mu * l));
      },
      lo, hi, 32);
  return 1.0 - complement;
}

double fy_normalization(double mu, double w) {
  auto f = [mu, w](double y) { return fy_density(mu, w, y); };
  const double left = quad::uniform_panels(f, -w, 0.0, 32);
  const double right = quad::uniform_panels(f, 0.0, 60.0 / mu, 256);
  return left + right;
}

LagIntegrals lag_integrals_quadrature(const ModelParams& params, std::int64_t k, double w) {
  validate(params);
  if (k < 1) throw DomainError("lag_integrals: k must be >= 1");
  if (!(w > 0.0)) throw DomainError("lag_integrals: w must be positive");
  const double alpha = params.alpha;
  const double mu = params.mu;
  const double upper = gamma_upper_limit(alpha, k);
  constexpr unsigned kPanels = 256;

  auto f_l = [alpha, k](double l) { return gamma_l_pdf(alpha, k, l); };
  auto f_y = [mu, w](double y) { return fy_density(mu, w, y); };

  LagIntegrals out;
  const double mass_l = quad::uniform_panels(f_l, 0.0, upper, kPanels);
  const double mass_y_negative = quad::uniform_panels(f_y, -w, 0.0, 16);
  out.i1 = mass_l * mass_y_negative;

  auto inner = [&](double l) {
    if (l <= 0.0) return 0.0;
    return quad::uniform_panels(f_y, 0.0, l, 4);
  };
  out.i2 = quad::uniform_panels([&](double l) { return f_l(l) * inner(l); }, 0.0, upper,
                                kPanels);

  const double scale = 1.0 / (mu * w);
  out.i3 = scale * quad::uniform_panels(
                       [&](double l) { return f_l(l) * std::expm1(-mu * l); }, 0.0, upper,
                       kPanels);
  out.i4 = scale * quad::uniform_panels(
                       [&](double l) {
                         return f_l(l) * (std::exp(-mu * (w + l)) - std::exp(-mu * w));
                       },
                       0.0, upper, kPanels);
  return out;
}

LagIntegrals lag_integrals_closed_form(const ModelParams& params, std::int64_t k, double w) {
  const DerivedParams d = validate(params);
  const double mw = params.mu * w;
  const double qk_minus_one = std::pow(d.q, static_cast<double>(k)) - 1.0;
  LagIntegrals out;
  out.i1 = 1.0 + std::expm1(-mw) / mw;
  out.i3 = qk_minus_one / mw;
  out.i4 = std::exp(-mw) * qk_minus_one / mw;
  out.i2 = -out.i3 + out.i4;
  return out;
}

std::vector<CheckResult> run_validation_suite(const ValidationOptions& options) {
  std::vector<CheckResult> results;
  const double sig = options.sigmas;

  struct Point {
    ModelParams p;
    std::int64_t k;
  };
  const Point points[] = {{{1, 0, 1}, 1},  {{1, 1, 1}, 1},   {{1, 10, 1}, 1}, {{1, 10, 1}, 3},
                          {{0.5, 10, 1}, 1}, {{2, 5, 1}, 2}, {{5, 10, 2}, 4}};

  {
    CheckResult r{"epsilon_monte_carlo", true, {}};
    const double rates[] = {0.5, 1.0, 2.0};
    std::uint64_t point = 0;
    double worst = 0.0;
    for (std::int64_t k : {1, 2, 5}) {
      for (double w : {0.1, 1.0, 5.0}) {
        for (double alpha : rates) {
          for (double mu : rates) {
            const ModelParams p{alpha, 1.0, mu};
            const auto est = mc_lemma1(p, k, w, options.samples, options.seed + point++);
            const double exact = lemma1_epsilon(p, k, w);
            const double z = est.std_error > 0 ? std::abs(est.estimate - exact) / est.std_error
                                               : (est.estimate == exact ? 0.0 : INFINITY);
            worst = std::max(worst, z);
            if (!est.brackets(exact, sig)) {
              r.passed = false;
            }
          }
        }
      }
    }
    r.detail = std::to_string(point) + " points, max |z| = " + std::to_string(worst);
    results.push_back(r);
  }

  {
    CheckResult r{"p_ek_monte_carlo", true, {}};
    std::uint64_t index = 0;
    double worst = 0.0;
    for (const auto& [p, k] : points) {
      const auto est = mc_p_ek(p, k, options.samples, options.seed + 1000 + index++);
      const double exact = p_ek_series(p, k, options.ctrl);
      const double z = est.std_error > 0 ? std::abs(est.estimate - exact) / est.std_error
                                         : (est.estimate == exact ? 0.0 : INFINITY);
      worst = std::max(worst, z);
      if (!est.brackets(exact, sig)) {
        r.passed = false;
        r.detail += "fail at " + format_params(p) + " k=" + std::to_string(k) + "; ";
      }
    }
    r.detail += std::to_string(index) + " points, max |z| = " + std::to_string(worst);
    results.push_back(r);
  }

  {
    CheckResult r{"p_ek_monte_carlo_shared_lag", true, {}};
    std::uint64_t index = 0;
    double worst = 0.0;
    for (const auto& [p, k] : points) {
      const auto est = mc_p_ek(p, k, options.samples, options.seed + 1000 + index++);
      const double exact = p_ek_lag_averaged(p, k);
      const double z = est.std_error > 0 ? std::abs(est.estimate - exact) / est.std_error
                                         : (est.estimate == exact ? 0.0 : INFINITY);
      worst = std::max(worst, z);
      if (!est.brackets(exact, sig)) {
        r.passed = false;
        r.detail += "fail at " + format_params(p) + " k=" + std::to_string(k) + "; ";
      }
    }
    r.detail += std::to_string(index) + " points, max |z| = " + std::to_string(worst);
    results.push_back(r);
  }

  {
    CheckResult r{"series_vs_quadrature", true, {}};
    double worst = 0.0;
    std::uint64_t count = 0;
    for (double alpha : {0.5, 1.0, 2.0, 5.0, 10.0, 100.0}) {
      for (double lambda : {1.0, 5.0, 10.0}) {
        const ModelParams p{alpha, lambda, 1.0};
        for (std::int64_t k = 1; k <= 20; ++k) {
          const double diff =
              std::abs(p_ek_series(p, k, options.ctrl) - p_ek_quadrature(p, k, options.ctrl));
          worst = std::max(worst, diff);
          ++count;
        }
      }
    }
    r.passed = worst <= options.series_quadrature_tol;
    std::ostringstream os;
    os << count << " points, max |diff| = " << worst << " (tol " << options.series_quadrature_tol
       << ")";
    r.detail = os.str();
    results.push_back(r);
  }

  {
    CheckResult r{"fy_normalization", true, {}};
    double worst = 0.0;
    for (double w : {0.1, 1.0, 10.0}) {
      for (double mu : {0.5, 1.0, 2.0}) {
        worst = std::max(worst, std::abs(fy_normalization(mu, w) - 1.0));
      }
    }
    r.passed = worst <= options.identity_tol;
    std::ostringstream os;
    os << "max |integral - 1| = " << worst;
    r.detail = os.str();
    results.push_back(r);
  }

  {
    CheckResult r{"lag_integral_identities", true, {}};
    double worst = 0.0;
    const double rates[] = {0.5, 1.0, 2.0};
    for (std::int64_t k : {1, 2, 5}) {
      for (double w : {0.1, 1.0, 5.0}) {
        for (double alpha : rates) {
          for (double mu : rates) {
            const ModelParams p{alpha, 1.0, mu};
            const auto num = lag_integrals_quadrature(p, k, w);
            const auto exact = lag_integrals_closed_form(p, k, w);
            worst = std::max({worst, std::abs(num.i1 - exact.i1), std::abs(num.i2 - exact.i2),
                              std::abs(num.i3 - exact.i3), std::abs(num.i4 - exact.i4),
                              std::abs(num.i1 + num.i2 - lemma1_epsilon(p, k, w))});
          }
        }
      }
    }
    r.passed = worst <= options.identity_tol;
    std::ostringstream os;
    os << "max abs error = " << worst;
    r.detail = os.str();
    results.push_back(r);
  }

  return results;
}

}  // namespace rcuage
