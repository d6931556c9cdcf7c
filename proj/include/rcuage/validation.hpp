#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rcuage/core.hpp"

namespace rcuage {

/// Monte Carlo probability estimate. std_error is the Beta(hits+1, misses+1)
/// posterior standard deviation, which stays positive at 0 or n hits.
struct McEstimate {
  double estimate = 0.0;
  double std_error = 0.0;
  std::uint64_t samples = 0;

  /// |estimate - value| <= sigmas * std_error.
  bool brackets(double value, double sigmas) const;
};

/// Density of Y = U + X, U ~ uniform(-w, 0), X ~ exponential(mu).
double fy_density(double mu, double w, double y);

/// Gamma(shape k, rate alpha) density: the law of the time since update k-1
/// was published (k - 1 write times plus the elapsed part of the current one).
double gamma_l_pdf(double alpha, std::int64_t k, double l);

/// Fraction of samples with U + X <= L, L ~ Gamma(k, alpha). Requires
/// samples >= 10^4.
McEstimate mc_lemma1(const ModelParams& params, std::int64_t k, double w,
                     std::uint64_t samples, std::uint64_t seed);

/// Direct simulation of the event E_k: draw the successor's write time w,
/// m ~ Poisson(lambda w) readers of update k with release offsets U_i + X_i,
/// and the inspection lag L ~ Gamma(k, alpha); success iff every reader has
/// released by L.
McEstimate mc_p_ek(const ModelParams& params, std::int64_t k, std::uint64_t samples,
                   std::uint64_t seed);

/// The four pieces of P(Y <= L) obtained by integrating fy_density against
/// gamma_l_pdf:
///   i1 = int f_L(l) int_{-w}^0 f_Y dy dl     i2 = int f_L(l) int_0^l f_Y dy dl
///   i3, i4 the two terms with i2 = -i3 + i4
struct LagIntegrals {
  double i1 = 0.0;
  double i2 = 0.0;
  double i3 = 0.0;
  double i4 = 0.0;
};

LagIntegrals lag_integrals_quadrature(const ModelParams& params, std::int64_t k, double w);
LagIntegrals lag_integrals_closed_form(const ModelParams& params, std::int64_t k, double w);

/// P(E_k) when the readers of update k share one inspection lag
/// L ~ Gamma(k, alpha): 1 - E_L[g((lambda/mu) e^{-mu L})] with
/// g(c) = 1 - E_w[exp(-c (1 - e^{-mu w}))]. Expanding the exponential and
/// integrating term by term gives, with r = alpha/mu, rho = lambda/mu,
///   P(E_k^c) = sum_{n>=1} (-1)^{n+1} rho^n (r/(r+n))^k / ((r+1)(r+2)...(r+n)).
/// The sum alternates; it is evaluated in long double and throws
/// ConvergenceError when cancellation would cost more than ~1e-10.
double p_ek_lag_averaged(const ModelParams& params, std::int64_t k);

/// The same probability by nested Gauss-Legendre over L and w. Slow; meant
/// as a cross-check of p_ek_lag_averaged.
double p_ek_lag_averaged_quadrature(const ModelParams& params, std::int64_t k);

/// E[N] of the shared-lag model: summing the series above over k gives
///   1 + r sum_{n>=1} (-1)^{n+1} rho^n / (n (r+1)(r+2)...(r+n)).
double en_lag_averaged(const ModelParams& params);

/// Integral of fy_density over its support.
double fy_normalization(double mu, double w);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationOptions {
  std::uint64_t samples = 1'000'000;
  std::uint64_t seed = 1;
  double sigmas = 3.5;
  double series_quadrature_tol = 1e-8;
  double identity_tol = 1e-6;
  SeriesControl ctrl;
};

/// Runs the oracle grid: epsilon Monte Carlo, P(E_k) Monte Carlo,
/// series-vs-quadrature, f_Y normalization and the lag integral identities.
/// One result per check family, in a fixed order.
std::vector<CheckResult> run_validation_suite(const ValidationOptions& options);

}  // namespace rcuage
