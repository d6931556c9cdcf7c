#pragma once

#include <cstdint>

#include "rcuage/core.hpp"

namespace rcuage {

/// Expected number of active updates and its two upper bounds.
struct FootprintReport {
  double en_exact = 1.0;
  double en_bound_jensen = 1.0;
  double en_bound_simple = 1.0;
  std::uint64_t terms_used_k = 0;
  /// Rigorous bound on everything the truncated sums left out
  /// (geometric tail in k plus the Poisson tails of each inner sum).
  double truncation_bound = 0.0;
};

/// A truncated series value together with a bound on the discarded tail.
struct SeriesValue {
  double value = 0.0;
  double truncation_bound = 0.0;
  std::uint64_t terms = 0;
};

/// (1 - exp(-mu w)) / (mu w), with the limit 1 at w = 0.
double a_w(double mu, double w);

/// P(U + X <= L) for U ~ uniform(-w, 0), X ~ exp(mu), L ~ Gamma(k, alpha):
/// 1 - a_w q^k.
double lemma1_epsilon(const ModelParams& params, std::int64_t k, double w);

/// Probability that update k has left its grace period by the inspection
/// time, given that its successor took w to write: exp(-b_k (1 - e^{-mu w})).
double p_ek_given_w(const ModelParams& params, std::int64_t k, double w);

/// P(E_k^c), the probability that update k is still active, as the
/// Poisson(b_k)-weighted sum of j / (alpha/mu + j).
///
/// The sum runs outwards from the Poisson mode with weights computed in log
/// space, and stops once both Poisson tails are below `tol`. Since every
/// weight j / (alpha/mu + j) lies in [0, 1), the tail mass bounds the error.
/// Throws ConvergenceError if more than ctrl.max_j terms are needed.
SeriesValue p_ek_complement(const ModelParams& params, std::int64_t k, double tol,
                            const SeriesControl& ctrl);

/// P(E_k) = 1 - P(E_k^c) from the series, truncated at ctrl.tol.
double p_ek_series(const ModelParams& params, std::int64_t k, const SeriesControl& ctrl);

/// P(E_k) from the integral alpha * int_0^inf exp(-b_k(1 - e^{-mu w})) e^{-alpha w} dw.
///
/// After y = e^{-mu w} this is (alpha/mu) int_0^1 y^{alpha/mu - 1} e^{-b_k(1-y)} dy.
/// For alpha/mu < 1 the endpoint singularity is removed with y = u^{mu/alpha}.
/// Composite Gauss-Legendre on a mesh graded towards 0, starting from
/// ctrl.quad_points nodes and doubling until successive values agree.
/// Throws ConvergenceError if the last two doublings differ by more than 1e-9.
double p_ek_quadrature(const ModelParams& params, std::int64_t k, const SeriesControl& ctrl);

/// E[N] = 1 + sum_k P(E_k^c), with both upper bounds.
///
/// The outer sum stops at the first K with (lambda/mu) q^K < tol/2; that
/// quantity bounds the whole tail sum_{k>K} (lambda/alpha) q^k. The other
/// half of tol is shared among the K inner sums.
FootprintReport en_exact(const ModelParams& params, const SeriesControl& ctrl);

/// 1 + sum_k q^k / (q^k + alpha/lambda), truncated like en_exact.
double en_bound_jensen(const ModelParams& params, const SeriesControl& ctrl);

/// 1 + lambda / mu.
double en_bound_simple(const ModelParams& params);

/// Time-average age of the published update, 2 / alpha.
double avg_age(const ModelParams& params);

/// Number of outer terms K used by en_exact / en_bound_jensen.
std::uint64_t outer_terms(const ModelParams& params, const SeriesControl& ctrl);

}  // namespace rcuage
