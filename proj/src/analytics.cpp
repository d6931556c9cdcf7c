#include "rcuage/analytics.hpp"

#include <cmath>
#include <string>

#include "rcuage/quadrature.hpp"

namespace rcuage {

namespace {

// Neumaier's compensated summation; outer sums reach 10^5 terms.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      carry_ += (sum_ - t) + x;
    } else {
      carry_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + carry_; }

 private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

void require_k(std::int64_t k, const char* who) {
  if (k < 1) {
    throw DomainError(std::string(who) + ": k must be >= 1");
  }
}

}  // namespace

double a_w(double mu, double w) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw DomainError("a_w: mu must be positive");
  }
  if (!(w >= 0.0)) {
    throw DomainError("a_w: w must be non-negative");
  }
  const double x = mu * w;
  if (x == 0.0) {
    return 1.0;
  }
  return -std::expm1(-x) / x;
}

double lemma1_epsilon(const ModelParams& params, std::int64_t k, double w) {
  require_k(k, "lemma1_epsilon");
  if (!(w > 0.0)) {
    throw DomainError("lemma1_epsilon: w must be positive");
  }
  const DerivedParams d = validate(params);
  return 1.0 - a_w(params.mu, w) * std::pow(d.q, static_cast<double>(k));
}

double p_ek_given_w(const ModelParams& params, std::int64_t k, double w) {
  require_k(k, "p_ek_given_w");
  if (!(w >= 0.0)) {
    throw DomainError("p_ek_given_w: w must be non-negative");
  }
  const double b = b_k(params, k);
  return std::exp(b * std::expm1(-params.mu * w));
}

SeriesValue p_ek_complement(const ModelParams& params, std::int64_t k, double tol,
                            const SeriesControl& ctrl) {
  require_k(k, "p_ek_complement");
  ctrl.check();
  if (!(tol > 0.0)) {
    throw DomainError("p_ek_complement: tol must be positive");
  }
  const double b = b_k(params, k);
  if (b == 0.0) {
    return {};
  }
  const double ratio = params.alpha / params.mu;
  const double mode = std::floor(b);
  const double log_pmf_mode = mode * std::log(b) - b - std::lgamma(mode + 1.0);
  const double pmf_mode = std::exp(log_pmf_mode);

  CompensatedSum sum;
  std::uint64_t terms = 0;
  auto weight = [ratio](double j) { return j / (ratio + j); };

  // Upper half: j = mode, mode + 1, ...
  double pmf = pmf_mode;
  double j = mode;
  double upper_tail = 0.0;
  for (;;) {
    sum.add(pmf * weight(j));
    ++terms;
    const double next = pmf * b / (j + 1.0);
    upper_tail = next / (1.0 - b / (j + 2.0));
    if (upper_tail < 0.5 * tol) {
      break;
    }
    if (terms >= ctrl.max_j) {
      throw ConvergenceError("p_ek_complement: max_j reached for " + to_string(params));
    }
    pmf = next;
    j += 1.0;
  }

  // Lower half: j = mode - 1, ..., 1. The j = 0 term has weight 0.
  double lower_tail = 0.0;
  pmf = pmf_mode;
  for (j = mode - 1.0; j >= 1.0; j -= 1.0) {
    pmf *= (j + 1.0) / b;
    sum.add(pmf * weight(j));
    ++terms;
    if (j - 1.0 < 1.0) {
      break;
    }
    const double next = pmf * j / b;
    lower_tail = next / (1.0 - (j - 1.0) / b);
    if (lower_tail < 0.5 * tol) {
      break;
    }
    lower_tail = 0.0;
    if (terms >= ctrl.max_j) {
      throw ConvergenceError("p_ek_complement: max_j reached for " + to_string(params));
    }
  }

  return SeriesValue{sum.value(), upper_tail + lower_tail, terms};
}

double p_ek_series(const ModelParams& params, std::int64_t k, const SeriesControl& ctrl) {
  return 1.0 - p_ek_complement(params, k, ctrl.tol, ctrl).value;
}

double p_ek_quadrature(const ModelParams& params, std::int64_t k, const SeriesControl& ctrl) {
  require_k(k, "p_ek_quadrature");
  ctrl.check();
  const double b = b_k(params, k);
  const double ratio = params.alpha / params.mu;

  quad::Integrand integrand;
  if (ratio >= 1.0) {
    integrand = [ratio, b](double y) {
      return ratio * std::pow(y, ratio - 1.0) * std::exp(-b * (1.0 - y));
    };
  } else {
    const double power = 1.0 / ratio;
    integrand = [power, b](double u) { return std::exp(-b * (1.0 - std::pow(u, power))); };
  }

  auto evaluate = [&](unsigned nodes) {
    const unsigned panels = std::max(2u, nodes / 16);
    const unsigned graded = panels / 2;
    const auto breaks = quad::graded_breaks(graded, panels - graded);
    return quad::composite(integrand, breaks, 16);
  };

  constexpr int kMaxDoublings = 12;
  constexpr double kTarget = 1e-11;
  constexpr double kFailure = 1e-9;
  unsigned nodes = ctrl.quad_points;
  double previous = evaluate(nodes);
  double diff = 0.0;
  for (int d = 0; d < kMaxDoublings; ++d) {
    nodes *= 2;
    const double current = evaluate(nodes);
    diff = std::abs(current - previous);
    previous = current;
    if (diff <= kTarget) {
      return current;
    }
  }
  if (diff > kFailure) {
    throw ConvergenceError("p_ek_quadrature: doublings disagree by " + std::to_string(diff) +
                           " for " + to_string(params) + ", k=" + std::to_string(k));
  }
  return previous;
}

std::uint64_t outer_terms(const ModelParams& params, const SeriesControl& ctrl) {
  const DerivedParams d = validate(params);
  ctrl.check();
  if (d.rho == 0.0) {
    return 0;
  }
  const double target = 0.5 * ctrl.tol;
  auto tail = [&](double kk) { return d.rho * std::pow(d.q, kk); };
  double k = std::ceil(std::log(target / d.rho) / std::log(d.q));
  if (!(k >= 1.0)) {
    k = 1.0;
  }
  while (tail(k) >= target) {
    k += 1.0;
  }
  while (k > 1.0 && tail(k - 1.0) < target) {
    k -= 1.0;
  }
  if (k > static_cast<double>(ctrl.max_k)) {
    throw ConvergenceError("outer series needs " + std::to_string(k) + " terms, max_k is " +
                           std::to_string(ctrl.max_k) + " for " + to_string(params));
  }
  return static_cast<std::uint64_t>(k);
}

FootprintReport en_exact(const ModelParams& params, const SeriesControl& ctrl) {
  const DerivedParams d = validate(params);
  FootprintReport report;
  report.en_bound_simple = en_bound_simple(params);
  const std::uint64_t big_k = outer_terms(params, ctrl);
  if (big_k == 0) {
    return report;
  }
  const double ratio = params.alpha / params.mu;
  const double inner_tol = 0.5 * ctrl.tol / static_cast<double>(big_k);

  CompensatedSum exact;
  CompensatedSum jensen;
  double inner_bounds = 0.0;
  for (std::uint64_t k = 1; k <= big_k; ++k) {
    const auto term = p_ek_complement(params, static_cast<std::int64_t>(k), inner_tol, ctrl);
    exact.add(term.value);
    inner_bounds += term.truncation_bound;
    const double b = d.rho * std::pow(d.q, static_cast<double>(k));
    jensen.add(b / (ratio + b));
  }
  report.en_exact = 1.0 + exact.value();
  report.en_bound_jensen = 1.0 + jensen.value();
  report.terms_used_k = big_k;
  report.truncation_bound = d.rho * std::pow(d.q, static_cast<double>(big_k)) + inner_bounds;
  return report;
}

double en_bound_jensen(const ModelParams& params, const SeriesControl& ctrl) {
  const DerivedParams d = validate(params);
  const std::uint64_t big_k = outer_terms(params, ctrl);
  const double ratio = params.alpha / params.mu;
  CompensatedSum sum;
  for (std::uint64_t k = 1; k <= big_k; ++k) {
    const double b = d.rho * std::pow(d.q, static_cast<double>(k));
    sum.add(b / (ratio + b));
  }
  return 1.0 + sum.value();
}

double en_bound_simple(const ModelParams& params) {
  const DerivedParams d = validate(params);
  return 1.0 + d.rho;
}

double avg_age(const ModelParams& params) {
  validate(params);
  return 2.0 / params.alpha;
}

}  // namespace rcuage
