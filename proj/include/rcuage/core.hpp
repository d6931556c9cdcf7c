#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rcuage {

/// Raised when an argument lies outside the mathematical domain of an
/// operation (non-positive rates, k < 1, negative times, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Raised when a series or quadrature cannot meet its tolerance within the
/// configured limits.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised for invalid simulation / sweep configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Rates of the memoryless RCU model.
///
///   alpha  - writer publication rate (exponential write times)
///   lambda - Poisson read-request arrival rate
///   mu     - read-service rate; a read lock is held exponential(mu)
struct ModelParams {
  double alpha = 1.0;
  double lambda = 1.0;
  double mu = 1.0;
};

/// Dimensionless groups that appear in every closed form.
struct DerivedParams {
  double q = 0.5;    ///< alpha / (alpha + mu): a write finishes before a read
  double rho = 1.0;  ///< lambda / mu: mean number of reads in flight
};

/// Truncation policy shared by the series and quadrature evaluators.
struct SeriesControl {
  double tol = 1e-10;
  std::uint64_t max_k = 10'000'000;
  std::uint64_t max_j = 1'000'000;
  unsigned quad_points = 64;

  void check() const;
};

/// Validates the rates and returns (q, rho). Throws DomainError.
DerivedParams validate(const ModelParams& params);

/// b_k = lambda q^k / mu: the Poisson mean of readers still holding update k.
double b_k(const ModelParams& params, std::int64_t k);

std::string to_string(const ModelParams& params);

}  // namespace rcuage
