#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rcuage/core.hpp"

namespace rcuage {

struct SimConfig {
  std::uint64_t seed = 1;
  /// Simulated time discarded before measuring; unset means default_warmup().
  std::optional<double> warmup_time;
  /// Publications measured after warmup.
  std::uint64_t horizon_publications = 100'000;
  unsigned batch_count = 20;
  bool sample_n_distribution = false;
  /// Keep up to this many completed UpdateRecords published after warmup.
  std::size_t record_updates = 0;

  void check() const;
};

/// max(100/alpha, 100/mu, 100/lambda if lambda > 0).
double default_warmup(const ModelParams& params);

/// Life of one published update. A replace or grace end that had not
/// happened when the run stopped is left empty.
struct UpdateRecord {
  std::uint64_t index = 0;
  double publish_time = 0.0;
  std::optional<double> replace_time;
  std::uint64_t residual_readers = 0;
  std::optional<double> grace_end_time;
};

/// Time-weighted law of N. mass[n] is the fraction of measured time with
/// N = n (mass[0] is always 0); `overflow` collects N > cap.
struct NHistogram {
  std::vector<double> mass;
  double overflow = 0.0;

  std::size_t cap() const { return mass.empty() ? 0 : mass.size() - 1; }
  double mean() const;
};

struct SimStats {
  double mean_active_updates = 0.0;
  double mean_age = 0.0;
  double ci_half_width_n = 0.0;
  double ci_half_width_age = 0.0;
  /// Time-average number of held read locks (the M/M/inf occupancy).
  double mean_reads_in_flight = 0.0;
  double ci_half_width_reads = 0.0;
  double measured_time = 0.0;

  std::uint64_t publications = 0;  ///< measured publications
  std::uint64_t events = 0;        ///< all events, warmup included
  std::uint64_t reads_arrived = 0;
  std::uint64_t reads_served = 0;  ///< completed before the run stopped
  std::uint64_t reads_open = 0;    ///< in flight when the run stopped
  /// Sum of lock counts over the current and all stale updates at the end;
  /// equals reads_open when no lock leaked.
  std::uint64_t locks_outstanding = 0;
  /// Smallest N seen at any event boundary after warmup.
  std::uint64_t min_active_updates = 0;

  std::optional<NHistogram> n_histogram;
  std::vector<UpdateRecord> updates;
};

/// Discrete-event simulation of the memoryless RCU process.
///
/// The writer publishes at exponential(alpha) intervals; readers arrive as a
/// Poisson(lambda) stream, lock the update current at their arrival and hold
/// it for an exponential(mu) time. When a new update is published the old one
/// is reclaimed at once if unlocked, otherwise when its last lock is released.
/// N(t) = 1 + stale updates still locked. Age resets to the write time of the
/// newly published update and grows at unit slope.
///
/// Starts at t = 0 with a fresh update and age 0, discards the warmup, then
/// measures exactly `horizon_publications` publications. Confidence intervals
/// are 95% Student-t batch means over `batch_count` batches of equal
/// publication count. Throws ConfigError / DomainError on invalid input.
SimStats simulate(const ModelParams& params, const SimConfig& config);

/// Runs simulate() with histogram sampling on and returns the law of N.
NHistogram simulate_n_distribution(const ModelParams& params, SimConfig config);

/// Histogram cap 1 + ceil(10 lambda/mu) + 20.
std::size_t histogram_cap(const ModelParams& params);

/// Average age from the sawtooth polygon decomposition of write times
/// W_1..W_m: sum_{n>=2} Q_n / sum_{n>=2} W_n with
/// Q_n = (W_{n-1} + W_n)^2 / 2 - W_n^2 / 2.
double estimate_age_from_polygons(std::span<const double> write_times);

/// One sample path of the age process, from t = 0 (age 0) to the m-th
/// publication, as seen by the event loop.
struct AgePath {
  std::vector<double> write_times;  ///< W_1..W_m
  double age_integral = 0.0;        ///< integral of age over [0, t_m]
  double end_time = 0.0;            ///< t_m
};

AgePath trace_age_path(const ModelParams& params, std::uint64_t seed,
                       std::uint64_t publications);

/// 97.5% quantile of Student's t with `dof` degrees of freedom.
double student_t_975(unsigned dof);

}  // namespace rcuage
