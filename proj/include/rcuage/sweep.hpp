#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rcuage/core.hpp"
#include "rcuage/simulator.hpp"

namespace rcuage {

/// Parses one grid axis: a single value ("1"), a comma list ("1,5,10") or a
/// range "start:stop:count[:lin|log]". Throws ConfigError.
std::vector<double> parse_axis(std::string_view text);

/// Cartesian product in row-major order: alpha outermost, mu innermost.
std::vector<ModelParams> make_grid(const std::vector<double>& alphas,
                                   const std::vector<double>& lambdas,
                                   const std::vector<double>& mus);

struct SweepRow {
  ModelParams params;
  double en_exact = 0.0;
  double en_bound_jensen = 0.0;
  double en_bound_simple = 0.0;
  double avg_age = 0.0;
  std::optional<double> sim_en;
  std::optional<double> sim_en_ci;
  std::optional<double> sim_age;
  std::optional<double> sim_age_ci;
  std::optional<std::uint64_t> seed;
  std::optional<NHistogram> histogram;
};

inline constexpr std::string_view kSweepHeader =
    "alpha,lambda,mu,en_exact,en_bound_jensen,en_bound_simple,avg_age,sim_en,sim_en_ci,"
    "sim_age,sim_age_ci,seed";

/// Shortest decimal string that round-trips to the same double.
std::string format_number(double value);
std::string format_row(const SweepRow& row);

/// Per-point seed: base XOR splitmix64(index).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index);

SweepRow analytic_row(const ModelParams& params, const SeriesControl& ctrl);

/// Analytic rows for every grid point. `jobs` workers; output order is the
/// grid order regardless of scheduling.
std::vector<SweepRow> analytic_rows(const std::vector<ModelParams>& grid,
                                    const SeriesControl& ctrl, unsigned jobs = 1);

/// Analytic + simulated rows. Each point uses derive_seed(config.seed, index).
std::vector<SweepRow> simulate_rows(const std::vector<ModelParams>& grid,
                                    const SeriesControl& ctrl, const SimConfig& config,
                                    unsigned jobs = 1);

/// Simulated-vs-analytic deviations for one row, in CI half-widths.
struct RowCheck {
  bool passed = true;
  double en_sigmas = 0.0;   ///< |sim_en - en_exact| / sim_en_ci
  double age_sigmas = 0.0;  ///< |sim_age - avg_age| / sim_age_ci
};

/// Passes when each simulated value is within max(3 CI half-widths, 2%) of
/// its analytic counterpart.
RowCheck check_row(const SweepRow& row);

/// CLI entry point. Subcommands: analytic, simulate, tradeoff, validate.
/// Returns 0 on success, 1 on a failed check, 2 on usage/config errors.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rcuage
