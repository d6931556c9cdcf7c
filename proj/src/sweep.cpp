#include "rcuage/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "rcuage/analytics.hpp"
#include "rcuage/random.hpp"
#include "rcuage/validation.hpp"

namespace rcuage {

namespace {

double parse_number(std::string_view text) {
  std::string s(text);
  // strip surrounding blanks
  const auto first = s.find_first_not_of(" \t");
  const auto last = s.find_last_not_of(" \t");
  if (first == std::string::npos) {
    throw ConfigError("empty number in grid specification");
  }
  s = s.substr(first, last - first + 1);
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(s, &used);
  } catch (const std::exception&) {
    throw ConfigError("not a number: '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(value)) {
    throw ConfigError("not a finite number: '" + s + "'");
  }
  return value;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

// Runs body(i) for i in [0, count) on `jobs` threads; rethrows the first
// exception after all workers have stopped.
void parallel_for(std::size_t count, unsigned jobs, const std::function<void(std::size_t)>& body) {
  jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < jobs; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count && !failed; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          failed = true;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

}  // namespace

std::vector<double> parse_axis(std::string_view text) {
  if (text.empty()) {
    throw ConfigError("empty grid specification");
  }
  if (text.find(':') != std::string_view::npos) {
    const auto parts = split(text, ':');
    if (parts.size() != 3 && parts.size() != 4) {
      throw ConfigError("range must be start:stop:count[:lin|log], got '" + std::string(text) +
                        "'");
    }
    const double start = parse_number(parts[0]);
    const double stop = parse_number(parts[1]);
    const double count_value = parse_number(parts[2]);
    if (count_value < 1 || count_value != std::floor(count_value) || count_value > 1e7) {
      throw ConfigError("range count must be a positive integer");
    }
    const auto count = static_cast<std::size_t>(count_value);
    const std::string scale = parts.size() == 4 ? std::string(parts[3]) : "lin";
    if (scale != "lin" && scale != "log") {
      throw ConfigError("range scale must be 'lin' or 'log', got '" + scale + "'");
    }
    if (scale == "log" && !(start > 0.0 && stop > 0.0)) {
      throw ConfigError("log range needs positive endpoints");
    }
    std::vector<double> values(count);
    for (std::size_t i = 0; i < count; ++i) {
      const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
      values[i] = scale == "log" ? std::exp(std::log(start) + t * (std::log(stop) - std::log(start)))
                                 : start + t * (stop - start);
    }
    values.front() = start;
    if (count > 1) values.back() = stop;
    return values;
  }
  std::vector<double> values;
  for (auto part : split(text, ',')) {
    values.push_back(parse_number(part));
  }
  return values;
}

std::vector<ModelParams> make_grid(const std::vector<double>& alphas,
                                   const std::vector<double>& lambdas,
                                   const std::vector<double>& mus) {
  std::vector<ModelParams> grid;
  grid.reserve(alphas.size() * lambdas.size() * mus.size());
  for (double a : alphas) {
    for (double l : lambdas) {
      for (double m : mus) {
        const ModelParams p{a, l, m};
        try {
          validate(p);
        } catch (const DomainError& e) {
          throw ConfigError(std::string("invalid grid point: ") + e.what());
        }
        grid.push_back(p);
      }
    }
  }
  if (grid.empty()) {
    throw ConfigError("empty parameter grid");
  }
  return grid;
}

std::string format_number(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::string format_row(const SweepRow& row) {
  std::string line;
  line += format_number(row.params.alpha) + ',';
  line += format_number(row.params.lambda) + ',';
  line += format_number(row.params.mu) + ',';
  line += format_number(row.en_exact) + ',';
  line += format_number(row.en_bound_jensen) + ',';
  line += format_number(row.en_bound_simple) + ',';
  line += format_number(row.avg_age) + ',';
  line += optional_number(row.sim_en) + ',';
  line += optional_number(row.sim_en_ci) + ',';
  line += optional_number(row.sim_age) + ',';
  line += optional_number(row.sim_age_ci) + ',';
  if (row.seed) line += std::to_string(*row.seed);
  return line;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return base ^ splitmix64(index);
}

SweepRow analytic_row(const ModelParams& params, const SeriesControl& ctrl) {
  const FootprintReport report = en_exact(params, ctrl);
  SweepRow row;
  row.params = params;
  row.en_exact = report.en_exact;
  row.en_bound_jensen = report.en_bound_jensen;
  row.en_bound_simple = report.en_bound_simple;
  row.avg_age = avg_age(params);
  return row;
}

std::vector<SweepRow> analytic_rows(const std::vector<ModelParams>& grid,
                                    const SeriesControl& ctrl, unsigned jobs) {
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) { rows[i] = analytic_row(grid[i], ctrl); });
  return rows;
}

std::vector<SweepRow> simulate_rows(const std::vector<ModelParams>& grid,
                                    const SeriesControl& ctrl, const SimConfig& config,
                                    unsigned jobs) {
  config.check();
  std::vector<SweepRow> rows(grid.size());
  parallel_for(grid.size(), jobs, [&](std::size_t i) {
    SweepRow row = analytic_row(grid[i], ctrl);
    SimConfig point = config;
    point.seed = derive_seed(config.seed, i);
    const SimStats stats = simulate(grid[i], point);
    row.sim_en = stats.mean_active_updates;
    row.sim_en_ci = stats.ci_half_width_n;
    row.sim_age = stats.mean_age;
    row.sim_age_ci = stats.ci_half_width_age;
    row.seed = point.seed;
    row.histogram = stats.n_histogram;
    rows[i] = std::move(row);
  });
  return rows;
}

RowCheck check_row(const SweepRow& row) {
  RowCheck check;
  if (!row.sim_en || !row.sim_age) {
    return check;
  }
  auto sigmas = [](double diff, double ci) {
    if (ci > 0.0) return diff / ci;
    return diff == 0.0 ? 0.0 : INFINITY;
  };
  const double en_diff = std::abs(*row.sim_en - row.en_exact);
  const double age_diff = std::abs(*row.sim_age - row.avg_age);
  check.en_sigmas = sigmas(en_diff, *row.sim_en_ci);
  check.age_sigmas = sigmas(age_diff, *row.sim_age_ci);
  const bool en_ok = en_diff <= std::max(3.0 * *row.sim_en_ci, 0.02 * row.en_exact);
  const bool age_ok = age_diff <= std::max(3.0 * *row.sim_age_ci, 0.02 * row.avg_age);
  check.passed = en_ok && age_ok;
  return check;
}

namespace {

struct GridOptions {
  std::string alpha = "1";
  std::string lambda = "1";
  std::string mu = "1";
};

struct Options {
  GridOptions grid;
  double tol = 1e-10;
  std::uint64_t seed = 1;
  std::uint64_t publications = 100'000;
  std::optional<double> warmup;
  unsigned batches = 20;
  bool check = false;
  std::string out;
  std::string histogram;
  unsigned jobs = 1;
  std::uint64_t samples = 1'000'000;
  double check_tol = 1e-8;
};

void add_grid_flags(CLI::App* cmd, GridOptions& grid) {
  cmd->add_option("--alpha", grid.alpha, "write rate grid (value, list a,b,c or start:stop:count[:lin|log])")
      ->capture_default_str();
  cmd->add_option("--lambda", grid.lambda, "read arrival rate grid")->capture_default_str();
  cmd->add_option("--mu", grid.mu, "read service rate grid")->capture_default_str();
}

std::vector<ModelParams> build_grid(const GridOptions& g) {
  return make_grid(parse_axis(g.alpha), parse_axis(g.lambda), parse_axis(g.mu));
}

// Writes the whole buffer in one go so that errors never leave partial output.
void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    out.flush();
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) {
    throw ConfigError("cannot open output file '" + path + "'");
  }
  file << text;
  if (!file) {
    throw ConfigError("failed writing output file '" + path + "'");
  }
}

SeriesControl series_control(const Options& o) {
  SeriesControl ctrl;
  ctrl.tol = o.tol;
  try {
    ctrl.check();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  return ctrl;
}

int cmd_analytic(const Options& o, std::ostream& out) {
  const auto rows = analytic_rows(build_grid(o.grid), series_control(o), o.jobs);
  std::string text(kSweepHeader);
  text += '\n';
  for (const auto& row : rows) text += format_row(row) + '\n';
  emit(text, o.out, out);
  return 0;
}

int cmd_simulate(const Options& o, std::ostream& out, std::ostream& err) {
  const auto grid = build_grid(o.grid);
  SimConfig config;
  config.seed = o.seed;
  config.horizon_publications = o.publications;
  config.batch_count = o.batches;
  config.warmup_time = o.warmup;
  config.sample_n_distribution = !o.histogram.empty();
  const auto rows = simulate_rows(grid, series_control(o), config, o.jobs);

  std::string text(kSweepHeader);
  text += '\n';
  double worst_en = 0.0;
  double worst_age = 0.0;
  std::size_t failures = 0;
  double worst_shared = 0.0;
  bool shared_ok = true;
  for (const auto& row : rows) {
    text += format_row(row) + '\n';
    const RowCheck c = check_row(row);
    worst_en = std::max(worst_en, c.en_sigmas);
    worst_age = std::max(worst_age, c.age_sigmas);
    if (!c.passed) ++failures;
    // the shared-lag value is what the simulated model actually converges to
    try {
      const double d = std::abs(*row.sim_en - en_lag_averaged(row.params));
      worst_shared = std::max(worst_shared, *row.sim_en_ci > 0 ? d / *row.sim_en_ci : d);
    } catch (const ConvergenceError&) {
      shared_ok = false;
    }
  }

  if (!o.histogram.empty()) {
    std::string hist = "alpha,lambda,mu,n,mass\n";
    for (const auto& row : rows) {
      const std::string prefix = format_number(row.params.alpha) + ',' +
                                 format_number(row.params.lambda) + ',' +
                                 format_number(row.params.mu) + ',';
      const auto& h = *row.histogram;
      for (std::size_t n = 1; n < h.mass.size(); ++n) {
        hist += prefix + std::to_string(n) + ',' + format_number(h.mass[n]) + '\n';
      }
      hist += prefix + "overflow," + format_number(h.overflow) + '\n';
    }
    emit(hist, o.histogram, out);
  }
  emit(text, o.out, out);

  err << "summary: points=" << rows.size() << " max|sim-analytic|/ci en=" << worst_en
      << " age=" << worst_age << " outside_tolerance=" << failures;
  if (shared_ok) err << " shared_lag_en=" << worst_shared;
  err << '\n';
  if (o.check && failures > 0) {
    err << "check failed: " << failures << " point(s) outside max(3 CI, 2%)\n";
    return 1;
  }
  return 0;
}

int cmd_tradeoff(const Options& o, std::ostream& out) {
  auto alphas = parse_axis(o.grid.alpha);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  const auto lambdas = parse_axis(o.grid.lambda);
  const auto mus = parse_axis(o.grid.mu);
  const SeriesControl ctrl = series_control(o);

  std::vector<ModelParams> grid;
  for (double l : lambdas) {
    for (double m : mus) {
      for (const auto& p : make_grid(alphas, {l}, {m})) grid.push_back(p);
    }
  }
  const auto rows = analytic_rows(grid, ctrl, o.jobs);
  std::string text = "alpha,lambda,mu,avg_age,en_exact\n";
  for (const auto& row : rows) {
    text += format_number(row.params.alpha) + ',' + format_number(row.params.lambda) + ',' +
            format_number(row.params.mu) + ',' + format_number(row.avg_age) + ',' +
            format_number(row.en_exact) + '\n';
  }
  emit(text, o.out, out);
  return 0;
}

int cmd_validate(const Options& o, std::ostream& out) {
  if (o.samples < 10'000) {
    throw ConfigError("--samples must be >= 10000");
  }
  if (!(o.check_tol > 0.0)) {
    throw ConfigError("--tol must be positive");
  }
  ValidationOptions v;
  v.samples = o.samples;
  v.seed = o.seed;
  v.series_quadrature_tol = o.check_tol;
  const auto results = run_validation_suite(v);
  std::string text;
  bool all = true;
  for (const auto& r : results) {
    text += (r.passed ? "PASS " : "FAIL ") + r.name + ": " + r.detail + '\n';
    all = all && r.passed;
  }
  text += all ? "all checks passed\n" : "some checks FAILED\n";
  emit(text, o.out, out);
  return all ? 0 : 1;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Memory footprint and age of the memoryless RCU model"};
  app.require_subcommand(1);
  Options o;

  auto* analytic = app.add_subcommand("analytic", "closed-form E[N], bounds and age over a grid");
  add_grid_flags(analytic, o.grid);
  analytic->add_option("--tol", o.tol, "series truncation tolerance")->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "analytic and simulated values over a grid");
  add_grid_flags(sim, o.grid);
  sim->add_option("--tol", o.tol, "series truncation tolerance")->capture_default_str();
  sim->add_option("--seed", o.seed, "base seed")->capture_default_str();
  sim->add_option("--publications", o.publications, "measured publications per point")
      ->capture_default_str();
  sim->add_option("--warmup", o.warmup, "warmup time (default: max(100/alpha, 100/mu, 100/lambda))");
  sim->add_option("--batches", o.batches, "batches for confidence intervals")->capture_default_str();
  sim->add_flag("--check", o.check, "exit 1 if any point misses max(3 CI, 2%)");
  sim->add_option("--histogram", o.histogram, "write the time-weighted law of N to this CSV");
  sim->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();

  auto* trade = app.add_subcommand("tradeoff", "(avg_age, en_exact) pairs over an alpha range");
  add_grid_flags(trade, o.grid);
  trade->add_option("--tol", o.tol, "series truncation tolerance")->capture_default_str();

  auto* val = app.add_subcommand("validate", "run the Monte Carlo and quadrature oracle grid");
  val->add_option("--samples", o.samples, "Monte Carlo samples per point")->capture_default_str();
  val->add_option("--seed", o.seed, "base seed")->capture_default_str();
  val->add_option("--tol", o.check_tol, "series-vs-quadrature agreement tolerance")
      ->capture_default_str();

  for (auto* cmd : {analytic, sim, trade, val}) {
    cmd->add_option("--out", o.out, "output path (default stdout)");
  }
  for (auto* cmd : {analytic, trade}) {
    cmd->add_option("--jobs", o.jobs, "worker threads")->capture_default_str();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);  // --help
    }
    err << "usage error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (*analytic) return cmd_analytic(o, out);
    if (*sim) return cmd_simulate(o, out, err);
    if (*trade) return cmd_tradeoff(o, out);
    if (*val) return cmd_validate(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DomainError& e) {
    err << "config error: " << e.what() << '\n';
    return 2;
  } catch (const ConvergenceError& e) {
    err << "numerical error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace rcuage
