#include "rcuage/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <unordered_map>

#include <boost/math/distributions/students_t.hpp>

#include "rcuage/random.hpp"

namespace rcuage {

namespace {

// Kind order doubles as the tie-break order for simultaneous events.
enum class EventKind : std::uint8_t { Publish = 0, ReadArrival = 1, ReadCompletion = 2 };

struct Event {
  double time;
  EventKind kind;
  std::uint64_t seq;
  std::uint64_t update;  // ReadCompletion only
};

struct EventAfter {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time != b.time) return a.time > b.time;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct StaleUpdate {
  std::uint64_t locks = 0;
  std::optional<UpdateRecord> record;
};

/// State of the RCU process between events. Each step() advances to the next
/// event and reports the constant-N, linear-age segment that preceded it.
class RcuProcess {
 public:
  struct Segment {
    double start;
    double end;
    std::uint64_t active;  // N on the segment
    double age_start;      // age at `start`
    std::uint64_t reads;   // locks held on the segment
    EventKind closing;     // event at `end`, already applied
    double write_time;     // W_n when closing is Publish
  };

  RcuProcess(const ModelParams& params, std::uint64_t seed)
      : params_(params),
        publish_rng_(seed, "publish"),
        arrival_rng_(seed, "arrival"),
        service_rng_(seed, "service") {
    push(publish_rng_.exponential(params_.alpha), EventKind::Publish, 0);
    if (params_.lambda > 0.0) {
      push(arrival_rng_.exponential(params_.lambda), EventKind::ReadArrival, 0);
    }
  }

  Segment step() {
    const Event ev = queue_.top();
    queue_.pop();
    ++events_;
    Segment seg{now_, ev.time, active_, age_at(now_), in_flight_, ev.kind, 0.0};
    now_ = ev.time;
    switch (ev.kind) {
      case EventKind::Publish:
        seg.write_time = now_ - last_publish_;
        publish(seg.write_time);
        break;
      case EventKind::ReadArrival:
        ++current_locks_;
        ++in_flight_;
        ++reads_arrived_;
        push(now_ + service_rng_.exponential(params_.mu), EventKind::ReadCompletion, current_);
        push(now_ + arrival_rng_.exponential(params_.lambda), EventKind::ReadArrival, 0);
        break;
      case EventKind::ReadCompletion:
        complete(ev.update);
        break;
    }
    return seg;
  }

  void enable_records(double from, std::size_t limit) {
    record_from_ = from;
    record_limit_ = limit;
    if (limit > 0 && from <= now_) {
      current_record_ = UpdateRecord{current_, now_, std::nullopt, 0, std::nullopt};
    }
  }
  std::vector<UpdateRecord> take_records() { return std::move(records_); }

  std::uint64_t active() const { return active_; }
  std::uint64_t events() const { return events_; }
  std::uint64_t reads_arrived() const { return reads_arrived_; }
  std::uint64_t reads_served() const { return reads_served_; }
  std::uint64_t in_flight() const { return in_flight_; }
  std::uint64_t locks_outstanding() const {
    std::uint64_t total = current_locks_;
    for (const auto& [index, stale] : stale_) total += stale.locks;
    return total;
  }

 private:
  double age_at(double t) const { return age_base_ + (t - last_publish_); }

  void push(double time, EventKind kind, std::uint64_t update) {
    queue_.push(Event{time, kind, seq_++, update});
  }

  void publish(double write_time) {
    if (current_record_) {
      current_record_->replace_time = now_;
      current_record_->residual_readers = current_locks_;
    }
    if (current_locks_ > 0) {
      stale_.emplace(current_, StaleUpdate{current_locks_, std::move(current_record_)});
      ++active_;
    } else if (current_record_) {
      current_record_->grace_end_time = now_;
      finish(std::move(*current_record_));
    }
    current_record_.reset();
    ++current_;
    current_locks_ = 0;
    last_publish_ = now_;
    age_base_ = write_time;
    if (record_limit_ > 0 && now_ >= record_from_) {
      current_record_ = UpdateRecord{current_, now_, std::nullopt, 0, std::nullopt};
    }
    push(now_ + publish_rng_.exponential(params_.alpha), EventKind::Publish, 0);
  }

  void complete(std::uint64_t update) {
    --in_flight_;
    ++reads_served_;
    if (update == current_) {
      --current_locks_;
      return;
    }
    auto it = stale_.find(update);
    if (--it->second.locks == 0) {
      if (it->second.record) {
        it->second.record->grace_end_time = now_;
        finish(std::move(*it->second.record));
      }
      stale_.erase(it);
      --active_;
    }
  }

  void finish(UpdateRecord record) {
    if (records_.size() < record_limit_) {
      records_.push_back(std::move(record));
    }
  }

  ModelParams params_;
  RandomSource publish_rng_;
  RandomSource arrival_rng_;
  RandomSource service_rng_;
  std::priority_queue<Event, std::vector<Event>, EventAfter> queue_;
  std::uint64_t seq_ = 0;

  double now_ = 0.0;
  double last_publish_ = 0.0;
  double age_base_ = 0.0;
  std::uint64_t current_ = 0;
  std::uint64_t current_locks_ = 0;
  std::uint64_t active_ = 1;
  std::uint64_t in_flight_ = 0;
  std::unordered_map<std::uint64_t, StaleUpdate> stale_;

  std::uint64_t events_ = 0;
  std::uint64_t reads_arrived_ = 0;
  std::uint64_t reads_served_ = 0;

  double record_from_ = 0.0;
  std::size_t record_limit_ = 0;
  std::optional<UpdateRecord> current_record_;
  std::vector<UpdateRecord> records_;
};

struct BatchAccumulator {
  double duration = 0.0;
  double area_n = 0.0;
  double area_age = 0.0;
  double area_reads = 0.0;
};

// 95% half-width from the spread of per-batch time averages.
double batch_half_width(const std::vector<BatchAccumulator>& batches,
                        double BatchAccumulator::*area) {
  const auto count = static_cast<double>(batches.size());
  double mean = 0.0;
  for (const auto& b : batches) mean += (b.*area) / b.duration;
  mean /= count;
  double ss = 0.0;
  for (const auto& b : batches) {
    const double d = (b.*area) / b.duration - mean;
    ss += d * d;
  }
  const double sd = std::sqrt(ss / (count - 1.0));
  return student_t_975(static_cast<unsigned>(batches.size() - 1)) * sd / std::sqrt(count);
}

}  // namespace

void SimConfig::check() const {
  if (horizon_publications < 1000) {
    throw ConfigError("horizon_publications must be >= 1000");
  }
  if (batch_count < 10) {
    throw ConfigError("batch_count must be >= 10");
  }
  if (batch_count > horizon_publications) {
    throw ConfigError("batch_count exceeds horizon_publications");
  }
  if (warmup_time && (!(*warmup_time >= 0.0) || !std::isfinite(*warmup_time))) {
    throw ConfigError("warmup_time must be finite and >= 0");
  }
}

double default_warmup(const ModelParams& params) {
  validate(params);
  double w = std::max(100.0 / params.alpha, 100.0 / params.mu);
  if (params.lambda > 0.0) {
    w = std::max(w, 100.0 / params.lambda);
  }
  return w;
}

double NHistogram::mean() const {
  double m = 0.0;
  for (std::size_t n = 0; n < mass.size(); ++n) m += static_cast<double>(n) * mass[n];
  return m;
}

std::size_t histogram_cap(const ModelParams& params) {
  const DerivedParams d = validate(params);
  return 1 + static_cast<std::size_t>(std::ceil(10.0 * d.rho)) + 20;
}

double student_t_975(unsigned dof) {
  if (dof < 1) {
    throw DomainError("student_t_975: dof must be >= 1");
  }
  return boost::math::quantile(boost::math::students_t(static_cast<double>(dof)), 0.975);
}

SimStats simulate(const ModelParams& params, const SimConfig& config) {
  validate(params);
  config.check();

  const double warmup = config.warmup_time.value_or(default_warmup(params));
  const std::uint64_t horizon = config.horizon_publications;
  const unsigned batch_count = config.batch_count;

  RcuProcess process(params, config.seed);
  if (config.record_updates > 0) {
    process.enable_records(warmup, config.record_updates);
  }

  std::vector<double> histogram;
  double overflow = 0.0;
  const std::size_t cap = histogram_cap(params);
  if (config.sample_n_distribution) {
    histogram.assign(cap + 1, 0.0);
  }

  std::vector<BatchAccumulator> batches(batch_count);
  auto batch_end = [&](unsigned b) { return (b + 1) * horizon / batch_count; };
  unsigned batch = 0;
  std::uint64_t measured = 0;
  std::uint64_t min_active = std::numeric_limits<std::uint64_t>::max();

  while (measured < horizon) {
    const auto seg = process.step();
    if (seg.end > warmup) {
      const double start = std::max(seg.start, warmup);
      const double dt = seg.end - start;
      const double age0 = seg.age_start + (start - seg.start);
      auto& acc = batches[batch];
      acc.duration += dt;
      acc.area_n += static_cast<double>(seg.active) * dt;
      acc.area_age += age0 * dt + 0.5 * dt * dt;
      acc.area_reads += static_cast<double>(seg.reads) * dt;
      if (config.sample_n_distribution) {
        if (seg.active <= cap) {
          histogram[seg.active] += dt;
        } else {
          overflow += dt;
        }
      }
      min_active = std::min({min_active, seg.active, process.active()});
      if (seg.closing == EventKind::Publish) {
        ++measured;
        if (measured == batch_end(batch) && batch + 1 < batch_count) {
          ++batch;
        }
      }
    }
  }

  SimStats stats;
  BatchAccumulator total;
  for (const auto& b : batches) {
    total.duration += b.duration;
    total.area_n += b.area_n;
    total.area_age += b.area_age;
    total.area_reads += b.area_reads;
  }
  stats.measured_time = total.duration;
  stats.mean_active_updates = total.area_n / total.duration;
  stats.mean_age = total.area_age / total.duration;
  stats.mean_reads_in_flight = total.area_reads / total.duration;
  stats.ci_half_width_n = batch_half_width(batches, &BatchAccumulator::area_n);
  stats.ci_half_width_age = batch_half_width(batches, &BatchAccumulator::area_age);
  stats.ci_half_width_reads = batch_half_width(batches, &BatchAccumulator::area_reads);
  stats.publications = measured;
  stats.events = process.events();
  stats.reads_arrived = process.reads_arrived();
  stats.reads_served = process.reads_served();
  stats.reads_open = process.in_flight();
  stats.locks_outstanding = process.locks_outstanding();
  stats.min_active_updates = min_active;
  if (config.sample_n_distribution) {
    NHistogram h;
    h.mass.resize(cap + 1);
    for (std::size_t n = 0; n <= cap; ++n) h.mass[n] = histogram[n] / total.duration;
    h.overflow = overflow / total.duration;
    stats.n_histogram = std::move(h);
  }
  stats.updates = process.take_records();
  return stats;
}

NHistogram simulate_n_distribution(const ModelParams& params, SimConfig config) {
  config.sample_n_distribution = true;
  return *simulate(params, config).n_histogram;
}

double estimate_age_from_polygons(std::span<const double> write_times) {
  if (write_times.size() < 2) {
    throw DomainError("estimate_age_from_polygons: need at least 2 write intervals");
  }
  double area = 0.0;
  double time = 0.0;
  for (std::size_t n = 1; n < write_times.size(); ++n) {
    const double prev = write_times[n - 1];
    const double cur = write_times[n];
    if (!(prev >= 0.0) || !(cur >= 0.0)) {
      throw DomainError("estimate_age_from_polygons: write intervals must be >= 0");
    }
    area += 0.5 * (prev + cur) * (prev + cur) - 0.5 * cur * cur;
    time += cur;
  }
  if (!(time > 0.0)) {
    throw DomainError("estimate_age_from_polygons: total write time is zero");
  }
  return area / time;
}

AgePath trace_age_path(const ModelParams& params, std::uint64_t seed,
                       std::uint64_t publications) {
  validate(params);
  if (publications < 2) {
    throw ConfigError("trace_age_path: need at least 2 publications");
  }
  RcuProcess process(params, seed);
  AgePath path;
  path.write_times.reserve(publications);
  while (path.write_times.size() < publications) {
    const auto seg = process.step();
    const double dt = seg.end - seg.start;
    path.age_integral += seg.age_start * dt + 0.5 * dt * dt;
    if (seg.closing == EventKind::Publish) {
      path.write_times.push_back(seg.write_time);
      path.end_time = seg.end;
    }
  }
  return path;
}

}  // namespace rcuage
