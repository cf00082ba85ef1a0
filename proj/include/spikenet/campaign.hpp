#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "spikenet/engine.hpp"
#include "spikenet/lattice.hpp"
#include "spikenet/params.hpp"
#include "spikenet/random.hpp"
#include "spikenet/stats.hpp"

namespace spikenet {

inline constexpr std::size_t default_bins = 50;
inline constexpr std::size_t default_replications = 1000;

// Fully resolved description of a replication campaign. The lattice and
// dynamics fields describe the base point; a sweep replaces either the
// neuron count (1D chains) or gamma at each point.
struct CampaignSpec {
  std::size_t dimension = 1;
  std::vector<std::size_t> extents;
  Boundary boundary = Boundary::open;

  double gamma = 1.0;
  ActivationFunction activation{};
  std::int32_t initial_potential = 1;
  std::optional<std::uint64_t> max_events = default_max_events;
  std::optional<double> max_time;
  InitSpikeRate init_spike_rate = InitSpikeRate::phi;

  std::size_t replications = default_replications;
  std::size_t bins = default_bins;
  std::optional<std::uint64_t> master_seed;
  std::vector<std::size_t> size_sweep;
  std::vector<double> gamma_sweep;

  friend bool operator==(const CampaignSpec&, const CampaignSpec&) = default;

  std::size_t sweep_points() const noexcept {
    if (!size_sweep.empty()) return size_sweep.size();
    if (!gamma_sweep.empty()) return gamma_sweep.size();
    return 1;
  }

  void validate() const {
    if (!size_sweep.empty() && !gamma_sweep.empty())
      throw std::invalid_argument("a campaign sweeps either sizes or gamma, not both");
    if (!size_sweep.empty() && dimension != 1)
      throw std::invalid_argument("size sweeps run on 1D chains only");
    if (replications < 1) throw std::invalid_argument("replications must be positive");
    if (bins < 1) throw std::invalid_argument("bins must be positive");
    for (auto n : size_sweep)
      if (n < 1) throw std::invalid_argument("sweep sizes must be positive");
  }

  // Simulation parameters of one sweep point, with its graph built.
  SimulationParams point_params(std::size_t sweep_index) const {
    validate();
    SimulationParams p;
    p.gamma = gamma_sweep.empty() ? gamma : gamma_sweep.at(sweep_index);
    p.activation = activation;
    p.initial_potential = initial_potential;
    p.max_events = max_events;
    p.max_time = max_time;
    p.init_spike_rate = init_spike_rate;
    if (!size_sweep.empty())
      p.graph = std::make_shared<const NetworkGraph>(build_chain(size_sweep.at(sweep_index)));
    else
      p.graph = std::make_shared<const NetworkGraph>(build_lattice(dimension, extents, boundary));
    p.validate();
    return p;
  }
};

// Statistics of one sweep point. Capped runs are censored and excluded; the
// remaining extinction times are `samples`, in replication order.
struct CampaignSummary {
  std::vector<double> samples;
  std::size_t n_capped = 0;
  std::optional<double> mean;
  std::optional<double> variance;
  std::optional<double> renormalized_variance;
  std::optional<double> ks_distance;
  std::optional<stats::Histogram> histogram;

  bool clean() const noexcept { return n_capped == 0; }

  friend bool operator==(const CampaignSummary&, const CampaignSummary&) = default;
};

// Pure function of the records: recomputing from a samples file gives the
// same summary as the original run.
inline CampaignSummary summarize_records(std::span<const ExtinctionRecord> records,
                                         std::size_t bins = default_bins) {
  CampaignSummary s;
  for (const auto& r : records) {
    if (r.terminated_by == Termination::extinction)
      s.samples.push_back(r.extinction_time);
    else
      ++s.n_capped;
  }
  if (s.samples.empty()) return s;
  const auto basic = stats::summarize(s.samples);
  s.mean = basic.mean;
  s.variance = basic.variance;
  s.renormalized_variance = basic.renormalized_variance;
  if (basic.mean > 0.0) {
    const auto r = stats::renormalize(s.samples);
    s.ks_distance = stats::ks_distance_exp1(r);
    s.histogram = stats::histogram(r, bins);
  }
  return s;
}

struct PointResult {
  std::size_t sweep_index = 0;
  std::size_t neuron_count = 0;
  double gamma = 0.0;
  std::vector<ExtinctionRecord> records;  // index = replication
  CampaignSummary summary;
};

struct CampaignResult {
  std::vector<PointResult> points;
  std::optional<stats::LogFit> log_fit;  // size sweeps with >= 3 usable points

  bool clean() const noexcept {
    return std::all_of(points.begin(), points.end(),
                       [](const PointResult& p) { return p.summary.clean(); });
  }
};

inline std::optional<stats::LogFit> fit_points(std::span<const PointResult> points) {
  std::vector<stats::ScalingPoint> pts;
  for (const auto& p : points)
    if (p.summary.mean) pts.push_back({static_cast<double>(p.neuron_count), *p.summary.mean});
  if (pts.size() < 3) return std::nullopt;
  try {
    return stats::fit_log_growth(pts);
  } catch (const stats::stats_error&) {
    return std::nullopt;
  }
}

struct RunOptions {
  std::size_t threads = 0;  // 0: hardware concurrency
  // Called after each finished replication with (done, total); may be
  // invoked from worker threads, serialized by the runner.
  std::function<void(std::size_t, std::size_t)> progress;
};

// Runs every replication of every sweep point. Replication r of point k is
// seeded with derive_seed(master_seed, k, r) and written to its own slot, so
// the result does not depend on the number of threads or their scheduling.
inline CampaignResult run_campaign(const CampaignSpec& spec, const RunOptions& options = {}) {
  spec.validate();
  if (!spec.master_seed) throw std::invalid_argument("campaign needs a master seed");
  const std::uint64_t master = *spec.master_seed;
  const std::size_t points = spec.sweep_points();

  CampaignResult result;
  std::vector<SimulationParams> params;
  for (std::size_t k = 0; k < points; ++k) {
    params.push_back(spec.point_params(k));
    PointResult pr;
    pr.sweep_index = k;
    pr.neuron_count = params.back().graph->neuron_count();
    pr.gamma = params.back().gamma;
    pr.records.resize(spec.replications);
    result.points.push_back(std::move(pr));
  }

  const std::size_t total = points * spec.replications;
  std::atomic<std::size_t> next{0};
  std::size_t done = 0;
  std::mutex mu;
  std::exception_ptr failure;

  auto worker = [&] {
    for (;;) {
      const std::size_t job = next.fetch_add(1);
      if (job >= total) return;
      const std::size_t k = job / spec.replications;
      const std::size_t r = job % spec.replications;
      try {
        result.points[k].records[r] = run_to_extinction(params[k], derive_seed(master, k, r));
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next.store(total);
        return;
      }
      if (options.progress) {
        std::lock_guard lock(mu);
        options.progress(++done, total);
      }
    }
  };

  std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = std::clamp<std::size_t>(threads, 1, total);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  for (auto& p : result.points) p.summary = summarize_records(p.records, spec.bins);
  if (!spec.size_sweep.empty()) result.log_fit = fit_points(result.points);
  return result;
}

}  // namespace spikenet
