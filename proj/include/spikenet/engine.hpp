#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <memory>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spikenet/event_queue.hpp"
#include "spikenet/params.hpp"
#include "spikenet/random.hpp"

namespace spikenet {

enum class EventKind : std::uint8_t { leak, spike };

struct Event {
  std::uint32_t neuron = 0;
  EventKind kind = EventKind::leak;
  double time = 0.0;

  friend bool operator==(const Event&, const Event&) = default;
};

enum class Termination : std::uint8_t { extinction, max_events, max_time };

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::extinction: return "extinction";
    case Termination::max_events: return "max_events";
    case Termination::max_time: return "max_time";
  }
  return "?";
}

struct ExtinctionRecord {
  double extinction_time = 0.0;
  std::uint64_t spike_events = 0;
  std::uint64_t leak_events = 0;
  std::uint64_t seed = 0;
  Termination terminated_by = Termination::extinction;

  friend bool operator==(const ExtinctionRecord&, const ExtinctionRecord&) = default;
};

class extinct_state_error : public std::logic_error {
public:
  extinct_state_error() : std::logic_error("step called on an extinct state") {}
};

template <class F>
concept RateFunction = requires(const F& f, std::int64_t x) {
  { f(x) } -> std::convertible_to<double>;
};

// Leak clock of one neuron: the points of a rate-gamma Poisson process,
// drawn from the neuron's own stream. The sequence of leak times is fixed by
// the run seed and does not depend on the rest of the dynamics.
class LeakProcess {
public:
  LeakProcess() = default;
  LeakProcess(double gamma, std::uint64_t seed) : gamma_(gamma), rng_(seed) {
    next_ = sample_event_time(gamma_, 0.0, rng_);
  }

  double next() const noexcept { return next_; }

  // Replaces the pending leak point, for hand-built test scenarios.
  void override_next(double t) noexcept { next_ = t; }

  // Moves to the following leak point and returns it.
  double advance() {
    next_ = sample_event_time(gamma_, next_, rng_);
    return next_;
  }

private:
  double gamma_ = 1.0;
  Engine rng_;
  double next_ = infinity;
};

// One trajectory of the leak/spike dynamics, started with every neuron at
// the same potential.
//
// Clocks live in an indexed tournament tree with 2n slots: slot 2i is the
// leak clock of neuron i and slot 2i+1 its spike clock, so the two clocks of
// a neuron share a parent. Exact ties are broken leak-before-spike and then
// by lower neuron index.
//
// A leak of a quiescent neuron changes nothing but the leak clock itself, so
// while a neuron is quiescent its leak slot is parked at infinity. When the
// neuron is reactivated at time t, every leak point it passed up to t is
// consumed and counted as a leak event. Because each leak clock has its own
// stream, this yields exactly the trajectory and event counts of processing
// every leak in time order.
//
// Streams (see stream_seed): stream 0 draws spike clocks, one draw per reset
// to a finite time, in event order; at initialization one draw per neuron in
// index order, and on a spike one draw per postsynaptic neuron in ascending
// index order. Stream i+1 draws the leak points of neuron i. Selecting the
// next event consumes nothing, and neither does a reset to infinity.
template <RateFunction Rate = ActivationFunction>
class Simulation {
public:
  Simulation(const NetworkGraph& graph, double gamma, Rate rate,
             std::int32_t initial_potential, std::uint64_t seed,
             InitSpikeRate init_rate = InitSpikeRate::phi)
      : graph_(&graph), rate_(std::move(rate)), rng_(stream_seed(seed, 0)), seed_(seed) {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("gamma must be positive");
    if (initial_potential < 0) throw std::invalid_argument("initial_potential must be >= 0");
    const std::size_t n = graph.neuron_count();
    n_ = static_cast<std::uint32_t>(n);
    potentials_.assign(n, initial_potential);
    const double init_spike_rate =
        init_rate == InitSpikeRate::unit && initial_potential > 0
            ? 1.0
            : static_cast<double>(rate_(initial_potential));
    leaks_proc_.reserve(n);
    std::vector<EventQueue::slot_type> ranks(2 * n);
    std::vector<double> clocks(2 * n, infinity);
    for (std::uint32_t i = 0; i < n_; ++i) {
      leaks_proc_.emplace_back(gamma, stream_seed(seed, std::uint64_t{i} + 1));
      ranks[slot_leak(i)] = i;
      ranks[slot_spike(i)] = n_ + i;
      if (initial_potential > 0) {
        clocks[slot_leak(i)] = leaks_proc_[i].next();
        clocks[slot_spike(i)] = sample_event_time(init_spike_rate, 0.0, rng_);
      }
    }
    queue_.reset(ranks);
    queue_.assign(clocks);
    active_ = initial_potential > 0 ? n : 0;
    std::size_t max_degree = 0;
    for (std::size_t i = 0; i < n; ++i) max_degree = std::max(max_degree, graph.neighbors(i).size());
    touched_.reserve(2 * max_degree + 2);
  }

  // Shares ownership of the graph, so the simulation may outlive the caller's
  // handle.
  Simulation(std::shared_ptr<const NetworkGraph> graph, double gamma, Rate rate,
             std::int32_t initial_potential, std::uint64_t seed,
             InitSpikeRate init_rate = InitSpikeRate::phi)
      : Simulation(*graph, gamma, std::move(rate), initial_potential, seed, init_rate) {
    owner_ = std::move(graph);
  }

  double time() const noexcept { return time_; }
  std::size_t neuron_count() const noexcept { return n_; }
  std::size_t active_count() const noexcept { return active_; }
  bool extinct() const noexcept { return active_ == 0; }
  std::span<const std::int32_t> potentials() const noexcept { return potentials_; }
  // Next leak point of neuron i. For a quiescent neuron this can lag behind
  // time() until sync_leaks() or its reactivation.
  double leak_clock(std::size_t i) const noexcept { return leaks_proc_[i].next(); }
  double spike_clock(std::size_t i) const noexcept { return queue_.key(slot_spike(i)); }
  double next_event_time() const noexcept { return queue_.top_key(); }
  std::uint64_t spike_events() const noexcept { return spikes_; }
  std::uint64_t leak_events() const noexcept { return leaks_; }
  std::uint64_t events() const noexcept { return spikes_ + leaks_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const NetworkGraph& graph() const noexcept { return *graph_; }

  // Test hooks for hand-built scenarios, on active neurons only. Clocks must
  // not lie before time().
  void set_spike_clock(std::size_t i, double t) {
    if (potentials_[i] == 0) throw std::logic_error("quiescent neuron has no spike clock");
    queue_.update(slot_spike(i), t);
  }
  void set_leak_clock(std::size_t i, double t) {
    if (potentials_[i] == 0) throw std::logic_error("leak clock of a quiescent neuron is parked");
    leaks_proc_[i].override_next(t);
    queue_.update(slot_leak(i), t);
  }

  Event step() {
    if (active_ == 0) throw extinct_state_error();
    const auto slot = queue_.top();
    const double t = queue_.top_key();
    const std::uint32_t i = slot >> 1;
    time_ = t;
    touched_.clear();
    if ((slot & 1u) == 0) {
      // Only active neurons have their leak clock in the queue.
      ++leaks_;
      leaks_proc_[i].advance();
      potentials_[i] = 0;
      --active_;
      queue_.set_key(slot_leak(i), infinity);
      queue_.set_key(slot_spike(i), infinity);
      touched_.push_back(slot_leak(i));
      touched_.push_back(slot_spike(i));
      queue_.commit(touched_);
      return {i, EventKind::leak, t};
    }

    ++spikes_;
    potentials_[i] = 0;
    --active_;
    queue_.set_key(slot_leak(i), infinity);
    queue_.set_key(slot_spike(i), infinity);
    bool own_placed = false;
    for (const auto j : graph_->neighbors(i)) {
      if (!own_placed && j > i) {
        touched_.push_back(slot_leak(i));
        touched_.push_back(slot_spike(i));
        own_placed = true;
      }
      auto& x = potentials_[j];
      if (x == std::numeric_limits<std::int32_t>::max())
        throw std::overflow_error("membrane potential overflow at neuron " + std::to_string(j));
      if (x == 0) {
        ++active_;
        // Leak points at or before t precede this spike.
        auto& leak = leaks_proc_[j];
        while (leak.next() <= t) {
          leak.advance();
          ++leaks_;
        }
        queue_.set_key(slot_leak(j), leak.next());
        touched_.push_back(slot_leak(j));
      }
      ++x;
      queue_.set_key(slot_spike(j), sample_event_time(static_cast<double>(rate_(x)), t, rng_));
      touched_.push_back(slot_spike(j));
    }
    if (!own_placed) {
      touched_.push_back(slot_leak(i));
      touched_.push_back(slot_spike(i));
    }
    queue_.commit(touched_);
    return {i, EventKind::spike, t};
  }

  // Consumes the pending leak points of quiescent neurons up to time().
  // Called once the run ends so leak_events() covers the whole interval.
  void sync_leaks() {
    for (std::uint32_t i = 0; i < n_; ++i) {
      if (potentials_[i] > 0) continue;
      auto& leak = leaks_proc_[i];
      while (leak.next() <= time_) {
        leak.advance();
        ++leaks_;
      }
    }
  }

  // Full-scan audit of the state invariants. Returns an empty string when
  // everything holds, otherwise a description of the first violation.
  std::string audit() const {
    if (!queue_.valid()) return "event queue tree out of sync";
    std::size_t active = 0;
    for (std::size_t i = 0; i < n_; ++i) {
      const bool on = potentials_[i] > 0;
      active += on;
      const double s = spike_clock(i);
      const double parked = queue_.key(slot_leak(i));
      if (on != (s != infinity))
        return "spike clock of neuron " + std::to_string(i) + " inconsistent with potential";
      if (on && s < time_) return "spike clock in the past at neuron " + std::to_string(i);
      if (on ? parked != leak_clock(i) : parked != infinity)
        return "leak slot of neuron " + std::to_string(i) + " out of sync";
      if (on && !(leak_clock(i) >= time_))
        return "leak clock in the past at neuron " + std::to_string(i);
    }
    if (active != active_) return "active count out of sync";
    return {};
  }

private:
  static constexpr std::uint32_t slot_leak(std::size_t i) noexcept {
    return static_cast<std::uint32_t>(2 * i);
  }
  static constexpr std::uint32_t slot_spike(std::size_t i) noexcept {
    return static_cast<std::uint32_t>(2 * i + 1);
  }

  const NetworkGraph* graph_;
  std::shared_ptr<const NetworkGraph> owner_;
  Rate rate_;
  Engine rng_;
  std::uint64_t seed_;
  std::uint32_t n_ = 0;
  std::vector<std::int32_t> potentials_;
  std::vector<LeakProcess> leaks_proc_;
  EventQueue queue_;
  std::vector<EventQueue::slot_type> touched_;
  double time_ = 0.0;
  std::size_t active_ = 0;
  std::uint64_t spikes_ = 0;
  std::uint64_t leaks_ = 0;
};

struct RunLimits {
  std::optional<std::uint64_t> max_events = default_max_events;
  std::optional<double> max_time;
};

struct NoObserver {
  void operator()(const Event&) const noexcept {}
};

// Advances `sim` until every neuron is quiescent or a limit is reached. A
// pending event past max_time is left unapplied.
template <RateFunction Rate, class Observer = NoObserver>
ExtinctionRecord run(Simulation<Rate>& sim, const RunLimits& limits = {},
                     Observer&& observer = {}) {
  ExtinctionRecord rec;
  rec.seed = sim.seed();
  rec.terminated_by = Termination::extinction;
  while (!sim.extinct()) {
    if (limits.max_events && sim.events() >= *limits.max_events) {
      rec.terminated_by = Termination::max_events;
      break;
    }
    if (limits.max_time && sim.next_event_time() > *limits.max_time) {
      rec.terminated_by = Termination::max_time;
      break;
    }
    observer(sim.step());
  }
  sim.sync_leaks();
  rec.extinction_time = sim.time();
  rec.spike_events = sim.spike_events();
  rec.leak_events = sim.leak_events();
  return rec;
}

inline Simulation<ActivationFunction> initialize(const SimulationParams& params,
                                                 std::uint64_t seed) {
  params.validate();
  return Simulation<ActivationFunction>(params.graph, params.gamma, params.activation,
                                        params.initial_potential, seed,
                                        params.init_spike_rate);
}

inline ExtinctionRecord run_to_extinction(const SimulationParams& params, std::uint64_t seed) {
  auto sim = initialize(params, seed);
  return run(sim, RunLimits{params.max_events, params.max_time});
}

// CSV event trace: header `time,neuron,kind`.
class TraceWriter {
public:
  explicit TraceWriter(std::ostream& os) : os_(&os) {
    *os_ << "time,neuron,kind\n";
    os_->precision(17);
  }
  void operator()(const Event& e) const {
    *os_ << e.time << ',' << e.neuron << ',' << (e.kind == EventKind::leak ? "leak" : "spike")
         << '\n';
  }

private:
  std::ostream* os_;
};

inline ExtinctionRecord run_to_extinction(const SimulationParams& params, std::uint64_t seed,
                                          std::ostream& trace) {
  auto sim = initialize(params, seed);
  return run(sim, RunLimits{params.max_events, params.max_time}, TraceWriter(trace));
}

}  // namespace spikenet
