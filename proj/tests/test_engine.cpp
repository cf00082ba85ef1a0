#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "ctmc_oracle.hpp"
#include "reference_engine.hpp"
#include "spikenet/engine.hpp"
#include "spikenet/stats.hpp"

using namespace spikenet;

namespace {

const ActivationFunction hard{ActivationKind::hard_threshold};
const ActivationFunction linear{ActivationKind::linear};
const ActivationFunction sigmoid{ActivationKind::sigmoid};

SimulationParams make_params(NetworkGraph g, double gamma, ActivationFunction f = hard) {
  SimulationParams p;
  p.graph = std::make_shared<const NetworkGraph>(std::move(g));
  p.gamma = gamma;
  p.activation = f;
  return p;
}

std::vector<double> extinction_times(const SimulationParams& p, std::size_t reps,
                                     std::uint64_t master) {
  std::vector<double> xs;
  xs.reserve(reps);
  for (std::size_t r = 0; r < reps; ++r) {
    const auto rec = run_to_extinction(p, derive_seed(master, 0, r));
    EXPECT_EQ(rec.terminated_by, Termination::extinction);
    xs.push_back(rec.extinction_time);
  }
  return xs;
}

struct ZeroRate {
  double operator()(std::int64_t) const { return 0.0; }
};

}  // namespace

TEST(Initialize, SingleNeuron) {
  auto sim = initialize(make_params(build_lattice(1, {1}), 4.0), 9);
  EXPECT_EQ(sim.time(), 0.0);
  EXPECT_EQ(sim.active_count(), 1u);
  EXPECT_EQ(std::vector<std::int32_t>(sim.potentials().begin(), sim.potentials().end()),
            std::vector<std::int32_t>{1});
  EXPECT_TRUE(std::isfinite(sim.spike_clock(0)));
  EXPECT_TRUE(std::isfinite(sim.leak_clock(0)));
  EXPECT_EQ(sim.audit(), "");
}

TEST(Initialize, AllNeuronsActive) {
  auto sim = initialize(make_params(build_lattice(1, {101}), 0.34), 1);
  EXPECT_EQ(sim.active_count(), 101u);
  for (std::size_t i = 0; i < 101; ++i) EXPECT_EQ(sim.potentials()[i], 1);
}

TEST(Initialize, SigmoidSpikeClocksUseRateAtOne) {
  const double rate = 1.0 / (1.0 + std::exp(3.0));
  EXPECT_NEAR(rate, 0.04742587317756678, 1e-16);
  const auto p = make_params(build_lattice(1, {5}), 1.0, sigmoid);
  // The i-th draw of stream 0 sets neuron i's initial spike clock.
  auto sim = initialize(p, 77);
  Engine rng(stream_seed(77, 0));
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(sim.spike_clock(i), sample_event_time(rate, 0.0, rng));

  std::vector<double> first;
  for (std::uint64_t s = 0; s < 20000; ++s) first.push_back(initialize(p, s).spike_clock(0));
  EXPECT_NEAR(stats::mean(first), 1.0 / rate, 4.0 * (1.0 / rate) / std::sqrt(20000.0));
}

TEST(Initialize, UnitInitialRate) {
  auto p = make_params(build_lattice(1, {3}), 1.0, sigmoid);
  p.init_spike_rate = InitSpikeRate::unit;
  auto sim = initialize(p, 5);
  Engine rng(stream_seed(5, 0));
  EXPECT_EQ(sim.spike_clock(0), sample_event_time(1.0, 0.0, rng));
}

TEST(Step, LoneNeuronSpikesFirst) {
  auto sim = initialize(make_params(build_lattice(1, {1}), 4.0), 3);
  sim.set_spike_clock(0, 0.3);
  sim.set_leak_clock(0, 0.5);
  const auto e = sim.step();
  EXPECT_EQ(e, (Event{0, EventKind::spike, 0.3}));
  EXPECT_EQ(sim.active_count(), 0u);
  EXPECT_TRUE(sim.extinct());
  EXPECT_THROW(sim.step(), extinct_state_error);
}

TEST(Step, SpikeWakesBothQuiescentNeighbors) {
  auto sim = initialize(make_params(build_lattice(1, {3}), 1.0), 11);
  sim.set_leak_clock(0, 0.01);
  sim.set_leak_clock(2, 0.02);
  sim.set_leak_clock(1, 10.0);
  sim.set_spike_clock(0, 10.0);
  sim.set_spike_clock(2, 10.0);
  sim.set_spike_clock(1, 0.05);
  EXPECT_EQ(sim.step().kind, EventKind::leak);
  EXPECT_EQ(sim.step().kind, EventKind::leak);
  ASSERT_EQ(sim.active_count(), 1u);
  const auto e = sim.step();
  EXPECT_EQ(e, (Event{1, EventKind::spike, 0.05}));
  EXPECT_EQ(sim.active_count(), 2u);
  EXPECT_EQ(sim.potentials()[0], 1);
  EXPECT_EQ(sim.potentials()[1], 0);
  EXPECT_EQ(sim.potentials()[2], 1);
  EXPECT_TRUE(std::isfinite(sim.spike_clock(0)));
  EXPECT_TRUE(std::isfinite(sim.spike_clock(2)));
  EXPECT_EQ(sim.spike_clock(1), infinity);
  // The spiking neuron keeps its leak clock.
  EXPECT_EQ(sim.leak_clock(1), 10.0);
  EXPECT_EQ(sim.audit(), "");
}

TEST(Step, SpikeIncrementsActiveNeighbor) {
  auto sim = initialize(make_params(build_chain(2), 1.0, linear), 4);
  sim.set_leak_clock(0, 5.0);
  sim.set_leak_clock(1, 5.0);
  sim.set_spike_clock(1, 5.0);
  sim.set_spike_clock(0, 0.25);
  sim.step();
  EXPECT_EQ(sim.potentials()[1], 2);
  EXPECT_GE(sim.spike_clock(1), 0.25);
  EXPECT_EQ(sim.active_count(), 1u);
}

TEST(Step, LeakResetsAndAdvancesLeakClock) {
  auto sim = initialize(make_params(build_lattice(1, {3}), 1.0), 21);
  sim.set_spike_clock(0, 5.0);
  sim.set_spike_clock(1, 5.0);
  sim.set_spike_clock(2, 5.0);
  sim.set_leak_clock(0, 4.0);
  sim.set_leak_clock(2, 4.5);
  sim.set_leak_clock(1, 0.1);
  const double before = sim.leak_clock(1);
  const auto e = sim.step();
  EXPECT_EQ(e, (Event{1, EventKind::leak, 0.1}));
  EXPECT_EQ(sim.spike_clock(1), infinity);
  EXPECT_EQ(sim.potentials()[1], 0);
  EXPECT_GT(sim.leak_clock(1), before);
}

TEST(Step, TiesPreferLeakThenLowerIndex) {
  auto sim = initialize(make_params(build_lattice(1, {3}), 1.0), 2);
  for (std::size_t i = 0; i < 3; ++i) {
    sim.set_spike_clock(i, 1.0);
    sim.set_leak_clock(i, 1.0);
  }
  sim.set_leak_clock(0, 2.0);
  EXPECT_EQ(sim.step(), (Event{1, EventKind::leak, 1.0}));
  EXPECT_EQ(sim.step(), (Event{2, EventKind::leak, 1.0}));
  EXPECT_EQ(sim.step(), (Event{0, EventKind::spike, 1.0}));
}

TEST(Step, PotentialOverflowIsSignalled) {
  SimulationParams p = make_params(build_lattice(1, {3}), 1.0);
  auto sim = Simulation<ActivationFunction>(*p.graph, 1.0, hard,
                                            std::numeric_limits<std::int32_t>::max(), 1);
  for (std::size_t i = 0; i < 3; ++i) {
    sim.set_leak_clock(i, 100.0);
    sim.set_spike_clock(i, 100.0);
  }
  sim.set_spike_clock(0, 0.1);
  EXPECT_THROW(sim.step(), std::overflow_error);
}

TEST(Run, SingleNeuronMeanMatchesExpOfOnePlusGamma) {
  const auto xs = extinction_times(make_params(build_lattice(1, {1}), 4.0), 100000, 2024);
  EXPECT_NEAR(stats::mean(xs), 0.2, 0.003);
  // Every run ends after one event with both branches equally final.
  const double ks = stats::ks_distance(xs, [](double x) { return -std::expm1(-5.0 * x); });
  EXPECT_LT(ks, 1.628 / std::sqrt(100000.0));
}

TEST(Run, TwoNeuronMeanMatchesClosedFormAndCtmc) {
  const auto two = build_chain(2);
  const double closed = 1.0 / (2.0 * (1.0 + 1.0)) + 1.0 / 1.0;
  EXPECT_NEAR(spikenet::testing::hard_threshold_mean_extinction(two, 1.0), closed, 1e-12);
  EXPECT_NEAR(closed, 1.25, 1e-15);
  const auto xs = extinction_times(make_params(two, 1.0), 100000, 99);
  EXPECT_NEAR(stats::mean(xs), 1.25, 0.02);
}

TEST(Run, TwoNeuronClosedFormAcrossGamma) {
  for (double gamma : {0.25, 0.5, 2.0, 4.0})
    EXPECT_NEAR(spikenet::testing::hard_threshold_mean_extinction(build_chain(2), gamma),
                1.0 / (2.0 * (1.0 + gamma)) + 1.0 / gamma, 1e-12);
}

TEST(Run, SmallGraphsMatchCtmcOracle) {
  struct Case {
    NetworkGraph g;
    double gamma;
  };
  const std::vector<Case> cases = {{build_lattice(1, {3}), 1.0},
                                   {build_lattice(2, {3, 3}), 2.0},
                                   {NetworkGraph::from_adjacency({{1, 2}, {0, 3}, {0, 3}, {1, 2}}), 0.8}};
  std::uint64_t master = 500;
  for (const auto& c : cases) {
    const double expect = spikenet::testing::hard_threshold_mean_extinction(c.g, c.gamma);
    const auto xs = extinction_times(make_params(c.g, c.gamma), 100000, ++master);
    const double se = std::sqrt(stats::variance(xs) / static_cast<double>(xs.size()));
    EXPECT_NEAR(stats::mean(xs), expect, 4.5 * se) << "oracle " << expect;
  }
}

TEST(Run, MatchesReferenceLinearScanBitForBit) {
  struct Case {
    NetworkGraph g;
    double gamma;
    ActivationFunction f;
    std::int32_t x0;
  };
  const std::vector<Case> cases = {
      {build_lattice(1, {1}), 4.0, hard, 1},       {build_lattice(1, {21}), 0.34, hard, 1},
      {build_lattice(1, {21}), 4.0, hard, 1},      {build_lattice(2, {5, 5}), 1.25, hard, 1},
      {build_lattice(3, {3, 3, 3}), 1.8, hard, 1}, {build_lattice(1, {11}), 0.42, linear, 1},
      {build_lattice(2, {5, 3}), 1.7, linear, 2},  {build_lattice(1, {11}), 0.028, sigmoid, 1},
      {build_lattice(2, {3, 3}, Boundary::periodic), 1.0, sigmoid, 3},
  };
  for (const auto& c : cases) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Simulation<ActivationFunction> sim(c.g, c.gamma, c.f, c.x0, seed);
      std::vector<Event> events;
      const auto rec = run(sim, RunLimits{std::nullopt, std::nullopt},
                           [&](const Event& e) { events.push_back(e); });
      std::vector<spikenet::testing::ReferenceTraceEvent> ref_trace;
      const auto ref = spikenet::testing::reference_run(c.g, c.gamma, c.f, c.x0, seed, &ref_trace);
      ASSERT_EQ(rec, ref) << "n=" << c.g.neuron_count() << " seed=" << seed;
      std::vector<Event> ref_events;
      for (const auto& e : ref_trace)
        if (e.state_change) ref_events.push_back({e.neuron, e.kind, e.time});
      ASSERT_EQ(events, ref_events);
    }
  }
}

TEST(Run, AuditHoldsAfterEveryEvent) {
  Engine pick(123);
  const std::vector<NetworkGraph> graphs = {build_lattice(1, {101}), build_lattice(2, {11, 11}),
                                            build_lattice(3, {5, 5, 5})};
  const ActivationFunction fs[] = {hard, linear, sigmoid};
  for (int r = 0; r < 100; ++r) {
    const auto& g = graphs[pick() % 3];
    const auto f = fs[pick() % 3];
    const double gamma = 0.05 + 4.0 * uniform_open(pick);
    const std::uint64_t seed = pick();
    Simulation<ActivationFunction> sim(g, gamma, f, 1, seed);
    ASSERT_EQ(sim.audit(), "");
    std::size_t steps = 0;
    while (!sim.extinct() && steps < 3000) {
      const double before = sim.time();
      const auto e = sim.step();
      ++steps;
      ASSERT_GE(e.time, before);
      ASSERT_EQ(sim.audit(), "") << "run " << r << " step " << steps;
    }
  }
}

TEST(Run, EventCountLowerBound) {
  for (const auto& g : {build_lattice(1, {101}), build_lattice(2, {11, 11}), build_lattice(3, {5, 5, 5})}) {
    const auto p = make_params(g, 2.0);
    for (std::uint64_t s = 0; s < 50; ++s) {
      const auto rec = run_to_extinction(p, s);
      ASSERT_EQ(rec.terminated_by, Termination::extinction);
      ASSERT_GE(rec.leak_events + rec.spike_events, g.neuron_count());
    }
  }
}

TEST(Run, SameSeedIsBitIdentical) {
  const auto p = make_params(build_lattice(2, {11, 11}), 1.25, sigmoid);
  for (std::uint64_t s : {0ull, 1ull, 0xdeadbeefull}) {
    const auto a = run_to_extinction(p, s);
    const auto b = run_to_extinction(p, s);
    EXPECT_EQ(a, b);
    EXPECT_EQ(std::bit_cast<std::uint64_t>(a.extinction_time),
              std::bit_cast<std::uint64_t>(b.extinction_time));
  }
  EXPECT_NE(run_to_extinction(p, 1).extinction_time, run_to_extinction(p, 2).extinction_time);
}

TEST(Run, EventCapStopsRun) {
  auto p = make_params(build_lattice(1, {101}), 0.34);
  p.max_events = 50;
  const auto rec = run_to_extinction(p, 8);
  EXPECT_EQ(rec.terminated_by, Termination::max_events);
  EXPECT_GE(rec.spike_events + rec.leak_events, 50u);
}

TEST(Run, TimeCapStopsRun) {
  auto p = make_params(build_lattice(1, {101}), 0.34);
  p.max_time = 0.5;
  const auto rec = run_to_extinction(p, 8);
  EXPECT_EQ(rec.terminated_by, Termination::max_time);
  EXPECT_LE(rec.extinction_time, 0.5);
}

TEST(Run, MeanExtinctionDecreasesWithGamma) {
  double prev = infinity;
  std::uint64_t master = 40;
  for (double gamma : {0.5, 1.0, 2.0, 4.0}) {
    const auto m = stats::mean(extinction_times(make_params(build_lattice(1, {21}), gamma), 10000, ++master));
    EXPECT_LT(m, prev) << "gamma " << gamma;
    prev = m;
  }
}

TEST(Run, TraceListsStateChangingEvents) {
  const auto p = make_params(build_lattice(1, {5}), 1.0);
  std::ostringstream os;
  const auto rec = run_to_extinction(p, 17, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "time,neuron,kind");
  std::vector<spikenet::testing::ReferenceTraceEvent> ref;
  spikenet::testing::reference_run(*p.graph, p.gamma, p.activation, 1, 17, &ref);
  std::size_t rows = 0, leaks = 0;
  double last = 0.0;
  for (const auto& e : ref) {
    if (!e.state_change) continue;
    ASSERT_TRUE(std::getline(in, line));
    std::ostringstream want;
    want.precision(17);
    want << e.time << ',' << e.neuron << ',' << (e.kind == EventKind::leak ? "leak" : "spike");
    EXPECT_EQ(line, want.str());
    ++rows;
    leaks += e.kind == EventKind::leak;
    last = e.time;
  }
  EXPECT_FALSE(std::getline(in, line));
  EXPECT_EQ(rows, rec.spike_events + leaks);
  EXPECT_EQ(last, rec.extinction_time);
}

TEST(LeakClock, GapsAreExponential) {
  const double gamma = 1.3;
  LeakProcess leak(gamma, stream_seed(31337, 1));
  std::vector<double> gaps;
  double prev = 0.0;
  for (int k = 0; k < 10000; ++k) {
    gaps.push_back(leak.next() - prev);
    prev = leak.next();
    leak.advance();
  }
  const double ks = stats::ks_distance(gaps, [&](double x) { return -std::expm1(-gamma * x); });
  EXPECT_LT(ks, 1.628 / std::sqrt(10000.0));
}

TEST(LeakClock, NeverSpikingNeuronDiesByLeak) {
  const auto g = build_lattice(1, {1});
  const double gamma = 2.5;
  std::vector<double> xs;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    Simulation<ZeroRate> sim(g, gamma, ZeroRate{}, 1, s);
    EXPECT_EQ(sim.spike_clock(0), infinity);
    const auto rec = run(sim);
    ASSERT_EQ(rec.spike_events, 0u);
    ASSERT_EQ(rec.leak_events, 1u);
    xs.push_back(rec.extinction_time);
  }
  const double ks = stats::ks_distance(xs, [&](double x) { return -std::expm1(-gamma * x); });
  EXPECT_LT(ks, 1.628 / std::sqrt(10000.0));
}

TEST(Memorylessness, ActiveNeuronFirstEventIsExpOnePlusGamma) {
  // Hard threshold: a continuously active neuron fires at rate 1 although
  // neighbor spikes keep resampling its clock.
  const auto g = build_lattice(1, {3});
  const double gamma = 0.5;
  std::vector<double> first;
  std::size_t spikes = 0;
  for (std::uint64_t s = 0; s < 10000; ++s) {
    Simulation<ActivationFunction> sim(g, gamma, hard, 1, derive_seed(3, 0, s));
    while (true) {
      const auto e = sim.step();
      if (e.neuron == 1) {
        first.push_back(e.time);
        spikes += e.kind == EventKind::spike;
        break;
      }
    }
  }
  const double ks = stats::ks_distance(first, [&](double x) { return -std::expm1(-(1.0 + gamma) * x); });
  EXPECT_LT(ks, 1.628 / std::sqrt(10000.0));
  const double p = 1.0 / (1.0 + gamma);
  EXPECT_NEAR(static_cast<double>(spikes) / 10000.0, p, 4.0 * std::sqrt(p * (1 - p) / 10000.0));
}

TEST(Params, Validation) {
  auto p = make_params(build_lattice(1, {3}), -1.0);
  try {
    p.validate();
    FAIL();
  } catch (const std::invalid_argument& e) {
    EXPECT_STREQ(e.what(), "gamma must be positive");
  }
  p.gamma = 1.0;
  p.initial_potential = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.initial_potential = 1;
  p.max_events = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p.max_events = 10;
  p.graph.reset();
  EXPECT_THROW(p.validate(), std::invalid_argument);
}
