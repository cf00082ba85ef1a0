#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>

#include "spikenet/activation.hpp"
#include "spikenet/lattice.hpp"

namespace spikenet {

// Rate used for the very first spike clock of each neuron. `phi` evaluates
// the activation at the initial potential; `unit` always draws at rate 1.
enum class InitSpikeRate { phi, unit };

inline constexpr std::uint64_t default_max_events = 1'000'000'000ull;

struct SimulationParams {
  double gamma = 1.0;
  ActivationFunction activation{};
  std::shared_ptr<const NetworkGraph> graph;
  std::int32_t initial_potential = 1;
  std::optional<std::uint64_t> max_events = default_max_events;
  std::optional<double> max_time;
  InitSpikeRate init_spike_rate = InitSpikeRate::phi;

  void validate() const {
    if (!(gamma > 0.0) || !std::isfinite(gamma))
      throw std::invalid_argument("gamma must be positive");
    if (!graph || graph->neuron_count() == 0)
      throw std::invalid_argument("simulation needs a non-empty graph");
    if (initial_potential < 1)
      throw std::invalid_argument("initial_potential must be >= 1");
    if (max_events && *max_events == 0)
      throw std::invalid_argument("max_events must be positive");
    if (max_time && !(*max_time > 0.0))
      throw std::invalid_argument("max_time must be positive");
    if (activation.kind == ActivationKind::sigmoid &&
        (!(activation.sigmoid_slope > 0.0) || !std::isfinite(activation.sigmoid_shift)))
      throw std::invalid_argument("sigmoid slope must be positive and shift finite");
  }
};

}  // namespace spikenet
