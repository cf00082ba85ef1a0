#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace spikenet {

enum class ActivationKind { hard_threshold, linear, sigmoid };

inline std::string_view to_string(ActivationKind k) {
  switch (k) {
    case ActivationKind::hard_threshold: return "hard";
    case ActivationKind::linear: return "linear";
    case ActivationKind::sigmoid: return "sigmoid";
  }
  return "?";
}

inline std::optional<ActivationKind> parse_activation_kind(std::string_view s) {
  if (s == "hard" || s == "hard_threshold") return ActivationKind::hard_threshold;
  if (s == "linear") return ActivationKind::linear;
  if (s == "sigmoid") return ActivationKind::sigmoid;
  return std::nullopt;
}

// Spike rate as a function of membrane potential. Always zero at zero
// potential so that quiescent neurons never fire.
struct ActivationFunction {
  ActivationKind kind = ActivationKind::hard_threshold;
  double sigmoid_slope = 3.0;
  double sigmoid_shift = 6.0;

  double operator()(std::int64_t x) const noexcept {
    if (x <= 0) return 0.0;
    switch (kind) {
      case ActivationKind::hard_threshold: return 1.0;
      case ActivationKind::linear: return static_cast<double>(x);
      case ActivationKind::sigmoid:
        return 1.0 / (1.0 + std::exp(-sigmoid_slope * static_cast<double>(x) + sigmoid_shift));
    }
    return 0.0;
  }

  friend bool operator==(const ActivationFunction&, const ActivationFunction&) = default;
};

inline double evaluate_activation(const ActivationFunction& f, std::int64_t x) noexcept {
  return f(x);
}

}  // namespace spikenet
