#include "soco/fusion/clip.hpp"

#include <algorithm>
#include <cmath>

#include "soco/error.hpp"

namespace soco::fusion {

ClipMode parse_clip_mode(std::string_view name) {
  if (name == "tanh") return ClipMode::kTanh;
  if (name == "norm") return ClipMode::kNorm;
  if (name == "hard") return ClipMode::kHard;
  throw ConfigError("unknown clip mode '" + std::string(name) + "'");
}

GatingMode parse_gating_mode(std::string_view name) {
  if (name == "learned") return GatingMode::kLearned;
  if (name == "rg") return GatingMode::kRandom;
  if (name == "erg") return GatingMode::kEpisodeRandom;
  if (name == "fg") return GatingMode::kFixed;
  throw ConfigError("unknown gating mode '" + std::string(name) + "'");
}

std::string to_string(ClipMode mode) {
  switch (mode) {
    case ClipMode::kTanh: return "tanh";
    case ClipMode::kNorm: return "norm";
    case ClipMode::kHard: return "hard";
  }
  throw ConfigError("unknown clip mode");
}

std::string to_string(GatingMode mode) {
  switch (mode) {
    case GatingMode::kLearned: return "learned";
    case GatingMode::kRandom: return "rg";
    case GatingMode::kEpisodeRandom: return "erg";
    case GatingMode::kFixed: return "fg";
  }
  throw ConfigError("unknown gating mode");
}

double bounded_residual(double raw, double strength) {
  if (strength == 0.0) return 0.0;
  return strength * std::tanh(raw / strength);
}

double bounded_residual_derivative(double raw, double strength) {
  if (strength == 0.0) return 0.0;
  const double t = std::tanh(raw / strength);
  return 1.0 - t * t;
}

double clip_value(double x, ClipMode mode, double strength) {
  switch (mode) {
    case ClipMode::kTanh: return strength > 0.0 ? std::tanh(x) : x;
    case ClipMode::kNorm: return x / (strength + 1.0);
    case ClipMode::kHard: return std::clamp(x, -1.0, 1.0);
  }
  throw ConfigError("unknown clip mode");
}

double clip_derivative(double x, ClipMode mode, double strength) {
  switch (mode) {
    case ClipMode::kTanh: {
      if (strength == 0.0) return 1.0;
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ClipMode::kNorm: return 1.0 / (strength + 1.0);
    case ClipMode::kHard: return (x < -1.0 || x > 1.0) ? 0.0 : 1.0;
  }
  throw ConfigError("unknown clip mode");
}

std::vector<double> fuse(std::span<const double> selected, std::span<const double> residual,
                         ClipMode mode, double strength) {
  if (selected.size() != residual.size()) throw ShapeError("fuse: width mismatch");
  std::vector<double> out(selected.size());
  for (std::size_t j = 0; j < out.size(); ++j) {
    out[j] = clip_value(selected[j] + residual[j], mode, strength);
  }
  return out;
}

std::vector<double> softmax(std::span<const double> logits, double temperature) {
  if (logits.empty()) throw ShapeError("softmax of an empty vector");
  if (!(temperature > 0.0)) throw ConfigError("softmax temperature must be positive");
  const double peak = *std::max_element(logits.begin(), logits.end());
  std::vector<double> w(logits.size());
  double total = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    w[k] = std::exp((logits[k] - peak) / temperature);
    total += w[k];
  }
  for (double& v : w) v /= total;
  return w;
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

}  // namespace soco::fusion
