#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace soco::fusion {

enum class ClipMode { kTanh, kNorm, kHard };
enum class GatingMode { kLearned, kRandom, kEpisodeRandom, kFixed };

ClipMode parse_clip_mode(std::string_view name);        // "tanh" | "norm" | "hard"
GatingMode parse_gating_mode(std::string_view name);    // "learned" | "rg" | "erg" | "fg"
std::string to_string(ClipMode mode);
std::string to_string(GatingMode mode);

// L * tanh(raw / L) for L > 0, exactly 0 for L == 0.
double bounded_residual(double raw, double strength);
double bounded_residual_derivative(double raw, double strength);

// Final bounding map applied to x = selected + residual:
//   tanh: tanh(x) when L > 0, identity when L == 0
//   norm: x / (L + 1)
//   hard: clamp(x, -1, 1)
double clip_value(double x, ClipMode mode, double strength);
// d clip_value / dx. Hard clip has derivative 0 outside [-1, 1].
double clip_derivative(double x, ClipMode mode, double strength);

std::vector<double> fuse(std::span<const double> selected, std::span<const double> residual,
                         ClipMode mode, double strength);

// softmax(logits / temperature), max-shifted.
std::vector<double> softmax(std::span<const double> logits, double temperature);
std::size_t argmax(std::span<const double> values);

}  // namespace soco::fusion
