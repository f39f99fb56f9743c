#pragma once

#include <functional>
#include <span>
#include <vector>

namespace soco::numerics {

using ScalarFunction = std::function<double(std::span<const double>)>;

// Central-difference gradient estimate, one coordinate at a time.
std::vector<double> finite_diff_grad(const ScalarFunction& f,
                                     std::span<const double> point, double h);

// max_i |a_i - b_i| / max(|a_i|, |b_i|, floor); floor keeps near-zero
// components from dominating.
double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor = 1e-8);

}  // namespace soco::numerics
