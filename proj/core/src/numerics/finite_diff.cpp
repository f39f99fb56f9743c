#include "soco/numerics/finite_diff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "soco/error.hpp"

namespace soco::numerics {

std::vector<double> finite_diff_grad(const ScalarFunction& f,
                                     std::span<const double> point, double h) {
  if (!(h > 0.0)) throw Error("finite_diff_grad: step must be positive");
  std::vector<double> x(point.begin(), point.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double plus = f(x);
    x[i] = saved - h;
    const double minus = f(x);
    x[i] = saved;
    if (!std::isfinite(plus) || !std::isfinite(minus)) {
      throw NonFiniteError("finite_diff_grad: function value at coordinate " +
                           std::to_string(i));
    }
    grad[i] = (plus - minus) / (2.0 * h);
  }
  return grad;
}

double max_relative_error(std::span<const double> a, std::span<const double> b,
                          double floor) {
  if (a.size() != b.size()) throw ShapeError("max_relative_error: size mismatch");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a[i]), std::abs(b[i]), floor});
    worst = std::max(worst, std::abs(a[i] - b[i]) / scale);
  }
  return worst;
}

}  // namespace soco::numerics
