#include "gcltlab/value_grid.hpp"

#include <algorithm>
#include <cmath>

#include "gcltlab/error.hpp"

namespace gcltlab {

ValueGrid::ValueGrid(double x_min, double x_max, double h, int time_index)
    : x_min_(x_min), x_max_(x_max), h_(h), time_index_(time_index) {
  require(std::isfinite(x_min) && std::isfinite(x_max) && x_min < x_max,
          "value grid needs finite x_min < x_max");
  require(std::isfinite(h) && h > 0.0, "value grid step must be positive");
  const double cells = (x_max - x_min) / h;
  const double rounded = std::round(cells);
  require(std::abs(cells - rounded) <= 1e-9 * std::max(1.0, cells),
          "value grid span must be a whole number of steps");
  values_.assign(static_cast<std::size_t>(rounded) + 1, 0.0);
  x_max_ = x_min_ + rounded * h_;
}

ValueGrid ValueGrid::symmetric(double radius, double h, int time_index) {
  require(h > 0.0, "value grid step must be positive");
  const double cells = std::max(1.0, std::ceil(radius / h - 1e-9));
  return ValueGrid(-cells * h, cells * h, h, time_index);
}

double ValueGrid::at(double x) const {
  const double u = (x - x_min_) / h_;
  const double whole = std::floor(u);
  return interpolate_index(values_, 0, static_cast<long>(whole), u - whole);
}

std::size_t ValueGrid::nearest(double x) const {
  const double u = std::round((x - x_min_) / h_);
  return static_cast<std::size_t>(
      std::clamp(u, 0.0, static_cast<double>(values_.size() - 1)));
}

}  // namespace gcltlab
