#pragma once

#include <cstddef>
#include <vector>

namespace gcltlab {

// Time-indexed value function sampled on a uniform grid x_min + k h.
// Evaluation between nodes is linear; queries outside [x_min, x_max] clamp
// to the boundary values.
class ValueGrid {
 public:
  ValueGrid(double x_min, double x_max, double h, int time_index = 0);

  // Symmetric grid [-radius', radius'] where radius' is radius rounded up to
  // a whole number of steps, so 0 is always a node.
  static ValueGrid symmetric(double radius, double h, int time_index = 0);

  double x_min() const { return x_min_; }
  double x_max() const { return x_max_; }
  double step() const { return h_; }
  int time_index() const { return time_index_; }
  void set_time_index(int t) { time_index_ = t; }
  std::size_t size() const { return values_.size(); }

  double node(std::size_t k) const { return x_min_ + static_cast<double>(k) * h_; }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double at(double x) const;

  // Index of the node closest to x (clamped).
  std::size_t nearest(double x) const;

 private:
  double x_min_;
  double x_max_;
  double h_;
  int time_index_;
  std::vector<double> values_;
};

// Linear interpolation of `values` at fractional grid coordinate
// `base + offset`, clamped to the grid ends. Shared by the DP and tree
// schemes, which precompute offsets in units of the grid step.
inline double interpolate_index(const std::vector<double>& values, long base,
                                long whole, double frac) {
  const long last = static_cast<long>(values.size()) - 1;
  long lo = base + whole;
  if (lo < 0) return values.front();
  if (lo >= last) return values.back();
  return values[lo] + frac * (values[lo + 1] - values[lo]);
}

}  // namespace gcltlab
