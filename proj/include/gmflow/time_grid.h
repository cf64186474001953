#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gmflow {

/// Sampling times 0 = t_0 < t_1 < ... < t_K with trapezoid node weights.
class TimeGrid {
 public:
  /// Throws std::invalid_argument unless times are strictly increasing and
  /// start exactly at 0.
  explicit TimeGrid(std::vector<double> times);

  static TimeGrid uniform(double t_max, std::size_t steps);

  std::span<const double> times() const { return times_; }
  std::span<const double> weights() const { return weights_; }
  std::size_t size() const { return times_.size(); }
  double operator[](std::size_t k) const { return times_[k]; }
  double t_max() const { return times_.back(); }

  /// Index of a grid time equal to t (within 1e-12 relative), or size() if absent.
  std::size_t index_of(double t) const;

  /// True when all spacings agree within 1e-10 relative.
  bool is_uniform() const;
  double min_spacing() const;

 private:
  std::vector<double> times_;
  std::vector<double> weights_;
};

}  // namespace gmflow
