#include "gmflow/time_grid.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace gmflow {

TimeGrid::TimeGrid(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw std::invalid_argument("time grid is empty");
  if (times_.front() != 0.0) throw std::invalid_argument("time grid must start at 0");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1]) || !std::isfinite(times_[k]))
      throw std::invalid_argument("time grid must be strictly increasing");
  }
  weights_.assign(times_.size(), 0.0);
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) {
    const double half = 0.5 * (times_[k + 1] - times_[k]);
    weights_[k] += half;
    weights_[k + 1] += half;
  }
}

TimeGrid TimeGrid::uniform(double t_max, std::size_t steps) {
  if (steps == 0 || !(t_max > 0.0)) throw std::invalid_argument("uniform grid needs steps >= 1 and t_max > 0");
  std::vector<double> t(steps + 1);
  for (std::size_t k = 0; k <= steps; ++k) t[k] = t_max * static_cast<double>(k) / static_cast<double>(steps);
  t.back() = t_max;
  return TimeGrid(std::move(t));
}

std::size_t TimeGrid::index_of(double t) const {
  for (std::size_t k = 0; k < times_.size(); ++k) {
    if (std::abs(times_[k] - t) <= 1e-12 * std::max(1.0, std::abs(t))) return k;
  }
  return times_.size();
}

bool TimeGrid::is_uniform() const {
  if (times_.size() < 2) return true;
  const double h = times_[1] - times_[0];
  for (std::size_t k = 1; k + 1 < times_.size(); ++k) {
    if (std::abs((times_[k + 1] - times_[k]) - h) > 1e-10 * h) return false;
  }
  return true;
}

double TimeGrid::min_spacing() const {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < times_.size(); ++k) h = std::min(h, times_[k + 1] - times_[k]);
  return h;
}

}  // namespace gmflow
