#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace gmflow {

/// Pairwise (cascade) summation in a fixed order, so a reduction over
/// per-index results does not depend on how they were computed.
double pairwise_sum(std::span<const double> values);

struct MeanSe {
  double mean = 0.0;
  double stderr_ = 0.0;  // sample std / sqrt(M); 0 for M < 2
};
MeanSe mean_and_stderr(std::span<const double> values);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
};
/// Ordinary least squares y = intercept + slope x. Needs two distinct x.
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};
/// Two-sample Kolmogorov-Smirnov test with the asymptotic Kolmogorov p-value.
KsResult ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Kolmogorov survival function Q(lambda) = 2 sum_k (-1)^{k-1} exp(-2 k^2 lambda^2).
double kolmogorov_survival(double lambda);

/// Calls body(i) for i in [0, count) on up to `threads` workers (0 means the
/// hardware concurrency). Each index runs exactly once; the first exception
/// thrown by any body is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

/// Worker count to use for a requested value (0 means the hardware concurrency).
unsigned resolve_threads(unsigned requested);

}  // namespace gmflow
