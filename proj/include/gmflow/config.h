#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "gmflow/covariance.h"
#include "gmflow/sampler.h"
#include "gmflow/time_grid.h"

namespace gmflow {

/// All problems found in a config, each prefixed with its line and key path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> errors);
  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

struct ShiftSpec {
  enum class Kind { Zero, Diag, File };
  Kind kind = Kind::Zero;
  std::vector<double> diag;  // repeated cyclically up to n
  std::string path;          // CSV file with a symmetric matrix
};

/// Fully resolved experiment settings. Optional keys carry their defaults
/// after parsing, so the canonical form lists every value that affects a run.
struct ExperimentConfig {
  struct {
    std::string kind;  // brownian | fbm | table
    double hurst = 0.5;
    std::string table_path;
    double alpha = 2.0;
  } kernel;
  struct {
    // either uniform (t_max, steps) or explicit times
    bool uniform = true;
    double t_max = 1.0;
    std::size_t steps = 0;
    std::vector<double> times;
  } grid;
  struct {
    std::vector<std::size_t> n;
    ShiftSpec shift;
  } matrix;
  struct {
    SamplerMethod method = SamplerMethod::Cholesky;
    std::uint64_t seed = 0;
  } sampler;
  struct {
    std::vector<std::string> test_functions{"gaussian"};
    std::vector<std::complex<double>> z_points;
  } observables;
  struct {
    std::size_t paths = 20;
    std::optional<double> t;  // defaults to the grid end
    std::vector<double> times;
    double p = 4.0;
    std::optional<double> holder_base;
    std::vector<double> holder_lags{0.001, 0.0025, 0.005, 0.01, 0.025, 0.05, 0.1};
    std::optional<double> tau;
    double x_min = -3.0;
    double x_max = 3.0;
    std::size_t x_points = 61;
    double dt = 1e-3;
    std::size_t dt_levels = 2;
    double gap_threshold = 1e-8;
  } experiment;
  struct {
    std::string directory = "gmflow-out";
    std::string format = "csv";
  } output;
};

/// Parses the `[section]` / `key = value` format. Unknown sections or keys,
/// duplicates, missing required keys, malformed values and domain violations
/// are all collected and thrown together as a ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

/// Canonical text form: every key, fixed order, numbers printed round-trip.
/// Parsing it yields an identical config.
std::string canonical_text(const ExperimentConfig& config);
/// Same content as a JSON object (sections as nested objects).
std::string canonical_json(const ExperimentConfig& config);

CovarianceKernel build_kernel(const ExperimentConfig& config);
TimeGrid build_grid(const ExperimentConfig& config);
Eigen::MatrixXd build_shift(const ExperimentConfig& config, std::size_t n);
double experiment_time(const ExperimentConfig& config);

std::string format_double(double v);
std::string format_complex(std::complex<double> z);
/// Parses "re+imi", "re-imi" or "imi" (spaces allowed).
std::optional<std::complex<double>> parse_complex(std::string text);

}  // namespace gmflow
