#include "gmflow/runner.h"

#include <fftw3.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gmflow/diagnostics.h"
#include "gmflow/errors.h"
#include "gmflow/limit_law.h"
#include "gmflow/matrix_flow.h"

namespace gmflow {

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"limit", "residual", "converge", "holder", "collisions", "dyson"};
  return names;
}

namespace {

constexpr const char* kVersion = "1.0.0";

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return format_double(v);
}

/// Buffers one CSV file; the first line is "#" followed by the JSON header.
class Csv {
 public:
  Csv(std::string name, const std::string& header_json, const std::string& columns) : name_(std::move(name)) {
    body_ << "#" << header_json << "\n" << columns << "\n";
  }
  template <class... Ts>
  void row(const Ts&... cells) {
    std::size_t k = 0;
    ((body_ << (k++ ? "," : "") << cells), ...);
    body_ << "\n";
  }
  const std::string& name() const { return name_; }
  void write(const std::filesystem::path& dir) const {
    const auto path = dir / name_;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << body_.str();
    out.close();
    if (!out) throw IoError("failed writing " + path.string());
  }

 private:
  std::string name_;
  std::ostringstream body_;
};

std::string header_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["config"] = nlohmann::ordered_json::parse(canonical_json(c));
  j["seed"] = c.sampler.seed;
  return j.dump();
}

std::vector<TestFunction> real_test_functions(const ExperimentConfig& c, const std::string& sub) {
  std::vector<TestFunction> fs;
  for (const auto& id : c.observables.test_functions) {
    auto f = TestFunction::parse(id);
    if (!f.is_real()) throw ConfigError({"observables.test_functions: " + sub + " needs real test functions, got " + id});
    fs.push_back(f);
  }
  if (fs.empty()) throw ConfigError({"observables.test_functions: " + sub + " needs at least one test function"});
  return fs;
}

std::size_t require_grid_time(const TimeGrid& grid, double t, const std::string& key) {
  const auto k = grid.index_of(t);
  if (k == grid.size()) throw ConfigError({key + ": " + num(t) + " is not a grid time"});
  return k;
}

std::string suffix(std::size_t n) { return "_n" + std::to_string(n) + ".csv"; }

struct Context {
  const ExperimentConfig& config;
  CovarianceKernel kernel;
  TimeGrid grid;
  unsigned threads;
  std::ostream& summary;
  std::string header;
  std::vector<Csv> files;
};

void run_limit(Context& ctx) {
  const auto& x = ctx.config.experiment;
  const double t = experiment_time(ctx.config);
  for (auto n : ctx.config.matrix.n) {
    const auto mu0 = initial_law(build_shift(ctx.config, n));
    LimitLaw law = LimitLaw::at_time(ctx.kernel, mu0, t);
    if (x.tau) {
      law = (mu0.atoms.size() == 1 && *x.tau > 0.0) ? LimitLaw::semicircle(mu0.atoms[0], *x.tau)
                                                    : LimitLaw::burgers_evolved(mu0, *x.tau);
    }
    Csv& pdf = ctx.files.emplace_back("limit" + suffix(n), ctx.header, "x,pdf,cdf");
    double pdf0 = std::nan(""), x0 = std::nan("");
    for (std::size_t k = 0; k < x.x_points; ++k) {
      const double xv = x.x_min + (x.x_max - x.x_min) * static_cast<double>(k) / static_cast<double>(x.x_points - 1);
      const auto dc = density_and_cdf(law, xv);
      pdf.row(num(xv), num(dc.pdf), num(dc.cdf));
      if (std::isnan(x0) || std::abs(xv) < std::abs(x0)) {
        x0 = xv;
        pdf0 = dc.pdf;
      }
    }
    if (!ctx.config.observables.z_points.empty()) {
      Csv& st = ctx.files.emplace_back("limit_stieltjes" + suffix(n), ctx.header, "re_z,im_z,re_F,im_F");
      for (const auto& z : ctx.config.observables.z_points) {
        const auto F = law.stieltjes(z);
        st.row(num(z.real()), num(z.imag()), num(F.real()), num(F.imag()));
      }
    }
    ctx.summary << "limit n=" << n << " tau=" << num(law.tau()) << ": pdf(" << num(x0) << ") = " << num(pdf0) << "\n";
  }
}

Ensemble make_ensemble(Context& ctx, const PathSampler& sampler, std::size_t n) {
  Ensemble e;
  e.sampler = &sampler;
  e.shift = build_shift(ctx.config, n);
  e.paths = ctx.config.experiment.paths;
  e.seed = ctx.config.sampler.seed;
  e.threads = ctx.threads;
  return e;
}

void run_residual(Context& ctx) {
  const auto fs = real_test_functions(ctx.config, "residual");
  const double t = experiment_time(ctx.config);
  require_grid_time(ctx.grid, t, "experiment.t");
  const PathSampler sampler(ctx.kernel, ctx.grid, ctx.config.sampler.method);
  Csv summary("residual_summary.csv", ctx.header,
              "n,test_function,t,M,mean,mean_stderr,mean_square,mean_square_stderr,degenerate_times");
  std::vector<std::vector<double>> log_n(fs.size()), log_ms(fs.size());
  for (auto n : ctx.config.matrix.n) {
    const auto reports = residual_study(make_ensemble(ctx, sampler, n), ctx.kernel, fs, t);
    Csv& per_path = ctx.files.emplace_back("residual" + suffix(n), ctx.header, "n,path,test_function,t,residual");
    for (std::size_t a = 0; a < reports.size(); ++a) {
      const auto& r = reports[a];
      for (std::size_t p = 0; p < r.residuals.size(); ++p)
        per_path.row(n, p, r.test_function, num(t), num(r.residuals[p]));
      summary.row(n, r.test_function, num(t), r.paths, num(r.mean.mean), num(r.mean.stderr_), num(r.mean_square.mean),
                  num(r.mean_square.stderr_), r.degenerate_times);
      ctx.summary << "residual n=" << n << " f=" << r.test_function << ": E[G^2] = " << num(r.mean_square.mean)
                  << " +- " << num(r.mean_square.stderr_) << ", mean G = " << num(r.mean.mean) << " +- "
                  << num(r.mean.stderr_) << "\n";
      if (r.mean_square.mean > 0.0) {
        log_n[a].push_back(std::log(static_cast<double>(n)));
        log_ms[a].push_back(std::log(r.mean_square.mean));
      }
    }
  }
  ctx.files.push_back(std::move(summary));
  if (ctx.config.matrix.n.size() >= 2) {
    Csv& fit = ctx.files.emplace_back("residual_fit.csv", ctx.header, "test_function,slope,intercept,points");
    for (std::size_t a = 0; a < fs.size(); ++a) {
      if (log_n[a].size() < 2) {
        fit.row(fs[a].id(), "nan", "nan", log_n[a].size());
        continue;
      }
      const auto lf = linear_fit(log_n[a], log_ms[a]);
      fit.row(fs[a].id(), num(lf.slope), num(lf.intercept), log_n[a].size());
      ctx.summary << "residual f=" << fs[a].id() << ": slope of log E[G^2] vs log n = " << num(lf.slope) << "\n";
    }
  }
}

void run_converge(Context& ctx) {
  const PathSampler sampler(ctx.kernel, ctx.grid, ctx.config.sampler.method);
  const auto& x = ctx.config.experiment;
  std::vector<double> cauchy_times;
  if (!ctx.config.observables.z_points.empty())
    cauchy_times = x.times.empty() ? std::vector<double>{experiment_time(ctx.config)} : x.times;
  for (double t : cauchy_times) require_grid_time(ctx.grid, t, "experiment.times");
  std::vector<bool> keep(ctx.grid.size(), x.times.empty());
  for (double t : x.times) keep[require_grid_time(ctx.grid, t, "experiment.times")] = true;

  Csv sup("converge_sup.csv", ctx.header, "n,mean_sup_distance,stderr,M");
  for (auto n : ctx.config.matrix.n) {
    const auto rep = convergence_study(make_ensemble(ctx, sampler, n), ctx.kernel, cauchy_times,
                                       ctx.config.observables.z_points);
    Csv& rows = ctx.files.emplace_back("converge" + suffix(n), ctx.header, "n,t,mean_distance,stderr,M");
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
      if (!keep[k]) continue;
      const auto& r = rep.rows[k];
      rows.row(r.n, num(r.t), num(r.distance.mean), num(r.distance.stderr_), r.paths);
      ctx.summary << "converge n=" << n << " t=" << num(r.t) << ": Kolmogorov distance " << num(r.distance.mean)
                  << " +- " << num(r.distance.stderr_) << "\n";
    }
    sup.row(n, num(rep.sup_distance.mean), num(rep.sup_distance.stderr_), ctx.config.experiment.paths);
    if (!rep.cauchy.empty()) {
      Csv& c = ctx.files.emplace_back("converge_cauchy" + suffix(n), ctx.header,
                                      "n,t,re_z,im_z,re_G,im_G,stderr_re,stderr_im,re_F,im_F,abs_error,M");
      for (const auto& r : rep.cauchy)
        c.row(r.n, num(r.t), num(r.z.real()), num(r.z.imag()), num(r.mean.real()), num(r.mean.imag()),
              num(r.stderr_re), num(r.stderr_im), num(r.limit.real()), num(r.limit.imag()),
              num(std::abs(r.mean - r.limit)), r.paths);
    }
  }
  ctx.files.push_back(std::move(sup));
}

void run_holder(Context& ctx) {
  const auto fs = real_test_functions(ctx.config, "holder");
  const auto& x = ctx.config.experiment;
  const double base = x.holder_base.value_or(0.5 * ctx.grid.t_max());
  // sampling grid: the configured grid plus every pair time
  std::vector<double> times(ctx.grid.times().begin(), ctx.grid.times().end());
  std::vector<std::pair<double, double>> pairs;
  times.push_back(base);
  for (double lag : x.holder_lags) {
    pairs.emplace_back(base, base + lag);
    times.push_back(base + lag);
  }
  std::sort(times.begin(), times.end());
  std::vector<double> merged;
  for (double t : times)
    if (merged.empty() || t - merged.back() > 1e-12 * std::max(1.0, t)) merged.push_back(t);
  const TimeGrid grid(merged);
  if (ctx.config.sampler.method == SamplerMethod::Circulant && merged.size() != ctx.grid.size())
    throw ConfigError({"sampler.method: holder with circulant sampling needs every pair time on the uniform grid"});
  const PathSampler sampler(ctx.kernel, grid, ctx.config.sampler.method);

  double gamma = std::nan("");
  if (auto g = ctx.kernel.holder_exponent()) gamma = *g;
  else if (ctx.grid.size() >= 3) gamma = check_h2(ctx.kernel, ctx.grid).gamma_hat;

  Csv fit("holder_fit.csv", ctx.header,
          "n,test_function,p,q_hat,gamma,bound_exponent,degenerate,hw_checks,hw_violations,M");
  for (auto n : ctx.config.matrix.n) {
    const auto reports = holder_increments(make_ensemble(ctx, sampler, n), fs, pairs, x.p);
    Csv& rows = ctx.files.emplace_back("holder" + suffix(n), ctx.header, "n,test_function,t1,t2,lag,moment,stderr,M");
    for (const auto& r : reports) {
      for (std::size_t q = 0; q < r.pairs.size(); ++q)
        rows.row(n, r.test_function, num(r.pairs[q].first), num(r.pairs[q].second),
                 num(r.pairs[q].second - r.pairs[q].first), num(r.moments[q].mean), num(r.moments[q].stderr_),
                 r.paths);
      const double bound = x.p * gamma / 2.0;
      fit.row(n, r.test_function, num(x.p), num(r.q_hat), num(gamma), num(bound), r.degenerate ? 1 : 0, r.hw_checks,
              r.hw_violations, r.paths);
      ctx.summary << "holder n=" << n << " f=" << r.test_function << ": q_hat = "
                  << (r.degenerate ? std::string("degenerate") : num(r.q_hat)) << " (p gamma/2 = " << num(bound)
                  << "), Hoffman-Wielandt violations " << r.hw_violations << "/" << r.hw_checks << "\n";
    }
  }
  ctx.files.push_back(std::move(fit));
}

void run_collisions(Context& ctx) {
  const PathSampler sampler(ctx.kernel, ctx.grid, ctx.config.sampler.method);
  const auto& x = ctx.config.experiment;
  std::vector<double> times = x.times;
  if (times.empty()) times.assign(ctx.grid.times().begin(), ctx.grid.times().end());
  for (double t : times) require_grid_time(ctx.grid, t, "experiment.times");
  for (auto n : ctx.config.matrix.n) {
    const auto rows = collision_study(make_ensemble(ctx, sampler, n), times, x.gap_threshold);
    Csv& out = ctx.files.emplace_back("collisions" + suffix(n), ctx.header,
                                      "n,t,min_gap,q01,q10,q50,degenerate_fraction,count");
    double worst = 0.0;
    for (const auto& r : rows) {
      out.row(n, num(r.t), num(r.min_gap), num(r.q01), num(r.q10), num(r.q50), num(r.degenerate_fraction), r.count);
      worst = std::max(worst, r.degenerate_fraction);
    }
    ctx.summary << "collisions n=" << n << ": largest degenerate fraction over times = " << num(worst) << "\n";
  }
}

void run_dyson(Context& ctx) {
  if (ctx.kernel.kind() != KernelKind::Brownian)
    throw ConfigError({"kernel.kind: dyson needs kernel.kind = brownian"});
  const auto& x = ctx.config.experiment;
  for (auto n : ctx.config.matrix.n) {
    DysonSettings s;
    s.shift = build_shift(ctx.config, n);
    s.t = experiment_time(ctx.config);
    s.paths = x.paths;
    s.seed = ctx.config.sampler.seed;
    s.threads = ctx.threads;
    const auto matrix = matrix_mean_spectrum(s);
    Csv& out = ctx.files.emplace_back("dyson" + suffix(n), ctx.header, "n,t,dt,w1,stderr,M,rejections");
    Csv& spectra = ctx.files.emplace_back("dyson_spectra" + suffix(n), ctx.header, "n,dt,index,sde_mean,matrix_mean");
    double dt = x.dt;
    for (std::size_t level = 0; level < x.dt_levels; ++level, dt *= 0.5) {
      s.dt = dt;
      s.stream_level = static_cast<std::uint32_t>(level);
      const auto rep = dyson_crosscheck(s, &matrix);
      out.row(n, num(s.t), num(dt), num(rep.w1), num(rep.w1_stderr), x.paths, rep.rejections);
      for (std::size_t i = 0; i < n; ++i) spectra.row(n, num(dt), i, num(rep.sde_mean[i]), num(rep.matrix_mean[i]));
      ctx.summary << "dyson n=" << n << " dt=" << num(dt) << ": W1 = " << num(rep.w1) << " +- " << num(rep.w1_stderr)
                  << " (" << rep.rejections << " split steps)\n";
    }
  }
}

}  // namespace

std::vector<std::string> run(const ExperimentConfig& config, const std::string& subcommand,
                             const std::filesystem::path& out_dir, unsigned threads, std::ostream& summary) {
  Context ctx{config, build_kernel(config), build_grid(config), resolve_threads(threads), summary,
              header_json(config), {}};
  try {
    if (subcommand == "limit") run_limit(ctx);
    else if (subcommand == "residual") run_residual(ctx);
    else if (subcommand == "converge") run_converge(ctx);
    else if (subcommand == "holder") run_holder(ctx);
    else if (subcommand == "collisions") run_collisions(ctx);
    else if (subcommand == "dyson") run_dyson(ctx);
    else throw ConfigError({"unknown subcommand \"" + subcommand + "\""});
  } catch (const DegenerateEigenvalueError& e) {
    throw NumericalError(e.what(), "subcommand " + subcommand);
  } catch (const std::domain_error& e) {
    // kernel evaluation outside its domain, etc.: a setup problem
    throw ConfigError({e.what()});
  } catch (const std::invalid_argument& e) {
    throw ConfigError({e.what()});
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir.string() + ": " + ec.message());
  std::vector<std::string> names;
  for (const auto& f : ctx.files) {
    f.write(out_dir);
    names.push_back(f.name());
  }
  return names;
}

namespace {

nlohmann::ordered_json kernel_checks(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  const auto kernel = build_kernel(c);
  const auto grid = build_grid(c);
  if (grid.size() >= 3) {
    const auto h2 = check_h2(kernel, grid);
    j["h2"] = {{"kappa_hat", num(h2.kappa_hat)}, {"gamma_hat", num(h2.gamma_hat)}, {"pass", h2.pass}};
  }
  const auto h1 = check_h1(kernel, grid, c.kernel.alpha);
  j["h1"] = {{"alpha", num(c.kernel.alpha)}, {"sup_integral", num(h1.sup_integral)}, {"pass", h1.pass}};
  return j;
}

void write_manifest(const std::filesystem::path& dir, const std::string& subcommand, const ExperimentConfig& c,
                    const std::vector<std::string>& files, double seconds, unsigned threads) {
  nlohmann::ordered_json m;
  m["subcommand"] = subcommand;
  m["seed"] = c.sampler.seed;
  m["config"] = nlohmann::ordered_json::parse(canonical_json(c));
  m["config_text"] = canonical_text(c);
  m["versions"] = {{"gmflow", kVersion},
                   {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                                 std::to_string(EIGEN_MINOR_VERSION)},
                   {"fftw", std::string(fftw_version)},
                   {"compiler", __VERSION__}};
  m["threads"] = threads;
  m["wall_time_seconds"] = seconds;
  m["output_directory"] = dir.string();
  m["outputs"] = files;
  try {
    m["kernel_checks"] = kernel_checks(c);
  } catch (const std::exception& e) {
    m["kernel_checks"] = {{"error", e.what()}};
  }
  const auto path = dir / "manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << m.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace

int run_cli(const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    ExperimentConfig config = load_config_file(options.config_path);
    if (options.seed) config.sampler.seed = *options.seed;
    std::filesystem::path dir = config.output.directory;
    if (const char* env = std::getenv(kOutDirEnv); env && *env) dir = env;
    if (options.out_dir) dir = *options.out_dir;
    const unsigned threads = resolve_threads(options.threads);
    const auto start = std::chrono::steady_clock::now();
    const auto files = run(config, options.subcommand, dir, threads, out);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(dir, options.subcommand, config, files, seconds, threads);
    out << "wrote " << files.size() << " file(s) and manifest.json to " << dir.string() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    err << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return kExitIo;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\nreproduction: " << e.reproduction() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
}

}  // namespace gmflow
