#include "gmflow/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "gmflow/errors.h"
#include "gmflow/spectral_measure.h"

namespace gmflow {

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& e : errors) msg += "\n  " + e;
        return msg;
      }()),
      errors_(std::move(errors)) {}

namespace {

const std::map<std::string, std::set<std::string>> kKeys = {
    {"kernel", {"kind", "hurst", "table_path", "alpha"}},
    {"grid", {"t_max", "steps", "times"}},
    {"matrix", {"n", "shift"}},
    {"sampler", {"method", "seed"}},
    {"observables", {"test_functions", "z_points"}},
    {"experiment",
     {"paths", "t", "times", "p", "holder_base", "holder_lags", "tau", "x_min", "x_max", "x_points", "dt",
      "dt_levels", "gap_threshold"}},
    {"output", {"directory", "format"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  return out;
}

std::optional<double> to_double(const std::string& s) {
  double v = 0.0;
  const auto t = trim(s);
  if (t.empty()) return std::nullopt;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_u64(const std::string& s) {
  std::uint64_t v = 0;
  const auto t = trim(s);
  if (t.empty()) return std::nullopt;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

struct Entry {
  std::string value;
  int line = 0;
};

class Reader {
 public:
  std::map<std::string, Entry> entries;
  std::vector<std::string> errors;

  void error(const std::string& key, const std::string& msg) {
    const auto it = entries.find(key);
    if (it != entries.end())
      errors.push_back("line " + std::to_string(it->second.line) + ": " + msg);
    else
      errors.push_back(key + ": " + msg);
  }

  bool has(const std::string& key) const { return entries.count(key) != 0; }
  const std::string* raw(const std::string& key) const {
    const auto it = entries.find(key);
    return it == entries.end() ? nullptr : &it->second.value;
  }

  std::optional<double> real(const std::string& key) {
    const auto* r = raw(key);
    if (!r) return std::nullopt;
    auto v = to_double(*r);
    if (!v) error(key, key + " must be a finite number, got \"" + *r + "\"");
    return v;
  }
  std::optional<std::uint64_t> integer(const std::string& key) {
    const auto* r = raw(key);
    if (!r) return std::nullopt;
    auto v = to_u64(*r);
    if (!v) error(key, key + " must be a nonnegative integer, got \"" + *r + "\"");
    return v;
  }
  std::optional<std::vector<double>> reals(const std::string& key) {
    const auto* r = raw(key);
    if (!r) return std::nullopt;
    std::vector<double> out;
    for (const auto& item : split_list(*r)) {
      auto v = to_double(item);
      if (!v) {
        error(key, key + " must be a comma-separated list of numbers, got \"" + item + "\"");
        return std::nullopt;
      }
      out.push_back(*v);
    }
    return out;
  }
  void require(const std::string& key) {
    if (!has(key)) error(key, "missing required key");
  }
};

void tokenize(const std::string& text, Reader& r) {
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // comments: whole-line, or '#' preceded by whitespace
    for (std::size_t p = 0; p < line.size(); ++p) {
      if ((line[p] == '#' || line[p] == ';') && (p == 0 || line[p - 1] == ' ' || line[p - 1] == '\t')) {
        line.resize(p);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') {
        r.errors.push_back(where + "malformed section header \"" + line + "\"");
        section.clear();
        continue;
      }
      section = trim(line.substr(1, line.size() - 2));
      if (!kKeys.count(section)) {
        r.errors.push_back(where + "unknown section [" + section + "]");
        section = "\x01";
      }
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      r.errors.push_back(where + "expected key = value, got \"" + line + "\"");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section == "\x01") continue;  // already reported
    if (section.empty()) {
      r.errors.push_back(where + "key \"" + key + "\" appears before any section");
      continue;
    }
    const std::string path = section + "." + key;
    if (!kKeys.at(section).count(key)) {
      r.errors.push_back(where + "unknown key " + path);
      continue;
    }
    if (value.empty()) {
      r.errors.push_back(where + path + " has an empty value");
      continue;
    }
    const auto it = r.entries.find(path);
    if (it != r.entries.end()) {
      r.errors.push_back(where + "duplicate key " + path + " (lines " + std::to_string(it->second.line) + " and " +
                         std::to_string(lineno) + ")");
      continue;
    }
    r.entries[path] = {value, lineno};
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

std::string format_complex(std::complex<double> z) {
  std::string im = format_double(z.imag());
  if (im.front() != '-') im = "+" + im;
  return format_double(z.real()) + im + "i";
}

std::optional<std::complex<double>> parse_complex(std::string text) {
  text.erase(std::remove_if(text.begin(), text.end(), [](char c) { return c == ' ' || c == '\t'; }), text.end());
  if (text.empty() || text.back() != 'i') return std::nullopt;
  text.pop_back();
  // the split is the last sign that is not part of an exponent
  std::size_t split = std::string::npos;
  for (std::size_t p = text.size(); p-- > 1;) {
    if ((text[p] == '+' || text[p] == '-') && text[p - 1] != 'e' && text[p - 1] != 'E') {
      split = p;
      break;
    }
  }
  if (split == std::string::npos) {
    std::string im = text.empty() || text == "+" ? "1" : (text == "-" ? "-1" : text);
    if (!im.empty() && im.front() == '+') im.erase(0, 1);
    const auto v = to_double(im);
    if (!v) return std::nullopt;
    return std::complex<double>(0.0, *v);
  }
  const auto re = to_double(text.substr(0, split));
  std::string im = text.substr(split);
  if (im == "+" || im == "-") im += "1";
  if (im.front() == '+') im.erase(0, 1);
  const auto iv = to_double(im);
  if (!re || !iv) return std::nullopt;
  return std::complex<double>(*re, *iv);
}

ExperimentConfig parse_config(const std::string& text) {
  Reader r;
  tokenize(text, r);
  ExperimentConfig c;

  // kernel
  r.require("kernel.kind");
  if (const auto* kind = r.raw("kernel.kind")) {
    c.kernel.kind = *kind;
    if (*kind != "brownian" && *kind != "fbm" && *kind != "table")
      r.error("kernel.kind", "kernel.kind must be one of brownian, fbm, table");
  }
  if (c.kernel.kind == "fbm") {
    r.require("kernel.hurst");
    if (auto h = r.real("kernel.hurst")) {
      c.kernel.hurst = *h;
      if (!(*h > 0.0 && *h < 1.0)) r.error("kernel.hurst", "kernel.hurst must lie in (0,1)");
    }
  } else if (r.has("kernel.hurst")) {
    r.error("kernel.hurst", "kernel.hurst only applies to kind = fbm");
  }
  if (c.kernel.kind == "table") {
    r.require("kernel.table_path");
    if (const auto* p = r.raw("kernel.table_path")) c.kernel.table_path = *p;
  } else if (r.has("kernel.table_path")) {
    r.error("kernel.table_path", "kernel.table_path only applies to kind = table");
  }
  if (auto a = r.real("kernel.alpha")) {
    c.kernel.alpha = *a;
    if (!(*a > 1.0)) r.error("kernel.alpha", "kernel.alpha must be > 1");
  } else if (c.kernel.kind == "fbm" && c.kernel.hurst > 0.0 && c.kernel.hurst < 1.0) {
    c.kernel.alpha = *CovarianceKernel::fractional_brownian(c.kernel.hurst).integrability_exponent();
  } else if (c.kernel.kind == "brownian") {
    c.kernel.alpha = *CovarianceKernel::brownian().integrability_exponent();
  }

  // grid
  const bool uniform = r.has("grid.t_max") || r.has("grid.steps");
  if (uniform && r.has("grid.times")) {
    r.error("grid.times", "grid.times cannot be combined with grid.t_max/grid.steps");
  } else if (!uniform && !r.has("grid.times")) {
    r.errors.push_back("grid: give either grid.t_max and grid.steps, or grid.times");
  } else if (uniform) {
    c.grid.uniform = true;
    r.require("grid.t_max");
    r.require("grid.steps");
    if (auto t = r.real("grid.t_max")) {
      c.grid.t_max = *t;
      if (!(*t > 0.0)) r.error("grid.t_max", "grid.t_max must be > 0");
    }
    if (auto s = r.integer("grid.steps")) {
      c.grid.steps = *s;
      if (*s < 1 || *s > 100000) r.error("grid.steps", "grid.steps must lie in [1, 100000]");
    }
  } else if (auto times = r.reals("grid.times")) {
    c.grid.uniform = false;
    c.grid.times = *times;
    try {
      TimeGrid check(c.grid.times);
      c.grid.t_max = check.t_max();
    } catch (const std::exception& e) {
      r.error("grid.times", std::string("grid.times: ") + e.what());
    }
  }

  // matrix
  r.require("matrix.n");
  if (const auto* raw = r.raw("matrix.n")) {
    for (const auto& item : split_list(*raw)) {
      const auto v = to_u64(item);
      if (!v || *v < 1 || *v > 5000) {
        r.error("matrix.n", "matrix.n must be a list of integers in [1, 5000], got \"" + item + "\"");
        c.matrix.n.clear();
        break;
      }
      c.matrix.n.push_back(*v);
    }
  }
  if (const auto* raw = r.raw("matrix.shift")) {
    const std::string s = *raw;
    if (s == "zero") {
      c.matrix.shift.kind = ShiftSpec::Kind::Zero;
    } else if (s.rfind("diag:", 0) == 0) {
      c.matrix.shift.kind = ShiftSpec::Kind::Diag;
      bool ok = true;
      for (const auto& item : split_list(s.substr(5))) {
        const auto v = to_double(item);
        if (!v) ok = false;
        else c.matrix.shift.diag.push_back(*v);
      }
      if (!ok || c.matrix.shift.diag.empty()) {
        r.error("matrix.shift", "matrix.shift diag list must be comma-separated numbers");
      } else {
        for (auto n : c.matrix.n)
          if (n % c.matrix.shift.diag.size() != 0)
            r.error("matrix.shift", "matrix.shift diag list length " + std::to_string(c.matrix.shift.diag.size()) +
                                        " does not divide matrix.n = " + std::to_string(n));
      }
    } else if (s.rfind("file:", 0) == 0 && s.size() > 5) {
      c.matrix.shift.kind = ShiftSpec::Kind::File;
      c.matrix.shift.path = trim(s.substr(5));
    } else {
      r.error("matrix.shift", "matrix.shift must be zero, diag:<list> or file:<path>");
    }
  }

  // sampler
  if (const auto* m = r.raw("sampler.method")) {
    if (*m == "cholesky") {
      c.sampler.method = SamplerMethod::Cholesky;
    } else if (*m == "circulant") {
      c.sampler.method = SamplerMethod::Circulant;
      if (c.kernel.kind == "table") r.error("sampler.method", "sampler.method = circulant needs kernel.kind brownian or fbm");
      if (!c.grid.uniform) r.error("sampler.method", "sampler.method = circulant needs a uniform grid");
    } else {
      r.error("sampler.method", "sampler.method must be cholesky or circulant");
    }
  }
  r.require("sampler.seed");
  if (auto s = r.integer("sampler.seed")) c.sampler.seed = *s;

  // observables
  if (const auto* raw = r.raw("observables.test_functions")) {
    c.observables.test_functions.clear();
    for (const auto& item : split_list(*raw)) {
      try {
        c.observables.test_functions.push_back(TestFunction::parse(item).id());
      } catch (const std::exception& e) {
        r.error("observables.test_functions", std::string("observables.test_functions: ") + e.what());
      }
    }
  }
  if (const auto* raw = r.raw("observables.z_points")) {
    for (const auto& item : split_list(*raw)) {
      const auto z = parse_complex(item);
      if (!z || !(z->imag() > 0.0))
        r.error("observables.z_points", "observables.z_points entries must be complex \"re+imi\" with im > 0, got \"" +
                                            item + "\"");
      else
        c.observables.z_points.push_back(*z);
    }
  }

  // experiment
  auto& x = c.experiment;
  if (auto v = r.integer("experiment.paths")) {
    x.paths = *v;
    if (*v < 1 || *v > 100000000) r.error("experiment.paths", "experiment.paths must be >= 1");
  }
  if (auto v = r.real("experiment.t")) {
    x.t = *v;
    if (!(*v >= 0.0) || *v > c.grid.t_max * (1.0 + 1e-12)) r.error("experiment.t", "experiment.t must lie in [0, grid end]");
  }
  if (auto v = r.reals("experiment.times")) {
    x.times = *v;
    for (double t : x.times)
      if (!(t >= 0.0) || t > c.grid.t_max * (1.0 + 1e-12))
        r.error("experiment.times", "experiment.times entries must lie in [0, grid end]");
  }
  if (auto v = r.real("experiment.p")) {
    x.p = *v;
    if (!(*v > 0.0)) r.error("experiment.p", "experiment.p must be > 0");
  }
  if (auto v = r.real("experiment.holder_base")) {
    x.holder_base = *v;
    if (!(*v >= 0.0)) r.error("experiment.holder_base", "experiment.holder_base must be >= 0");
  }
  if (auto v = r.reals("experiment.holder_lags")) {
    x.holder_lags = *v;
    for (double l : x.holder_lags)
      if (!(l > 0.0)) r.error("experiment.holder_lags", "experiment.holder_lags entries must be > 0");
  }
  if (auto v = r.real("experiment.tau")) {
    x.tau = *v;
    if (!(*v >= 0.0)) r.error("experiment.tau", "experiment.tau must be >= 0");
  }
  if (auto v = r.real("experiment.x_min")) x.x_min = *v;
  if (auto v = r.real("experiment.x_max")) x.x_max = *v;
  if (!(x.x_min < x.x_max)) r.error("experiment.x_max", "experiment.x_min must be < experiment.x_max");
  if (auto v = r.integer("experiment.x_points")) {
    x.x_points = *v;
    if (*v < 2 || *v > 1000000) r.error("experiment.x_points", "experiment.x_points must lie in [2, 1000000]");
  }
  if (auto v = r.real("experiment.dt")) {
    x.dt = *v;
    if (!(*v > 0.0)) r.error("experiment.dt", "experiment.dt must be > 0");
  }
  if (auto v = r.integer("experiment.dt_levels")) {
    x.dt_levels = *v;
    if (*v < 1 || *v > 12) r.error("experiment.dt_levels", "experiment.dt_levels must lie in [1, 12]");
  }
  if (auto v = r.real("experiment.gap_threshold")) {
    x.gap_threshold = *v;
    if (!(*v > 0.0)) r.error("experiment.gap_threshold", "experiment.gap_threshold must be > 0");
  }

  // output
  if (const auto* d = r.raw("output.directory")) c.output.directory = *d;
  if (const auto* f = r.raw("output.format")) {
    c.output.format = *f;
    if (*f != "csv") r.error("output.format", "output.format must be csv");
  }

  if (!r.errors.empty()) throw ConfigError(r.errors);
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    // a run manifest: re-run from its canonical config
    nlohmann::json manifest;
    try {
      manifest = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
      throw ConfigError({path + ": not a valid manifest: " + e.what()});
    }
    if (!manifest.contains("config_text") || !manifest["config_text"].is_string())
      throw ConfigError({path + ": manifest has no config_text"});
    return parse_config(manifest["config_text"].get<std::string>());
  }
  return parse_config(text);
}

namespace {

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? ", " : "") + format_double(v[k]);
  return out;
}

std::string shift_text(const ShiftSpec& s) {
  switch (s.kind) {
    case ShiftSpec::Kind::Zero: return "zero";
    case ShiftSpec::Kind::Diag: {
      std::string out = "diag:";
      for (std::size_t k = 0; k < s.diag.size(); ++k) out += (k ? "," : "") + format_double(s.diag[k]);
      return out;
    }
    case ShiftSpec::Kind::File: return "file:" + s.path;
  }
  return "zero";
}

using Sections = std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>;

Sections canonical_sections(const ExperimentConfig& c) {
  Sections s;
  auto& kernel = s.emplace_back("kernel", std::vector<std::pair<std::string, std::string>>{}).second;
  kernel.push_back({"kind", c.kernel.kind});
  if (c.kernel.kind == "fbm") kernel.push_back({"hurst", format_double(c.kernel.hurst)});
  if (c.kernel.kind == "table") kernel.push_back({"table_path", c.kernel.table_path});
  kernel.push_back({"alpha", format_double(c.kernel.alpha)});

  auto& grid = s.emplace_back("grid", std::vector<std::pair<std::string, std::string>>{}).second;
  if (c.grid.uniform) {
    grid.push_back({"t_max", format_double(c.grid.t_max)});
    grid.push_back({"steps", std::to_string(c.grid.steps)});
  } else {
    grid.push_back({"times", join_doubles(c.grid.times)});
  }

  auto& matrix = s.emplace_back("matrix", std::vector<std::pair<std::string, std::string>>{}).second;
  std::string ns;
  for (std::size_t k = 0; k < c.matrix.n.size(); ++k) ns += (k ? ", " : "") + std::to_string(c.matrix.n[k]);
  matrix.push_back({"n", ns});
  matrix.push_back({"shift", shift_text(c.matrix.shift)});

  auto& sampler = s.emplace_back("sampler", std::vector<std::pair<std::string, std::string>>{}).second;
  sampler.push_back({"method", c.sampler.method == SamplerMethod::Cholesky ? "cholesky" : "circulant"});
  sampler.push_back({"seed", std::to_string(c.sampler.seed)});

  auto& obs = s.emplace_back("observables", std::vector<std::pair<std::string, std::string>>{}).second;
  std::string tf;
  for (std::size_t k = 0; k < c.observables.test_functions.size(); ++k)
    tf += (k ? ", " : "") + c.observables.test_functions[k];
  obs.push_back({"test_functions", tf});
  if (!c.observables.z_points.empty()) {
    std::string zs;
    for (std::size_t k = 0; k < c.observables.z_points.size(); ++k)
      zs += (k ? ", " : "") + format_complex(c.observables.z_points[k]);
    obs.push_back({"z_points", zs});
  }

  const auto& x = c.experiment;
  auto& exp = s.emplace_back("experiment", std::vector<std::pair<std::string, std::string>>{}).second;
  exp.push_back({"paths", std::to_string(x.paths)});
  if (x.t) exp.push_back({"t", format_double(*x.t)});
  if (!x.times.empty()) exp.push_back({"times", join_doubles(x.times)});
  exp.push_back({"p", format_double(x.p)});
  if (x.holder_base) exp.push_back({"holder_base", format_double(*x.holder_base)});
  exp.push_back({"holder_lags", join_doubles(x.holder_lags)});
  if (x.tau) exp.push_back({"tau", format_double(*x.tau)});
  exp.push_back({"x_min", format_double(x.x_min)});
  exp.push_back({"x_max", format_double(x.x_max)});
  exp.push_back({"x_points", std::to_string(x.x_points)});
  exp.push_back({"dt", format_double(x.dt)});
  exp.push_back({"dt_levels", std::to_string(x.dt_levels)});
  exp.push_back({"gap_threshold", format_double(x.gap_threshold)});

  auto& out = s.emplace_back("output", std::vector<std::pair<std::string, std::string>>{}).second;
  out.push_back({"directory", c.output.directory});
  out.push_back({"format", c.output.format});
  return s;
}

}  // namespace

std::string canonical_text(const ExperimentConfig& c) {
  std::string out;
  for (const auto& [section, keys] : canonical_sections(c)) {
    if (!out.empty()) out += "\n";
    out += "[" + section + "]\n";
    for (const auto& [k, v] : keys) out += k + " = " + v + "\n";
  }
  return out;
}

std::string canonical_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [section, keys] : canonical_sections(c)) {
    auto& obj = j[section] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : keys) obj[k] = v;
  }
  return j.dump();
}

CovarianceKernel build_kernel(const ExperimentConfig& c) {
  if (c.kernel.kind == "brownian") return CovarianceKernel::brownian();
  if (c.kernel.kind == "fbm") return CovarianceKernel::fractional_brownian(c.kernel.hurst);
  try {
    return CovarianceKernel::table_from_csv(c.kernel.table_path);
  } catch (const IoError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError({"kernel.table_path: " + std::string(e.what())});
  }
}

TimeGrid build_grid(const ExperimentConfig& c) {
  if (c.grid.uniform) return TimeGrid::uniform(c.grid.t_max, c.grid.steps);
  return TimeGrid(c.grid.times);
}

double experiment_time(const ExperimentConfig& c) { return c.experiment.t.value_or(c.grid.t_max); }

Eigen::MatrixXd build_shift(const ExperimentConfig& c, std::size_t n) {
  const auto nn = static_cast<Eigen::Index>(n);
  const auto& s = c.matrix.shift;
  switch (s.kind) {
    case ShiftSpec::Kind::Zero: return Eigen::MatrixXd::Zero(nn, nn);
    case ShiftSpec::Kind::Diag: {
      Eigen::MatrixXd a = Eigen::MatrixXd::Zero(nn, nn);
      for (std::size_t i = 0; i < n; ++i) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = s.diag[i % s.diag.size()];
      return a;
    }
    case ShiftSpec::Kind::File: {
      std::ifstream in(s.path);
      if (!in) throw IoError("cannot read shift matrix file " + s.path);
      std::vector<std::vector<double>> rows;
      std::string line;
      int lineno = 0;
      while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        for (const auto& item : split_list(line)) {
          const auto v = to_double(item);
          if (!v) throw ConfigError({s.path + " line " + std::to_string(lineno) + ": not a number \"" + item + "\""});
          row.push_back(*v);
        }
        rows.push_back(std::move(row));
      }
      if (rows.size() != n)
        throw ConfigError({"matrix.shift: " + s.path + " has " + std::to_string(rows.size()) + " rows, matrix.n is " +
                           std::to_string(n)});
      Eigen::MatrixXd a(nn, nn);
      for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw ConfigError({"matrix.shift: " + s.path + " is not square"});
        for (std::size_t j = 0; j < n; ++j) a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
      }
      if ((a - a.transpose()).cwiseAbs().maxCoeff() > 0.0)
        throw ConfigError({"matrix.shift: " + s.path + " is not symmetric"});
      return a;
    }
  }
  return Eigen::MatrixXd::Zero(nn, nn);
}

}  // namespace gmflow
