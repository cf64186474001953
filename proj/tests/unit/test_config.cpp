#include <doctest.h>

#include <algorithm>
#include <fstream>

#include "gmflow/config.h"

using namespace gmflow;

namespace {

const char* kMinimal = R"([kernel]
kind = fbm
hurst = 0.75

[grid]
t_max = 1
steps = 8

[matrix]
n = 10, 20

[sampler]
seed = 42
)";

bool any_contains(const ConfigError& e, const std::string& needle) {
  return std::any_of(e.errors().begin(), e.errors().end(),
                     [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

ConfigError error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e;
  }
  FAIL("expected a ConfigError");
  return ConfigError({});
}

}  // namespace

TEST_CASE("minimal config parses with defaults") {
  const auto c = parse_config(kMinimal);
  CHECK(c.kernel.kind == "fbm");
  CHECK(c.kernel.hurst == 0.75);
  CHECK(c.grid.steps == 8);
  CHECK(c.matrix.n == std::vector<std::size_t>{10, 20});
  CHECK(c.sampler.seed == 42);
  CHECK(c.sampler.method == SamplerMethod::Cholesky);
  CHECK(c.experiment.paths == 20);
  CHECK(c.observables.test_functions == std::vector<std::string>{"gaussian"});
  CHECK(c.output.directory == "gmflow-out");
  CHECK(experiment_time(c) == 1.0);
  CHECK(build_grid(c).size() == 9);
  CHECK(build_kernel(c).hurst() == 0.75);
  CHECK(build_shift(c, 10).isZero());
}

TEST_CASE("comments and diag shifts") {
  std::string text = kMinimal;
  text += "# a comment\n[experiment]\npaths = 5 ; trailing\n";
  auto c = parse_config(text);
  CHECK(c.experiment.paths == 5);
  text = std::string(kMinimal) + "";
  const auto pos = text.find("n = 10, 20");
  text.replace(pos, 10, "n = 4\nshift = diag:1,-1");
  c = parse_config(text);
  const auto a = build_shift(c, 4);
  CHECK(a(0, 0) == 1);
  CHECK(a(1, 1) == -1);
  CHECK(a(2, 2) == 1);
  CHECK(a(0, 1) == 0);
}

TEST_CASE("hurst outside (0,1) is rejected") {
  std::string text = kMinimal;
  text.replace(text.find("0.75"), 4, "1.5");
  const auto e = error_of(text);
  CHECK(any_contains(e, "kernel.hurst must lie in (0,1)"));
  CHECK(any_contains(e, "line 3"));
}

TEST_CASE("duplicate keys report both lines") {
  const auto e = error_of(std::string(kMinimal) + "[sampler]\nseed = 3\n");
  CHECK(any_contains(e, "duplicate key sampler.seed (lines 13 and 15)"));
}

TEST_CASE("unknown and missing keys are all collected") {
  const auto e = error_of("[kernel]\nkind = brownian\ncolour = red\n[bogus]\nx = 1\n[grid]\nt_max = 1\nsteps = 4\n");
  CHECK(any_contains(e, "colour"));
  CHECK(any_contains(e, "bogus"));
  CHECK(any_contains(e, "matrix.n"));
  CHECK(any_contains(e, "sampler.seed"));
  CHECK(e.errors().size() >= 4);
  const auto h = error_of("[kernel]\nkind = brownian\nhurst = 0.3\n[grid]\nt_max = 1\nsteps = 4\n[matrix]\nn = 2\n[sampler]\nseed = 1\n");
  CHECK(any_contains(h, "hurst"));
}

TEST_CASE("circulant sampler needs a uniform grid") {
  const auto e = error_of(
      "[kernel]\nkind = fbm\nhurst = 0.3\n[grid]\ntimes = 0, 0.1, 0.5\n[matrix]\nn = 2\n[sampler]\nseed = 1\nmethod = circulant\n");
  CHECK(any_contains(e, "circulant"));
}

TEST_CASE("canonical text round-trips") {
  auto c = parse_config(std::string(kMinimal) + "[observables]\nz_points = 1+1i, 2i\ntest_functions = gaussian, tanh_bump\n");
  const auto text = canonical_text(c);
  const auto again = parse_config(text);
  CHECK(canonical_text(again) == text);
  CHECK(canonical_json(again) == canonical_json(c));
  CHECK(again.observables.z_points.size() == 2);
  CHECK(canonical_json(c).find("\"seed\":\"42\"") != std::string::npos);
}

TEST_CASE("manifest files load through config_text") {
  const auto c = parse_config(kMinimal);
  const std::string path = "test_config_manifest.json";
  {
    std::ofstream out(path);
    std::string escaped;
    for (char ch : canonical_text(c)) escaped += ch == '\n' ? std::string("\\n") : std::string(1, ch);
    out << "{\"subcommand\": \"limit\", \"config_text\": \"" << escaped << "\"}";
  }
  CHECK(canonical_text(load_config_file(path)) == canonical_text(c));
}

TEST_CASE("complex parsing and number formatting") {
  CHECK(parse_complex("1+2i") == std::complex<double>(1, 2));
  CHECK(parse_complex("1 - 0.5i") == std::complex<double>(1, -0.5));
  CHECK(parse_complex("2i") == std::complex<double>(0, 2));
  CHECK(parse_complex("1e-3+1e+2i") == std::complex<double>(1e-3, 100));
  CHECK_FALSE(parse_complex("abc").has_value());
  CHECK(format_double(0.1) == "0.1");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(parse_complex(format_complex({0.25, 3})) == std::complex<double>(0.25, 3));
}
