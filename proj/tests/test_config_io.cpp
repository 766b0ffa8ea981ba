#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "neuropop/config.hpp"
#include "neuropop/csv.hpp"
#include "neuropop/manifest.hpp"
#include "neuropop/model.hpp"
#include "neuropop/pde.hpp"

using namespace neuropop;

namespace {

const char* kStdConfig = R"(
[model]
lambda = 1.0
epsilon = 0.3

[firing]
kind = constant
f_max = 1.0

[jump]
kind = depression
upsilon = 0.5

[kernel]
kind = exponential_depression
amplitude = 1.0
decay = 1.0
)";

const char* kAdditiveConfig = R"(
[model]
lambda = 1.0
epsilon = 0.1

[firing]
kind = sigmoid_adaptive
f_max = 2.0
sigma = 0.5
beta = 2.0
delta_abs = 0.1
eta_amplitude = 1.0
eta_tau = 0.5

[jump]
kind = additive
gamma_hat = 1.0

[kernel]
kind = exponential
amplitude = 2.0
decay = 2.0
)";

std::string temp_dir() {
  auto dir = std::filesystem::temp_directory_path() / "neuropop_test_io";
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("depression config notes assumption 4 with G = 1") {
  ParsedConfig cfg = parse_config_text(kStdConfig, "<test>");
  CHECK(cfg.spec.jump.kind == JumpKind::depression);
  CHECK(cfg.spec.m_max == 1.0);
  bool found = false;
  for (const auto& note : cfg.notes)
    if (note.find("assumption 4") != std::string::npos && note.find("G = 1") != std::string::npos)
      found = true;
  CHECK(found);
}

TEST_CASE("negative additive jump size is rejected") {
  std::string bad = kAdditiveConfig;
  const auto pos = bad.find("gamma_hat = 1.0");
  bad.replace(pos, 15, "gamma_hat = -.5");
  CHECK_THROWS_WITH_AS(parse_config_text(bad, "<test>"),
                       doctest::Contains("[jump] gamma_hat"), std::invalid_argument);
}

TEST_CASE("unknown keys and sections fail with their path") {
  std::string bad = kStdConfig;
  bad += "\n[firing]\n";  // reopened section would be a duplicate; use fresh text instead
  std::string unknown_key = kStdConfig;
  unknown_key.insert(unknown_key.find("[jump]"), "typo_key = 3\n");
  CHECK_THROWS_WITH_AS(parse_config_text(unknown_key, "<test>"),
                       doctest::Contains("[firing] typo_key"), std::invalid_argument);

  std::string unknown_section = kStdConfig;
  unknown_section += "\n[plotting]\ncolor = red\n";
  CHECK_THROWS_WITH_AS(parse_config_text(unknown_section, "<test>"),
                       doctest::Contains("[plotting]"), std::invalid_argument);

  std::string missing = "[model]\nlambda = 1.0\n";
  CHECK_THROWS_AS(parse_config_text(missing, "<test>"), std::invalid_argument);
}

TEST_CASE("config round-trips through serialization") {
  for (const char* text : {kStdConfig, kAdditiveConfig}) {
    ParsedConfig a = parse_config_text(text, "<test>");
    const std::string canon = serialize_config(a);
    ParsedConfig b = parse_config_text(canon, "<canon>");
    CHECK(serialize_config(b) == canon);
    CHECK(a.spec.lambda == b.spec.lambda);
    CHECK(a.spec.m_max == b.spec.m_max);
    CHECK(a.spec.firing.f_max == b.spec.firing.f_max);
    CHECK(a.spec.jump.kind == b.spec.jump.kind);
  }
}

TEST_CASE("config hash is stable under key reordering and comments") {
  const std::string a = "[model]\nlambda = 1\nepsilon = 0.5\n[firing]\nkind = constant\n";
  const std::string b =
      "# reordered\n[firing]\nkind = constant\n[model]\nepsilon = 0.5\nlambda = 1\n";
  const std::string c = "[model]\nlambda = 2\nepsilon = 0.5\n[firing]\nkind = constant\n";
  CHECK(config_hash_hex(a) == config_hash_hex(b));
  CHECK(config_hash_hex(a) != config_hash_hex(c));
}

TEST_CASE("trace csv: header schema and empty-trace behavior") {
  const std::string dir = temp_dir();
  Trace empty;
  write_trace_csv(dir + "/empty.csv", empty);
  std::ifstream in(dir + "/empty.csv");
  std::string header, extra;
  std::getline(in, header);
  CHECK(header == "t,x,pop_rate,mass_in_window,weighted_norm");
  CHECK_FALSE(std::getline(in, extra));

  Trace t;
  t.times = {0.0, 0.5};
  t.x_values = {0.0, 0.25};
  t.pop_rate = {1.0, 0.9};
  t.mass = {1.0, 1.0};
  t.weighted_norm = {1.5, 1.4};
  write_trace_csv(dir + "/trace.csv", t);
  CsvTable table = read_csv(dir + "/trace.csv");
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1][1] == 0.25);
}

TEST_CASE("density csv mass recomputes from the file to 1e-12") {
  const std::string dir = temp_dir();
  ModelSpec s = make_constant_model(1.0, 1.0, 0.5);
  GridSpec g = make_grid(6.0, 24, 0.0, s.m_max, 16);
  DensityGrid rho = gaussian_initial(g, 1.0, 0.5, 1.0, 0.3);
  write_density_csv(dir + "/density.csv", rho);
  CsvTable table = read_csv(dir + "/density.csv");
  REQUIRE(table.header.size() == 5);
  double mass = 0.0;
  for (const auto& row : table.rows)
    mass += row[4] * (row[1] - row[0]) * (row[3] - row[2]);
  CHECK(mass == doctest::Approx(rho.mass()).epsilon(1e-12));
}

TEST_CASE("doubles round-trip through the 17-digit format") {
  for (const double v : {1.0 / 3.0, 2.0 / 3.0e-8, 1.2345678901234567e17}) {
    CHECK(std::stod(fmt17(v)) == v);
  }
}

TEST_CASE("manifest is valid json and written before outputs") {
  const std::string dir = temp_dir();
  RunManifest m;
  m.subcommand = "solve-pde";
  m.config_hash = "0123456789abcdef";
  m.seed = 42;
  m.parameters = {{"t_end", "10"}};
  m.outputs = {"trace.csv"};
  const std::string path = write_manifest(dir, m);
  std::ifstream in(path);
  REQUIRE(in.good());
  std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(all.find("\"seed\": 42") != std::string::npos);
  CHECK(all.find("solve-pde") != std::string::npos);
  CHECK(all.find("timestamp") != std::string::npos);
}

TEST_CASE("tabulated firing rates and custom jump maps parse and evaluate") {
  const char* text = R"(
[model]
lambda = 1.0
epsilon = 0.0
m_max = 6.0

[firing]
kind = tabulated
table = -2:0.2, 0:1.0, 2:1.8
delta_abs = 0.1
eta_amplitude = 1.0
eta_tau = 0.5

[jump]
kind = custom
table = 0:0.8, 1:1.6, 3:3.2

[kernel]
kind = exponential
amplitude = 1.0
decay = 1.0
)";
  ParsedConfig cfg = parse_config_text(text, "<test>");
  CHECK(cfg.spec.firing.sigma == 0.2);
  CHECK(cfg.spec.firing.f_max == 1.8);
  CHECK(cfg.spec.firing.lipschitz() > 0.0);
  CHECK(evaluate_rate(cfg.spec, 0.05, 1.0, 0.0) == 0.0);  // refractory
  const double mid = evaluate_rate(cfg.spec, 5.0, 0.5, 0.0);
  CHECK(mid > 0.2);
  CHECK(mid < 1.8);
  CHECK(cfg.spec.jump.gamma0() == doctest::Approx(0.8));
  CHECK(cfg.spec.jump.c_gamma() == doctest::Approx(0.8));
  CHECK(cfg.spec.jump.gamma_inv(cfg.spec.jump.gamma(2.0)) == doctest::Approx(2.0));

  std::string bad = text;
  bad.replace(bad.find("0:0.8, 1:1.6, 3:3.2"), 19, "0:0.8, 1:2.0, 3:3.2");  // slope > 1
  CHECK_THROWS_AS(parse_config_text(bad, "<test>"), std::invalid_argument);
}

TEST_CASE("grid defaults come from the config or the tail criterion") {
  ParsedConfig cfg = parse_config_text(kAdditiveConfig, "<test>");
  GridSpec g = grid_from_config(cfg);
  CHECK(g.a_max >= cfg.spec.firing.delta_abs + 10.0 / cfg.spec.firing.sigma);
  CHECK(g.n_a == 400);
  CHECK(g.m_max == cfg.spec.m_max);

  std::string with_grid = kAdditiveConfig;
  with_grid += "\n[grid]\na_max = 25\nn_a = 100\nn_m = 50\n";
  ParsedConfig cfg2 = parse_config_text(with_grid, "<test>");
  GridSpec g2 = grid_from_config(cfg2);
  CHECK(g2.a_max == 25.0);
  CHECK(g2.n_a == 100);
  CHECK(g2.n_m == 50);
}
