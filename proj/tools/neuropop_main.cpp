// Command-line front end: every subcommand reads a model config, writes a
// run manifest before any output, and emits CSV files with fixed schemas.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "neuropop/config.hpp"
#include "neuropop/csv.hpp"
#include "neuropop/manifest.hpp"
#include "neuropop/model.hpp"
#include "neuropop/particle.hpp"
#include "neuropop/pde.hpp"
#include "neuropop/stationary.hpp"
#include "neuropop/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace np = neuropop;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 1;
  int threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out = true) {
  cmd->add_option("--config", args.config_path, "model config file")->required();
  if (needs_out) cmd->add_option("--out", args.out_dir, "output directory")->required();
  cmd->add_option("--seed", args.seed, "random seed");
  cmd->add_option("--threads", args.threads, "worker threads (0 = library default)");
}

void apply_threads(int threads) {
#ifdef _OPENMP
  if (threads > 0) omp_set_num_threads(threads);
#else
  (void)threads;
#endif
}

np::ParsedConfig load_config(const CommonArgs& args, bool print_notes = true) {
  np::ParsedConfig cfg = np::parse_config_file(args.config_path);
  if (print_notes)
    for (const std::string& note : cfg.notes) std::cout << "config: " << note << "\n";
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

np::RunManifest start_manifest(const CommonArgs& args, const std::string& subcommand,
                               const std::vector<std::string>& outputs) {
  std::filesystem::create_directories(args.out_dir);
  np::RunManifest m;
  m.subcommand = subcommand;
  m.config_hash = np::config_hash_hex(slurp(args.config_path));
  m.seed = args.seed;
  m.threads = args.threads;
  m.outputs = outputs;
  return m;
}

bool parse_grid_arg(const std::string& text, int& n_a, int& n_m) {
  const std::size_t x = text.find('x');
  if (x == std::string::npos) return false;
  n_a = std::stoi(text.substr(0, x));
  n_m = std::stoi(text.substr(x + 1));
  return n_a > 0 && n_m > 0;
}

np::GridSpec build_grid(const np::ParsedConfig& cfg, const std::string& grid_arg,
                        double a_max_arg, double m_max_arg) {
  np::ParsedConfig tweaked = cfg;
  if (!grid_arg.empty()) {
    int n_a = 0, n_m = 0;
    if (!parse_grid_arg(grid_arg, n_a, n_m))
      throw std::invalid_argument("--grid expects <n_a>x<n_m>");
    tweaked.grid.n_a = n_a;
    tweaked.grid.n_m = n_m;
  }
  if (a_max_arg > 0.0) tweaked.grid.a_max = a_max_arg;
  if (m_max_arg > 0.0) tweaked.spec.m_max = m_max_arg;
  return np::grid_from_config(tweaked);
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(std::stod(item));
  return out;
}

int cmd_simulate_particles(const CommonArgs& args, std::size_t n, double t_end, double dt,
                           double record_stride, int raster_count) {
  apply_threads(args.threads);
  np::ParsedConfig cfg = load_config(args);
  const np::ModelSpec& spec = cfg.spec;
  if (spec.firing.delta_abs < dt)
    std::cerr << "warning: delta_abs < dt; more than one spike per neuron per step is "
                 "suppressed by the scheme\n";
  np::GridSpec grid = np::grid_from_config(cfg);

  np::RunManifest manifest =
      start_manifest(args, "simulate-particles", {"trace.csv", "raster.csv", "density_final.csv"});
  manifest.parameters = {{"n", std::to_string(n)},
                         {"t_end", np::fmt17(t_end)},
                         {"dt", np::fmt17(dt)},
                         {"record_stride", np::fmt17(record_stride)},
                         {"raster_count", std::to_string(raster_count)}};
  np::write_manifest(args.out_dir, manifest);

  np::ParticleState state = np::sample_initial(spec, cfg.initial, grid, n, args.seed);
  np::RecordConfig rec;
  rec.stride = record_stride;
  rec.raster_count = raster_count;
  rec.window_a_max = grid.a_max;
  rec.window_m_max = grid.m_max;
  np::ParticleState final_state;
  np::Trace trace = np::run_particles(spec, state, t_end, dt, rec, &final_state);

  np::write_trace_csv(args.out_dir + "/trace.csv", trace);
  np::write_raster_csv(args.out_dir + "/raster.csv", trace);
  np::write_density_csv(args.out_dir + "/density_final.csv",
                        np::empirical_density(final_state, grid));
  std::cout << "simulate-particles: " << trace.size() << " records, final x = "
            << np::fmt17(trace.x_values.back()) << "\n";
  return 0;
}

int cmd_solve_pde(const CommonArgs& args, const std::string& grid_arg, double a_max_arg,
                  double m_max_arg, double t_end, double dt, double frozen_x, bool frozen,
                  double record_stride, const std::string& snapshots_arg) {
  apply_threads(args.threads);
  np::ParsedConfig cfg = load_config(args);
  np::GridSpec grid = build_grid(cfg, grid_arg, a_max_arg, m_max_arg);
  if (dt <= 0.0) dt = 0.9 * np::cfl_limit(cfg.spec, grid);

  std::vector<double> snapshots;
  if (!snapshots_arg.empty()) snapshots = parse_list(snapshots_arg);

  std::vector<std::string> outputs = {"trace.csv", "density_final.csv"};
  for (std::size_t i = 0; i < snapshots.size(); ++i)
    outputs.push_back("density_" + std::to_string(i) + ".csv");
  np::RunManifest manifest = start_manifest(args, "solve-pde", outputs);
  manifest.parameters = {{"grid", std::to_string(grid.n_a) + "x" + std::to_string(grid.n_m)},
                         {"a_max", np::fmt17(grid.a_max)},
                         {"m_max", np::fmt17(grid.m_max)},
                         {"t_end", np::fmt17(t_end)},
                         {"dt", np::fmt17(dt)},
                         {"frozen", frozen ? np::fmt17(frozen_x) : "no"}};
  np::write_manifest(args.out_dir, manifest);

  np::DensityGrid u0 = np::build_initial(cfg.initial, grid, cfg.spec);
  std::size_t next_snap = 0;
  np::PdeRunOptions opt;
  opt.t_end = t_end;
  opt.dt = dt;
  opt.record_stride = record_stride;
  opt.frozen = frozen;
  opt.x_tilde = frozen_x;
  opt.observer = [&](double t, const np::DensityGrid& rho, double) {
    while (next_snap < snapshots.size() && t >= snapshots[next_snap] - 1e-9) {
      np::write_density_csv(args.out_dir + "/density_" + std::to_string(next_snap) + ".csv",
                            rho);
      ++next_snap;
    }
  };
  auto [trace, rho] = np::run_pde(cfg.spec, u0, opt);
  np::write_trace_csv(args.out_dir + "/trace.csv", trace);
  np::write_density_csv(args.out_dir + "/density_final.csv", rho);
  std::cout << "solve-pde: mass " << np::fmt17(rho.mass()) << ", leaked "
            << np::fmt17(rho.leaked_mass) << ", final x " << np::fmt17(trace.x_values.back())
            << "\n";
  return 0;
}

int cmd_stationary(const CommonArgs& args, double tol, const std::string& grid_arg) {
  apply_threads(args.threads);
  np::ParsedConfig cfg = load_config(args);
  np::GridSpec grid = build_grid(cfg, grid_arg, -1.0, -1.0);

  np::RunManifest manifest = start_manifest(
      args, "stationary", {"stationary_u.csv", "stationary_density.csv", "stationary_report.csv"});
  manifest.parameters = {{"tol", np::fmt17(tol)}};
  np::write_manifest(args.out_dir, manifest);

  np::StationaryResult res = np::solve_stationary(cfg.spec, tol, grid);
  np::write_boundary_csv(args.out_dir + "/stationary_u.csv", res.u);
  np::write_density_csv(args.out_dir + "/stationary_density.csv", res.rho_inf);

  std::vector<std::pair<std::string, std::string>> rows;
  rows.push_back({"x_inf", np::fmt17(res.x_inf)});
  rows.push_back({"converged", res.converged ? "1" : "0"});
  rows.push_back({"outer_iterations", std::to_string(res.iterations)});
  rows.push_back({"lift_raw_mass", np::fmt17(res.lift_raw_mass)});
  for (std::size_t i = 0; i < res.upsilon_residuals.size(); ++i) {
    rows.push_back({"phi_residual_" + std::to_string(i + 1), np::fmt17(res.phi_residuals[i])});
    rows.push_back(
        {"upsilon_residual_" + std::to_string(i + 1), np::fmt17(res.upsilon_residuals[i])});
  }
  for (const np::CheckOutcome& c : res.checks)
    rows.push_back({c.name, c.skipped ? "skipped: " + c.note
                                      : (c.passed ? "pass" : "FAIL") + std::string(" lhs=") +
                                            np::fmt17(c.lhs) + " rhs=" + np::fmt17(c.rhs)});
  if (!res.message.empty()) rows.push_back({"message", res.message});
  np::write_kv_csv(args.out_dir + "/stationary_report.csv", rows);

  std::cout << "stationary: x_inf = " << np::fmt17(res.x_inf)
            << (res.converged ? "" : " (NOT CONVERGED: " + res.message + ")") << "\n";
  return res.converged ? 0 : 3;
}

int cmd_verify_std_formula(const CommonArgs& args, double x_tilde) {
  np::ParsedConfig cfg = load_config(args, false);
  np::StdFormula f = np::std_closed_form(cfg.spec, x_tilde);
  std::cout << "I = " << np::fmt17(f.isi_mean) << "\n";
  std::cout << "P(lambda) = " << np::fmt17(f.laplace) << "\n";
  std::cout << "X = " << np::fmt17(f.x_value) << "\n";
  if (cfg.spec.firing.kind == np::FiringKind::constant && cfg.spec.firing.delta_abs == 0.0) {
    const double c = cfg.spec.firing.f_max;
    const double lam = cfg.spec.lambda;
    const double ups = cfg.spec.jump.upsilon;
    const double analytic =
        cfg.spec.kernel.hbar_sup() * c * lam / (lam + c * (1.0 - ups));
    std::cout << "X_analytic = " << np::fmt17(analytic) << " (constant-rate closed form)\n";
    std::cout << "abs_error = " << np::fmt17(std::abs(analytic - f.x_value)) << "\n";
  }
  return 0;
}

int cmd_doeblin_check(const CommonArgs& args, double R, double x_tilde,
                      const std::string& grid_arg, int probes) {
  apply_threads(args.threads);
  np::ParsedConfig cfg = load_config(args);
  np::DoeblinWindow window = np::doeblin_window(cfg.spec, R);

  np::RunManifest manifest =
      start_manifest(args, "doeblin-check", {"doeblin_window.csv", "doeblin_probes.csv"});
  manifest.parameters = {{"R", np::fmt17(R)}, {"x", np::fmt17(x_tilde)}};
  np::write_manifest(args.out_dir, manifest);

  std::vector<std::pair<std::string, std::string>> wrows = {
      {"feasible", window.feasible ? "1" : "0"}, {"R", np::fmt17(window.R)},
      {"T", np::fmt17(window.T)},               {"a_bar", np::fmt17(window.a_bar)},
      {"m_lower", np::fmt17(window.m_lower)},   {"m_upper", np::fmt17(window.m_upper)},
      {"nu_constant", np::fmt17(window.nu_constant)}};
  if (!window.note.empty()) wrows.push_back({"note", window.note});
  np::write_kv_csv(args.out_dir + "/doeblin_window.csv", wrows);
  if (!window.feasible) {
    std::cout << "doeblin-check: infeasible window (" << window.note << ")\n";
    return 3;
  }

  np::DoeblinCheckOptions opt;
  opt.x_tilde = x_tilde;
  opt.probes_per_axis = probes;
  if (!grid_arg.empty() && !parse_grid_arg(grid_arg, opt.n_a, opt.n_m))
    throw std::invalid_argument("--grid expects <n_a>x<n_m>");
  np::DoeblinReport rep = np::doeblin_empirical(cfg.spec, window, opt);

  std::ofstream out(args.out_dir + "/doeblin_probes.csv", std::ios::binary);
  out << "a0,m0,excluded,min_density,ratio\n";
  for (const auto& p : rep.probes)
    out << np::fmt17(p.a0) << ',' << np::fmt17(p.m0) << ',' << (p.excluded ? 1 : 0) << ','
        << np::fmt17(p.min_density) << ',' << np::fmt17(p.ratio) << '\n';
  out.close();

  std::cout << "doeblin-check: T = " << np::fmt17(window.T) << ", nu = "
            << np::fmt17(window.nu_constant) << ", min ratio = " << np::fmt17(rep.min_ratio)
            << (rep.all_positive ? "" : " (ZERO density found)") << "\n";
  return rep.all_positive ? 0 : 3;
}

int cmd_harris_rate(const CommonArgs& args, double x_tilde, double t_end, double dt,
                    const std::string& grid_arg) {
  apply_threads(args.threads);
  np::ParsedConfig cfg = load_config(args);
  np::GridSpec grid = build_grid(cfg, grid_arg, -1.0, -1.0);
  if (dt <= 0.0) dt = 0.9 * np::cfl_limit(cfg.spec, grid);

  np::RunManifest manifest = start_manifest(args, "harris-rate", {"harris_rate.csv"});
  manifest.parameters = {{"x", np::fmt17(x_tilde)},
                         {"t_end", np::fmt17(t_end)},
                         {"dt", np::fmt17(dt)}};
  np::write_manifest(args.out_dir, manifest);

  np::InitialSpec ia = cfg.initial;
  np::InitialSpec ib = cfg.initial;
  ib.a0 = ia.a0 + 1.0;
  ib.m0 = (ia.m0 > 0.0 ? ia.m0 : 0.5) * 1.5;
  if (cfg.spec.m_domain_is_compact()) ib.m0 = std::min(ib.m0, 0.9);
  np::DensityGrid u0 = np::build_initial(ia, grid, cfg.spec);
  np::DensityGrid v0 = np::build_initial(ib, grid, cfg.spec);
  np::RateFit fit = np::harris_rate(cfg.spec, x_tilde, u0, v0, t_end, dt);

  np::write_kv_csv(args.out_dir + "/harris_rate.csv",
                   {{"rate", np::fmt17(fit.rate)},
                    {"prefactor", np::fmt17(fit.prefactor)},
                    {"r_squared", np::fmt17(fit.r_squared)},
                    {"window_start", np::fmt17(fit.window_start)},
                    {"window_end", np::fmt17(fit.window_end)},
                    {"degenerate", fit.degenerate ? "1" : "0"}});
  std::cout << "harris-rate: rate = " << np::fmt17(fit.rate) << ", r2 = "
            << np::fmt17(fit.r_squared) << "\n";
  return 0;
}

int cmd_stability_sweep(const CommonArgs& args, const std::string& eps_arg, double t_end,
                        double dt, const std::string& grid_arg, double tol) {
  apply_threads(args.threads);
  np::ParsedConfig cfg = load_config(args);
  np::GridSpec grid = build_grid(cfg, grid_arg, -1.0, -1.0);
  if (dt <= 0.0) dt = 0.9 * np::cfl_limit(cfg.spec, grid);
  const std::vector<double> epsilons = parse_list(eps_arg);

  np::RunManifest manifest = start_manifest(args, "stability-sweep", {"stability_sweep.csv"});
  manifest.parameters = {{"epsilons", eps_arg},
                         {"t_end", np::fmt17(t_end)},
                         {"dt", np::fmt17(dt)}};
  np::write_manifest(args.out_dir, manifest);

  np::DensityGrid u0 = np::build_initial(cfg.initial, grid, cfg.spec);
  np::StationaryOptions sopt;
  sopt.outer_tol = tol;
  std::vector<np::StabilityReport> reports =
      np::weak_coupling_experiment(cfg.spec, epsilons, u0, t_end, dt, sopt);

  std::ofstream out(args.out_dir + "/stability_sweep.csv", std::ios::binary);
  out << "epsilon,classification,rate,r_squared,x_pp_last_third,x_pp_global,x_inf,"
         "stationary_converged\n";
  for (const auto& r : reports) {
    out << np::fmt17(r.epsilon) << ',' << r.classification << ',' << np::fmt17(r.fit.rate)
        << ',' << np::fmt17(r.fit.r_squared) << ',' << np::fmt17(r.x_pp_last) << ','
        << np::fmt17(r.x_pp_global) << ',' << np::fmt17(r.x_inf) << ','
        << (r.stationary_converged ? 1 : 0) << '\n';
    std::cout << "epsilon " << r.epsilon << ": " << r.classification << "\n";
  }
  return 0;
}

int cmd_compare(const CommonArgs& args, const std::string& n_arg, int n_seeds, double t_end,
                double dt, const std::string& grid_arg) {
  apply_threads(args.threads);
  np::ParsedConfig cfg = load_config(args);
  np::GridSpec grid = build_grid(cfg, grid_arg, -1.0, -1.0);
  const std::vector<double> n_list = parse_list(n_arg);

  np::RunManifest manifest = start_manifest(args, "compare", {"compare.csv"});
  manifest.parameters = {{"n", n_arg},
                         {"seeds", std::to_string(n_seeds)},
                         {"t_end", np::fmt17(t_end)},
                         {"dt", np::fmt17(dt)}};
  np::write_manifest(args.out_dir, manifest);

  // record on a shared lattice: the pde step divides the particle step
  const long k_stride = std::max<long>(1, std::lround(t_end / 200.0 / dt));
  const double record_stride = static_cast<double>(k_stride) * dt;
  np::DensityGrid u0 = np::build_initial(cfg.initial, grid, cfg.spec);
  const double cfl = np::cfl_limit(cfg.spec, grid);
  const double pde_dt = dt <= cfl ? dt : dt / std::ceil(dt / cfl);
  auto [pde_trace, rho] = np::run_nonlinear(cfg.spec, u0, t_end, pde_dt, record_stride);

  np::RecordConfig rec;
  rec.stride = record_stride;
  rec.window_a_max = grid.a_max;
  rec.window_m_max = grid.m_max;

  std::ofstream out(args.out_dir + "/compare.csv", std::ios::binary);
  out << "n,seed,sup_dx\n";
  for (const double n_d : n_list) {
    const std::size_t n = static_cast<std::size_t>(n_d);
    for (int s = 0; s < n_seeds; ++s) {
      const std::uint64_t seed = args.seed + static_cast<std::uint64_t>(s);
      np::ParticleState st = np::sample_initial(cfg.spec, cfg.initial, grid, n, seed);
      np::Trace pt = np::run_particles(cfg.spec, st, t_end, dt, rec);
      double sup = 0.0;
      std::size_t k = 0;
      for (std::size_t i = 0; i < pt.size(); ++i) {
        while (k + 1 < pde_trace.size() && pde_trace.times[k] < pt.times[i] - 1e-9) ++k;
        if (std::abs(pde_trace.times[k] - pt.times[i]) < 1e-6)
          sup = std::max(sup, std::abs(pde_trace.x_values[k] - pt.x_values[i]));
      }
      out << n << ',' << seed << ',' << np::fmt17(sup) << '\n';
      std::cout << "n = " << n << " seed " << seed << ": sup|dx| = " << np::fmt17(sup) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"age- and leaky-memory-structured neural population toolkit"};
  app.require_subcommand(1);

  CommonArgs common;

  auto* sim = app.add_subcommand("simulate-particles", "stochastic N-neuron simulation");
  std::size_t sim_n = 10000;
  double sim_tend = 10.0, sim_dt = 5e-3, sim_stride = 0.05;
  int sim_raster = 100;
  add_common(sim, common);
  sim->add_option("--n", sim_n, "number of neurons");
  sim->add_option("--t-end", sim_tend, "simulated time")->required();
  sim->add_option("--dt", sim_dt, "time step")->required();
  sim->add_option("--record-stride", sim_stride, "trace recording interval");
  sim->add_option("--raster-count", sim_raster, "neurons recorded in raster.csv");

  auto* pde = app.add_subcommand("solve-pde", "deterministic mean-field solver");
  std::string pde_grid, pde_snapshots;
  double pde_amax = -1.0, pde_mmax = -1.0, pde_tend = 10.0, pde_dt = -1.0, pde_stride = 0.05;
  double pde_frozen_x = 0.0;
  add_common(pde, common);
  pde->add_option("--grid", pde_grid, "cells as <n_a>x<n_m>");
  pde->add_option("--a-max", pde_amax, "age truncation");
  pde->add_option("--m-max", pde_mmax, "memory truncation");
  pde->add_option("--t-end", pde_tend, "simulated time")->required();
  pde->add_option("--dt", pde_dt, "time step (default: 0.9 CFL)");
  auto* frozen_opt =
      pde->add_option("--frozen-x", pde_frozen_x, "freeze the input potential at this value");
  pde->add_option("--record-stride", pde_stride, "trace recording interval");
  pde->add_option("--snapshots", pde_snapshots, "comma-separated snapshot times");

  auto* stat = app.add_subcommand("stationary", "stationary-state fixed point");
  double stat_tol = 1e-10;
  std::string stat_grid;
  add_common(stat, common);
  stat->add_option("--tol", stat_tol, "outer fixed-point tolerance");
  stat->add_option("--grid", stat_grid, "lift grid as <n_a>x<n_m>");

  auto* vsf = app.add_subcommand("verify-std-formula", "closed-form depression potential");
  double vsf_x = 0.0;
  add_common(vsf, common, /*needs_out=*/false);
  vsf->add_option("--x", vsf_x, "frozen input x~");

  auto* doe = app.add_subcommand("doeblin-check", "minoration window + empirical check");
  double doe_r = 2.0, doe_x = 0.0;
  int doe_probes = 5;
  std::string doe_grid;
  add_common(doe, common);
  doe->add_option("--r", doe_r, "initial-mass memory bound R");
  doe->add_option("--x", doe_x, "frozen input x~");
  doe->add_option("--probes", doe_probes, "probes per axis");
  doe->add_option("--grid", doe_grid, "cells as <n_a>x<n_m>");

  auto* har = app.add_subcommand("harris-rate", "frozen-semigroup contraction rate");
  double har_x = 0.0, har_tend = 20.0, har_dt = -1.0;
  std::string har_grid;
  add_common(har, common);
  har->add_option("--x", har_x, "frozen input x~");
  har->add_option("--t-end", har_tend, "simulated time");
  har->add_option("--dt", har_dt, "time step (default: 0.9 CFL)");
  har->add_option("--grid", har_grid, "cells as <n_a>x<n_m>");

  auto* swp = app.add_subcommand("stability-sweep", "decay/oscillation classification per epsilon");
  std::string swp_eps = "0,0.05", swp_grid;
  double swp_tend = 60.0, swp_dt = -1.0, swp_tol = 1e-8;
  add_common(swp, common);
  swp->add_option("--epsilons", swp_eps, "comma-separated connection strengths")->required();
  swp->add_option("--t-end", swp_tend, "simulated time");
  swp->add_option("--dt", swp_dt, "time step (default: 0.9 CFL)");
  swp->add_option("--grid", swp_grid, "cells as <n_a>x<n_m>");
  swp->add_option("--tol", swp_tol, "stationary solver tolerance");

  auto* cmp = app.add_subcommand("compare", "particle-vs-PDE potential traces");
  std::string cmp_n = "1000,10000,100000", cmp_grid;
  int cmp_seeds = 3;
  double cmp_tend = 10.0, cmp_dt = 5e-3;
  add_common(cmp, common);
  cmp->add_option("--n", cmp_n, "comma-separated population sizes");
  cmp->add_option("--seeds", cmp_seeds, "seeds per population size");
  cmp->add_option("--t-end", cmp_tend, "simulated time");
  cmp->add_option("--dt", cmp_dt, "particle time step");
  cmp->add_option("--grid", cmp_grid, "cells as <n_a>x<n_m>");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed())
      return cmd_simulate_particles(common, sim_n, sim_tend, sim_dt, sim_stride, sim_raster);
    if (pde->parsed())
      return cmd_solve_pde(common, pde_grid, pde_amax, pde_mmax, pde_tend, pde_dt,
                           pde_frozen_x, frozen_opt->count() > 0, pde_stride, pde_snapshots);
    if (stat->parsed()) return cmd_stationary(common, stat_tol, stat_grid);
    if (vsf->parsed()) return cmd_verify_std_formula(common, vsf_x);
    if (doe->parsed()) return cmd_doeblin_check(common, doe_r, doe_x, doe_grid, doe_probes);
    if (har->parsed()) return cmd_harris_rate(common, har_x, har_tend, har_dt, har_grid);
    if (swp->parsed())
      return cmd_stability_sweep(common, swp_eps, swp_tend, swp_dt, swp_grid, swp_tol);
    if (cmp->parsed()) return cmd_compare(common, cmp_n, cmp_seeds, cmp_tend, cmp_dt, cmp_grid);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
