#pragma once
// Theorem-level numerical checks: the minoration window of the two-jump
// construction, empirical kernel lower bounds, exponential-rate fits for the
// frozen semigroup, and the weak-coupling stability experiment.

#include <string>
#include <vector>

#include "neuropop/grid.hpp"
#include "neuropop/model.hpp"
#include "neuropop/stationary.hpp"

namespace neuropop {

struct DoeblinWindow {
  double R = 0.0;
  double T = 0.0;
  double a_bar = 0.0;
  double m_lower = 0.0;
  double m_upper = 0.0;
  double nu_constant = 0.0;
  bool feasible = false;
  std::string note;
};

// m_lower / m_upper of the minoration rectangle for given (a_bar, T)
double doeblin_m_lower(const ModelSpec& spec, double R, double a_bar, double T);
double doeblin_m_upper(const ModelSpec& spec, double a_bar);

// Minimal time between the last two jumps of a trajectory landing at (a, m)
double a_star(const ModelSpec& spec, double a, double m);

// The second-last-jump memory map used in the minoration proof
double psi_map(const ModelSpec& spec, double T, double a, double m, double a_prime);

// Search (a_bar, T) on a coarse lattice for the minimal T with
// m_lower <= 0.99 * m_upper, and fill in the minoration constant.
DoeblinWindow doeblin_window(const ModelSpec& spec, double R);

struct DoeblinProbeReport {
  double a0 = 0.0, m0 = 0.0;
  double min_density = 0.0;
  double ratio = 0.0;  // min density / nu_constant
  bool excluded = false;
};

struct DoeblinCheckOptions {
  int probes_per_axis = 5;
  double x_tilde = 0.0;
  double probe_a_max = 0.0;  // 0 => delta_abs + 10/sigma
  int n_a = 800;
  int n_m = 200;
  double dt = 0.0;  // 0 => 0.9 * CFL
  std::vector<std::pair<double, double>> extra_probes;  // appended to the lattice
};

struct DoeblinReport {
  DoeblinWindow window;
  std::vector<DoeblinProbeReport> probes;
  double min_ratio = 0.0;  // over included probes
  bool all_positive = false;
  std::string note;
};

DoeblinReport doeblin_empirical(const ModelSpec& spec, const DoeblinWindow& window,
                                const DoeblinCheckOptions& opt = {});

struct RateFit {
  double rate = 0.0;  // decay rate (positive = decaying)
  double prefactor = 0.0;
  double r_squared = 0.0;
  double window_start = 0.0, window_end = 0.0;
  bool degenerate = false;
};

// Log-linear regression of d(t) on [skip_fraction*t_max, first t with d < 1e-12].
RateFit fit_log_decay(const std::vector<double>& times, const std::vector<double>& values,
                      double skip_fraction = 0.2);

RateFit harris_rate(const ModelSpec& spec, double x_tilde, const DensityGrid& u0,
                    const DensityGrid& v0, double t_end, double dt,
                    double record_stride = 0.0, double skip_fraction = 0.2);

struct StabilityReport {
  double epsilon = 0.0;
  std::string classification;  // decaying | oscillating | diverged | unresolved
  RateFit fit;
  double x_pp_last = 0.0;    // x_t peak-to-peak over the last third
  double x_pp_global = 0.0;  // over the whole run
  double x_inf = 0.0;
  bool stationary_converged = false;
};

std::vector<StabilityReport> weak_coupling_experiment(const ModelSpec& base,
                                                      const std::vector<double>& epsilons,
                                                      const DensityGrid& u0, double t_end,
                                                      double dt,
                                                      const StationaryOptions& sopt = {});

}  // namespace neuropop
