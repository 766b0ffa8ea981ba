#pragma once
// Conservative finite-volume solver for the nonlocal transport equation:
// upwind transport in a, donor-cell transport in m with speed -lambda*m,
// exponential sink, and mass-preserving re-injection at a = 0 through the
// jump map.

#include <functional>
#include <utility>
#include <vector>

#include "neuropop/grid.hpp"
#include "neuropop/model.hpp"
#include "neuropop/trace.hpp"

namespace neuropop {

struct PdeStepOutputs {
  double rate_integral = 0.0;   // N(t) = int f rho, evaluated before the sink
  double removed_mass = 0.0;    // taken by the sink this step
  double injected_mass = 0.0;   // re-entered at a = 0
  double leaked_mass = 0.0;     // left the truncated window this step
  double kappa_removed = 0.0;   // sink mass weighted by the kernel factor kappa(m)
  std::vector<double> boundary_flux;  // injected density profile over m, per unit time
};

// Scratch buffers plus the rate field cache; reusable across steps.
struct PdeWorkspace {
  std::vector<double> rate, sink, row, col_removed;
  std::vector<double> out_coef;  // m-advection outflow coefficients
  double cached_x = 0.0, cached_dt = -1.0;
  bool cache_valid = false;
};

// One operator-split step; x is the already-scaled potential entering f.
// Advances rho in place and accumulates rho.leaked_mass.
PdeStepOutputs pde_step_inplace(const ModelSpec& spec, DensityGrid& rho, double x, double dt,
                                PdeWorkspace& ws);

// Value-semantics wrapper around pde_step_inplace.
struct PdeStepResult {
  DensityGrid rho;
  std::vector<double> boundary_flux;
  double rate_integral;
};
PdeStepResult pde_step(const ModelSpec& spec, const DensityGrid& rho, double x, double dt);

struct PdeRunOptions {
  double t_end = 10.0;
  double dt = 1e-2;
  double record_stride = 0.1;
  bool frozen = false;
  double x_tilde = 0.0;  // frozen runs evaluate f at x_tilde directly
  double x0 = 0.0;       // initial potential for nonlinear runs
  // called at every record point (including t = 0)
  std::function<void(double t, const DensityGrid& rho, double x)> observer;
};

std::pair<Trace, DensityGrid> run_pde(const ModelSpec& spec, DensityGrid rho,
                                      const PdeRunOptions& opt);

std::pair<Trace, DensityGrid> run_nonlinear(const ModelSpec& spec, const DensityGrid& u0,
                                            double t_end, double dt,
                                            double record_stride = 0.1);

std::pair<Trace, DensityGrid> run_frozen(const ModelSpec& spec, double x_tilde,
                                         const DensityGrid& u0, double t_end, double dt,
                                         double record_stride = 0.1);

// Largest stable step for the split scheme on this grid.
double cfl_limit(const ModelSpec& spec, const GridSpec& grid);

}  // namespace neuropop
