#pragma once
// Stationary-state machinery: the boundary-density operator (fixed points of
// which are stationary boundary densities), the characteristics lift to a
// full (a,m) density, the output-potential map, and the closed-form
// depression potential.

#include <string>
#include <vector>

#include "neuropop/grid.hpp"
#include "neuropop/model.hpp"

namespace neuropop {

// Density in m on (gamma(0), top], stored as cell masses over a mesh whose
// offsets from gamma(0) are geometric (the density may blow up like
// 1/gamma^{-1}(m) at the lower end).
struct BoundaryDensity {
  std::vector<double> edges;  // cells()+1 edges, edges[0] = gamma(0)
  std::vector<double> mass;

  int cells() const { return static_cast<int>(mass.size()); }
  double width(int k) const { return edges[k + 1] - edges[k]; }
  double center(int k) const { return 0.5 * (edges[k] + edges[k + 1]); }
  double value(int k) const { return mass[k] / width(k); }
  double total() const;
  double moment1() const;
  double top() const { return edges.back(); }
  double value_at(double y) const;  // piecewise constant, 0 outside support

  static BoundaryDensity mesh(double gamma0, double top, int cells,
                              double min_offset_frac = 1e-10);
};

struct StationaryOptions {
  int boundary_cells = 480;
  double min_offset_frac = 1e-10;
  int sub_nodes = 4;          // quadrature nodes per source cell
  double inner_tol = 1e-12;   // L1 residual of the power iteration
  int inner_max = 20000;
  double outer_tol = 1e-10;   // |Upsilon(x) - x|
  int outer_max = 100;
  double omega = 0.5;         // outer damping
};

// Precomputed linear action of the boundary operator on cell masses for a
// fixed scaled input x_tilde, together with the per-cell inter-spike-interval
// and kernel-flux quadratures reused by the output-potential map.
struct Phi1Operator {
  std::vector<double> edges;
  std::vector<double> matrix;      // cells x cells, column-major over input cells
  std::vector<double> mass_above;  // fraction mapped above the mesh top, per input cell
  std::vector<double> isi_mean;    // expected inter-spike age per unit mass, per input cell
  std::vector<double> kappa_flux;  // expected kernel weight per spike, per input cell

  int cells() const { return static_cast<int>(mass_above.size()); }
  // Apply to cell masses; returns the mass mapped above the top edge.
  double apply(const std::vector<double>& in, std::vector<double>& out) const;
};

Phi1Operator build_phi1(const ModelSpec& spec, const std::vector<double>& edges, double x_tilde,
                        const StationaryOptions& opt = {});

struct Phi1Result {
  BoundaryDensity u;
  double mass_above = 0.0;
};
Phi1Result phi1_apply(const ModelSpec& spec, const BoundaryDensity& u, double x_tilde,
                      const StationaryOptions& opt = {});

struct PowerIterationResult {
  BoundaryDensity u;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};
PowerIterationResult stationary_boundary(const ModelSpec& spec, const Phi1Operator& op,
                                         const BoundaryDensity* warm,
                                         const StationaryOptions& opt);

struct LiftResult {
  DensityGrid rho;
  double raw_mass = 0.0;  // mass before renormalization
};
LiftResult lift_to_density(const ModelSpec& spec, const BoundaryDensity& u, double x_tilde,
                           const GridSpec& grid);

// Expected inter-spike quantities along the trajectory starting at memory y:
// isi_mean = int_0^inf S(a) da,  laplace = int_0^inf e^{-lambda a} f S da,
// with S(a) = exp(-int_0^a f(s, y e^{-lambda s}, x) ds). Tail bounds beyond
// the integration cap are added, not dropped.
struct IsiQuad {
  double isi_mean = 0.0;
  double laplace = 0.0;
};
IsiQuad isi_integrals(const ModelSpec& spec, double y, double x_tilde);

struct UpsilonEval {
  double value = 0.0;
  BoundaryDensity u;
  int inner_iterations = 0;
  double inner_residual = 0.0;
};
UpsilonEval eval_upsilon(const ModelSpec& spec, double x, const StationaryOptions& opt = {},
                         const BoundaryDensity* warm = nullptr);
double upsilon(const ModelSpec& spec, double x, const StationaryOptions& opt = {});

struct CheckOutcome {
  std::string name;
  bool passed = false;
  bool skipped = false;
  double lhs = 0.0;
  double rhs = 0.0;
  std::string note;
};

struct StationaryResult {
  BoundaryDensity u;
  DensityGrid rho_inf;
  double x_inf = 0.0;
  double lift_raw_mass = 0.0;
  int iterations = 0;  // outer iterations
  std::vector<double> phi_residuals;
  std::vector<double> upsilon_residuals;
  std::vector<CheckOutcome> checks;
  bool converged = false;
  std::string message;

  bool all_checks_passed() const;
};

StationaryResult solve_stationary(const ModelSpec& spec, double tol, const GridSpec& grid,
                                  const StationaryOptions& opt = {});

// Closed-form depression potential X(x_tilde) for m-independent firing rates.
struct StdFormula {
  double isi_mean = 0.0;   // I
  double laplace = 0.0;    // P(lambda)
  double x_value = 0.0;    // X
};
StdFormula std_closed_form(const ModelSpec& spec, double x_tilde);

// Root of x = X(epsilon x) by bisection (depression models).
double std_feedback_root(const ModelSpec& spec);

}  // namespace neuropop
