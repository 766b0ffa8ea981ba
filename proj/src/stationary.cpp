#include "neuropop/stationary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "neuropop/quad.hpp"

namespace neuropop {

namespace {

void require_stationary_assumptions(const ModelSpec& spec) {
  if (!(spec.firing.sigma > 0.0))
    throw std::invalid_argument("stationary machinery requires a positive rate floor sigma");
  if (!(spec.lambda > 0.0))
    throw std::invalid_argument("stationary machinery requires lambda > 0");
}

// Panel length for the survival march; resolves both the firing-rate profile
// and the exp(-(lambda+f) a) decay of the integrands.
double march_panel(const ModelSpec& spec) {
  const double h =
      std::min(hazard_panel_scale(spec), 1.0 / (spec.lambda + spec.firing.f_max));
  return std::max(h, 1e-9);
}

}  // namespace

double BoundaryDensity::total() const {
  double s = 0.0;
  for (const double m : mass) s += m;
  return s;
}

double BoundaryDensity::moment1() const {
  double s = 0.0;
  for (int k = 0; k < cells(); ++k) s += mass[k] * center(k);
  return s;
}

double BoundaryDensity::value_at(double y) const {
  if (y <= edges.front() || y > edges.back()) return 0.0;
  auto it = std::upper_bound(edges.begin(), edges.end(), y);
  int k = static_cast<int>(it - edges.begin()) - 1;
  k = std::min(std::max(k, 0), cells() - 1);
  return value(k);
}

BoundaryDensity BoundaryDensity::mesh(double gamma0, double top, int cells,
                                      double min_offset_frac) {
  if (!(top > gamma0)) throw std::invalid_argument("boundary mesh needs top > gamma(0)");
  if (cells < 8) throw std::invalid_argument("boundary mesh needs at least 8 cells");
  BoundaryDensity u;
  u.edges.resize(static_cast<std::size_t>(cells) + 1);
  u.mass.assign(cells, 0.0);
  const double span = top - gamma0;

  // geometric cells inside a thin layer at gamma(0) (where the density may
  // blow up like 1/gamma^-1), uniform cells above it
  const double layer_frac = 0.04;
  const int k_layer = std::max(4, cells / 4);
  u.edges[0] = gamma0;
  for (int k = 1; k <= k_layer; ++k) {
    const double e = static_cast<double>(k_layer - k) / static_cast<double>(k_layer - 1);
    u.edges[k] = gamma0 + layer_frac * span * std::pow(min_offset_frac, e);
  }
  const int k_rest = cells - k_layer;
  for (int k = 1; k <= k_rest; ++k)
    u.edges[k_layer + k] =
        gamma0 + span * (layer_frac + (1.0 - layer_frac) * k / static_cast<double>(k_rest));
  u.edges.back() = top;
  return u;
}

IsiQuad isi_integrals(const ModelSpec& spec, double y, double x_tilde) {
  require_stationary_assumptions(spec);
  const double dabs = spec.firing.delta_abs;
  const double lambda = spec.lambda;
  IsiQuad q;
  q.isi_mean = dabs;  // survival is 1 while f = 0

  const GlRule& rule = gl_rule(8);
  const auto& cum = gl_cumulative(8);
  const int n = 8;
  const double h = march_panel(spec);
  const double sigma = spec.firing.sigma;
  const double a_cap = dabs + 200.0 / sigma + 10.0 / lambda;

  double S = 1.0, a = dabs;
  std::array<double, 8> fv;
  while (S > 1e-18 && a < a_cap) {
    for (int i = 0; i < n; ++i) {
      const double ai = a + h * rule.nodes[i];
      fv[i] = spec.firing(ai, y * std::exp(-lambda * ai), x_tilde);
    }
    double d_isi = 0.0, d_lap = 0.0, h_full = 0.0;
    for (int i = 0; i < n; ++i) {
      double hi = 0.0;
      for (int k = 0; k < n; ++k) hi += cum[static_cast<std::size_t>(i) * n + k] * fv[k];
      const double si = S * std::exp(-h * hi);
      const double ai = a + h * rule.nodes[i];
      d_isi += rule.weights[i] * si;
      d_lap += rule.weights[i] * std::exp(-lambda * ai) * fv[i] * si;
      h_full += rule.weights[i] * fv[i];
    }
    q.isi_mean += h * d_isi;
    q.laplace += h * d_lap;
    S *= std::exp(-h * h_full);
    a += h;
  }
  // exponential tail bounds from f >= sigma beyond delta_abs
  q.isi_mean += S / sigma;
  q.laplace += S * std::exp(-lambda * a) * spec.firing.f_max / (sigma + lambda);
  return q;
}

Phi1Operator build_phi1(const ModelSpec& spec, const std::vector<double>& edges, double x_tilde,
                        const StationaryOptions& opt) {
  require_stationary_assumptions(spec);
  const int K = static_cast<int>(edges.size()) - 1;
  Phi1Operator op;
  op.edges = edges;
  op.matrix.assign(static_cast<std::size_t>(K) * K, 0.0);
  op.mass_above.assign(K, 0.0);
  op.isi_mean.assign(K, 0.0);
  op.kappa_flux.assign(K, 0.0);

  const GlRule& sub = gl_rule(opt.sub_nodes);
  const bool dep_kernel = spec.kernel.kind == KernelKind::exponential_depression;
  const double lambda = spec.lambda;

#pragma omp parallel for schedule(dynamic)
  for (int k = 0; k < K; ++k) {
    const double w_k = edges[k + 1] - edges[k];
    for (std::size_t q = 0; q < sub.nodes.size(); ++q) {
      const double y = edges[k] + w_k * sub.nodes[q];
      const double frac = sub.weights[q];

      const IsiQuad iq = isi_integrals(spec, y, x_tilde);
      op.isi_mean[k] += frac * iq.isi_mean;
      op.kappa_flux[k] += frac * (dep_kernel ? 1.0 - y * iq.laplace : 1.0);

      // push the spike-age distribution onto the output cells
      const double gy = spec.jump.gamma(y);
      TrajectoryHazard haz(spec, y, x_tilde);
      double s_prev = 1.0;
      int e = K;
      if (edges[K] < gy) {
        const double a_top = std::max(0.0, std::log(y / spec.jump.gamma_inv(edges[K])) / lambda);
        s_prev = std::exp(-haz.advance(a_top));
        op.mass_above[k] += frac * (1.0 - s_prev);
        e = K - 1;
      } else {
        while (e >= 1 && edges[e] >= gy) --e;
      }
      for (; e >= 1; --e) {
        const double ginv = spec.jump.gamma_inv(edges[e]);
        double a_e = std::log(y / ginv) / lambda;
        a_e = std::max(a_e, haz.age());
        const double s_e = std::exp(-haz.advance(a_e));
        op.matrix[static_cast<std::size_t>(k) * K + e] += frac * (s_prev - s_e);
        s_prev = s_e;
      }
      // infinite-age tail lands in the boundary-layer cell at gamma(0)
      op.matrix[static_cast<std::size_t>(k) * K + 0] += frac * s_prev;
    }
  }
  return op;
}

double Phi1Operator::apply(const std::vector<double>& in, std::vector<double>& out) const {
  const int K = cells();
  out.assign(K, 0.0);
  double above = 0.0;
  for (int k = 0; k < K; ++k) {
    const double m = in[k];
    if (m == 0.0) continue;
    const double* row = matrix.data() + static_cast<std::size_t>(k) * K;
    for (int j = 0; j < K; ++j) out[j] += m * row[j];
    above += m * mass_above[k];
  }
  return above;
}

Phi1Result phi1_apply(const ModelSpec& spec, const BoundaryDensity& u, double x_tilde,
                      const StationaryOptions& opt) {
  Phi1Operator op = build_phi1(spec, u.edges, x_tilde, opt);
  Phi1Result res;
  res.u.edges = u.edges;
  res.mass_above = op.apply(u.mass, res.u.mass);
  for (const double v : res.u.mass)
    if (!std::isfinite(v)) throw std::runtime_error("boundary operator produced non-finite mass");
  return res;
}

PowerIterationResult stationary_boundary(const ModelSpec& spec, const Phi1Operator& op,
                                         const BoundaryDensity* warm,
                                         const StationaryOptions& opt) {
  (void)spec;
  const int K = op.cells();
  PowerIterationResult res;
  res.u.edges = op.edges;
  if (warm && warm->cells() == K && warm->total() > 0.0) {
    res.u.mass = warm->mass;
  } else {
    res.u.mass.assign(K, 0.0);
    // point-mass surrogate well inside the support
    const double target = op.edges.front() + (op.edges.back() - op.edges.front()) / 3.0;
    int k0 = 0;
    while (k0 + 1 < K && op.edges[k0 + 1] < target) ++k0;
    res.u.mass[k0] = 1.0;
  }
  {
    const double t = res.u.total();
    for (double& m : res.u.mass) m /= t;
  }

  std::vector<double> next;
  for (int it = 0; it < opt.inner_max; ++it) {
    op.apply(res.u.mass, next);
    double total = 0.0;
    for (const double v : next) total += v;
    if (!(total > 0.0)) throw std::runtime_error("boundary operator lost all mass");
    double resid = 0.0;
    for (int k = 0; k < K; ++k) {
      next[k] /= total;
      resid += std::abs(next[k] - res.u.mass[k]);
    }
    res.u.mass.swap(next);
    res.iterations = it + 1;
    res.residual = resid;
    if (resid < opt.inner_tol) {
      res.converged = true;
      break;
    }
  }
  return res;
}

LiftResult lift_to_density(const ModelSpec& spec, const BoundaryDensity& u, double x_tilde,
                           const GridSpec& grid) {
  require_stationary_assumptions(spec);
  LiftResult res;
  res.rho = zero_density(grid);
  const double lambda = spec.lambda;
  const double log_top = std::log(u.top());

  // cumulative boundary mass, for exact within-cell integration of u
  std::vector<double> cum(u.edges.size(), 0.0);
  for (int k = 0; k < u.cells(); ++k) cum[k + 1] = cum[k] + u.mass[k];
  auto cum_at = [&](double y) {
    if (y <= u.edges.front()) return 0.0;
    if (y >= u.top()) return cum.back();
    auto it = std::upper_bound(u.edges.begin(), u.edges.end(), y);
    const int k = std::min<int>(static_cast<int>(it - u.edges.begin()) - 1, u.cells() - 1);
    return cum[k] + u.value(k) * (y - u.edges[k]);
  };

  // m-independent firing: the hazard integral over [0,a] is shared by all m
  std::vector<double> shared_haz;
  if (!spec.firing.depends_on_m()) {
    shared_haz.resize(grid.n_a);
    TrajectoryHazard haz(spec, 1.0, x_tilde);
    for (int i = 0; i < grid.n_a; ++i) shared_haz[i] = haz.advance(grid.a_center(i));
  }

#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < grid.n_a; ++i) {
    const double a = grid.a_center(i);
    auto y_of = [&](double m) {  // e^{lambda a} m, clamped in log space
      if (m <= 0.0) return 0.0;
      const double ly = lambda * a + std::log(m);
      return ly >= log_top ? u.top() : std::exp(ly);
    };
    for (int j = 0; j < grid.n_m; ++j) {
      const double m = grid.m_center(j);
      if (m <= 0.0) continue;
      // average of u(e^{lambda a} m) over the cell, exactly
      const double du = cum_at(y_of(grid.m_hi(j))) - cum_at(y_of(grid.m_lo(j)));
      if (du <= 0.0) continue;
      const double haz = spec.firing.depends_on_m()
                             ? hazard_integral(spec, y_of(m), x_tilde, 0.0, a)
                             : shared_haz[i];
      res.rho.at(i, j) = du / grid.dm(j) * std::exp(-haz);
    }
  }
  res.raw_mass = res.rho.mass();
  if (!(res.raw_mass > 0.0)) throw std::runtime_error("characteristics lift produced no mass");
  for (double& v : res.rho.values) v /= res.raw_mass;
  return res;
}

namespace {

struct UpsilonInternal {
  double value = 0.0;
  PowerIterationResult inner;
  Phi1Operator op;
};

UpsilonInternal upsilon_with_operator(const ModelSpec& spec, double x,
                                      const StationaryOptions& opt,
                                      const BoundaryDensity* warm) {
  UpsilonInternal r;
  const double x_tilde = spec.epsilon * x;
  std::vector<double> edges;
  if (warm && !warm->edges.empty()) {
    edges = warm->edges;
  } else {
    edges = BoundaryDensity::mesh(spec.jump.gamma0(), spec.m_max, opt.boundary_cells,
                                  opt.min_offset_frac)
                .edges;
  }
  r.op = build_phi1(spec, edges, x_tilde, opt);
  r.inner = stationary_boundary(spec, r.op, warm, opt);
  double num = 0.0, den = 0.0;
  for (int k = 0; k < r.op.cells(); ++k) {
    num += r.op.kappa_flux[k] * r.inner.u.mass[k];
    den += r.op.isi_mean[k] * r.inner.u.mass[k];
  }
  if (!(den > 0.0)) throw std::runtime_error("degenerate mean inter-spike interval");
  r.value = spec.kernel.hbar_sup() * num / den;
  return r;
}

}  // namespace

UpsilonEval eval_upsilon(const ModelSpec& spec, double x, const StationaryOptions& opt,
                         const BoundaryDensity* warm) {
  UpsilonInternal r = upsilon_with_operator(spec, x, opt, warm);
  if (!r.inner.converged)
    throw std::runtime_error("inner boundary fixed point did not converge (residual " +
                             std::to_string(r.inner.residual) + ")");
  UpsilonEval ev;
  ev.value = r.value;
  ev.u = std::move(r.inner.u);
  ev.inner_iterations = r.inner.iterations;
  ev.inner_residual = r.inner.residual;
  return ev;
}

double upsilon(const ModelSpec& spec, double x, const StationaryOptions& opt) {
  return eval_upsilon(spec, x, opt).value;
}

bool StationaryResult::all_checks_passed() const {
  for (const auto& c : checks)
    if (!c.skipped && !c.passed) return false;
  return true;
}

namespace {

void run_apriori_checks(const ModelSpec& spec, const Phi1Operator& op, const BoundaryDensity& u,
                        double upsilon_value, int outer_it, std::vector<CheckOutcome>& out) {
  const int K = op.cells();
  const double total = u.total();
  std::vector<double> next;
  const double above = op.apply(u.mass, next);
  double out_total = 0.0;
  for (const double v : next) out_total += v;
  const std::string tag = " (outer " + std::to_string(outer_it) + ")";

  {
    CheckOutcome c;
    c.name = "boundary_mass_identity" + tag;
    c.lhs = out_total + above;
    c.rhs = total;
    c.passed = std::abs(c.lhs - c.rhs) <= 1e-8 * total && above <= 1e-8 * total;
    c.note = "mass above mesh top = " + std::to_string(above);
    out.push_back(c);
  }
  {
    CheckOutcome c;
    c.name = "pointwise_density_bound" + tag;
    c.passed = true;
    double worst = 0.0;
    for (int k = 1; k < K; ++k) {
      const double width = op.edges[k + 1] - op.edges[k];
      const double val = next[k] / width;
      const double ginv = spec.jump.gamma_inv(op.edges[k]);
      if (!(ginv > 0.0)) continue;
      const double bound = spec.firing.f_max * spec.jump.gamma_inv_prime(op.edges[k]) /
                           (spec.lambda * ginv) * total;
      if (bound > 0.0) worst = std::max(worst, val / bound);
      if (val > bound * (1.0 + 1e-8)) c.passed = false;
    }
    c.lhs = worst;
    c.rhs = 1.0;
    c.note = "bound carries the |(gamma^-1)'(m)| factor from the change of variables "
             "(equal to 1 only when gamma' = 1; dropping it is wrong for gamma' < 1)";
    out.push_back(c);
  }
  {
    CheckOutcome c;
    c.name = "first_moment_bound" + tag;
    const double theta = 1.0 - (1.0 - std::exp(-spec.lambda)) * std::exp(-spec.firing.f_max);
    double m1_in = u.moment1(), m1_out = 0.0;
    for (int k = 0; k < K; ++k) m1_out += next[k] * 0.5 * (op.edges[k] + op.edges[k + 1]);
    c.lhs = m1_out;
    c.rhs = std::max(m1_in, spec.jump.gamma0() / (1.0 - theta) * total);
    c.passed = c.lhs <= c.rhs * (1.0 + 1e-6) + 1e-12;
    c.note = "theta at epsilon=1 = " + std::to_string(theta) +
             ", mass above excluded from the moment";
    out.push_back(c);
  }
  {
    CheckOutcome c;
    c.name = "weighted_moment_bound" + tag;
    const double min_f = spec.firing.min_rate();
    if (min_f <= 0.0) {
      c.skipped = true;
      c.note = "min f = 0 (delta_abs > 0); the bound degenerates";
    } else {
      const double beta = min_f / (2.0 * spec.lambda);
      double lhs = 0.0;
      for (int k = 0; k < K; ++k) {
        const double ginv = spec.jump.gamma_inv(0.5 * (op.edges[k] + op.edges[k + 1]));
        if (ginv > 0.0) lhs += next[k] / std::pow(ginv, beta);
      }
      const double g0 = spec.jump.gamma0();
      const double rhs = g0 > 0.0
                             ? spec.firing.f_max / (spec.lambda * std::pow(g0, beta)) /
                                   (min_f / spec.lambda - beta) * total
                             : std::numeric_limits<double>::infinity();
      c.lhs = lhs;
      c.rhs = rhs;
      c.passed = lhs <= rhs * (1.0 + 1e-6);
      c.note = "uses division by (min f/lambda - beta); the multiplicative variant of "
               "this bound is inconsistent with its own derivation";
    }
    out.push_back(c);
  }
  {
    CheckOutcome c;
    c.name = "output_potential_bound" + tag;
    c.lhs = upsilon_value;
    c.rhs = spec.kernel.hbar_sup() * spec.firing.f_max;
    c.passed = c.lhs <= c.rhs * (1.0 + 1e-12);
    out.push_back(c);
  }
}

}  // namespace

StationaryResult solve_stationary(const ModelSpec& spec, double tol, const GridSpec& grid,
                                  const StationaryOptions& opt_in) {
  StationaryOptions opt = opt_in;
  opt.outer_tol = tol;
  StationaryResult res;
  const double x_bound = spec.kernel.hbar_sup() * spec.firing.f_max;

  double x = 0.0;
  double omega = opt.omega;
  double prev_resid = std::numeric_limits<double>::infinity();
  const BoundaryDensity* warm = nullptr;
  const std::vector<double> edges =
      BoundaryDensity::mesh(spec.jump.gamma0(), spec.m_max, opt.boundary_cells,
                            opt.min_offset_frac)
          .edges;
  Phi1Operator op;
  double cached_x_tilde = std::numeric_limits<double>::quiet_NaN();

  for (int it = 1; it <= opt.outer_max; ++it) {
    const double x_tilde = spec.epsilon * x;
    if (x_tilde != cached_x_tilde) {
      op = build_phi1(spec, edges, x_tilde, opt);
      cached_x_tilde = x_tilde;
    }
    PowerIterationResult pi = stationary_boundary(spec, op, warm, opt);
    res.u = std::move(pi.u);
    warm = &res.u;
    double num = 0.0, den = 0.0;
    for (int k = 0; k < op.cells(); ++k) {
      num += op.kappa_flux[k] * res.u.mass[k];
      den += op.isi_mean[k] * res.u.mass[k];
    }
    if (!(den > 0.0)) throw std::runtime_error("degenerate mean inter-spike interval");
    const double value = spec.kernel.hbar_sup() * num / den;

    res.iterations = it;
    res.phi_residuals.push_back(pi.residual);
    const double resid = std::abs(value - x);
    res.upsilon_residuals.push_back(resid);
    run_apriori_checks(spec, op, res.u, value, it, res.checks);
    if (!pi.converged) {
      res.message = "inner fixed point stalled at residual " + std::to_string(pi.residual);
      break;
    }
    if (resid <= tol) {
      x = value;
      res.converged = true;
      break;
    }
    omega = resid > prev_resid ? std::max(0.5 * omega, 1e-3) : std::min(1.3 * omega, 1.0);
    prev_resid = resid;
    x = spec.epsilon == 0.0 ? value : (1.0 - omega) * x + omega * value;
    x = std::min(std::max(x, 0.0), x_bound);
  }
  res.x_inf = x;
  if (!res.converged && res.message.empty())
    res.message = "outer iteration hit the limit; last residual " +
                  std::to_string(res.upsilon_residuals.back());

  LiftResult lift = lift_to_density(spec, res.u, spec.epsilon * res.x_inf, grid);
  res.rho_inf = std::move(lift.rho);
  res.lift_raw_mass = lift.raw_mass;
  return res;
}

StdFormula std_closed_form(const ModelSpec& spec, double x_tilde) {
  if (spec.jump.kind != JumpKind::depression)
    throw std::invalid_argument("closed form requires the depression jump map");
  if (spec.firing.depends_on_m())
    throw std::invalid_argument("closed form requires an m-independent firing rate");
  const IsiQuad q = isi_integrals(spec, 0.5, x_tilde);
  StdFormula f;
  f.isi_mean = q.isi_mean;
  f.laplace = q.laplace;
  const double upsilon = spec.jump.upsilon;
  f.x_value = spec.kernel.hbar_sup() * (1.0 - f.laplace) /
              ((1.0 - upsilon * f.laplace) * f.isi_mean);
  return f;
}

double std_feedback_root(const ModelSpec& spec) {
  double lo = 0.0, hi = spec.kernel.hbar_sup() * spec.firing.f_max;
  auto g = [&](double x) { return std_closed_form(spec, spec.epsilon * x).x_value - x; };
  double glo = g(lo);
  if (glo < 0.0) return 0.0;  // X(0) <= 0 cannot happen with sigma > 0
  if (g(hi) > 0.0) return hi;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) > 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace neuropop
