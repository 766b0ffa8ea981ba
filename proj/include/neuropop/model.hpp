#pragma once
// Model specification for the age- and leaky-memory-structured population:
// firing rate f(a,m,x), jump map gamma, interaction kernel h, and the
// derived constants (Lipschitz bound, jump-size bound, Lyapunov pair).

#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace neuropop {

enum class FiringKind {
  constant,          // f = f_max for a >= delta_abs, 0 below
  sigmoid_adaptive,  // f = fhat(eta(a) - m + x), adaptive SRM0
  sigmoid_age,       // f = fhat(eta(a) + x), m-independent (time-elapsed / depression)
  tabulated          // fhat piecewise linear in u = eta(a) - m + x
};

struct FiringRate {
  FiringKind kind = FiringKind::constant;
  double f_max = 1.0;          // upper bound of f
  double beta = 1.0;           // sigmoid slope
  double sigma = 1.0;          // floor of f for a >= delta_abs
  double delta_abs = 0.0;      // absolute refractory period
  double eta_amplitude = 0.0;  // eta(a) = -eta_amplitude * exp(-a/eta_tau)
  double eta_tau = 1.0;
  std::vector<std::pair<double, double>> table;  // (u, fhat(u)) for tabulated

  double eta(double a) const {
    if (eta_amplitude == 0.0) return 0.0;
    return -eta_amplitude * std::exp(-a / eta_tau);
  }

  // fhat on the smooth branch (a >= delta_abs)
  double fhat(double u) const;

  double operator()(double a, double m, double x) const {
    if (a < delta_abs) return 0.0;
    switch (kind) {
      case FiringKind::constant: return f_max;
      case FiringKind::sigmoid_adaptive: return fhat(eta(a) - m + x);
      case FiringKind::sigmoid_age: return fhat(eta(a) + x);
      case FiringKind::tabulated: return fhat(eta(a) - m + x);
    }
    return 0.0;
  }

  bool depends_on_m() const {
    return kind == FiringKind::sigmoid_adaptive || kind == FiringKind::tabulated;
  }

  // Lipschitz constant of the smooth branch w.r.t. |da|+|dm|+|dx|
  double lipschitz() const;
  // infimum of f over the whole domain (0 when delta_abs > 0, else sigma)
  double min_rate() const { return delta_abs > 0.0 ? 0.0 : sigma; }
};

enum class JumpKind { additive, depression, custom };

struct JumpMap {
  JumpKind kind = JumpKind::additive;
  double gamma_hat = 0.5;  // additive: gamma(m) = m + gamma_hat
  double upsilon = 0.5;    // depression: gamma(m) = 1 - upsilon + upsilon*m
  std::vector<std::pair<double, double>> table;  // custom: (m, gamma(m)), m0 = 0

  double gamma(double m) const;
  double gamma_inv(double g) const;
  double gamma_inv_prime(double g) const;  // |(gamma^-1)'|
  double gamma0() const { return gamma(0.0); }
  double gamma_sup() const;  // sup of Gamma(m) = gamma(m) - m over the domain
  double c_gamma() const;    // lower bound of gamma'
};

enum class KernelKind { exponential, exponential_depression };

struct InteractionKernel {
  KernelKind kind = KernelKind::exponential;
  double amplitude = 1.0;  // C_h
  double decay = 1.0;      // h(t) = C_h exp(-decay * t)

  // per-spike weight: 1, or (1-m) for depressive synapses
  double weight(double m) const {
    return kind == KernelKind::exponential_depression ? 1.0 - m : 1.0;
  }
  double hbar(double m) const { return amplitude / decay * weight(m); }
  double hbar_sup() const { return amplitude / decay; }
};

struct ModelSpec {
  double lambda = 1.0;   // memory decay rate
  double epsilon = 0.0;  // connection strength
  FiringRate firing;
  JumpMap jump;
  InteractionKernel kernel;
  double m_min = 0.0;
  double m_max = 1.0;  // grid truncation bound; hard domain bound (=G) for depression

  bool m_domain_is_compact() const { return jump.kind == JumpKind::depression; }
  void check_state(double a, double m) const;
};

// f(a, m, x); x is the already-scaled input (the caller multiplies by epsilon)
double evaluate_rate(const ModelSpec& spec, double a, double m, double x);

// post-spike memory gamma(m)
double apply_jump(const ModelSpec& spec, double m);

struct LyapunovConstants {
  double alpha;  // = lambda
  double b;      // = lambda + |Gamma|_inf * |f|_inf
};
LyapunovConstants lyapunov_constants(const ModelSpec& spec);

// Smallest m_max such that the stationary mass above it, bounded through the
// exponential-weight Lyapunov drift, is below tail_tol. Additive/custom maps
// only (depression is compact with m_max = 1).
double suggested_m_max(const ModelSpec& spec, double tail_tol);

// ---- presets used by tests and the config defaults ----
ModelSpec make_constant_model(double rate, double lambda, double gamma_hat,
                              double c_h = 1.0, double kernel_decay = 1.0);
ModelSpec make_std_model(double rate, double lambda, double upsilon,
                         double c_h = 1.0, double kernel_decay = 1.0);
ModelSpec make_asrm0_model();       // default adaptive SRM0 preset
ModelSpec make_time_elapsed_model();  // 1D degenerate preset (Gamma = 0)

}  // namespace neuropop
