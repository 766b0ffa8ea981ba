#include "neuropop/model.hpp"

#include <algorithm>
#include <limits>

namespace neuropop {

double FiringRate::fhat(double u) const {
  switch (kind) {
    case FiringKind::constant:
      return f_max;
    case FiringKind::sigmoid_adaptive:
    case FiringKind::sigmoid_age:
      return sigma + (f_max - sigma) / (1.0 + std::exp(-beta * u));
    case FiringKind::tabulated: {
      if (table.empty()) throw std::logic_error("tabulated firing rate without table");
      if (u <= table.front().first) return table.front().second;
      if (u >= table.back().first) return table.back().second;
      auto it = std::upper_bound(table.begin(), table.end(), u,
                                 [](double v, const auto& p) { return v < p.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double t = (u - lo.first) / (hi.first - lo.first);
      return lo.second + t * (hi.second - lo.second);
    }
  }
  return 0.0;
}

double FiringRate::lipschitz() const {
  double slope_u = 0.0;  // sup |d fhat / du|
  switch (kind) {
    case FiringKind::constant:
      return 0.0;
    case FiringKind::sigmoid_adaptive:
    case FiringKind::sigmoid_age:
      slope_u = (f_max - sigma) * beta / 4.0;
      break;
    case FiringKind::tabulated: {
      for (std::size_t i = 1; i < table.size(); ++i) {
        const double du = table[i].first - table[i - 1].first;
        slope_u = std::max(slope_u, std::abs(table[i].second - table[i - 1].second) / du);
      }
      break;
    }
  }
  const double eta_slope = eta_tau > 0.0 ? eta_amplitude / eta_tau : 0.0;
  return slope_u * std::max(1.0, eta_slope);  // covers d/da, d/dm and d/dx
}

double JumpMap::gamma(double m) const {
  switch (kind) {
    case JumpKind::additive: return m + gamma_hat;
    case JumpKind::depression: return 1.0 - upsilon + upsilon * m;
    case JumpKind::custom: {
      if (table.empty()) throw std::logic_error("custom jump map without table");
      if (m <= table.front().first)
        return table.front().second;  // table starts at m = 0
      if (m >= table.back().first) {
        const auto& a = table[table.size() - 2];
        const auto& b = table.back();
        const double s = (b.second - a.second) / (b.first - a.first);
        return b.second + s * (m - b.first);
      }
      auto it = std::upper_bound(table.begin(), table.end(), m,
                                 [](double v, const auto& p) { return v < p.first; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double t = (m - lo.first) / (hi.first - lo.first);
      return lo.second + t * (hi.second - lo.second);
    }
  }
  return m;
}

double JumpMap::gamma_inv(double g) const {
  switch (kind) {
    case JumpKind::additive: return g - gamma_hat;
    case JumpKind::depression: return 1.0 - (1.0 - g) / upsilon;
    case JumpKind::custom: {
      if (g <= table.front().second) return table.front().first;
      if (g >= table.back().second) {
        const auto& a = table[table.size() - 2];
        const auto& b = table.back();
        const double s = (b.second - a.second) / (b.first - a.first);
        return b.first + (g - b.second) / s;
      }
      auto it = std::upper_bound(table.begin(), table.end(), g,
                                 [](double v, const auto& p) { return v < p.second; });
      const auto& hi = *it;
      const auto& lo = *(it - 1);
      const double t = (g - lo.second) / (hi.second - lo.second);
      return lo.first + t * (hi.first - lo.first);
    }
  }
  return g;
}

double JumpMap::gamma_inv_prime(double g) const {
  switch (kind) {
    case JumpKind::additive: return 1.0;
    case JumpKind::depression: return 1.0 / upsilon;
    case JumpKind::custom: {
      std::size_t i = 1;
      while (i + 1 < table.size() && table[i].second < g) ++i;
      const double s =
          (table[i].second - table[i - 1].second) / (table[i].first - table[i - 1].first);
      return 1.0 / s;
    }
  }
  return 1.0;
}

double JumpMap::gamma_sup() const {
  switch (kind) {
    case JumpKind::additive: return gamma_hat;
    case JumpKind::depression: return 1.0 - upsilon;  // Gamma(m) = (1-upsilon)(1-m), max at m->0
    case JumpKind::custom: {
      double s = 0.0;
      for (const auto& p : table) s = std::max(s, p.second - p.first);
      return s;
    }
  }
  return 0.0;
}

double JumpMap::c_gamma() const {
  switch (kind) {
    case JumpKind::additive: return 1.0;
    case JumpKind::depression: return upsilon;
    case JumpKind::custom: {
      double c = std::numeric_limits<double>::infinity();
      for (std::size_t i = 1; i < table.size(); ++i) {
        const double s =
            (table[i].second - table[i - 1].second) / (table[i].first - table[i - 1].first);
        c = std::min(c, s);
      }
      return c;
    }
  }
  return 1.0;
}

void ModelSpec::check_state(double a, double m) const {
  if (!(a >= 0.0)) throw std::invalid_argument("age must be nonnegative, got " + std::to_string(a));
  if (!(m > m_min))
    throw std::invalid_argument("memory must exceed m_min, got " + std::to_string(m));
  if (m_domain_is_compact() && m > m_max * (1.0 + 1e-12))
    throw std::invalid_argument("memory outside compact domain (0," + std::to_string(m_max) +
                                "], got " + std::to_string(m));
}

double evaluate_rate(const ModelSpec& spec, double a, double m, double x) {
  spec.check_state(a, m);
  return spec.firing(a, m, x);
}

double apply_jump(const ModelSpec& spec, double m) {
  spec.check_state(0.0, m);
  return spec.jump.gamma(m);
}

LyapunovConstants lyapunov_constants(const ModelSpec& spec) {
  const double gsup = spec.jump.gamma_sup();
  if (!std::isfinite(gsup))
    throw std::runtime_error("unsupported model: jump size Gamma is unbounded");
  return {spec.lambda, spec.lambda + gsup * spec.firing.f_max};
}

double suggested_m_max(const ModelSpec& spec, double tail_tol) {
  if (spec.m_domain_is_compact()) return 1.0;
  const double gsup = spec.jump.gamma_sup();
  if (gsup <= 0.0) return std::max(1.0, spec.m_max);  // degenerate 1D preset, m decays to 0
  const double lam = spec.lambda;
  const double fmax = spec.firing.f_max;

  // Generator applied to exp(theta*m):
  //   L* e^{tm} = e^{tm} ( -lam*t*m + (e^{t*Gamma(m)}-1) f ) <= e^{tm} ( -lam*t*m + c ),
  // with c = (e^{t*|Gamma|}-1)|f|. Stationarity gives lam*t <m e^{tm}> <= c <e^{tm}>,
  // and splitting at m* = 2c/(lam*t):
  //   tail(M) <= (2c/(lam*t*M)) * e^{t*(m*-M)},  M > m*.
  auto tail_bound = [&](double theta, double M) {
    const double c = (std::exp(theta * gsup) - 1.0) * fmax;
    const double mstar = 2.0 * c / (lam * theta);
    if (M <= mstar) return std::numeric_limits<double>::infinity();
    return (2.0 * c / (lam * theta * M)) * std::exp(theta * (mstar - M));
  };
  double best = std::numeric_limits<double>::infinity();
  for (double scale : {0.25, 0.5, 1.0, 2.0, 4.0}) {
    const double theta = scale / gsup;
    double lo = 2.0 * (std::exp(theta * gsup) - 1.0) * fmax / (lam * theta);
    double hi = lo + 1.0;
    while (tail_bound(theta, hi) > tail_tol && hi < 1e12) hi *= 2.0;
    if (tail_bound(theta, hi) > tail_tol) continue;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (tail_bound(theta, mid) > tail_tol ? lo : hi) = mid;
    }
    best = std::min(best, hi);
  }
  if (!std::isfinite(best))
    throw std::runtime_error("could not bound the memory tail; check model constants");
  return best;
}

ModelSpec make_constant_model(double rate, double lambda, double gamma_hat, double c_h,
                              double kernel_decay) {
  ModelSpec s;
  s.lambda = lambda;
  s.epsilon = 0.0;
  s.firing.kind = FiringKind::constant;
  s.firing.f_max = rate;
  s.firing.sigma = rate;
  s.firing.delta_abs = 0.0;
  s.jump.kind = JumpKind::additive;
  s.jump.gamma_hat = gamma_hat;
  s.kernel.kind = KernelKind::exponential;
  s.kernel.amplitude = c_h;
  s.kernel.decay = kernel_decay;
  s.m_min = 0.0;
  s.m_max = gamma_hat > 0.0 ? suggested_m_max(s, 1e-8) : 1.0;
  return s;
}

ModelSpec make_std_model(double rate, double lambda, double upsilon, double c_h,
                         double kernel_decay) {
  ModelSpec s;
  s.lambda = lambda;
  s.epsilon = 0.0;
  s.firing.kind = FiringKind::constant;
  s.firing.f_max = rate;
  s.firing.sigma = rate;
  s.firing.delta_abs = 0.0;
  s.jump.kind = JumpKind::depression;
  s.jump.upsilon = upsilon;
  s.kernel.kind = KernelKind::exponential_depression;
  s.kernel.amplitude = c_h;
  s.kernel.decay = kernel_decay;
  s.m_min = 0.0;
  s.m_max = 1.0;
  return s;
}

ModelSpec make_asrm0_model() {
  // slow adaptation (lambda << kernel decay) with enough adaptation headroom
  // (gamma_hat * f_max / lambda) that strong coupling bursts instead of
  // locking up at a saturated state
  ModelSpec s;
  s.lambda = 0.2;
  s.epsilon = 0.05;
  s.firing.kind = FiringKind::sigmoid_adaptive;
  s.firing.f_max = 8.0;
  s.firing.beta = 6.0;
  s.firing.sigma = 0.4;
  s.firing.delta_abs = 0.2;
  s.firing.eta_amplitude = 1.0;
  s.firing.eta_tau = 0.3;
  s.jump.kind = JumpKind::additive;
  s.jump.gamma_hat = 1.0;
  s.kernel.kind = KernelKind::exponential;
  s.kernel.amplitude = 5.0;
  s.kernel.decay = 5.0;  // integral of h is 1
  s.m_min = 0.0;
  s.m_max = 60.0;  // memory window; bursts reach m ~ gamma_hat f_max / lambda = 40
  return s;
}

ModelSpec make_time_elapsed_model() {
  ModelSpec s = make_asrm0_model();
  s.lambda = 1.0;
  s.firing.kind = FiringKind::sigmoid_age;
  s.jump.gamma_hat = 0.0;  // Gamma = 0: memory plays no role
  s.m_max = 1.0;
  return s;
}

}  // namespace neuropop
