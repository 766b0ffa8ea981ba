#include "neuropop/quad.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace neuropop {

namespace {

GlRule make_rule(std::initializer_list<std::pair<double, double>> half) {
  // half: (abscissa >= 0, weight) on [-1,1]; expand symmetrically, map to [0,1]
  GlRule r;
  std::vector<std::pair<double, double>> full;
  for (const auto& p : half) {
    if (p.first > 0.0) full.push_back({-p.first, p.second});
    full.push_back(p);
  }
  std::sort(full.begin(), full.end());
  for (const auto& p : full) {
    r.nodes.push_back(0.5 * (p.first + 1.0));
    r.weights.push_back(0.5 * p.second);
  }
  return r;
}

const GlRule rule4 = make_rule({{0.3399810435848563, 0.6521451548625461},
                                {0.8611363115940526, 0.3478548451374538}});

const GlRule rule8 = make_rule({{0.1834346424956498, 0.3626837833783620},
                                {0.5255324099163290, 0.3137066458778873},
                                {0.7966664774136267, 0.2223810344533745},
                                {0.9602898564975363, 0.1012285362903763}});

const GlRule rule16 = make_rule({{0.0950125098376374, 0.1894506104550685},
                                 {0.2816035507792589, 0.1826034150449236},
                                 {0.4580167776572274, 0.1691565193950025},
                                 {0.6178762444026438, 0.1495959888165767},
                                 {0.7554044083550030, 0.1246289712555339},
                                 {0.8656312023878318, 0.0951585116824928},
                                 {0.9445750230732326, 0.0622535239386479},
                                 {0.9894009349916499, 0.0271524594117541}});

// f(s, y e^{-lambda s}, x) integrated over [lo, hi]; the interval must not
// straddle delta_abs.
double smooth_piece(const ModelSpec& spec, double y, double x, double lo, double hi,
                    double panel) {
  if (hi <= lo) return 0.0;
  if (hi <= spec.firing.delta_abs) return 0.0;
  const GlRule& rule = gl_rule(8);
  const int n_panels = std::max(1, static_cast<int>(std::ceil((hi - lo) / panel)));
  const double h = (hi - lo) / n_panels;
  double acc = 0.0;
  for (int p = 0; p < n_panels; ++p) {
    const double p_lo = lo + p * h;
    double s = 0.0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double a = p_lo + h * rule.nodes[q];
      s += rule.weights[q] * spec.firing(a, y * std::exp(-spec.lambda * a), x);
    }
    acc += s * h;
  }
  return acc;
}

}  // namespace

const GlRule& gl_rule(int n) {
  switch (n) {
    case 4: return rule4;
    case 8: return rule8;
    case 16: return rule16;
  }
  throw std::invalid_argument("no Gauss-Legendre rule of order " + std::to_string(n));
}

namespace {

std::vector<double> make_cumulative(const GlRule& rule) {
  const int n = static_cast<int>(rule.nodes.size());
  std::vector<double> c(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k) {
    // monomial coefficients of the k-th Lagrange basis
    std::vector<double> poly{1.0};
    double denom = 1.0;
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      denom *= rule.nodes[k] - rule.nodes[j];
      std::vector<double> next(poly.size() + 1, 0.0);
      for (std::size_t d = 0; d < poly.size(); ++d) {
        next[d + 1] += poly[d];
        next[d] -= rule.nodes[j] * poly[d];
      }
      poly = std::move(next);
    }
    for (int i = 0; i < n; ++i) {
      double acc = 0.0, xp = rule.nodes[i];
      for (std::size_t d = 0; d < poly.size(); ++d) {
        acc += poly[d] * xp / static_cast<double>(d + 1);
        xp *= rule.nodes[i];
      }
      c[static_cast<std::size_t>(k) * n + i] = acc / denom;
    }
  }
  // transpose to C[i][k]
  std::vector<double> out(c.size());
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      out[static_cast<std::size_t>(i) * n + k] = c[static_cast<std::size_t>(k) * n + i];
  return out;
}

}  // namespace

const std::vector<double>& gl_cumulative(int n) {
  static const std::vector<double> c4 = make_cumulative(rule4);
  static const std::vector<double> c8 = make_cumulative(rule8);
  static const std::vector<double> c16 = make_cumulative(rule16);
  switch (n) {
    case 4: return c4;
    case 8: return c8;
    case 16: return c16;
  }
  throw std::invalid_argument("no cumulative rule of order " + std::to_string(n));
}

double hazard_panel_scale(const ModelSpec& spec) {
  switch (spec.firing.kind) {
    case FiringKind::constant:
      return 1e9;  // piecewise constant, one panel per smooth piece is exact
    case FiringKind::sigmoid_adaptive:
    case FiringKind::sigmoid_age: {
      double s = 1.0;
      if (spec.firing.eta_amplitude != 0.0) s = std::min(s, spec.firing.eta_tau);
      return 0.25 * s;
    }
    case FiringKind::tabulated: {
      double s = 1.0;
      if (spec.firing.eta_amplitude != 0.0) s = std::min(s, spec.firing.eta_tau);
      return 0.1 * s;
    }
  }
  return 0.25;
}

double hazard_integral(const ModelSpec& spec, double y, double x, double a0, double a1) {
  if (a1 <= a0) return 0.0;
  const double panel = hazard_panel_scale(spec);
  const double dabs = spec.firing.delta_abs;
  double acc = 0.0;
  if (a0 < dabs && a1 > dabs) {
    acc += smooth_piece(spec, y, x, dabs, a1, panel);
  } else {
    acc += smooth_piece(spec, y, x, a0, a1, panel);
  }
  return acc;
}

double TrajectoryHazard::advance(double a_next) {
  if (a_next < a_) throw std::logic_error("TrajectoryHazard::advance must be monotone");
  acc_ += hazard_integral(*spec_, y_, x_, a_, a_next);
  a_ = a_next;
  return acc_;
}

}  // namespace neuropop
