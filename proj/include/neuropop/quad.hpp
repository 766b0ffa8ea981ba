#pragma once
// Gauss-Legendre panels and hazard integrals along the between-spike flow
// m(a) = y * exp(-lambda * a).

#include <vector>

#include "neuropop/model.hpp"

namespace neuropop {

struct GlRule {
  std::vector<double> nodes;    // on [0,1]
  std::vector<double> weights;  // sum to 1
};

const GlRule& gl_rule(int n);  // n in {4, 8, 16}

// Row-major n x n matrix C with C[i][k] = int_0^{nodes[i]} l_k(s) ds, where
// l_k is the Lagrange basis on the rule's nodes. Turns nodal samples of an
// integrand into cumulative integrals at the nodes.
const std::vector<double>& gl_cumulative(int n);

// Length scale over which f varies along a trajectory; panels above this are
// split for quadrature.
double hazard_panel_scale(const ModelSpec& spec);

// Integral of f(s, y e^{-lambda s}, x) over [a0, a1], split at delta_abs.
double hazard_integral(const ModelSpec& spec, double y, double x, double a0, double a1);

// Incremental survival along one trajectory: monotone advance() calls return
// exp(-int_0^a f).
class TrajectoryHazard {
 public:
  TrajectoryHazard(const ModelSpec& spec, double y, double x)
      : spec_(&spec), y_(y), x_(x) {}

  double advance(double a_next);      // cumulative hazard on [0, a_next]
  double survival(double a_next) {    // exp(-cumulative)
    return std::exp(-advance(a_next));
  }
  double age() const { return a_; }
  double cumulative() const { return acc_; }

 private:
  const ModelSpec* spec_;
  double y_, x_;
  double a_ = 0.0, acc_ = 0.0;
};

}  // namespace neuropop
