#include "neuropop/grid.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace neuropop {

void GridSpec::finalize() {
  m_edges.assign(static_cast<std::size_t>(n_m) + 1, 0.0);
  if (spacing == MSpacing::uniform) {
    const double h = (m_max - m_min) / n_m;
    for (int j = 0; j <= n_m; ++j) m_edges[j] = m_min + j * h;
  } else {
    if (!(m_min > 0.0))
      throw std::invalid_argument("geometric m-spacing requires m_min > 0");
    const double r = std::pow(m_max / m_min, 1.0 / n_m);
    for (int j = 0; j <= n_m; ++j) m_edges[j] = m_min * std::pow(r, j);
  }
  m_edges.front() = m_min;
  m_edges.back() = m_max;
}

void GridSpec::validate(const ModelSpec& spec) const {
  if (n_a < 4 || n_m < 4) throw std::invalid_argument("grid needs at least 4 cells per axis");
  if (m_edges.size() != static_cast<std::size_t>(n_m) + 1)
    throw std::logic_error("grid not finalized");
  const double sigma = spec.firing.sigma;
  if (!(sigma > 0.0)) throw std::invalid_argument("firing rate floor sigma must be positive");
  const double needed = spec.firing.delta_abs + 10.0 / sigma;
  if (a_max < needed * (1.0 - 1e-12))
    throw std::invalid_argument("a_max too small for the age tail: need >= " +
                                std::to_string(needed));
  if (m_min < spec.m_min - 1e-12 || m_max > spec.m_max * (1.0 + 1e-12) + 1e-12)
    throw std::invalid_argument("grid m-range must lie inside the model m-domain");
}

double GridSpec::dm_min() const {
  double d = std::numeric_limits<double>::infinity();
  for (int j = 0; j < n_m; ++j) d = std::min(d, dm(j));
  return d;
}

int GridSpec::a_cell_of(double a) const {
  if (a < 0.0 || a > a_max) return -1;
  int i = static_cast<int>(a / da());
  return std::min(i, n_a - 1);
}

int GridSpec::m_cell_of(double m) const {
  if (m < m_min || m > m_max) return -1;
  auto it = std::upper_bound(m_edges.begin(), m_edges.end(), m);
  int j = static_cast<int>(it - m_edges.begin()) - 1;
  return std::min(std::max(j, 0), n_m - 1);
}

GridSpec make_grid(double a_max, int n_a, double m_min, double m_max, int n_m,
                   MSpacing spacing) {
  GridSpec g;
  g.a_max = a_max;
  g.n_a = n_a;
  g.m_min = m_min;
  g.m_max = m_max;
  g.n_m = n_m;
  g.spacing = spacing;
  g.finalize();
  return g;
}

double DensityGrid::mass() const {
  double s = 0.0;
  for (int j = 0; j < grid.n_m; ++j) {
    double col = 0.0;
    for (int i = 0; i < grid.n_a; ++i) col += at(i, j);
    s += col * grid.cell_area(j);
  }
  return s;
}

double DensityGrid::weighted_norm() const {
  double s = 0.0;
  for (int j = 0; j < grid.n_m; ++j) {
    double col = 0.0;
    for (int i = 0; i < grid.n_a; ++i) col += at(i, j);
    s += col * grid.cell_area(j) * (1.0 + grid.m_center(j));
  }
  return s;
}

double DensityGrid::first_moment_m() const {
  double s = 0.0;
  for (int j = 0; j < grid.n_m; ++j) {
    double col = 0.0;
    for (int i = 0; i < grid.n_a; ++i) col += at(i, j);
    s += col * grid.cell_area(j) * grid.m_center(j);
  }
  return s;
}

std::vector<double> DensityGrid::age_marginal() const {
  std::vector<double> out(static_cast<std::size_t>(grid.n_a), 0.0);
  for (int i = 0; i < grid.n_a; ++i) {
    double s = 0.0;
    for (int j = 0; j < grid.n_m; ++j) s += at(i, j) * grid.dm(j);
    out[i] = s;
  }
  return out;
}

void DensityGrid::normalize() {
  const double m = mass();
  if (!(m > 0.0)) throw std::runtime_error("cannot normalize an empty density");
  for (double& v : values) v /= m;
}

DensityGrid zero_density(const GridSpec& grid) {
  DensityGrid d;
  d.grid = grid;
  d.values.assign(static_cast<std::size_t>(grid.n_a) * grid.n_m, 0.0);
  return d;
}

DensityGrid gaussian_initial(const GridSpec& grid, double a0, double a_sigma, double m0,
                             double m_sigma) {
  DensityGrid d = zero_density(grid);
  const double lm0 = std::log(m0);
  for (int i = 0; i < grid.n_a; ++i) {
    const double a = grid.a_center(i);
    const double ga = std::exp(-0.5 * std::pow((a - a0) / a_sigma, 2));
    for (int j = 0; j < grid.n_m; ++j) {
      const double m = grid.m_center(j);
      if (m <= 0.0) continue;
      const double gm = std::exp(-0.5 * std::pow((std::log(m) - lm0) / m_sigma, 2)) / m;
      d.at(i, j) = ga * gm;
    }
  }
  d.normalize();
  return d;
}

DensityGrid dirac_initial(const GridSpec& grid, double a0, double m0) {
  DensityGrid d = zero_density(grid);
  const int i = grid.a_cell_of(a0);
  const int j = grid.m_cell_of(m0);
  if (i < 0 || j < 0) throw std::invalid_argument("dirac initial point outside the grid");
  d.at(i, j) = 1.0 / grid.cell_area(j);
  return d;
}

double l1_distance(const DensityGrid& a, const DensityGrid& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("grid mismatch");
  double s = 0.0;
  for (int j = 0; j < a.grid.n_m; ++j) {
    double col = 0.0;
    for (int i = 0; i < a.grid.n_a; ++i) col += std::abs(a.at(i, j) - b.at(i, j));
    s += col * a.grid.cell_area(j);
  }
  return s;
}

double weighted_l1_distance(const DensityGrid& a, const DensityGrid& b) {
  if (a.values.size() != b.values.size()) throw std::invalid_argument("grid mismatch");
  double s = 0.0;
  for (int j = 0; j < a.grid.n_m; ++j) {
    double col = 0.0;
    for (int i = 0; i < a.grid.n_a; ++i) col += std::abs(a.at(i, j) - b.at(i, j));
    s += col * a.grid.cell_area(j) * (1.0 + a.grid.m_center(j));
  }
  return s;
}

DensityGrid build_initial(const InitialSpec& init, const GridSpec& grid, const ModelSpec& spec) {
  double m0 = init.m0;
  if (m0 <= 0.0) m0 = spec.m_domain_is_compact() ? 0.5 : std::max(0.5, spec.jump.gamma0());
  if (init.kind == "gaussian")
    return gaussian_initial(grid, init.a0, init.a_sigma, m0, init.m_sigma);
  if (init.kind == "dirac") return dirac_initial(grid, init.a0, m0);
  throw std::invalid_argument("unknown initial kind: " + init.kind);
}

}  // namespace neuropop
