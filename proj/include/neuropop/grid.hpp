#pragma once
// Truncated (a,m) finite-volume grid and cell-averaged densities.

#include <string>
#include <vector>

#include "neuropop/model.hpp"

namespace neuropop {

enum class MSpacing { uniform, geometric };

struct GridSpec {
  double a_max = 10.0;
  int n_a = 100;
  double m_min = 0.0;
  double m_max = 1.0;
  int n_m = 50;
  MSpacing spacing = MSpacing::uniform;

  std::vector<double> m_edges;  // n_m + 1, filled by finalize()

  void finalize();
  void validate(const ModelSpec& spec) const;

  double da() const { return a_max / n_a; }
  double a_lo(int i) const { return i * da(); }
  double a_center(int i) const { return (i + 0.5) * da(); }
  double m_lo(int j) const { return m_edges[j]; }
  double m_hi(int j) const { return m_edges[j + 1]; }
  double m_center(int j) const { return 0.5 * (m_edges[j] + m_edges[j + 1]); }
  double dm(int j) const { return m_edges[j + 1] - m_edges[j]; }
  double dm_min() const;
  double cell_area(int j) const { return da() * dm(j); }

  int a_cell_of(double a) const;
  int m_cell_of(double m) const;  // -1 if outside [m_min, m_max]
};

GridSpec make_grid(double a_max, int n_a, double m_min, double m_max, int n_m,
                   MSpacing spacing = MSpacing::uniform);

struct DensityGrid {
  GridSpec grid;
  std::vector<double> values;  // n_a * n_m, index i*n_m + j
  double leaked_mass = 0.0;    // cumulative mass lost through truncation boundaries

  double& at(int i, int j) { return values[static_cast<std::size_t>(i) * grid.n_m + j]; }
  double at(int i, int j) const { return values[static_cast<std::size_t>(i) * grid.n_m + j]; }

  double mass() const;
  double weighted_norm() const;  // L1 norm with weight w = 1 + m
  double first_moment_m() const;
  std::vector<double> age_marginal() const;  // integral over m, per a-cell
  void normalize();                          // scale to mass 1
};

DensityGrid zero_density(const GridSpec& grid);

// Product of a truncated Gaussian in a and a log-normal in m, cell-center
// evaluated and normalized to mass 1.
DensityGrid gaussian_initial(const GridSpec& grid, double a0, double a_sigma, double m0,
                             double m_sigma);

// All mass in the cell containing (a0, m0) (Dirac surrogate).
DensityGrid dirac_initial(const GridSpec& grid, double a0, double m0);

double l1_distance(const DensityGrid& a, const DensityGrid& b);
double weighted_l1_distance(const DensityGrid& a, const DensityGrid& b);

struct InitialSpec {
  std::string kind = "gaussian";  // gaussian | dirac
  double a0 = 1.0;
  double a_sigma = 0.5;
  double m0 = 0.0;  // 0 => pick a domain-appropriate default
  double m_sigma = 0.25;
};

DensityGrid build_initial(const InitialSpec& init, const GridSpec& grid, const ModelSpec& spec);

}  // namespace neuropop
