#pragma once
// Microscopic N-neuron process: deterministic flow (da=dt, m *= e^{-lambda dt})
// between spikes, per-step thinning with probability 1 - e^{-f dt}, jump
// (a,m) -> (0, gamma(m)) at spikes, shared potential x_t with exponential
// kernel decay.

#include <cstdint>
#include <vector>

#include "neuropop/grid.hpp"
#include "neuropop/model.hpp"
#include "neuropop/rng.hpp"
#include "neuropop/trace.hpp"

namespace neuropop {

struct ParticleState {
  std::vector<double> ages;
  std::vector<double> memories;
  double x = 0.0;
  double t = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t step_index = 0;

  std::size_t size() const { return ages.size(); }
};

struct ParticleStepStats {
  long spikes = 0;
  double kappa_sum = 0.0;  // sum of kernel weights of this step's spikes
};

// One thinning step; spike decisions use the step-start state and the
// step-start x. Deterministic for fixed (seed, step_index) regardless of
// thread count.
ParticleStepStats particle_step(const ModelSpec& spec, ParticleState& state, double dt);

// Largest dt accepted by the thinning guard f_max * dt <= 0.1.
double particle_dt_max(const ModelSpec& spec);

Trace run_particles(const ModelSpec& spec, ParticleState state, double t_end, double dt,
                    const RecordConfig& rec, ParticleState* final_state = nullptr);

DensityGrid empirical_density(const ParticleState& state, const GridSpec& grid);

// Draw N initial states from the same analytic density the PDE initial-data
// presets evaluate (rejection inside the window). Serial and reproducible.
ParticleState sample_initial(const ModelSpec& spec, const InitialSpec& init,
                             const GridSpec& window, std::size_t n, std::uint64_t seed);

}  // namespace neuropop
