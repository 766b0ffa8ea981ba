#include "neuropop/particle.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace neuropop {

double particle_dt_max(const ModelSpec& spec) { return 0.1 / spec.firing.f_max; }

ParticleStepStats particle_step(const ModelSpec& spec, ParticleState& state, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (spec.firing.f_max * dt > 0.1 * (1.0 + 1e-12))
    throw std::invalid_argument("dt exceeds the thinning guard 0.1/f_max");

  const std::size_t n = state.size();
  const double x_arg = spec.epsilon * state.x;
  const double decay = std::exp(-spec.lambda * dt);
  const CounterRng rng{state.seed};
  const std::uint64_t step = state.step_index;
  const FiringRate& firing = spec.firing;
  const JumpMap& jump = spec.jump;
  const InteractionKernel& kernel = spec.kernel;

  constexpr std::size_t kBlock = 8192;
  const std::size_t n_blocks = (n + kBlock - 1) / kBlock;
  std::vector<double> block_kappa(n_blocks, 0.0);
  std::vector<long> block_spikes(n_blocks, 0);

#pragma omp parallel for schedule(static)
  for (long long b = 0; b < static_cast<long long>(n_blocks); ++b) {
    const std::size_t lo = static_cast<std::size_t>(b) * kBlock;
    const std::size_t hi = std::min(n, lo + kBlock);
    double kappa = 0.0;
    long spikes = 0;
    for (std::size_t id = lo; id < hi; ++id) {
      const double a = state.ages[id];
      const double m = state.memories[id];
      const double f = firing(a, m, x_arg);
      bool spike = false;
      if (f > 0.0) {
        const double p = -std::expm1(-f * dt);
        spike = rng.uniform(step, id) < p;
      }
      if (spike) {
        const double m_pre = m * decay;  // flow to the spike, then jump
        kappa += kernel.weight(m_pre);
        state.memories[id] = jump.gamma(m_pre);
        state.ages[id] = 0.0;
        ++spikes;
      } else {
        state.ages[id] = a + dt;
        state.memories[id] = m * decay;
      }
    }
    block_kappa[b] = kappa;
    block_spikes[b] = spikes;
  }

  ParticleStepStats stats;
  for (std::size_t b = 0; b < n_blocks; ++b) {
    stats.kappa_sum += block_kappa[b];
    stats.spikes += block_spikes[b];
  }
  // spike times are uniform within the step as far as the filter can tell
  const double kdecay = std::exp(-kernel.decay * dt);
  const double incr = (1.0 - kdecay) / (kernel.decay * dt);
  state.x = state.x * kdecay +
            kernel.amplitude * incr * stats.kappa_sum / static_cast<double>(n);
  state.t += dt;
  state.step_index += 1;
  return stats;
}

Trace run_particles(const ModelSpec& spec, ParticleState state, double t_end, double dt,
                    const RecordConfig& rec, ParticleState* final_state) {
  const std::size_t n = state.size();
  if (n == 0) throw std::invalid_argument("empty particle state");
  Trace trace;
  const long n_steps = std::lround(t_end / dt);
  const long stride = std::max<long>(1, std::lround(rec.stride / dt));

  auto window_mass = [&]() {
    if (rec.window_a_max <= 0.0) return 1.0;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < n; ++i)
      if (state.ages[i] <= rec.window_a_max && state.memories[i] <= rec.window_m_max) ++inside;
    return static_cast<double>(inside) / static_cast<double>(n);
  };
  auto wnorm = [&]() {
    double s = 0.0;
    for (const double m : state.memories) s += 1.0 + m;
    return s / static_cast<double>(n);
  };

  long spikes_since = 0;
  double t_last = state.t;
  auto record = [&](double rate) {
    trace.times.push_back(state.t);
    trace.x_values.push_back(state.x);
    trace.pop_rate.push_back(rate);
    trace.mass.push_back(window_mass());
    trace.weighted_norm.push_back(wnorm());
  };
  record(0.0);

  for (long s = 0; s < n_steps; ++s) {
    ParticleStepStats st = particle_step(spec, state, dt);
    spikes_since += st.spikes;
    if (rec.raster_count > 0) {
      const std::size_t cap = std::min<std::size_t>(rec.raster_count, n);
      for (std::size_t id = 0; id < cap; ++id)
        if (state.ages[id] == 0.0)
          trace.raster.emplace_back(static_cast<std::uint32_t>(id), state.t);
    }
    if ((s + 1) % stride == 0 || s + 1 == n_steps) {
      const double rate =
          static_cast<double>(spikes_since) / (static_cast<double>(n) * (state.t - t_last));
      record(rate);
      spikes_since = 0;
      t_last = state.t;
    }
  }
  if (final_state) *final_state = std::move(state);
  return trace;
}

DensityGrid empirical_density(const ParticleState& state, const GridSpec& grid) {
  DensityGrid d = zero_density(grid);
  const double n = static_cast<double>(state.size());
  for (std::size_t i = 0; i < state.size(); ++i) {
    const int ia = grid.a_cell_of(state.ages[i]);
    if (ia < 0) continue;
    const int jm = grid.m_cell_of(state.memories[i]);
    if (jm < 0) continue;
    d.at(ia, jm) += 1.0 / (n * grid.cell_area(jm));
  }
  return d;
}

ParticleState sample_initial(const ModelSpec& spec, const InitialSpec& init,
                             const GridSpec& window, std::size_t n, std::uint64_t seed) {
  ParticleState st;
  st.seed = seed;
  st.ages.resize(n);
  st.memories.resize(n);
  double m0 = init.m0;
  if (m0 <= 0.0) m0 = spec.m_domain_is_compact() ? 0.5 : std::max(0.5, spec.jump.gamma0());

  std::mt19937_64 gen(seed ^ 0xa02c0ffeeULL);
  if (init.kind == "dirac") {
    for (std::size_t i = 0; i < n; ++i) {
      st.ages[i] = init.a0;
      st.memories[i] = m0;
    }
    return st;
  }
  if (init.kind != "gaussian") throw std::invalid_argument("unknown initial kind: " + init.kind);
  std::normal_distribution<double> ga(init.a0, init.a_sigma);
  std::normal_distribution<double> gz(0.0, 1.0);
  const double lm0 = std::log(m0);
  for (std::size_t i = 0; i < n; ++i) {
    double a;
    do {
      a = ga(gen);
    } while (a < 0.0 || a > window.a_max);
    double m;
    do {
      m = std::exp(lm0 + init.m_sigma * gz(gen));
    } while (m <= window.m_min || m > window.m_max);
    st.ages[i] = a;
    st.memories[i] = m;
  }
  return st;
}

}  // namespace neuropop
