#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "nds/errors.hpp"
#include "nds/types.hpp"

namespace nds {

/// Result of one map iteration.
struct StepResult {
    NdsState state;
    bool spike = false;
};

namespace detail {

/// One unchecked iteration of the map. The reset branch assigns
/// `reset_value` (already resolved by the caller's reset policy); the
/// drive enters additively on the non-reset branch only.
inline StepResult advance(const NdsState& s, const NdsParams& p, double drive,
                          double reset_value) {
    StepResult r;
    r.state.x = s.x + p.b * (-s.y - s.u);
    r.state.y = s.y + p.c * (s.x + p.a * s.y);
    if (s.u > p.theta) {
        r.state.u = reset_value;
        r.spike = true;
    } else {
        r.state.u = s.u + p.d * (p.v - s.u * s.x + p.k * s.u) + drive;
        r.spike = false;
    }
    return r;
}

inline double max_abs_component(const NdsState& s) {
    return std::max({std::abs(s.x), std::abs(s.y), std::abs(s.u)});
}

} // namespace detail

/// Advances the neuron by one step under drive D(t). Returns the time-(t+1)
/// state and the spike emitted by the transition. Throws DivergenceError
/// when any output component exceeds params.divergence_bound.
inline StepResult nds_step(const NdsState& state, const NdsParams& params,
                           double drive = 0.0) {
    StepResult r = detail::advance(state, params, drive, params.eta0);
    const double m = detail::max_abs_component(r.state);
    if (m > params.divergence_bound) throw DivergenceError(0, m);
    return r;
}

/// Free-running trajectory of `steps` transitions starting at `initial`.
/// `drive_source`, when provided, supplies the drive consumed by the
/// transition into step t (t >= 1). Throws DivergenceError with the step
/// index on escape.
Trajectory run_free(const NdsParams& params, const NdsState& initial,
                    std::int64_t steps,
                    const std::function<double(std::int64_t)>& drive_source = {});

/// Right-hand side of the continuous Rossler system.
[[nodiscard]] std::array<double, 3> rossler_derivative(const std::array<double, 3>& state,
                                                       const RosslerParams& params);

/// Classic fixed-step fourth-order Runge-Kutta trajectory, used to emit the
/// reference attractor data. Returns steps+1 points including the initial one.
std::vector<std::array<double, 3>> rossler_integrate(const std::array<double, 3>& initial,
                                                     const RosslerParams& params,
                                                     double dt, std::int64_t steps,
                                                     double divergence_bound = 1e6);

} // namespace nds
