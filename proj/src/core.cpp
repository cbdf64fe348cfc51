#include "nds/core.hpp"

#include <stdexcept>

namespace nds {

Trajectory run_free(const NdsParams& params, const NdsState& initial,
                    std::int64_t steps,
                    const std::function<double(std::int64_t)>& drive_source) {
    if (steps < 1) throw std::invalid_argument("run_free: steps must be >= 1");
    if (!params.valid()) throw std::invalid_argument("run_free: divergence_bound must be > 0");

    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(steps) + 1);
    traj.spikes.reserve(static_cast<std::size_t>(steps) + 1);
    traj.states.push_back(initial);
    traj.spikes.push_back(0);

    NdsState cur = initial;
    for (std::int64_t t = 0; t < steps; ++t) {
        const double drive = drive_source ? drive_source(t + 1) : 0.0;
        StepResult r = detail::advance(cur, params, drive, params.eta0);
        const double m = detail::max_abs_component(r.state);
        if (m > params.divergence_bound) throw DivergenceError(t + 1, m);
        traj.states.push_back(r.state);
        traj.spikes.push_back(r.spike ? 1 : 0);
        cur = r.state;
    }
    return traj;
}

std::array<double, 3> rossler_derivative(const std::array<double, 3>& s,
                                         const RosslerParams& p) {
    return {-s[1] - s[2], s[0] + p.a * s[1], p.b + s[2] * (s[0] - p.c)};
}

std::vector<std::array<double, 3>> rossler_integrate(const std::array<double, 3>& initial,
                                                     const RosslerParams& params,
                                                     double dt, std::int64_t steps,
                                                     double divergence_bound) {
    if (!(dt > 0.0)) throw std::invalid_argument("rossler_integrate: dt must be > 0");
    if (steps < 1) throw std::invalid_argument("rossler_integrate: steps must be >= 1");

    std::vector<std::array<double, 3>> out;
    out.reserve(static_cast<std::size_t>(steps) + 1);
    out.push_back(initial);

    std::array<double, 3> s = initial;
    for (std::int64_t t = 0; t < steps; ++t) {
        const auto k1 = rossler_derivative(s, params);
        std::array<double, 3> tmp;
        for (int i = 0; i < 3; ++i) tmp[i] = s[i] + 0.5 * dt * k1[i];
        const auto k2 = rossler_derivative(tmp, params);
        for (int i = 0; i < 3; ++i) tmp[i] = s[i] + 0.5 * dt * k2[i];
        const auto k3 = rossler_derivative(tmp, params);
        for (int i = 0; i < 3; ++i) tmp[i] = s[i] + dt * k3[i];
        const auto k4 = rossler_derivative(tmp, params);
        for (int i = 0; i < 3; ++i)
            s[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

        for (int i = 0; i < 3; ++i)
            if (std::abs(s[i]) > divergence_bound) throw DivergenceError(t + 1, std::abs(s[i]));
        out.push_back(s);
    }
    return out;
}

} // namespace nds
