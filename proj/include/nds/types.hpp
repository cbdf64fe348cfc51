#pragma once

#include <cstdint>
#include <vector>

namespace nds {

/// Constants of the discrete spiking-neuron map plus the magnitude limit
/// used to detect trajectories escaping to infinity.
struct NdsParams {
    double a = 0.002;
    double v = 0.002;
    double b = 0.03;
    double c = 0.03;
    double d = 0.8;
    double k = -0.057;
    double theta = -0.01;            ///< threshold on u
    double eta0 = -1.0;              ///< reset value
    double divergence_bound = 1e6;   ///< |x|,|y|,|u| above this is an escape

    [[nodiscard]] bool valid() const { return divergence_bound > 0.0; }
};

/// Parameters of the continuous Rossler reference system. Kept separate
/// from NdsParams so the two (a,b,c) families cannot be mixed up.
struct RosslerParams {
    double a = 0.2;
    double b = 0.2;
    double c = 5.7;
};

/// Internal state (x, y, u) at one discrete time step.
struct NdsState {
    double x = 0.0;
    double y = 0.0;
    double u = 0.0;
};

inline bool operator==(const NdsState& l, const NdsState& r) {
    return l.x == r.x && l.y == r.y && l.u == r.u;
}

/// Recorded state sequence with the aligned binary spike outputs.
/// spikes[t] is the output emitted by the transition into states[t];
/// spikes[0] is 0 by convention.
struct Trajectory {
    std::vector<NdsState> states;
    std::vector<std::uint8_t> spikes;
    std::int64_t start_time = 0;

    [[nodiscard]] std::size_t size() const { return states.size(); }
};

} // namespace nds
