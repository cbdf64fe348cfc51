#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "nds/core.hpp"
#include "nds/types.hpp"

namespace nds {

/// One time-delayed self-feedback connection: weight w applied to the
/// neuron's own spike emitted `delay` steps earlier.
struct FeedbackConnection {
    double weight = 0.3;
    std::int64_t delay = 100;   ///< tau, in time steps; must be >= 1
};

/// External input spike schedule: each listed step contributes `amplitude`
/// to the drive at that step.
struct InputSchedule {
    std::vector<std::int64_t> spike_times;   ///< strictly increasing, >= 0
    double amplitude = 0.3;
};

/// Periodic fixed-value injection into u (threshold-bypass experiments).
/// Fires at steps s in [start_time, end_time) with (s - start_time) mod
/// period == phase. `assign` overwrites u after the step's normal update;
/// `add` contributes to the drive like an input spike.
struct FixedInjection {
    enum class Mode { assign, add };
    double value = 1.0;
    std::int64_t phase = 3;
    std::int64_t period = 100;
    std::int64_t start_time = 1000;
    std::optional<std::int64_t> end_time;    ///< nullopt = unbounded
    Mode mode = Mode::assign;
};

/// Reset rule applied when u crosses the threshold.
struct ResetPolicy {
    enum class Kind { fixed, relative };
    Kind kind = Kind::fixed;
    double value = -1.0;

    static ResetPolicy fixed_at(double v) { return {Kind::fixed, v}; }
    static ResetPolicy relative_by(double v) { return {Kind::relative, v}; }
};

/// Full description of one controlled run.
struct ControlledRunConfig {
    NdsParams params;
    NdsState initial;
    std::int64_t total_steps = 5000;
    std::int64_t control_on = 1001;
    std::optional<std::int64_t> control_off;   ///< nullopt = active to the end
    std::vector<FeedbackConnection> feedback;
    std::vector<InputSchedule> inputs;
    std::vector<FixedInjection> injections;
    ResetPolicy reset;
    std::uint64_t rng_seed = 0;   ///< recorded when the initial state was drawn

    void validate() const;   ///< throws std::invalid_argument on violation
};

/// Complete record of one controlled run. `drives[t]` is the drive consumed
/// by the transition into states[t] (drives[0] = 0); `diverged_at` is set
/// when the run hit the divergence bound, in which case the trajectory is
/// truncated to the steps before the escape.
struct RunRecord {
    ControlledRunConfig config;
    Trajectory trajectory;
    std::vector<double> drives;
    std::vector<std::int64_t> spike_times;
    std::optional<std::int64_t> diverged_at;
};

/// Sum of w_j * history[t - tau_j] over connections with t - tau_j >= 0,
/// or 0 when control is inactive. Entries before time 0 count as 0.
[[nodiscard]] double feedback_drive(std::span<const std::uint8_t> spike_history,
                                    std::span<const FeedbackConnection> connections,
                                    std::int64_t t, bool control_active = true);

/// Sum of amplitudes of all schedules containing step t.
[[nodiscard]] double input_drive(std::span<const InputSchedule> schedules, std::int64_t t);

/// Resolves the post-reset value of u. The caller has established u > theta.
[[nodiscard]] inline double apply_reset(const ResetPolicy& policy, double u) {
    return policy.kind == ResetPolicy::Kind::fixed ? policy.value : u + policy.value;
}

/// Runs the map for total_steps transitions, composing the drive from
/// feedback, inputs and injections while the control window is active.
/// A divergence is recorded in the returned RunRecord, not thrown.
[[nodiscard]] RunRecord run_controlled(const ControlledRunConfig& config);

} // namespace nds
