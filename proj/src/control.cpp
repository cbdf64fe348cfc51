#include "nds/control.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nds {

void ControlledRunConfig::validate() const {
    if (!params.valid())
        throw std::invalid_argument("config: divergence_bound must be > 0");
    if (total_steps < 1)
        throw std::invalid_argument("config: total_steps must be >= 1");
    if (control_on < 0)
        throw std::invalid_argument("config: control_on must be >= 0");
    if (control_off && control_on > *control_off)
        throw std::invalid_argument("config: need control_on <= control_off");
    for (const auto& fc : feedback)
        if (fc.delay < 1) throw std::invalid_argument("config: feedback delay must be >= 1");
    for (const auto& in : inputs) {
        std::int64_t prev = -1;
        for (std::int64_t st : in.spike_times) {
            if (st < 0 || st <= prev)
                throw std::invalid_argument("config: spike_times must be strictly increasing and >= 0");
            prev = st;
        }
    }
    for (const auto& inj : injections) {
        if (inj.period < 1) throw std::invalid_argument("config: injection period must be >= 1");
        if (inj.phase < 0 || inj.phase >= inj.period)
            throw std::invalid_argument("config: injection phase must satisfy 0 <= phase < period");
        if (inj.end_time && inj.start_time >= *inj.end_time)
            throw std::invalid_argument("config: injection start_time must be < end_time");
    }
}

double feedback_drive(std::span<const std::uint8_t> spike_history,
                      std::span<const FeedbackConnection> connections,
                      std::int64_t t, bool control_active) {
    if (!control_active) return 0.0;
    double sum = 0.0;
    for (const auto& fc : connections) {
        const std::int64_t j = t - fc.delay;
        if (j >= 0 && j < static_cast<std::int64_t>(spike_history.size()) && spike_history[j])
            sum += fc.weight;
    }
    return sum;
}

double input_drive(std::span<const InputSchedule> schedules, std::int64_t t) {
    double sum = 0.0;
    for (const auto& sch : schedules) {
        if (std::binary_search(sch.spike_times.begin(), sch.spike_times.end(), t))
            sum += sch.amplitude;
    }
    return sum;
}

namespace {

bool injection_matches(const FixedInjection& inj, std::int64_t s) {
    if (s < inj.start_time) return false;
    if (inj.end_time && s >= *inj.end_time) return false;
    return (s - inj.start_time) % inj.period == inj.phase;
}

} // namespace

RunRecord run_controlled(const ControlledRunConfig& config) {
    config.validate();

    const std::int64_t total = config.total_steps;
    const std::int64_t off = config.control_off.value_or(total + 1);
    const NdsParams& p = config.params;

    RunRecord rec;
    rec.config = config;
    rec.trajectory.states.reserve(static_cast<std::size_t>(total) + 1);
    rec.trajectory.spikes.reserve(static_cast<std::size_t>(total) + 1);
    rec.drives.reserve(static_cast<std::size_t>(total) + 1);

    // Per-step sum of input-schedule amplitudes, materialized once.
    std::vector<double> input_sum(static_cast<std::size_t>(total) + 1, 0.0);
    for (const auto& sch : config.inputs)
        for (std::int64_t st : sch.spike_times)
            if (st >= 0 && st <= total) input_sum[static_cast<std::size_t>(st)] += sch.amplitude;

    // Threshold crossings, indexed by the step whose u exceeded theta.
    // The feedback sum for the transition into step s reads this history at
    // s - tau, so a crossing at step c produces its kick exactly tau steps
    // later, and a stabilized orbit repeats with the connection's delay.
    std::vector<std::uint8_t> crossings(static_cast<std::size_t>(total) + 1, 0);

    NdsState cur = config.initial;
    rec.trajectory.states.push_back(cur);
    rec.trajectory.spikes.push_back(0);
    rec.drives.push_back(0.0);
    crossings[0] = cur.u > p.theta ? 1 : 0;

    for (std::int64_t t = 0; t < total; ++t) {
        const std::int64_t dest = t + 1;
        double drive = 0.0;
        if (config.control_on <= dest && dest < off) {
            drive += feedback_drive(crossings, config.feedback, dest, true);
            drive += input_sum[static_cast<std::size_t>(dest)];
            for (const auto& inj : config.injections)
                if (inj.mode == FixedInjection::Mode::add && injection_matches(inj, dest))
                    drive += inj.value;
        }

        const double reset_value = cur.u > p.theta ? apply_reset(config.reset, cur.u) : 0.0;
        StepResult r = detail::advance(cur, p, drive, reset_value);

        for (const auto& inj : config.injections)
            if (inj.mode == FixedInjection::Mode::assign && injection_matches(inj, dest))
                r.state.u = inj.value;

        if (detail::max_abs_component(r.state) > p.divergence_bound) {
            rec.diverged_at = dest;
            break;
        }

        rec.trajectory.states.push_back(r.state);
        rec.trajectory.spikes.push_back(r.spike ? 1 : 0);
        rec.drives.push_back(drive);
        crossings[static_cast<std::size_t>(dest)] = r.state.u > p.theta ? 1 : 0;
        if (r.spike) rec.spike_times.push_back(dest);
        cur = r.state;
    }
    return rec;
}

} // namespace nds
