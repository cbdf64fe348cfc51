#include "nds/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>
#include <stdexcept>
#include <thread>

#include "nds/errors.hpp"
#include "nds/rng.hpp"

namespace nds {

namespace {

/// Deterministic parallel map: worker w handles indices congruent to w, all
/// results land in preallocated slots, so the outcome is independent of
/// scheduling and of the worker count.
void parallel_for(std::int64_t n, int parallelism, const std::function<void(std::int64_t)>& fn) {
    int workers = parallelism > 0 ? parallelism
                                  : static_cast<int>(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = static_cast<int>(std::min<std::int64_t>(workers, std::max<std::int64_t>(n, 1)));
    if (workers == 1) {
        for (std::int64_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::int64_t i = w; i < n; i += workers) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

bool free_transient_bounded(const NdsState& ic) {
    ControlledRunConfig cfg;
    cfg.initial = ic;
    cfg.total_steps = kScreenSteps;
    cfg.control_on = 0;
    cfg.reset = ResetPolicy::fixed_at(cfg.params.eta0);
    const RunRecord rec = run_controlled(cfg);
    return !rec.diverged_at.has_value();
}

std::uint64_t key_of(double v) { return std::bit_cast<std::uint64_t>(v); }

} // namespace

NdsState sample_initial_raw(std::uint64_t seed) {
    SplitMix64 g(seed);
    NdsState s;
    s.x = g.next_symmetric();
    s.y = g.next_symmetric();
    s.u = g.next_symmetric();
    return s;
}

NdsState sample_initial(std::uint64_t seed) {
    std::uint64_t s = seed;
    for (int attempt = 0; attempt < 100; ++attempt) {
        const NdsState ic = sample_initial_raw(s);
        if (free_transient_bounded(ic)) return ic;
        s = derive_seed(seed, 0x5C4EEull, static_cast<std::uint64_t>(attempt) + 1);
    }
    throw std::runtime_error("sample_initial: no bounded initial state after 100 draws");
}

ControlledRunConfig feedback_config(std::int64_t tau, double weight, const NdsState& initial,
                                    std::int64_t total_steps) {
    ControlledRunConfig cfg;
    cfg.initial = initial;
    cfg.total_steps = total_steps;
    cfg.control_on = kDefaultControlOn;
    cfg.feedback = {FeedbackConnection{weight, tau}};
    cfg.reset = ResetPolicy::fixed_at(cfg.params.eta0);
    return cfg;
}

std::int64_t sweep_run_length(std::int64_t tau) {
    return std::max<std::int64_t>(5000, kDefaultControlOn + 20 * tau + 2 * (2 * tau));
}

ReliabilityReport run_reliability_sweep(const SweepConfig& config) {
    if (config.tau_values.empty())
        throw std::invalid_argument("sweep: tau_values must be non-empty");
    if (config.ics_per_tau < 1)
        throw std::invalid_argument("sweep: ics_per_tau must be >= 1");
    for (std::int64_t tau : config.tau_values)
        if (tau < 1) throw std::invalid_argument("sweep: tau values must be >= 1");

    const double weight = config.base.feedback.empty() ? kDefaultFeedbackWeight
                                                       : config.base.feedback.front().weight;
    const std::int64_t per = config.ics_per_tau;
    const std::int64_t n = static_cast<std::int64_t>(config.tau_values.size()) * per;

    struct Slot {
        StabilizationVerdict verdict;
    };
    std::vector<Slot> slots(static_cast<std::size_t>(n));

    parallel_for(n, config.parallelism, [&](std::int64_t idx) {
        const std::int64_t ti = idx / per;
        const std::int64_t ici = idx % per;
        const std::int64_t tau = config.tau_values[static_cast<std::size_t>(ti)];
        const std::uint64_t run_seed =
            derive_seed(config.seed, static_cast<std::uint64_t>(tau), static_cast<std::uint64_t>(ici));

        ControlledRunConfig cfg = config.base;
        cfg.initial = sample_initial(run_seed);
        cfg.total_steps = sweep_run_length(tau);
        cfg.control_on = kDefaultControlOn;
        cfg.control_off.reset();
        cfg.feedback = {FeedbackConnection{weight, tau}};
        cfg.inputs.clear();
        cfg.injections.clear();
        cfg.rng_seed = run_seed;

        const RunRecord rec = run_controlled(cfg);
        slots[static_cast<std::size_t>(idx)].verdict = classify_run(rec, tau);
    });

    ReliabilityReport report;
    report.seed = config.seed;
    std::int64_t stabilized_total = 0;
    for (std::size_t ti = 0; ti < config.tau_values.size(); ++ti) {
        TauCounts counts;
        for (std::int64_t ici = 0; ici < per; ++ici) {
            const auto& v = slots[ti * static_cast<std::size_t>(per) + static_cast<std::size_t>(ici)].verdict;
            switch (v.kind) {
                case StabilizationVerdict::Kind::stabilized:
                    ++counts.stabilized;
                    if (v.full_stabilization_time) ++counts.fully_stabilized;
                    break;
                case StabilizationVerdict::Kind::diverged: ++counts.diverged; break;
                case StabilizationVerdict::Kind::unresolved: ++counts.unresolved; break;
            }
        }
        stabilized_total += counts.stabilized;
        report.per_tau[config.tau_values[ti]] = counts;
    }
    report.overall_reliability = static_cast<double>(stabilized_total) / static_cast<double>(n);
    return report;
}

DifferenceAnalysis run_difference_analysis(std::int64_t tau, std::uint64_t seed,
                                           std::int64_t total_steps) {
    if (total_steps <= kDefaultControlOn + 2 * tau)
        throw std::invalid_argument("difference analysis: total_steps must exceed control_on + 2*tau");

    DifferenceAnalysis out;
    ControlledRunConfig cfg =
        feedback_config(tau, kDefaultFeedbackWeight, sample_initial(seed), total_steps);
    cfg.rng_seed = seed;
    out.record = run_controlled(cfg);
    out.verdict = classify_run(out.record, tau);
    out.x = difference_pattern(out.record.trajectory, DiffVariable::x, tau);
    out.y = difference_pattern(out.record.trajectory, DiffVariable::y, tau);
    out.u = difference_pattern(out.record.trajectory, DiffVariable::u, tau);
    out.xy = difference_pattern(out.record.trajectory, DiffVariable::xy_plane, tau);
    out.euclidean = difference_pattern(out.record.trajectory, DiffVariable::xyz_euclidean, tau);
    return out;
}

InputSchedule forcing_schedule_from(const RunRecord& record, const StabilizationVerdict& verdict,
                                    std::int64_t from, std::int64_t to, double amplitude,
                                    std::int64_t phase_shift) {
    if (!verdict.stabilized() || !verdict.period || !verdict.spike_stabilization_time)
        throw std::invalid_argument("forcing_schedule_from: record is not stabilized");
    const std::int64_t period = *verdict.period;
    const std::int64_t len = static_cast<std::int64_t>(record.trajectory.states.size());

    // Crossing phases from the last converged period; a spike can still
    // slip a step between the detector window and full convergence, so the
    // tail is the faithful pattern.
    std::set<std::int64_t> offsets;
    const std::int64_t w0 = std::max<std::int64_t>(*verdict.spike_stabilization_time, len - 2 * period);
    for (std::int64_t s : record.spike_times)
        if (s >= w0 && s < w0 + period)
            offsets.insert(((s - 1 + phase_shift) % period + period) % period);
    if (offsets.empty())
        throw std::invalid_argument("forcing_schedule_from: no spikes in the converged tail");

    InputSchedule sch;
    sch.amplitude = amplitude;
    for (std::int64_t k = 0;; ++k) {
        bool any = false;
        for (std::int64_t o : offsets) {
            const std::int64_t t = k * period + o;
            if (t > to) continue;
            any = true;
            if (t >= from) sch.spike_times.push_back(t);
        }
        if (!any) break;
    }
    std::sort(sch.spike_times.begin(), sch.spike_times.end());
    return sch;
}

namespace {

/// Aligned per-period max |u| distance between two stabilized records.
/// Anchored at spikes in a late window; the best spike-to-spike alignment
/// is reported, which cancels pure time translations of the same orbit.
double aligned_u_distance(const RunRecord& ref, const RunRecord& other, std::int64_t period) {
    const auto& ru = ref.trajectory.states;
    const auto& ou = other.trajectory.states;
    const std::int64_t len = static_cast<std::int64_t>(std::min(ru.size(), ou.size()));
    const std::int64_t t0 = len - 2 * period;
    if (t0 < 0) return std::numeric_limits<double>::infinity();

    std::int64_t anchor = -1;
    for (std::int64_t s : ref.spike_times)
        if (s >= t0 && s + period <= len) { anchor = s; break; }
    if (anchor < 0) return std::numeric_limits<double>::infinity();

    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t s : other.spike_times) {
        if (s < t0 || s + period > len) continue;
        if (s >= t0 + period) break;
        double dmax = 0.0;
        for (std::int64_t i = 0; i < period; ++i) {
            dmax = std::max(dmax, std::abs(ru[static_cast<std::size_t>(anchor + i)].u -
                                           ou[static_cast<std::size_t>(s + i)].u));
        }
        best = std::min(best, dmax);
    }
    return best;
}

} // namespace

Reconstruction run_reconstruction(std::int64_t tau, std::uint64_t seed) {
    const std::int64_t total = std::max<std::int64_t>(20000, kDefaultControlOn + 40 * tau);
    constexpr int kRetryCap = 10;

    for (int attempt = 0; attempt < kRetryCap; ++attempt) {
        const std::uint64_t fb_seed = derive_seed(seed, 0xFEEDull, static_cast<std::uint64_t>(attempt));
        ControlledRunConfig cfg =
            feedback_config(tau, kDefaultFeedbackWeight, sample_initial(fb_seed), total);
        cfg.rng_seed = fb_seed;
        RunRecord fb = run_controlled(cfg);
        StabilizationVerdict fbv = classify_run(fb, tau);
        if (!fbv.stabilized()) continue;

        Reconstruction out;
        out.attempts = attempt + 1;

        ControlledRunConfig fcfg;
        const std::uint64_t fo_seed = derive_seed(seed, 0xF04Cull, static_cast<std::uint64_t>(attempt));
        fcfg.initial = sample_initial(fo_seed);
        fcfg.total_steps = total;
        fcfg.control_on = kDefaultControlOn;
        fcfg.inputs = {forcing_schedule_from(fb, fbv, kDefaultControlOn, total,
                                             kDefaultFeedbackWeight, tau)};
        fcfg.reset = ResetPolicy::fixed_at(fcfg.params.eta0);
        fcfg.rng_seed = fo_seed;
        RunRecord fo = run_controlled(fcfg);
        StabilizationVerdict fov = classify_run(fo, tau);
        if (!fov.stabilized())
            throw ReconstructionError("forcing run did not stabilize");

        out.max_u_distance = aligned_u_distance(fb, fo, *fbv.period);
        out.feedback_run = std::move(fb);
        out.forcing_run = std::move(fo);
        out.feedback_verdict = fbv;
        out.forcing_verdict = fov;
        return out;
    }
    throw ReconstructionError("no feedback run stabilized within the retry cap");
}

InjectionOutcome run_fixed_injection(double value, std::int64_t phase, std::int64_t period,
                                     std::uint64_t seed, std::int64_t total_steps,
                                     FixedInjection::Mode mode) {
    if (total_steps < 1) throw std::invalid_argument("fixed injection: total_steps must be >= 1");

    ControlledRunConfig cfg;
    cfg.initial = sample_initial(seed);
    cfg.total_steps = total_steps;
    cfg.control_on = kDefaultControlOn;
    FixedInjection inj;
    inj.value = value;
    inj.phase = phase;
    inj.period = period;
    inj.start_time = 1000;
    inj.end_time = total_steps;
    inj.mode = mode;
    cfg.injections = {inj};
    cfg.reset = ResetPolicy::fixed_at(cfg.params.eta0);
    cfg.rng_seed = seed;

    InjectionOutcome out;
    out.record = run_controlled(cfg);
    out.verdict = classify_run(out.record, period);
    return out;
}

InjectionOutcome run_reset_experiment(const ResetPolicy& policy, std::uint64_t seed,
                                      std::int64_t total_steps) {
    constexpr std::int64_t tau = 100;
    ControlledRunConfig cfg =
        feedback_config(tau, kDefaultFeedbackWeight, sample_initial(seed), total_steps);
    cfg.reset = policy;
    cfg.rng_seed = seed;

    InjectionOutcome out;
    out.record = run_controlled(cfg);
    out.verdict = classify_run(out.record, tau);
    return out;
}

std::string to_string(ResetRegime regime) {
    switch (regime) {
        case ResetRegime::above_threshold_2d: return "above-threshold-2D";
        case ResetRegime::near_threshold_alternating: return "near-threshold-alternating";
        case ResetRegime::chaotic_stabilizing: return "chaotic-stabilizing";
    }
    return "unknown";
}

namespace {

RegimeDiagnostics probe_regime(double eta0, std::uint64_t seed) {
    constexpr std::int64_t kProbeSteps = 10000;
    ControlledRunConfig cfg = feedback_config(100, kDefaultFeedbackWeight,
                                              sample_initial(seed), kProbeSteps);
    cfg.reset = ResetPolicy::fixed_at(eta0);
    cfg.rng_seed = seed;
    const RunRecord rec = run_controlled(cfg);
    const auto& st = rec.trajectory.states;
    const auto& sp = rec.trajectory.spikes;
    const std::int64_t len = static_cast<std::int64_t>(st.size());

    RegimeDiagnostics diag;
    if (rec.spike_times.empty()) return diag;
    const std::int64_t first_reset = rec.spike_times.front();

    bool u_const = true;
    bool all_spikes = true;
    for (std::int64_t t = first_reset; t < len; ++t) {
        if (st[static_cast<std::size_t>(t)].u != eta0) u_const = false;
        if (t > first_reset && !sp[static_cast<std::size_t>(t)]) all_spikes = false;
    }
    diag.u_constant_after_first_reset = u_const;
    diag.spike_every_step = all_spikes;

    // Radius of the x-y oscillation grows per revolution, not per step;
    // compare successive windowed maxima (one revolution is ~2*pi/sqrt(bc)
    // ~ 209 steps at default parameters).
    constexpr std::int64_t kRev = 250;
    std::vector<double> envelope;
    for (std::int64_t b = first_reset; b + kRev <= len; b += kRev) {
        double m = 0.0;
        for (std::int64_t t = b; t < b + kRev; ++t)
            m = std::max(m, std::hypot(st[static_cast<std::size_t>(t)].x,
                                       st[static_cast<std::size_t>(t)].y));
        envelope.push_back(m);
    }
    diag.radius_envelope_nondecreasing = envelope.size() >= 2;
    for (std::size_t i = 1; i < envelope.size(); ++i)
        if (envelope[i] < envelope[i - 1]) diag.radius_envelope_nondecreasing = false;

    // Level structure of u over a late 500-step window: sub-threshold
    // samples are compared exactly (a fixed reset pins them), everything
    // above threshold counts as the single firing level.
    const std::int64_t w0 = std::min<std::int64_t>(5000, len >= 1500 ? len - 1000 : 0);
    const std::int64_t w1 = std::min<std::int64_t>(w0 + 500, len);
    std::set<double> sub_levels;
    bool any_super = false;
    bool alternates = w1 - w0 > 10;
    const NdsParams& p = cfg.params;
    for (std::int64_t t = w0; t < w1; ++t) {
        const double u = st[static_cast<std::size_t>(t)].u;
        if (u > p.theta) any_super = true;
        else sub_levels.insert(u);
        if (t > w0) {
            const double prev = st[static_cast<std::size_t>(t - 1)].u;
            const bool ok = prev > p.theta ? u == eta0 : u > p.theta;
            alternates = alternates && ok;
        }
    }
    diag.distinct_post_transient_u = static_cast<int>(sub_levels.size()) + (any_super ? 1 : 0);
    diag.u_alternates_two_levels = alternates && sub_levels.size() == 1 && any_super;
    return diag;
}

} // namespace

ResetScanReport run_reset_scan(const std::vector<double>& values, std::int64_t ics_per_value,
                               std::uint64_t seed, int parallelism) {
    if (values.empty()) throw std::invalid_argument("reset scan: values must be non-empty");
    if (ics_per_value < 1) throw std::invalid_argument("reset scan: ics_per_value must be >= 1");
    for (double v : values)
        if (v < -2.0 || v > 0.1)
            throw std::invalid_argument("reset scan: values must lie within [-2, 0.1]");

    constexpr std::int64_t tau = 100;
    constexpr std::int64_t kScanSteps = 30000;
    const NdsParams defaults;

    const std::int64_t per = ics_per_value;
    const std::int64_t n = static_cast<std::int64_t>(values.size()) * per;
    std::vector<StabilizationVerdict> verdicts(static_cast<std::size_t>(n));

    parallel_for(n, parallelism, [&](std::int64_t idx) {
        const std::int64_t vi = idx / per;
        const std::int64_t ici = idx % per;
        const double eta0 = values[static_cast<std::size_t>(vi)];
        const std::uint64_t run_seed = derive_seed(seed, key_of(eta0), static_cast<std::uint64_t>(ici));

        ControlledRunConfig cfg = feedback_config(tau, kDefaultFeedbackWeight,
                                                  sample_initial(run_seed), kScanSteps);
        cfg.reset = ResetPolicy::fixed_at(eta0);
        cfg.rng_seed = run_seed;
        verdicts[static_cast<std::size_t>(idx)] = classify_run(run_controlled(cfg), tau);
    });

    ResetScanReport report;
    report.seed = seed;
    for (std::size_t vi = 0; vi < values.size(); ++vi) {
        ResetScanEntry entry;
        entry.eta0 = values[vi];
        if (entry.eta0 > defaults.theta)
            entry.regime = ResetRegime::above_threshold_2d;
        else if (entry.eta0 >= defaults.theta - 0.035)
            entry.regime = ResetRegime::near_threshold_alternating;
        else
            entry.regime = ResetRegime::chaotic_stabilizing;

        double time_sum = 0.0;
        for (std::int64_t ici = 0; ici < per; ++ici) {
            const auto& v = verdicts[vi * static_cast<std::size_t>(per) + static_cast<std::size_t>(ici)];
            switch (v.kind) {
                case StabilizationVerdict::Kind::stabilized:
                    ++entry.counts.stabilized;
                    if (v.full_stabilization_time) ++entry.counts.fully_stabilized;
                    time_sum += static_cast<double>(*v.spike_stabilization_time);
                    break;
                case StabilizationVerdict::Kind::diverged: ++entry.counts.diverged; break;
                case StabilizationVerdict::Kind::unresolved: ++entry.counts.unresolved; break;
            }
        }
        entry.reliability = static_cast<double>(entry.counts.stabilized) / static_cast<double>(per);
        if (entry.counts.stabilized > 0)
            entry.mean_stabilization_time = time_sum / static_cast<double>(entry.counts.stabilized);
        entry.diagnostics = probe_regime(entry.eta0, derive_seed(seed, key_of(entry.eta0), 0x9906Eull));
        report.per_value.push_back(entry);
    }
    return report;
}

} // namespace nds
