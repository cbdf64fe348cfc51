#include "nds/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nds {

SpikeTrain extract_spikes(const Trajectory& trajectory) {
    SpikeTrain train;
    train.horizon = static_cast<std::int64_t>(trajectory.spikes.size());
    for (std::int64_t t = 0; t < train.horizon; ++t)
        if (trajectory.spikes[static_cast<std::size_t>(t)]) train.times.push_back(t);
    return train;
}

std::optional<std::int64_t> spike_periodicity(const SpikeTrain& train, std::int64_t tau,
                                              std::int64_t window, std::int64_t from) {
    if (tau < 1) throw std::invalid_argument("spike_periodicity: tau must be >= 1");
    if (window < 2 * tau)
        throw std::invalid_argument("spike_periodicity: window must be >= 2*tau");
    if (train.times.empty()) return std::nullopt;

    const std::int64_t n = train.horizon;
    const std::int64_t last_start = n - window - tau;
    if (last_start < from) return std::nullopt;

    std::vector<std::uint8_t> b(static_cast<std::size_t>(n), 0);
    for (std::int64_t t : train.times) b[static_cast<std::size_t>(t)] = 1;

    std::int64_t bad = 0;     // lag-tau mismatches inside the current window
    std::int64_t spikes = 0;  // spikes inside the current window
    auto mismatch = [&](std::int64_t s) {
        return b[static_cast<std::size_t>(s)] != b[static_cast<std::size_t>(s + tau)];
    };

    for (std::int64_t s = from; s < from + window; ++s) {
        bad += mismatch(s) ? 1 : 0;
        spikes += b[static_cast<std::size_t>(s)];
    }
    for (std::int64_t w = from;; ++w) {
        if (bad == 0 && spikes > 0) {
            auto it = std::lower_bound(train.times.begin(), train.times.end(), w);
            return *it;   // window has a spike, so it exists
        }
        if (w == last_start) break;
        bad -= mismatch(w) ? 1 : 0;
        bad += mismatch(w + window) ? 1 : 0;
        spikes -= b[static_cast<std::size_t>(w)];
        spikes += b[static_cast<std::size_t>(w + window)];
    }
    return std::nullopt;
}

std::optional<std::int64_t> full_stabilization(const Trajectory& trajectory, std::int64_t tau,
                                               double epsilon, std::int64_t window) {
    if (tau < 1) throw std::invalid_argument("full_stabilization: tau must be >= 1");
    if (window < tau) throw std::invalid_argument("full_stabilization: window must be >= tau");
    const std::int64_t n = static_cast<std::int64_t>(trajectory.states.size());
    if (n <= tau + window - 1) return std::nullopt;

    auto lag_diff = [&](std::int64_t s) {
        const NdsState& a = trajectory.states[static_cast<std::size_t>(s)];
        const NdsState& b = trajectory.states[static_cast<std::size_t>(s - tau)];
        return std::max({std::abs(a.x - b.x), std::abs(a.y - b.y), std::abs(a.u - b.u)});
    };

    std::int64_t bad = 0;
    for (std::int64_t s = tau; s < tau + window; ++s) bad += lag_diff(s) >= epsilon ? 1 : 0;
    const std::int64_t last_start = n - window;
    for (std::int64_t t = tau;; ++t) {
        if (bad == 0) return t;
        if (t == last_start) break;
        bad -= lag_diff(t) >= epsilon ? 1 : 0;
        bad += lag_diff(t + window) >= epsilon ? 1 : 0;
    }
    return std::nullopt;
}

DifferenceSeries difference_pattern(const Trajectory& trajectory, DiffVariable variable,
                                    std::int64_t tau) {
    const std::int64_t n = static_cast<std::int64_t>(trajectory.states.size());
    if (n <= tau) throw std::invalid_argument("difference_pattern: trajectory length must exceed tau");

    DifferenceSeries out;
    out.variable = variable;
    out.lag = tau;
    out.values.reserve(static_cast<std::size_t>(n - tau));
    if (variable == DiffVariable::xy_plane) {
        out.dx.reserve(static_cast<std::size_t>(n - tau));
        out.dy.reserve(static_cast<std::size_t>(n - tau));
    }

    for (std::int64_t t = tau; t < n; ++t) {
        const NdsState& a = trajectory.states[static_cast<std::size_t>(t)];
        const NdsState& b = trajectory.states[static_cast<std::size_t>(t - tau)];
        switch (variable) {
            case DiffVariable::x: out.values.push_back(std::abs(a.x - b.x)); break;
            case DiffVariable::y: out.values.push_back(std::abs(a.y - b.y)); break;
            case DiffVariable::u: out.values.push_back(std::abs(a.u - b.u)); break;
            case DiffVariable::xy_plane: {
                const double dx = a.x - b.x;
                const double dy = a.y - b.y;
                out.dx.push_back(dx);
                out.dy.push_back(dy);
                out.values.push_back(std::hypot(dx, dy));
                break;
            }
            case DiffVariable::xyz_euclidean: {
                const double dx = a.x - b.x;
                const double dy = a.y - b.y;
                const double du = a.u - b.u;
                out.values.push_back(std::sqrt(dx * dx + dy * dy + du * du));
                break;
            }
        }
    }
    return out;
}

StabilizationVerdict classify_run(const RunRecord& record, std::int64_t tau,
                                  const ClassifyOptions& options) {
    StabilizationVerdict v;
    if (record.diverged_at) {
        v.kind = StabilizationVerdict::Kind::diverged;
        return v;
    }
    const SpikeTrain train = extract_spikes(record.trajectory);
    auto accept = [&](std::int64_t period, std::int64_t t1, std::int64_t window) {
        v.kind = StabilizationVerdict::Kind::stabilized;
        v.spike_stabilization_time = t1;
        v.period = period;
        v.full_stabilization_time =
            full_stabilization(record.trajectory, period, options.epsilon, window);
    };

    // Prefer the smallest multiple whose lock persists to the end of the
    // run: a long transient can contain one accidentally periodic window at
    // a smaller multiple than the pattern the run actually settles into.
    for (int m = 1; m <= options.max_period_multiple; ++m) {
        const std::int64_t period = m * tau;
        const std::int64_t window = 2 * period;
        if (train.horizon < period + window) break;
        if (!spike_periodicity(train, period, window, train.horizon - window - period))
            continue;
        auto t1 = spike_periodicity(train, period, window);
        if (!t1) continue;
        accept(period, *t1, window);
        return v;
    }
    // Fall back to the windowed detector: a verified lock that drifted
    // later still counts as a stabilization event.
    for (int m = 1; m <= options.max_period_multiple; ++m) {
        const std::int64_t period = m * tau;
        const std::int64_t window = 2 * period;
        if (train.horizon < period + window) break;
        auto t1 = spike_periodicity(train, period, window);
        if (!t1) continue;
        accept(period, *t1, window);
        return v;
    }
    v.kind = StabilizationVerdict::Kind::unresolved;
    return v;
}

} // namespace nds
