#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "nds/control.hpp"
#include "nds/types.hpp"

namespace nds {

/// Spike times extracted from a trajectory, with the run length they came from.
struct SpikeTrain {
    std::vector<std::int64_t> times;   ///< strictly increasing, all < horizon
    std::int64_t horizon = 0;
};

/// Outcome of stabilization detection on one run.
struct StabilizationVerdict {
    enum class Kind { stabilized, diverged, unresolved };
    Kind kind = Kind::unresolved;
    std::optional<std::int64_t> spike_stabilization_time;
    std::optional<std::int64_t> full_stabilization_time;
    std::optional<std::int64_t> period;   ///< in time steps, multiple of the probed tau

    [[nodiscard]] bool stabilized() const { return kind == Kind::stabilized; }
};

/// Which observable a lag-tau difference series is computed from.
enum class DiffVariable { x, y, u, xy_plane, xyz_euclidean };

/// Lag-tau self-difference series. `values[i]` corresponds to time
/// t = lag + i and holds |rho(t) - rho(t-lag)| for scalar variables, the
/// 2-D norm for xy_plane and the 3-D Euclidean distance for xyz_euclidean.
/// For xy_plane the signed difference pair is kept alongside for plotting.
struct DifferenceSeries {
    DiffVariable variable = DiffVariable::u;
    std::int64_t lag = 0;
    std::vector<double> values;
    std::vector<double> dx;   ///< xy_plane only
    std::vector<double> dy;   ///< xy_plane only
};

/// Indices of the 1-entries of the trajectory's spike sequence.
[[nodiscard]] SpikeTrain extract_spikes(const Trajectory& trajectory);

/// Earliest spike time from which the spike pattern is tau-periodic over
/// `window` steps: finds the first window start w >= from such that
/// s is a spike <=> s+tau is a spike for all s in [w, w+window) and the
/// window contains at least one spike, then returns the first spike at or
/// after w. A window without spikes never qualifies.
[[nodiscard]] std::optional<std::int64_t> spike_periodicity(const SpikeTrain& train,
                                                            std::int64_t tau,
                                                            std::int64_t window,
                                                            std::int64_t from = 0);

/// Earliest t* >= tau such that the lag-tau sup-norm difference of (x,y,u)
/// stays below epsilon for all steps in [t*, t*+window).
[[nodiscard]] std::optional<std::int64_t> full_stabilization(const Trajectory& trajectory,
                                                             std::int64_t tau,
                                                             double epsilon,
                                                             std::int64_t window);

/// Lag-tau self-difference series for the selected variable.
[[nodiscard]] DifferenceSeries difference_pattern(const Trajectory& trajectory,
                                                  DiffVariable variable,
                                                  std::int64_t tau);

/// Tolerance and window defaults for run classification.
struct ClassifyOptions {
    double epsilon = 1e-6;
    int max_period_multiple = 10;
};

/// Full verdict for a run: diverged when the record carries an escape,
/// otherwise stabilized at the smallest period multiple m*tau whose spike
/// pattern locks (window 2*m*tau), with the full-stabilization time filled
/// when the continuous state has converged too; unresolved otherwise.
[[nodiscard]] StabilizationVerdict classify_run(const RunRecord& record, std::int64_t tau,
                                                const ClassifyOptions& options = {});

} // namespace nds
