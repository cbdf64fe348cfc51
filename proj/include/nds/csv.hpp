#pragma once

#include <string>

#include "nds/control.hpp"
#include "nds/experiments.hpp"

namespace nds {

/// Decimal rendering with 17 significant digits: parses back to the exact
/// in-memory double.
[[nodiscard]] std::string format_double(double v);

/// Writes `t,x,y,u,gamma,D` rows, one per recorded step, LF line endings.
void emit_run_csv(const RunRecord& record, const std::string& path);

/// Reads a run CSV back into a record (trajectory, drives and spike times).
[[nodiscard]] RunRecord read_run_csv(const std::string& path);

/// Per-tau rows `tau,stabilized,diverged,unresolved,reliability` plus a
/// trailing `overall` summary row.
void emit_report(const ReliabilityReport& report, const std::string& path);

/// Rows `eta0,regime,reliability,mean_stab_time`.
void emit_report(const ResetScanReport& report, const std::string& path);

} // namespace nds
