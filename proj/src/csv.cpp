#include "nds/csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nds {

namespace {

void check_stream(const std::ios& s, const std::string& path) {
    if (!s) throw std::runtime_error("I/O error on " + path);
}

double parse_field(const std::string& field) {
    std::size_t pos = 0;
    const double v = std::stod(field, &pos);
    if (pos != field.size()) throw std::runtime_error("bad CSV numeric field: " + field);
    return v;
}

} // namespace

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void emit_run_csv(const RunRecord& record, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    check_stream(out, path);
    out << "t,x,y,u,gamma,D\n";
    const std::size_t n = record.trajectory.states.size();
    for (std::size_t t = 0; t < n; ++t) {
        const NdsState& s = record.trajectory.states[t];
        const double drive = t < record.drives.size() ? record.drives[t] : 0.0;
        out << t << ',' << format_double(s.x) << ',' << format_double(s.y) << ','
            << format_double(s.u) << ',' << int(record.trajectory.spikes[t]) << ','
            << format_double(drive) << '\n';
    }
    out.flush();
    check_stream(out, path);
}

RunRecord read_run_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    check_stream(in, path);
    std::string line;
    if (!std::getline(in, line) || line != "t,x,y,u,gamma,D")
        throw std::runtime_error("unexpected CSV header in " + path);

    RunRecord rec;
    std::int64_t t = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(row, field, ',')) fields.push_back(field);
        if (fields.size() != 6) throw std::runtime_error("bad CSV row in " + path);
        NdsState s;
        s.x = parse_field(fields[1]);
        s.y = parse_field(fields[2]);
        s.u = parse_field(fields[3]);
        rec.trajectory.states.push_back(s);
        const int gamma = static_cast<int>(parse_field(fields[4]));
        rec.trajectory.spikes.push_back(static_cast<std::uint8_t>(gamma));
        rec.drives.push_back(parse_field(fields[5]));
        if (gamma) rec.spike_times.push_back(t);
        ++t;
    }
    return rec;
}

void emit_report(const ReliabilityReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    check_stream(out, path);
    out << "tau,stabilized,diverged,unresolved,reliability\n";
    std::int64_t stab = 0, div = 0, unres = 0;
    for (const auto& [tau, counts] : report.per_tau) {
        const std::int64_t total = counts.stabilized + counts.diverged + counts.unresolved;
        out << tau << ',' << counts.stabilized << ',' << counts.diverged << ','
            << counts.unresolved << ','
            << format_double(static_cast<double>(counts.stabilized) / static_cast<double>(total))
            << '\n';
        stab += counts.stabilized;
        div += counts.diverged;
        unres += counts.unresolved;
    }
    out << "overall," << stab << ',' << div << ',' << unres << ','
        << format_double(report.overall_reliability) << '\n';
    out.flush();
    check_stream(out, path);
}

void emit_report(const ResetScanReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    check_stream(out, path);
    out << "eta0,regime,reliability,mean_stab_time\n";
    for (const auto& entry : report.per_value) {
        out << format_double(entry.eta0) << ',' << to_string(entry.regime) << ','
            << format_double(entry.reliability) << ','
            << format_double(entry.mean_stabilization_time.value_or(
                   std::numeric_limits<double>::quiet_NaN()))
            << '\n';
    }
    out.flush();
    check_stream(out, path);
}

} // namespace nds
