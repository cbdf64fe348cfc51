#include "cli_app.hpp"

#include <CLI11.hpp>

#include <deque>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "nds/analysis.hpp"
#include "nds/config.hpp"
#include "nds/control.hpp"
#include "nds/core.hpp"
#include "nds/csv.hpp"
#include "nds/errors.hpp"
#include "nds/experiments.hpp"

namespace nds::cli {

namespace {

/// Raw flag values; only flags the user actually passed are applied on top
/// of config-file values, reusing the same key validation path.
struct FlagValues {
    std::string config_path;
    std::string out = "out.csv";
    std::string seed, tau, weight, eta0, reset, steps, ics, tau_list, eta0_list, parallel;
    std::string inject_value, inject_phase, inject_period, inject_mode;
    std::string dt = "0.01";
    bool strict = false;
};

struct FlagOptions {
    CLI::Option* seed = nullptr;
    CLI::Option* tau = nullptr;
    CLI::Option* weight = nullptr;
    CLI::Option* eta0 = nullptr;
    CLI::Option* reset = nullptr;
    CLI::Option* steps = nullptr;
    CLI::Option* ics = nullptr;
    CLI::Option* tau_list = nullptr;
    CLI::Option* eta0_list = nullptr;
    CLI::Option* parallel = nullptr;
    CLI::Option* inject_value = nullptr;
    CLI::Option* inject_phase = nullptr;
    CLI::Option* inject_period = nullptr;
    CLI::Option* inject_mode = nullptr;
};

FlagOptions add_common_flags(CLI::App* cmd, FlagValues& f) {
    FlagOptions o;
    cmd->add_option("--config", f.config_path, "configuration file (key = value lines)");
    cmd->add_option("--out", f.out, "output CSV path");
    o.seed = cmd->add_option("--seed", f.seed, "master seed");
    o.tau = cmd->add_option("--tau", f.tau, "feedback delay / candidate period");
    o.weight = cmd->add_option("--weight", f.weight, "feedback connection weight");
    o.eta0 = cmd->add_option("--eta0", f.eta0, "reset value");
    o.reset = cmd->add_option("--reset", f.reset, "reset kind: fixed or relative");
    o.steps = cmd->add_option("--steps", f.steps, "total run steps");
    o.ics = cmd->add_option("--ics", f.ics, "initial conditions per sweep entry");
    o.tau_list = cmd->add_option("--tau-list", f.tau_list, "comma-separated tau values");
    o.eta0_list = cmd->add_option("--eta0-list", f.eta0_list, "comma-separated reset values");
    o.parallel = cmd->add_option("--parallel", f.parallel, "worker count (0 = hardware)");
    o.inject_value = cmd->add_option("--inject-value", f.inject_value, "injected fixed value");
    o.inject_phase = cmd->add_option("--inject-phase", f.inject_phase, "injection phase within period");
    o.inject_period = cmd->add_option("--inject-period", f.inject_period, "injection period");
    o.inject_mode = cmd->add_option("--inject-mode", f.inject_mode, "assign or add");
    cmd->add_flag("--strict", f.strict, "exit 1 when a single run diverges");
    return o;
}

Settings merge_settings(const FlagValues& f, const FlagOptions& o) {
    Settings s;
    if (!f.config_path.empty()) parse_config_file(s, f.config_path);
    auto apply_if = [&](CLI::Option* opt, const char* key, const std::string& value) {
        if (opt && opt->count() > 0) apply_setting(s, key, value);
    };
    apply_if(o.seed, "seed", f.seed);
    apply_if(o.tau, "tau", f.tau);
    apply_if(o.weight, "weight", f.weight);
    apply_if(o.eta0, "eta0", f.eta0);
    apply_if(o.reset, "reset", f.reset);
    apply_if(o.steps, "total_steps", f.steps);
    apply_if(o.ics, "ics", f.ics);
    apply_if(o.tau_list, "tau_list", f.tau_list);
    apply_if(o.eta0_list, "eta0_list", f.eta0_list);
    apply_if(o.parallel, "parallel", f.parallel);
    apply_if(o.inject_value, "inject_value", f.inject_value);
    apply_if(o.inject_phase, "inject_phase", f.inject_phase);
    apply_if(o.inject_period, "inject_period", f.inject_period);
    apply_if(o.inject_mode, "inject_mode", f.inject_mode);
    validate_settings(s);
    return s;
}

const char* verdict_name(const StabilizationVerdict& v) {
    switch (v.kind) {
        case StabilizationVerdict::Kind::stabilized: return "stabilized";
        case StabilizationVerdict::Kind::diverged: return "diverged";
        case StabilizationVerdict::Kind::unresolved: return "unresolved";
    }
    return "unknown";
}

void print_verdict(std::ostream& out, const RunRecord& rec, const StabilizationVerdict& v) {
    out << "verdict=" << verdict_name(v);
    if (v.spike_stabilization_time) out << " spike_stabilization_time=" << *v.spike_stabilization_time;
    if (v.full_stabilization_time) out << " full_stabilization_time=" << *v.full_stabilization_time;
    if (v.period) out << " period=" << *v.period;
    if (rec.diverged_at) out << " diverged_at=" << *rec.diverged_at;
    out << " spikes=" << rec.spike_times.size() << '\n';
}

/// 1 when --strict and the run escaped, else 0.
int finish_single_run(std::ostream& out, const FlagValues& f, const RunRecord& rec,
                      const StabilizationVerdict& v) {
    emit_run_csv(rec, f.out);
    print_verdict(out, rec, v);
    return (f.strict && rec.diverged_at) ? 1 : 0;
}

int cmd_free_run(std::ostream& out, const FlagValues& f, const Settings& s) {
    ControlledRunConfig cfg;
    cfg.params = s.params;
    cfg.initial = sample_initial(s.seed);
    cfg.total_steps = s.total_steps.value_or(10000);
    cfg.control_on = 0;
    cfg.reset = s.reset_policy();
    cfg.rng_seed = s.seed;
    const RunRecord rec = run_controlled(cfg);
    return finish_single_run(out, f, rec, classify_run(rec, s.tau));
}

int cmd_stabilize(std::ostream& out, const FlagValues& f, const Settings& s) {
    ControlledRunConfig cfg = feedback_config(s.tau, s.weight, sample_initial(s.seed),
                                              s.total_steps.value_or(10000));
    cfg.params = s.params;
    cfg.control_on = s.control_on;
    cfg.control_off = s.control_off;
    cfg.reset = s.reset_policy();
    cfg.rng_seed = s.seed;
    const RunRecord rec = run_controlled(cfg);
    return finish_single_run(out, f, rec, classify_run(rec, s.tau));
}

int cmd_diff_analysis(std::ostream& out, const FlagValues& f, const Settings& s) {
    const DifferenceAnalysis da =
        run_difference_analysis(s.tau, s.seed, s.total_steps.value_or(10000));
    std::ofstream csv(f.out, std::ios::binary);
    if (!csv) throw std::runtime_error("I/O error on " + f.out);
    csv << "t,abs_dx,abs_dy,abs_du,pair_dx,pair_dy,euclidean\n";
    for (std::size_t i = 0; i < da.x.values.size(); ++i) {
        csv << (da.x.lag + static_cast<std::int64_t>(i)) << ',' << format_double(da.x.values[i])
            << ',' << format_double(da.y.values[i]) << ',' << format_double(da.u.values[i]) << ','
            << format_double(da.xy.dx[i]) << ',' << format_double(da.xy.dy[i]) << ','
            << format_double(da.euclidean.values[i]) << '\n';
    }
    csv.flush();
    if (!csv) throw std::runtime_error("I/O error on " + f.out);
    print_verdict(out, da.record, da.verdict);
    return (f.strict && da.record.diverged_at) ? 1 : 0;
}

int cmd_reconstruct(std::ostream& out, const FlagValues& f, const Settings& s) {
    const Reconstruction rec = run_reconstruction(s.tau, s.seed);
    std::string base = f.out;
    if (base.size() > 4 && base.ends_with(".csv")) base.resize(base.size() - 4);
    emit_run_csv(rec.feedback_run, base + ".feedback.csv");
    emit_run_csv(rec.forcing_run, base + ".forcing.csv");
    out << "feedback ";
    print_verdict(out, rec.feedback_run, rec.feedback_verdict);
    out << "forcing ";
    print_verdict(out, rec.forcing_run, rec.forcing_verdict);
    out << "max_u_distance=" << format_double(rec.max_u_distance)
        << " attempts=" << rec.attempts << '\n';
    return 0;
}

int cmd_sweep(std::ostream& out, const FlagValues& f, const Settings& s) {
    SweepConfig cfg;
    cfg.tau_values = s.tau_list;
    cfg.ics_per_tau = s.ics.value_or(200);
    cfg.base.params = s.params;
    cfg.base.reset = s.reset_policy();
    cfg.base.feedback = {FeedbackConnection{s.weight, s.tau}};
    cfg.seed = s.seed;
    cfg.parallelism = s.parallel;
    const ReliabilityReport report = run_reliability_sweep(cfg);
    emit_report(report, f.out);
    out << "overall_reliability=" << format_double(report.overall_reliability) << '\n';
    return 0;
}

int cmd_inject(std::ostream& out, const FlagValues& f, const Settings& s) {
    const InjectionOutcome res =
        run_fixed_injection(s.inject_value, s.inject_phase, s.inject_period, s.seed,
                            s.total_steps.value_or(30000), s.inject_mode);
    return finish_single_run(out, f, res.record, res.verdict);
}

int cmd_reset_run(std::ostream& out, const FlagValues& f, const Settings& s) {
    const InjectionOutcome res =
        run_reset_experiment(s.reset_policy(), s.seed, s.total_steps.value_or(10000));
    return finish_single_run(out, f, res.record, res.verdict);
}

int cmd_reset_scan(std::ostream& out, const FlagValues& f, const Settings& s) {
    const ResetScanReport report =
        run_reset_scan(s.eta0_list, s.ics.value_or(100), s.seed, s.parallel);
    emit_report(report, f.out);
    for (const auto& e : report.per_value)
        out << "eta0=" << format_double(e.eta0) << " regime=" << to_string(e.regime)
            << " reliability=" << format_double(e.reliability) << '\n';
    return 0;
}

int cmd_rossler_ref(std::ostream& out, const FlagValues& f, const Settings& s) {
    const double dt = std::stod(f.dt);
    const std::int64_t steps = s.total_steps.value_or(100000);
    const auto points = rossler_integrate({0.0, 0.0, 0.2}, RosslerParams{}, dt, steps);
    std::ofstream csv(f.out, std::ios::binary);
    if (!csv) throw std::runtime_error("I/O error on " + f.out);
    csv << "t,x,y,z\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
        csv << format_double(static_cast<double>(i) * dt) << ',' << format_double(points[i][0])
            << ',' << format_double(points[i][1]) << ',' << format_double(points[i][2]) << '\n';
    }
    csv.flush();
    if (!csv) throw std::runtime_error("I/O error on " + f.out);
    out << "points=" << points.size() << '\n';
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"NDS chaotic spiking neuron experiments"};
    app.require_subcommand(1);

    struct Cmd {
        CLI::App* sub;
        FlagValues flags;
        FlagOptions opts;
        int (*fn)(std::ostream&, const FlagValues&, const Settings&);
    };
    // deque: option callbacks hold pointers into flags, so addresses must
    // stay stable while subcommands are added
    std::deque<Cmd> cmds;
    auto add = [&](const char* name, const char* desc,
                   int (*fn)(std::ostream&, const FlagValues&, const Settings&)) {
        cmds.push_back(Cmd{app.add_subcommand(name, desc), {}, {}, fn});
        cmds.back().opts = add_common_flags(cmds.back().sub, cmds.back().flags);
    };
    add("free-run", "free-running neuron time series", cmd_free_run);
    add("stabilize", "feedback-controlled run with verdict", cmd_stabilize);
    add("diff-analysis", "lag-tau self-difference series", cmd_diff_analysis);
    add("reconstruct", "orbit reconstruction by recorded-pattern forcing", cmd_reconstruct);
    add("sweep", "stabilization reliability sweep", cmd_sweep);
    add("inject", "periodic fixed-value injection run", cmd_inject);
    add("reset-run", "feedback run under a reset policy", cmd_reset_run);
    add("reset-scan", "reset-value range scan", cmd_reset_scan);
    add("rossler-ref", "continuous reference attractor (RK4)", cmd_rossler_ref);

    // rossler-ref only: integrator step size
    for (auto& c : cmds)
        if (c.sub->get_name() == "rossler-ref")
            c.sub->add_option("--dt", c.flags.dt, "integrator time step");

    std::vector<const char*> argv;
    argv.reserve(args.size() + 1);
    argv.push_back("nds");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err) == 0 ? 0 : 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 2;
    }

    for (auto& c : cmds) {
        if (!c.sub->parsed()) continue;
        try {
            const Settings settings = merge_settings(c.flags, c.opts);
            return c.fn(out, c.flags, settings);
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        } catch (const std::invalid_argument& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return 1;
        }
    }
    err << "error: no subcommand\n";
    return 2;
}

} // namespace nds::cli
