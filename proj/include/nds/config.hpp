#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nds/control.hpp"

namespace nds {

/// Merged knobs driving the CLI subcommands. Defaults are the published
/// parameter values plus the standard harness choices. File values override
/// defaults; command-line flags override both.
struct Settings {
    NdsParams params;

    std::int64_t tau = 100;
    double weight = 0.3;
    std::int64_t control_on = 1001;
    std::optional<std::int64_t> control_off;
    std::optional<std::int64_t> total_steps;   ///< unset = subcommand default
    std::uint64_t seed = 42;
    std::optional<std::int64_t> ics;           ///< unset = subcommand default
    int parallel = 0;

    ResetPolicy::Kind reset_kind = ResetPolicy::Kind::fixed;

    double inject_value = 1.0;
    std::int64_t inject_phase = 3;
    std::int64_t inject_period = 100;
    FixedInjection::Mode inject_mode = FixedInjection::Mode::assign;

    std::vector<std::int64_t> tau_list{50, 100, 250, 500, 1000};
    std::vector<double> eta0_list{0.1, -0.02, -0.05, -0.5, -1.0, -1.2, -2.0};

    /// Reset policy assembled from the reset kind and eta0.
    [[nodiscard]] ResetPolicy reset_policy() const {
        return {reset_kind, params.eta0};
    }
};

/// Applies one `key = value` assignment. `line` is used in error messages
/// (0 for command-line origin). Throws ConfigError on unknown keys or
/// malformed / out-of-domain values.
void apply_setting(Settings& settings, std::string_view key, std::string_view value, int line = 0);

/// Parses a flat key-value document (one `key = value` per line, `#`
/// comments, blank lines allowed) on top of the given settings.
void parse_config_text(Settings& settings, std::string_view text);

/// parse_config_text on a file's contents.
void parse_config_file(Settings& settings, const std::string& path);

/// Domain checks that span multiple keys.
void validate_settings(const Settings& settings);

} // namespace nds
