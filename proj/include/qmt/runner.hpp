#pragma once

#include <map>
#include <optional>
#include <string>

#include "qmt/certificate.hpp"
#include "qmt/explore.hpp"
#include "qmt/script.hpp"

namespace qmt {

struct RunConfig {
    std::uint64_t seed = 20110614ULL;
    int samples = 10000;
    Rational delta = make_rational(1, 20);
    bool force = false;  // lets Undecided/Fail regularity adjunctions through
    std::optional<Rational> eps_override;
    std::optional<int> dmax_override;
    std::optional<int> samples_override;
    std::optional<Rational> delta_override;
    Tolerances tol;
    std::string script_name = "script";
};

// Exit codes: 0 all statements succeeded, 2 regularity failure,
// 3 certification failure, 4 syntax error (set by the caller), 1 other.
struct RunReport {
    std::vector<std::string> lines;
    int exit_code = 0;
    bool halted = false;
    std::optional<TowerState> tower;
    std::map<std::string, std::string> artifacts;  // filename -> contents

    std::string text() const;
};

RunReport run_script(const ProblemScript& script, const RunConfig& config);

// Writes the report and all artifacts into dir (created if needed).
// Returns the list of file names written.
std::vector<std::string> emit_outputs(const RunReport& report, const std::string& dir);

// Simple key=value configuration file; unknown keys are rejected.
void load_config_file(const std::string& path, RunConfig& config);

}  // namespace qmt
