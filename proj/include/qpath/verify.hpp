#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace qpath {
namespace verify {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string details;
    double seconds = 0.0;
};

struct VerifyOptions {
    bool full = false;        // include the Monte Carlo-heavy criteria (1 and 7)
    unsigned threads = 0;     // 0 -> hardware concurrency
    std::uint64_t seed = 20240901;
};

// Acceptance criteria, one function each. Tolerances and thresholds are the
// contract and are fixed here, not configurable.
CheckResult check_fig1_median_vs_mlp(const VerifyOptions& opt);        // 1
CheckResult check_qnd_shoot_equivalence(const VerifyOptions& opt);     // 2
CheckResult check_energy_conservation(const VerifyOptions& opt);       // 3
CheckResult check_qnd_action_identity(const VerifyOptions& opt);       // 4
CheckResult check_zeno_closed_forms(const VerifyOptions& opt);         // 5
CheckResult check_instanton_asymptotics(const VerifyOptions& opt);     // 6
CheckResult check_switching_rate(const VerifyOptions& opt);            // 7
CheckResult check_distributional(const VerifyOptions& opt);            // 8
CheckResult check_discrete_action_stationarity(const VerifyOptions& opt);  // 9

/// Runs the suite (criteria 1 and 7 only when opt.full) in criterion order.
std::vector<CheckResult> run_verify(const VerifyOptions& opt);

}  // namespace verify
}  // namespace qpath
