// Acceptance suite: runs every criterion at its stated tolerance and prints
// one pass/fail line each. Exit status 0 iff all pass.

#include <cstdio>
#include <functional>
#include <thread>
#include <vector>

#include "qpath/verify.hpp"

int main() {
    using namespace qpath::verify;
    VerifyOptions opt;
    opt.full = true;
    opt.threads = std::max(1u, std::thread::hardware_concurrency());

    const std::vector<std::function<CheckResult(const VerifyOptions&)>> criteria = {
        check_fig1_median_vs_mlp,
        check_qnd_shoot_equivalence,
        check_energy_conservation,
        check_qnd_action_identity,
        check_zeno_closed_forms,
        check_instanton_asymptotics,
        check_switching_rate,
        check_distributional,
        check_discrete_action_stationarity,
    };

    bool all_pass = true;
    for (const auto& criterion : criteria) {
        const CheckResult r = criterion(opt);
        all_pass = all_pass && r.pass;
        std::printf("[%s] %s (%.1f s): %s\n", r.pass ? "PASS" : "FAIL", r.name.c_str(),
                    r.seconds, r.details.c_str());
        std::fflush(stdout);
    }
    std::printf("%s\n", all_pass ? "acceptance: all criteria passed"
                                 : "acceptance: FAILURES present");
    return all_pass ? 0 : 1;
}
