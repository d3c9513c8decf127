// SPDX-License-Identifier: MIT
//
// Self-checks used by the `verify` command: internal identities,
// residuals of the dynamic-programming equation, shape properties of
// the value function, Monte Carlo agreement and reproducibility. The
// report text is a pure function of (params, seed, n_paths); it never
// contains timings or addresses, so repeated runs are byte-identical.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qdd/model.hpp"

namespace qdd {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct VerifyReport {
    std::string preset;
    std::vector<CheckResult> checks;
    bool all_pass = true;
};

VerifyReport verify_preset(const std::string& preset_name,
                           const ModelParams& p, std::uint64_t seed,
                           int threads, std::int64_t n_paths);

// Fixed-width table, one line per check.
std::string format_report(const std::vector<VerifyReport>& reports);

}  // namespace qdd
