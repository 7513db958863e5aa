#pragma once

// Built-in invariant suite run by `qstar verify`.

#include <string>
#include <vector>

namespace qstar::verify {

struct CheckResult {
    std::string name;
    bool passed = false;
    double observed = 0.0;
    double expected = 0.0;
    double tolerance = 0.0;
    double seconds = 0.0;
    std::string detail;
};

struct SuiteOptions {
    /// Zeroes the tolerance of one check, which must then fail.
    bool self_test_fault = false;
};

std::vector<CheckResult> run_suite(const SuiteOptions& options = {});

}  // namespace qstar::verify
