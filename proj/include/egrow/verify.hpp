#pragma once

#include <string>
#include <vector>

namespace egrow {

/// Outcome of one numerical property check.
struct CheckResult {
    std::string name;
    bool passed = false;
    double value = 0.0;      ///< measured error (or violation)
    double tolerance = 0.0;  ///< pass threshold for `value`
    std::string detail;
};

/// Names of the checks in the property suite, in run order.
std::vector<std::string> check_names();

/// Run every check whose name contains `filter` (all checks if empty).
/// Checks are deterministic for a given seed.
std::vector<CheckResult> run_checks(const std::string& filter = {}, unsigned seed = 12345);

}  // namespace egrow
