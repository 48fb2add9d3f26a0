#pragma once

#include <string>
#include <vector>

namespace cmforge {

// Outcome of one verified identity; `ref` is a short descriptive tag of the
// statement being checked.
struct CheckResult {
    std::string name;
    std::string ref;
    bool passed = false;
    std::string detail;
};

inline bool all_passed(const std::vector<CheckResult>& rs) {
    for (const auto& r : rs)
        if (!r.passed) return false;
    return true;
}

}  // namespace cmforge
