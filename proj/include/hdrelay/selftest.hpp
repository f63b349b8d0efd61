#pragma once

#include <string>
#include <vector>

namespace hdrelay {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Quick invariant checks (well under a second).
std::vector<CheckResult> run_selftest();

}  // namespace hdrelay
