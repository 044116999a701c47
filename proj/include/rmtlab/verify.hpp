#pragma once

// Built-in invariant suites run by `rmtlab verify`. "trivial" holds the
// format and closed-form contracts; "properties" draws random instances from
// seeded generators and checks the invariants of every module.

#include <string>
#include <vector>

namespace rmtlab {

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

std::vector<std::string> suite_names();

/// Throws DomainError for an unknown suite. "all" runs every suite.
std::vector<CheckResult> run_suite(const std::string& suite);

}  // namespace rmtlab
