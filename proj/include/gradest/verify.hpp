#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gradest {

struct CheckResult {
    std::string suite;
    std::string name;
    bool passed = false;
    double observed = 0.0; // the measured residual / statistic
    double bound = 0.0;    // what it was compared against
    std::string note;
};

enum class VerifySuite { identities, estimators, combination, all };

// Test-only fault injection: lets the negative-control test corrupt a sign
// convention and watch the named identity check fail. The CLI never sets it.
enum class FaultInjection { none, flip_laplace_sign };

struct VerifyConfig {
    std::int64_t trials = 1000000; // stochastic suites
    std::uint64_t seed = 42;
    int threads = 0;
    FaultInjection fault = FaultInjection::none;
};

std::vector<CheckResult> run_verify(VerifySuite suite, const VerifyConfig& cfg);

bool all_passed(std::span<const CheckResult> results);

VerifySuite parse_suite(const std::string& name); // identities | estimators | combination | all

// One machine-readable line: "ok <suite>/<name> observed=... bound=..." or "FAIL ...".
std::string format_check(const CheckResult& r);

} // namespace gradest
