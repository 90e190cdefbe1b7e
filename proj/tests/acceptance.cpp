// Acceptance suite: runs every battery criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit status is nonzero when any
// criterion fails.

#include <cstdio>

#include "fraclap/battery.hpp"

int main()
{
    fraclap::battery::BatteryContext ctx;
    bool all_pass = true;
    const auto results = fraclap::battery::run_battery(ctx, [&](const fraclap::battery::CriterionResult& r) {
        std::printf("[%s] %d. %s: %s [%.1fs]\n", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                    r.detail.c_str(), r.seconds);
        std::fflush(stdout);
    });
    for (const auto& r : results) all_pass = all_pass && r.pass;
    std::printf("%s: %zu/%zu criteria passed\n", all_pass ? "ACCEPTANCE PASS" : "ACCEPTANCE FAIL",
                static_cast<std::size_t>(std::count_if(results.begin(), results.end(),
                                                       [](const auto& r) { return r.pass; })),
                results.size());
    return all_pass ? 0 : 1;
}
