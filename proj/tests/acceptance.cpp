// One PASS/FAIL line per acceptance criterion, followed by its checks.

#include "dnspde/cli.hpp"
#include "dnspde/format.hpp"

#include <iostream>
#include <string>

int main(int argc, char** argv)
{
    using namespace dnspde;
    AcceptanceOptions opt;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--seed") {
            opt.seed = std::stoull(argv[i + 1]);
        } else if (flag == "--jobs") {
            opt.jobs = std::stoi(argv[i + 1]);
        }
    }

    std::vector<CriterionResult> results;
    for (const auto& spec : library_criteria()) {
        results.push_back(spec.run(opt));
    }
    results.push_back(criterion_reproducibility(opt));

    int failed = 0;
    for (const auto& r : results) {
        std::cout << format_criterion_line(r) << '\n';
        for (const auto& c : r.checks) {
            std::cout << "  - " << c.name << ' ' << format_double(c.measured) << ' ' << c.relation << ' '
                      << format_double(c.threshold) << (c.pass ? "" : "  <-- FAIL") << '\n';
        }
        failed += r.pass() ? 0 : 1;
    }
    std::cout << (failed ? "ACCEPTANCE FAIL: " : "ACCEPTANCE PASS: ") << results.size() - failed << '/'
              << results.size() << " criteria\n";
    return failed ? 1 : 0;
}
