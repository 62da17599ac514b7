#include <cstdio>
#include <cstdlib>
#include <string>

#include "conewave/acceptance.hpp"

// Acceptance criteria 1-12 with the pinned tolerances; optional arguments select criteria.
int main(int argc, char** argv) {
    conewave::AcceptanceOptions opt;
    for (int i = 1; i < argc; ++i) opt.only.push_back(std::atoi(argv[i]));
    bool ok = true;
    opt.on_result = [&](const conewave::CriterionResult& r) {
        std::printf("%s\n", conewave::format_result(r).c_str());
        for (const auto& d : r.details) std::printf("    %s\n", d.c_str());
        std::fflush(stdout);
        ok = ok && r.pass;
    };
    conewave::run_acceptance(opt);
    return ok ? 0 : 1;
}
