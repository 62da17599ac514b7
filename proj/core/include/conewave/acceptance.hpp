#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace conewave {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    double measured = 0.0;   // worst value over the cases of the criterion
    double threshold = 0.0;  // pinned tolerance it is compared against
    std::vector<std::string> details;  // per-case lines (scan summaries, defects)
};

struct AcceptanceOptions {
    int jobs = 1;
    std::uint64_t seed = 12345;
    std::vector<int> only;   // empty: criteria 1..12
    std::string csv_dir;     // when set, scan/decay CSVs are written here
    std::string csv_header;  // first line of every CSV (e.g. "# config <hash>")
    std::function<void(const CriterionResult&)> on_result;
};

constexpr int kCriterionCount = 12;

const char* criterion_name(int id);

// One criterion; numerical exceptions are caught and reported as FAIL.
CriterionResult run_criterion(int id, const AcceptanceOptions& opt);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt);

// "PASS|FAIL <id> <name> measured <v> threshold <t>".
std::string format_result(const CriterionResult& r);

}  // namespace conewave
