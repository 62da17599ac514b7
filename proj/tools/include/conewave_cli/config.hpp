#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "conewave/linkspec.hpp"
#include "conewave/potential.hpp"

namespace conewave::cli {

struct KeyDef {
    const char* key;
    const char* fallback;
    const char* doc;
};

// Every accepted key with its default, in documentation order.
const std::vector<KeyDef>& config_keys();

// Flat key=value text; '#' starts a comment, blank lines are ignored.
class Config {
public:
    Config();  // all defaults

    static Config parse(std::istream& in, const std::string& source = "<config>");
    static Config load(const std::string& path);

    // Throws ConfigError for unknown keys.
    void set(const std::string& key, const std::string& value);
    const std::string& str(const std::string& key) const;
    double num(const std::string& key) const;
    long long integer(const std::string& key) const;
    bool flag(const std::string& key) const;

    // Sorted key=value lines of everything that can change an output (run.jobs and output.dir excluded).
    std::string canonical() const;
    std::uint64_t hash() const;  // FNV-1a of canonical()
    std::string hash_hex() const;

private:
    std::map<std::string, std::string> values_;
};

struct ExperimentConfig {
    LinkSpectrum spec;
    std::size_t mode = 0;
    double nu = 0.5;

    double rmax = 12.0;
    int nodes = 400;

    PotentialSpec V;
    double tune_lo = 0.0;  // tune_hi > 0: rescale V to its zero-energy crossing in [tune_lo, tune_hi]
    double tune_hi = 0.0;

    double lambda = 1.0;
    double lambda_lo = 0.1;
    double lambda_hi = 10.0;
    int lambda_samples = 21;

    std::string sign = "plus";
    int k = 0;
    int bs_order = 2;
    double threshold = 1e-6;
    bool dump_kernel = true;
    bool jost = false;

    double sigma = 1.0;
    double alpha = 0.0;

    double t = 1.0;
    double data_center = 4.0;
    double data_width = 0.6;
    int data_modes = 1;

    std::string propagate_kind = "mode";
    double out_rmax = 10.0;
    int r_points = 64;
    int theta_points = 8;
    double tol = 1e-10;

    std::vector<int> criteria;  // empty: all

    std::string out_dir = ".";
    int jobs = 1;
    std::uint64_t seed = 12345;
    std::string hash;
};

// Validates every value against the preconditions of the modules it feeds (ConfigError).
ExperimentConfig load_experiment(const Config& c);

}  // namespace conewave::cli
