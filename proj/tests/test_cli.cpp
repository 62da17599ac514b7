#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "conewave_cli/commands.hpp"

using namespace conewave;
using namespace conewave::cli;

namespace {

Config from_text(const std::string& text) {
    std::istringstream in(text);
    return Config::parse(in);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string scratch(const std::string& name) {
    auto p = std::filesystem::temp_directory_path() / ("conewave_test_cli_" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

double logged(const std::string& log, const std::string& key) {
    std::istringstream in(log);
    std::string line;
    while (std::getline(in, line))
        if (line.rfind(key + " ", 0) == 0) return std::stod(line.substr(key.size() + 1));
    FAIL("missing " << key);
    return 0.0;
}

}  // namespace

TEST_CASE("config: parsing, comments, unknown keys") {
    auto c = from_text("# comment\n grid.rmax = 20  # trailing\n\nlink.kind=circle\nlink.n=2\n");
    CHECK(c.num("grid.rmax") == 20.0);
    CHECK(c.str("link.kind") == "circle");
    CHECK(c.integer("grid.nodes") == 400);

    CHECK_THROWS_AS(from_text("grid.rmx=3\n"), ConfigError);
    CHECK_THROWS_AS(from_text("grid.rmax\n"), ConfigError);
    CHECK_THROWS_AS(c.set("nope", "1"), ConfigError);
    c.set("grid.rmax", "12x");
    CHECK_THROWS_AS(c.num("grid.rmax"), ConfigError);
    c.set("resolvent.dump", "maybe");
    CHECK_THROWS_AS(c.flag("resolvent.dump"), ConfigError);
}

TEST_CASE("config: hash ignores jobs and output dir") {
    Config a, b;
    b.set("run.jobs", "4");
    b.set("output.dir", "/elsewhere");
    CHECK(a.hash() == b.hash());
    CHECK(a.hash_hex().size() == 16);
    b.set("run.seed", "7");
    CHECK(a.hash() != b.hash());
    Config d;
    d.set("grid.nodes", "401");
    CHECK(a.hash() != d.hash());
}

TEST_CASE("config: validation") {
    CHECK_NOTHROW(load_experiment(Config{}));
    const auto e = load_experiment(Config{});
    CHECK(e.spec.n == 3);
    CHECK(e.nu == doctest::Approx(0.5));

    auto bad = [](const char* key, const char* value) {
        Config c;
        c.set(key, value);
        return c;
    };
    CHECK_THROWS_AS(load_experiment(bad("link.kind", "torus")), ConfigError);
    CHECK_THROWS_AS(load_experiment(bad("link.kind", "circle")), ConfigError);  // n = 3
    CHECK_THROWS_AS(load_experiment(bad("mode.j", "999")), ConfigError);
    CHECK_THROWS_AS(load_experiment(bad("lambda.lo", "20")), ConfigError);
    CHECK_THROWS_AS(load_experiment(bad("resolvent.sign", "both")), ConfigError);
    CHECK_THROWS_AS(load_experiment(bad("resolvent.k", "9")), ConfigError);
    CHECK_THROWS_AS(load_experiment(bad("potential.family", "gaussian(1")), ConfigError);
    CHECK_THROWS_AS(load_experiment(bad("verify.criteria", "1,13")), ConfigError);
    CHECK_THROWS_AS(load_experiment(bad("data.center", "11")), ConfigError);
    CHECK(load_experiment(bad("verify.criteria", "2, 5")).criteria == std::vector<int>{2, 5});
}

TEST_CASE("guarded maps exceptions to exit codes") {
    std::ostringstream err;
    CHECK(guarded([]() -> int { throw ConfigError("x"); }, err) == kConfigError);
    CHECK(guarded([]() -> int { throw DomainError("x"); }, err) == kConfigError);
    CHECK(guarded([]() -> int { throw NearSingularError("x", 0.0); }, err) == kNumericalError);
    CHECK(guarded([] { return kVerifyFail; }, err) == kVerifyFail);
}

TEST_CASE("spectrum: header comment and bit-identical reruns") {
    Config c;
    c.set("link.j_max", "5");
    auto e = load_experiment(c);
    std::ostringstream log;
    const auto dir_a = scratch("spec_a"), dir_b = scratch("spec_b");
    e.out_dir = dir_a;
    CHECK(cmd_spectrum(e, log) == kPass);
    e.out_dir = dir_b;
    CHECK(cmd_spectrum(e, log) == kPass);
    const auto text_a = slurp(dir_a + "/spectrum.csv");
    CHECK(text_a == slurp(dir_b + "/spectrum.csv"));
    CHECK(text_a.rfind("# conewave config " + e.hash + "\nlevel,mu2,mu,nu,multiplicity,first_mode\n", 0) == 0);
}

TEST_CASE("resolvent: V = 0 equals free, Birman-Schwinger defect, tuned resonance") {
    Config c;
    c.set("grid.nodes", "160");
    c.set("grid.rmax", "10");
    c.set("lambda.samples", "4");
    auto e = load_experiment(c);
    e.out_dir = scratch("res0");
    std::ostringstream log;
    CHECK(cmd_resolvent(e, log) == kPass);
    CHECK(logged(log.str(), "perturbed_vs_free") == 0.0);
    CHECK(slurp(e.out_dir + "/free_kernel.csv") == slurp(e.out_dir + "/perturbed_kernel.csv"));

    c.set("potential.family", "gaussian(1,1)");
    c.set("resolvent.dump", "false");
    e = load_experiment(c);
    e.out_dir = scratch("res1");
    std::ostringstream log1;
    CHECK(cmd_resolvent(e, log1) == kPass);
    const std::string bs = log1.str().substr(log1.str().find("birman_schwinger_defect M=2 ") + 28);
    CHECK(std::stod(bs) < 1e-8);

    c.set("potential.family", "gaussian(-1,1)");
    c.set("potential.tune_lo", "1");
    c.set("potential.tune_hi", "5");
    e = load_experiment(c);
    e.out_dir = scratch("res2");
    std::ostringstream log2;
    CHECK(cmd_resolvent(e, log2) == kNumericalError);
    CHECK(log2.str().find("resonance flag") != std::string::npos);
    const auto scan = slurp(e.out_dir + "/fredholm.csv");
    CHECK(scan.find("lambda,smin,flag\n0.00000000000000000e+00,") != std::string::npos);
}

TEST_CASE("propagate: Weber oracle, unitarity, theta independence") {
    Config c;
    c.set("grid.rmax", "24");
    c.set("grid.nodes", "800");
    c.set("t.value", "0.5");
    auto e = load_experiment(c);
    e.out_dir = scratch("prop");
    std::ostringstream log;
    CHECK(cmd_propagate(e, log) == kPass);
    CHECK(logged(log.str(), "weber_oracle_defect") < 1e-6);
    CHECK(logged(log.str(), "unitarity_defect") < 1e-8);

    c.set("propagate.kind", "cone");
    c.set("propagate.r_points", "12");
    c.set("propagate.theta_points", "5");
    e = load_experiment(c);
    e.out_dir = scratch("cone");
    std::ostringstream log2;
    CHECK(cmd_propagate(e, log2) == kPass);
    CHECK(logged(log2.str(), "theta_spread") < 1e-12);
}

TEST_CASE("verify: selected criteria only") {
    Config c;
    c.set("verify.criteria", "4");
    auto e = load_experiment(c);
    e.out_dir = scratch("verify");
    std::ostringstream log;
    CHECK(cmd_verify(e, log) == kPass);
    CHECK(log.str().rfind("PASS 4 ", 0) == 0);
}
