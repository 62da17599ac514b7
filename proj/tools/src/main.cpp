#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "CLI11.hpp"
#include "conewave_cli/commands.hpp"

namespace cli = conewave::cli;

namespace {

std::string data_dir(const char* argv0) {
    if (const char* env = std::getenv("CONEWAVE_DATA_DIR")) return env;
    const auto installed = std::filesystem::path(argv0).parent_path() / ".." / "share" / "conewave";
    if (std::filesystem::exists(installed / "bessel_table.txt")) return installed.string();
    return CONEWAVE_SOURCE_DATA_DIR;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conewave: resolvents and propagators on product cones"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    int jobs = 0;
    std::uint64_t seed = 0;
    bool seed_set = false;
    app.add_option("--config", config_path, "key=value config file");
    app.add_option("--out", out_dir, "output directory (overrides output.dir)");
    app.add_option("--jobs", jobs, "worker threads (overrides run.jobs)")->check(CLI::PositiveNumber);
    app.add_option_function<std::uint64_t>(
        "--seed", [&](std::uint64_t s) { seed = s; seed_set = true; }, "spot-check seed (overrides run.seed)");

    auto* spectrum = app.add_subcommand("spectrum", "link spectrum table");
    auto* resolvent = app.add_subcommand("resolvent", "free/perturbed kernels and Fredholm scans");
    auto* propagate = app.add_subcommand("propagate", "mode or full-cone propagation");
    auto* verify = app.add_subcommand("verify", "acceptance suite");
    auto* selftest = app.add_subcommand("selftest", "special-function and quadrature checks");
    for (auto* sub : {spectrum, resolvent, propagate, verify, selftest}) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::kConfigError;
    }

    if (selftest->parsed()) return cli::guarded([&] { return cli::cmd_selftest(std::cout, data_dir(argv[0])); }, std::cerr);

    return cli::guarded(
        [&] {
            cli::Config c = config_path.empty() ? cli::Config{} : cli::Config::load(config_path);
            if (!out_dir.empty()) c.set("output.dir", out_dir);
            if (jobs > 0) c.set("run.jobs", std::to_string(jobs));
            if (seed_set) c.set("run.seed", std::to_string(seed));
            const auto e = cli::load_experiment(c);
            if (spectrum->parsed()) return cli::cmd_spectrum(e, std::cout);
            if (resolvent->parsed()) return cli::cmd_resolvent(e, std::cout);
            if (propagate->parsed()) return cli::cmd_propagate(e, std::cout);
            return cli::cmd_verify(e, std::cout);
        },
        std::cerr);
}
