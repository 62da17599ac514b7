#include "conewave_cli/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>

#include "conewave/acceptance.hpp"
#include "conewave/errors.hpp"

namespace conewave::cli {

const std::vector<KeyDef>& config_keys() {
    static const std::vector<KeyDef> keys = {
        {"link.kind", "sphere", "circle | sphere | custom"},
        {"link.n", "3", "cone dimension (circle: 2, sphere: link S^{n-1})"},
        {"link.j_max", "4", "number of eigenvalue levels"},
        {"link.circumference", "0", "circle length; 0 means 2 pi"},
        {"link.file", "", "custom spectrum file (\"volume v\" then \"mu2 multiplicity\" lines)"},
        {"grid.rmax", "12", "radial cutoff"},
        {"grid.nodes", "400", "target number of radial nodes"},
        {"potential.family", "zero", "zero | gaussian(a,w) | polywell(a,s) | bump(a,r0,w)"},
        {"potential.sigma", "0", "decay exponent; 0 picks the family default"},
        {"potential.tune_lo", "0", "lower amplitude factor for zero-energy tuning"},
        {"potential.tune_hi", "0", "upper amplitude factor; > 0 enables tuning"},
        {"mode.j", "0", "flattened link mode index"},
        {"lambda.value", "1", "spectral parameter of the kernel dump"},
        {"lambda.lo", "0.1", "Fredholm scan lower end"},
        {"lambda.hi", "10", "Fredholm scan upper end"},
        {"lambda.samples", "21", "log-spaced scan samples"},
        {"resolvent.sign", "plus", "plus (+i0) | minus (-i0) | im"},
        {"resolvent.k", "0", "lambda-derivative order"},
        {"resolvent.bs_order", "2", "Birman-Schwinger expansion order M"},
        {"resolvent.threshold", "1e-6", "Fredholm indicator threshold"},
        {"resolvent.dump", "true", "write the dense kernels"},
        {"resolvent.jost", "false", "write the Jost solutions at lambda.value"},
        {"weight.sigma", "1", "weight exponent of L^{2,sigma}"},
        {"weight.alpha", "0", "weight exponent of the sup norm"},
        {"t.value", "1", "propagation time"},
        {"data.center", "4", "gaussian radial data centre"},
        {"data.width", "0.6", "gaussian radial data width"},
        {"data.modes", "1", "modes carrying data (cone propagation)"},
        {"propagate.kind", "mode", "mode | cone"},
        {"propagate.rmax", "10", "output radius (cone)"},
        {"propagate.r_points", "64", "output radii (cone)"},
        {"propagate.theta_points", "8", "output angles (cone)"},
        {"propagate.tol", "1e-10", "spectral tail tolerance"},
        {"verify.criteria", "all", "all or a comma list of criterion ids"},
        {"output.dir", ".", "CSV directory (--out overrides)"},
        {"run.jobs", "1", "worker threads (--jobs overrides)"},
        {"run.seed", "12345", "spot-check seed (--seed overrides)"},
    };
    return keys;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool excluded_from_hash(const std::string& key) { return key == "run.jobs" || key == "output.dir"; }

}  // namespace

Config::Config() {
    for (const auto& k : config_keys()) values_[k.key] = k.fallback;
}

Config Config::parse(std::istream& in, const std::string& source) {
    Config c;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(source + ":" + std::to_string(lineno) + ": expected key=value");
        try {
            c.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return c;
}

Config Config::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config " + path);
    return parse(in, path);
}

void Config::set(const std::string& key, const std::string& value) {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
    it->second = value;
}

const std::string& Config::str(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw ConfigError("unknown key '" + key + "'");
    return it->second;
}

double Config::num(const std::string& key) const {
    const auto& s = str(key);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v))
        throw ConfigError(key + ": not a number '" + s + "'");
    return v;
}

long long Config::integer(const std::string& key) const {
    const auto& s = str(key);
    long long v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw ConfigError(key + ": not an integer '" + s + "'");
    return v;
}

bool Config::flag(const std::string& key) const {
    const auto& s = str(key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + s + "'");
}

std::string Config::canonical() const {
    std::string out;
    for (const auto& [k, v] : values_) {
        if (excluded_from_hash(k)) continue;
        out += k + "=" + v + "\n";
    }
    return out;
}

std::uint64_t Config::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : canonical()) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::string Config::hash_hex() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash()));
    return buf;
}

namespace {

void require(bool ok, const std::string& msg) {
    if (!ok) throw ConfigError(msg);
}

int positive_int(const Config& c, const std::string& key, long long lo = 1, long long hi = 1 << 24) {
    const auto v = c.integer(key);
    require(v >= lo && v <= hi, key + " must lie in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
}

std::vector<int> parse_criteria(const std::string& s) {
    std::vector<int> out;
    if (s == "all" || s.empty()) return out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        int id = 0;
        auto [p, ec] = std::from_chars(item.data(), item.data() + item.size(), id);
        require(ec == std::errc() && p == item.data() + item.size() && id >= 1 && id <= kCriterionCount,
                "verify.criteria: bad id '" + item + "'");
        out.push_back(id);
    }
    return out;
}

}  // namespace

ExperimentConfig load_experiment(const Config& c) {
    ExperimentConfig e;
    const int n = positive_int(c, "link.n", 2, 64);
    const int j_max = positive_int(c, "link.j_max", 1, 4096);
    const auto& kind = c.str("link.kind");
    try {
        if (kind == "circle") {
            require(n == 2, "link.kind=circle needs link.n=2");
            double L = c.num("link.circumference");
            require(L >= 0.0, "link.circumference must be positive");
            if (L == 0.0) L = 2.0 * std::numbers::pi;
            e.spec = build_spectrum(LinkKind::Circle, 2, j_max, L);
        } else if (kind == "sphere") {
            e.spec = build_spectrum(LinkKind::UnitSphere, n, j_max);
        } else if (kind == "custom") {
            require(!c.str("link.file").empty(), "link.kind=custom needs link.file");
            e.spec = load_custom_spectrum(c.str("link.file"), n);
        } else {
            throw ConfigError("link.kind: expected circle, sphere or custom, got '" + kind + "'");
        }
    } catch (const DomainError& err) {
        throw ConfigError(std::string("link: ") + err.what());
    }

    const auto j = c.integer("mode.j");
    require(j >= 0 && static_cast<std::size_t>(j) < e.spec.num_modes(),
            "mode.j must be below the number of modes (" + std::to_string(e.spec.num_modes()) + ")");
    e.mode = static_cast<std::size_t>(j);
    e.nu = e.spec.nu_of_mode(e.mode);

    e.rmax = c.num("grid.rmax");
    require(e.rmax > 0.0, "grid.rmax must be positive");
    e.nodes = positive_int(c, "grid.nodes", 32, 20000);

    const double psig = c.num("potential.sigma");
    require(psig >= 0.0, "potential.sigma must be >= 0");
    e.V = parse_potential(c.str("potential.family"), psig);
    e.tune_lo = c.num("potential.tune_lo");
    e.tune_hi = c.num("potential.tune_hi");
    require(e.tune_hi <= 0.0 || (e.tune_lo > 0.0 && e.tune_lo < e.tune_hi),
            "potential.tune_lo must lie in (0, potential.tune_hi)");
    require(e.tune_hi <= 0.0 || !e.V.is_zero(), "potential tuning needs a nonzero potential");

    e.lambda = c.num("lambda.value");
    require(e.lambda > 0.0, "lambda.value must be positive");
    e.lambda_lo = c.num("lambda.lo");
    e.lambda_hi = c.num("lambda.hi");
    require(e.lambda_lo > 0.0 && e.lambda_lo < e.lambda_hi, "need 0 < lambda.lo < lambda.hi");
    e.lambda_samples = positive_int(c, "lambda.samples", 2, 10000);

    e.sign = c.str("resolvent.sign");
    require(e.sign == "plus" || e.sign == "minus" || e.sign == "im", "resolvent.sign: expected plus, minus or im");
    e.k = positive_int(c, "resolvent.k", 0, 8);
    e.bs_order = positive_int(c, "resolvent.bs_order", 1, 16);
    e.threshold = c.num("resolvent.threshold");
    require(e.threshold > 0.0 && e.threshold < 1.0, "resolvent.threshold must lie in (0, 1)");
    e.dump_kernel = c.flag("resolvent.dump");
    e.jost = c.flag("resolvent.jost");

    e.sigma = c.num("weight.sigma");
    require(e.sigma >= 0.0, "weight.sigma must be >= 0");
    e.alpha = c.num("weight.alpha");
    require(e.alpha >= 0.0, "weight.alpha must be >= 0");

    e.t = c.num("t.value");
    require(e.t != 0.0, "t.value must be nonzero");
    e.data_center = c.num("data.center");
    e.data_width = c.num("data.width");
    require(e.data_width > 0.0 && e.data_center >= 0.0, "data.width must be positive and data.center >= 0");
    require(e.data_center + 6.1 * e.data_width <= e.rmax, "data support must lie inside grid.rmax");
    e.data_modes = positive_int(c, "data.modes", 1, 1 << 16);
    require(static_cast<std::size_t>(e.data_modes) <= e.spec.num_modes(), "data.modes exceeds the number of modes");

    e.propagate_kind = c.str("propagate.kind");
    require(e.propagate_kind == "mode" || e.propagate_kind == "cone", "propagate.kind: expected mode or cone");
    e.out_rmax = c.num("propagate.rmax");
    require(e.out_rmax > 0.0, "propagate.rmax must be positive");
    e.r_points = positive_int(c, "propagate.r_points", 1, 100000);
    e.theta_points = positive_int(c, "propagate.theta_points", 1, 10000);
    e.tol = c.num("propagate.tol");
    require(e.tol > 0.0 && e.tol < 1.0, "propagate.tol must lie in (0, 1)");

    e.criteria = parse_criteria(c.str("verify.criteria"));
    e.out_dir = c.str("output.dir");
    e.jobs = positive_int(c, "run.jobs", 1, 1024);
    const auto& seed = c.str("run.seed");
    std::uint64_t s = 0;
    auto [p, ec] = std::from_chars(seed.data(), seed.data() + seed.size(), s);
    require(ec == std::errc() && p == seed.data() + seed.size(), "run.seed: not an unsigned integer");
    e.seed = s;
    e.hash = c.hash_hex();
    return e;
}

}  // namespace conewave::cli
