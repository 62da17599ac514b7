#include "conewave/linkspec.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/spherical_harmonic.hpp>

#include "conewave/errors.hpp"
#include "conewave/numerics.hpp"

namespace conewave {

using std::numbers::pi;

double LinkSpectrum::mu(std::size_t level) const { return std::sqrt(entries.at(level).mu2); }

double LinkSpectrum::nu(std::size_t level) const {
    const double d = delta();
    return std::sqrt(entries.at(level).mu2 + d * d);
}

std::size_t LinkSpectrum::num_modes() const {
    std::size_t m = 0;
    for (const auto& e : entries) m += static_cast<std::size_t>(e.multiplicity);
    return m;
}

std::size_t LinkSpectrum::level_of_mode(std::size_t j) const {
    std::size_t start = 0;
    for (std::size_t l = 0; l < entries.size(); ++l) {
        start += static_cast<std::size_t>(entries[l].multiplicity);
        if (j < start) return l;
    }
    throw DomainError("mode index beyond j_max");
}

std::size_t LinkSpectrum::level_start(std::size_t level) const {
    std::size_t start = 0;
    for (std::size_t l = 0; l < level; ++l) start += static_cast<std::size_t>(entries.at(l).multiplicity);
    return start;
}

namespace {

double binom(int a, int b) {
    if (b < 0 || a < b || a < 0) return 0.0;
    return std::round(std::exp(std::lgamma(a + 1.0) - std::lgamma(b + 1.0) - std::lgamma(a - b + 1.0)));
}

void validate(const LinkSpectrum& s) {
    if (s.n < 2) throw ConfigError("link spectrum: n must be >= 2");
    if (s.entries.empty()) throw ConfigError("link spectrum: no entries");
    if (!(s.volume > 0.0)) throw ConfigError("link spectrum: volume must be positive");
    if (s.entries.front().mu2 != 0.0 || s.entries.front().multiplicity != 1)
        throw ConfigError("link spectrum: first entry must be mu2 = 0 with multiplicity 1");
    for (std::size_t i = 0; i < s.entries.size(); ++i) {
        if (s.entries[i].mu2 < 0.0) throw ConfigError("link spectrum: negative eigenvalue");
        if (s.entries[i].multiplicity < 1) throw ConfigError("link spectrum: multiplicity < 1");
        if (i > 0 && s.entries[i].mu2 < s.entries[i - 1].mu2)
            throw ConfigError("link spectrum: eigenvalues not sorted");
    }
}

}  // namespace

LinkSpectrum build_spectrum(LinkKind kind, int n, int j_max, double circumference) {
    if (n < 2) throw ConfigError("build_spectrum: n must be >= 2");
    if (j_max < 1) throw ConfigError("build_spectrum: j_max must be >= 1");
    LinkSpectrum s;
    s.n = n;
    s.kind = kind;
    if (kind == LinkKind::Circle) {
        if (n != 2) throw ConfigError("build_spectrum: circle link requires n = 2");
        const double L = circumference > 0.0 ? circumference : 2.0 * pi;
        s.circumference = L;
        s.volume = L;
        for (int k = 0; k < j_max; ++k) {
            const double mu = 2.0 * pi * k / L;
            s.entries.push_back({mu * mu, k == 0 ? 1 : 2});
        }
    } else if (kind == LinkKind::UnitSphere) {
        const int d = n - 1;
        s.sphere_dim = d;
        s.volume = 2.0 * std::pow(pi, 0.5 * (d + 1)) / std::tgamma(0.5 * (d + 1));
        for (int l = 0; l < j_max; ++l) {
            const double mult = binom(l + d, d) - binom(l + d - 2, d);
            s.entries.push_back({static_cast<double>(l) * (l + d - 1), static_cast<int>(mult)});
        }
    } else {
        throw ConfigError("build_spectrum: custom links come from custom_spectrum");
    }
    validate(s);
    return s;
}

LinkSpectrum custom_spectrum(int n, std::vector<LinkEntry> entries, double volume) {
    LinkSpectrum s;
    s.n = n;
    s.kind = LinkKind::Custom;
    s.entries = std::move(entries);
    s.volume = volume;
    validate(s);
    return s;
}

LinkSpectrum load_custom_spectrum(const std::string& path, int n) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open custom spectrum file " + path);
    std::string line;
    double volume = -1.0;
    std::vector<LinkEntry> entries;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;
        if (first == "volume") {
            if (!(ls >> volume)) throw ConfigError("custom spectrum: bad volume line");
            continue;
        }
        LinkEntry e;
        try {
            e.mu2 = std::stod(first);
        } catch (...) {
            throw ConfigError("custom spectrum: bad line '" + line + "'");
        }
        if (!(ls >> e.multiplicity)) throw ConfigError("custom spectrum: missing multiplicity");
        entries.push_back(e);
    }
    if (volume <= 0.0) throw ConfigError("custom spectrum: missing 'volume <v>' header");
    return custom_spectrum(n, std::move(entries), volume);
}

std::complex<double> eigenfunction(const LinkSpectrum& spec, std::size_t j, const LinkPoint& p) {
    const bool circle_like = spec.kind == LinkKind::Circle ||
                             (spec.kind == LinkKind::UnitSphere && spec.sphere_dim == 1);
    if (circle_like) {
        const double L = spec.kind == LinkKind::Circle ? spec.circumference : 2.0 * pi;
        if (j == 0) return 1.0 / std::sqrt(L);
        const std::size_t k = (j + 1) / 2;
        const double arg = 2.0 * pi * static_cast<double>(k) * p.theta / L;
        const double c = std::sqrt(2.0 / L);
        return (j % 2 == 1) ? c * std::cos(arg) : c * std::sin(arg);
    }
    if (spec.kind == LinkKind::UnitSphere && spec.sphere_dim == 2) {
        const std::size_t l = spec.level_of_mode(j);
        const std::size_t off = j - l * l;  // order m = 0, +1, -1, +2, -2, ...
        const unsigned ul = static_cast<unsigned>(l);
        if (off == 0) return boost::math::spherical_harmonic_r(ul, 0, p.theta, p.phi);
        const int m = static_cast<int>((off + 1) / 2);
        const double s2 = std::numbers::sqrt2;
        if (off % 2 == 1) return s2 * boost::math::spherical_harmonic_r(ul, m, p.theta, p.phi);
        return s2 * boost::math::spherical_harmonic_i(ul, m, p.theta, p.phi);
    }
    throw DomainError("eigenfunction: unsupported link (custom or sphere dimension > 2)");
}

double weyl_check(const LinkSpectrum& spec) {
    std::vector<double> lx, ly;
    std::size_t j = 0;
    for (std::size_t l = 0; l < spec.entries.size(); ++l) {
        const double mu = spec.mu(l);
        for (int m = 0; m < spec.entries[l].multiplicity; ++m, ++j) {
            if (j == 0 || mu <= 0.0) continue;
            lx.push_back(std::log(static_cast<double>(j)));
            ly.push_back(std::log(mu));
        }
    }
    if (lx.size() < 2) throw DomainError("weyl_check: spectrum too short");
    return linear_fit(lx, ly).slope;
}

LinkQuadrature link_quadrature(const LinkSpectrum& spec, int order) {
    LinkQuadrature q;
    if (order < 2) throw DomainError("link_quadrature: order must be >= 2");
    const bool circle_like = spec.kind == LinkKind::Circle ||
                             (spec.kind == LinkKind::UnitSphere && spec.sphere_dim == 1);
    if (circle_like) {
        const double L = spec.kind == LinkKind::Circle ? spec.circumference : 2.0 * pi;
        for (int i = 0; i < order; ++i) {
            q.points.push_back({L * i / order, 0.0});
            q.weights.push_back(L / order);
        }
        return q;
    }
    if (spec.kind == LinkKind::UnitSphere && spec.sphere_dim == 2) {
        auto gl = gauss_legendre(order);
        const int nphi = 2 * order;
        for (std::size_t a = 0; a < gl.nodes.size(); ++a) {
            const double theta = std::acos(gl.nodes[a]);
            for (int b = 0; b < nphi; ++b) {
                q.points.push_back({theta, 2.0 * pi * b / nphi});
                q.weights.push_back(gl.weights[a] * 2.0 * pi / nphi);
            }
        }
        return q;
    }
    throw DomainError("link_quadrature: unsupported link");
}

}  // namespace conewave
