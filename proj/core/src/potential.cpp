#include "conewave/potential.hpp"

#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "conewave/errors.hpp"

namespace conewave {

PotentialSpec make_potential(const std::string& family, const std::vector<double>& p, double sigma) {
    PotentialSpec V;
    V.family = family;
    V.params = p;
    auto need = [&](std::size_t k) {
        if (p.size() != k)
            throw ConfigError("potential " + family + " expects " + std::to_string(k) + " parameters");
    };
    if (family == "zero") {
        need(0);
        V.V = [](double) { return 0.0; };
        V.sigma = sigma > 0 ? sigma : 2.0;
        V.compact = true;
    } else if (family == "gaussian") {
        need(2);
        const double a = p[0], w = p[1];
        if (!(w > 0)) throw ConfigError("gaussian width must be positive");
        V.V = [a, w](double r) { return a * std::exp(-(r / w) * (r / w)); };
        V.sigma = sigma > 0 ? sigma : 2.0;
    } else if (family == "polywell") {
        need(2);
        const double a = p[0], s = p[1];
        if (!(s > 0.5)) throw ConfigError("polywell decay exponent must exceed 1/2");
        V.V = [a, s](double r) { return -a * std::pow(1.0 + r, -2.0 * s); };
        V.sigma = sigma > 0 ? std::min(sigma, s) : s;
    } else if (family == "bump") {
        need(3);
        const double a = p[0], r0 = p[1], w = p[2];
        if (!(w > 0)) throw ConfigError("bump width must be positive");
        V.V = [a, r0, w](double r) {
            const double z = (r - r0) / w;
            if (std::abs(z) >= 1.0) return 0.0;
            return a * std::numbers::e * std::exp(-1.0 / (1.0 - z * z));
        };
        V.sigma = sigma > 0 ? sigma : 2.0;
        V.compact = true;
        V.support_hi = r0 + w;
    } else {
        throw ConfigError("unknown potential family '" + family + "'");
    }
    if (!(V.sigma > 0.5)) throw ConfigError("potential sigma must exceed 1/2");
    return V;
}

PotentialSpec parse_potential(const std::string& text, double sigma) {
    std::string t;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) t += c;
    const auto open = t.find('(');
    std::string family = t.substr(0, open);
    std::vector<double> params;
    if (open != std::string::npos) {
        if (t.back() != ')') throw ConfigError("potential: missing ')' in '" + text + "'");
        std::stringstream ss(t.substr(open + 1, t.size() - open - 2));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (item.empty()) continue;
            try {
                std::size_t used = 0;
                params.push_back(std::stod(item, &used));
                if (used != item.size()) throw std::invalid_argument(item);
            } catch (const std::exception&) {
                throw ConfigError("potential: bad parameter '" + item + "'");
            }
        }
    }
    return make_potential(family, params, sigma);
}

void certify(PotentialSpec& V, const RadialGrid& grid) {
    double A = 0.0;
    auto probe = [&](double r) {
        const double v = std::abs(V.V(r)) * std::pow(1.0 + r, 2.0 * V.sigma);
        if (!std::isfinite(v)) throw ConfigError("potential not finite on the grid");
        A = std::max(A, v);
    };
    for (double r : grid.r) probe(r);
    const std::size_t M = 10 * grid.size();
    for (std::size_t i = 0; i <= M; ++i) probe(grid.rmax * static_cast<double>(i) / static_cast<double>(M));
    V.A = A;
}

PotentialSpec scaled(const PotentialSpec& V, double c) {
    auto p = V.params;
    if (!p.empty()) p[0] *= c;
    auto out = make_potential(V.family, p, V.sigma);
    out.A = V.A * std::abs(c);
    return out;
}

}  // namespace conewave
