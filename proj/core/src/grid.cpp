#include "conewave/grid.hpp"

#include <algorithm>
#include <cmath>

#include "conewave/errors.hpp"
#include "conewave/numerics.hpp"

namespace conewave {

std::size_t RadialGrid::panel_of(double x) const {
    if (x <= panels.front().lo) return 0;
    if (x >= panels.back().hi) return panels.size() - 1;
    auto it = std::upper_bound(panels.begin(), panels.end(), x,
                               [](double v, const Panel& p) { return v < p.hi; });
    return static_cast<std::size_t>(it - panels.begin());
}

GridPtr build_grid(int n, double rmax, int target_nodes, const GridScheme& scheme) {
    if (n < 1) throw DomainError("build_grid: n must be >= 1");
    if (!(rmax > 0.0)) throw DomainError("build_grid: R_max must be positive");
    if (target_nodes < 16) throw DomainError("build_grid: need at least 16 nodes");
    const int q = scheme.order;
    const int levels = std::max(0, scheme.refine_levels);
    int uniform = std::max(1, target_nodes / q - levels);
    if (scheme.max_panel > 0.0)
        uniform = std::max(uniform, static_cast<int>(std::ceil(rmax / scheme.max_panel)));
    const double h = rmax / uniform;

    std::vector<std::pair<double, double>> bounds;
    double edge = h / std::ldexp(1.0, levels);
    bounds.push_back({0.0, edge});
    for (int k = levels - 1; k >= 0; --k) {
        const double next = h / std::ldexp(1.0, k);
        bounds.push_back({edge, next});
        edge = next;
    }
    for (int p = 1; p < uniform; ++p) bounds.push_back({p * h, (p + 1) * h});
    bounds.back().second = rmax;

    auto g = std::make_shared<RadialGrid>();
    g->n = n;
    g->rmax = rmax;
    g->order = q;
    g->target_nodes = target_nodes;
    g->scheme = scheme;
    const auto& gl = gauss_legendre(q);
    for (const auto& [lo, hi] : bounds) {
        Panel p{lo, hi, g->r.size(), static_cast<std::size_t>(q)};
        const double c = 0.5 * (lo + hi), s = 0.5 * (hi - lo);
        for (int i = 0; i < q; ++i) {
            const double x = c + s * gl.nodes[i];
            g->r.push_back(x);
            g->w.push_back(s * gl.weights[i] * std::pow(x, n - 1));
        }
        g->panels.push_back(p);
    }
    return g;
}

}  // namespace conewave
