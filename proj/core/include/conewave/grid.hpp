#pragma once

#include <memory>
#include <vector>

namespace conewave {

struct Panel {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t first = 0;  // index of the first node
    std::size_t count = 0;
};

struct GridScheme {
    int order = 16;
    int refine_levels = 6;   // geometric panels (ratio 2) inside the first uniform panel
    double max_panel = 0.0;  // uniform panel width cap; 0 derives it from the node target
};

// Quadrature for integrals of g(r) r^{n-1} dr over (0, R_max].
struct RadialGrid {
    int n = 3;
    double rmax = 0.0;
    int order = 16;
    int target_nodes = 0;
    GridScheme scheme;
    std::vector<double> r;
    std::vector<double> w;  // includes r^{n-1}
    std::vector<Panel> panels;

    std::size_t size() const { return r.size(); }
    std::size_t panel_of(double x) const;
    std::size_t panel_of_node(std::size_t i) const { return i / static_cast<std::size_t>(order); }
};

using GridPtr = std::shared_ptr<const RadialGrid>;


// Composite Gauss-Legendre panels: uniform panels on [h, R_max] and panels
// [h/2^{k+1}, h/2^k] (k < refine_levels) plus [0, h/2^L] toward the origin.
GridPtr build_grid(int n, double rmax, int target_nodes, const GridScheme& scheme = {});

// Weight rho(r) = 1 + r.
inline double rho(double r) { return 1.0 + r; }

}  // namespace conewave
