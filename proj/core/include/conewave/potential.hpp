#pragma once

#include <functional>
#include <string>
#include <vector>

#include "conewave/grid.hpp"

namespace conewave {

// Radial potential with decay exponent sigma and certified bound
// |V(r)| (1+r)^{2 sigma} <= A on the grid (plus 10x oversampling).
struct PotentialSpec {
    std::string family = "zero";
    std::vector<double> params;
    std::function<double(double)> V;
    double sigma = 1.0;
    double A = 0.0;
    bool compact = false;     // exactly zero outside a bounded set
    double support_hi = 0.0;  // upper end of the support if compact

    bool is_zero() const { return family == "zero"; }
    double operator()(double r) const { return V(r); }
};

// Families: zero; gaussian(a,w) = a exp(-(r/w)^2); polywell(a,s) = -a (1+r)^{-2s};
// bump(a,r0,w) = a e exp(-1/(1-z^2)), z = (r-r0)/w, zero for |z| >= 1.
// sigma <= 0 picks the family default (polywell: s; others: 2).
PotentialSpec make_potential(const std::string& family, const std::vector<double>& params,
                             double sigma = 0.0);

// Parses "gaussian(0.5,1)" style text.
PotentialSpec parse_potential(const std::string& text, double sigma = 0.0);

// Recomputes A over grid nodes and a 10x oversampled uniform lattice on [0, R_max].
void certify(PotentialSpec& V, const RadialGrid& grid);

// Same family with every amplitude multiplied by c.
PotentialSpec scaled(const PotentialSpec& V, double c);

}  // namespace conewave
