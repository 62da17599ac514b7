#pragma once

#include <complex>
#include <string>
#include <vector>

namespace conewave {

enum class LinkKind { Circle, UnitSphere, Custom };

struct LinkEntry {
    double mu2 = 0.0;
    int multiplicity = 1;
};

// Angular coordinates on the link: circle uses theta only; S^2 uses
// (theta = polar angle, phi = azimuth).
struct LinkPoint {
    double theta = 0.0;
    double phi = 0.0;
};

struct LinkSpectrum {
    int n = 2;
    LinkKind kind = LinkKind::Circle;
    std::vector<LinkEntry> entries;
    double volume = 0.0;
    double circumference = 0.0;  // Circle only
    int sphere_dim = 0;          // UnitSphere only

    double delta() const { return 0.5 * (n - 2); }
    double mu(std::size_t level) const;
    double nu(std::size_t level) const;
    std::size_t num_levels() const { return entries.size(); }
    std::size_t num_modes() const;
    std::size_t level_of_mode(std::size_t j) const;
    double nu_of_mode(std::size_t j) const { return nu(level_of_mode(j)); }
    double mu_of_mode(std::size_t j) const { return mu(level_of_mode(j)); }
    // First flattened index of each level.
    std::size_t level_start(std::size_t level) const;
};

// j_max counts distinct eigenvalue levels; flattened modes repeat per multiplicity.
LinkSpectrum build_spectrum(LinkKind kind, int n, int j_max, double circumference = 0.0);

LinkSpectrum custom_spectrum(int n, std::vector<LinkEntry> entries, double volume);

// Text format: a header line "volume <v>", then lines "mu2 multiplicity".
LinkSpectrum load_custom_spectrum(const std::string& path, int n);

// L^2-normalized real eigenfunction phi_j at a link point (returned as complex).
std::complex<double> eigenfunction(const LinkSpectrum& spec, std::size_t j, const LinkPoint& p);

// Fitted exponent of mu_j against flattened j (log-log least squares, j >= 1).
double weyl_check(const LinkSpectrum& spec);

struct LinkQuadrature {
    std::vector<LinkPoint> points;
    std::vector<double> weights;
};

// Native quadrature: trapezoid on the circle, Gauss-Legendre x trapezoid on S^2.
LinkQuadrature link_quadrature(const LinkSpectrum& spec, int order);

}  // namespace conewave
