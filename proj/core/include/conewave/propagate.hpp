#pragma once

#include <array>
#include <vector>

#include "conewave/freeres.hpp"
#include "conewave/linkspec.hpp"
#include "conewave/potential.hpp"

namespace conewave {

// Truncated Taylor series c[k] = f^(k)(x0)/k!, k <= kJetMax.
constexpr int kJetMax = 12;

struct Jet {
    std::array<double, kJetMax + 1> c{};
    int order = 0;

    static Jet constant(double v, int order);
    static Jet variable(double x0, int order);  // the identity x, expanded around x0
    double derivative(int k) const;             // f^(k)(x0)
    Jet d() const;                              // jet of f' (one order less)
};

Jet operator+(const Jet& a, const Jet& b);
Jet operator-(const Jet& a, const Jet& b);
Jet operator*(const Jet& a, const Jet& b);
Jet operator/(const Jet& a, const Jet& b);
Jet operator*(double s, const Jet& a);
Jet exp(const Jet& a);

// chi(x) = s(2 - 2|x|), s(y) = psi(y) / (psi(y) + psi(1 - y)), psi(y) = exp(-1/y) for y > 0.
// Equal to 1 on [-1/2, 1/2], 0 outside (-1, 1), C-infinity. Used as chi(lambda / R).
struct CutoffSpec {
    double R = 1.0;

    double chi(double x) const;
    Jet chi_jet(double x, int order) const;  // jet of x -> chi(x) (no R scaling)
};

// (i/(2t)) (r1 r2)^{-(n-2)/2} e^{(r1^2+r2^2)/(4it)} i^nu J_nu(r1 r2/(2t)).
cplx weber_mode_kernel(int n, double nu, double t, double r1, double r2);

// int K_weber(x, s) f(s) s^{n-1} ds by the quadrature of f's grid.
CVec weber_apply(double nu, double t, const ModeFunction& f, const std::vector<double>& xs);

struct PropagatorRequest {
    double t = 1.0;
    double nu = 0.5;
    PotentialSpec V = make_potential("zero", {});
    double alpha = 0.0;
    double tol = 1e-10;         // spectral tail cut on lambda |F(lambda)|, relative to its maximum
    double resolution = 10.0;   // coarse lambda panel width times the largest phase rate in lambda
    double lambda_cap = 400.0;  // tail search gives up here (ToleranceError)
    int jobs = 1;
    CutoffSpec cutoff;
};

// Samples of g(lambda, x) = (2/pi) lambda [Im K_V(lambda) f](x) at Gauss nodes of coarse
// lambda panels; reused for every t.
struct SpectralTable {
    int n = 3;
    double nu = 0.5;
    int order = 16;
    std::vector<double> xs;
    std::vector<double> edges;   // panel p is [edges[p], edges[p+1]]
    std::vector<double> lambda;  // nodes, panel-major
    CMat g;                      // (node, x)
    double tail = 0.0;           // lambda |F| on the last panel / its maximum (F: free transform of f)
};

// xs empty: the grid nodes of f (V != 0 then uses the plain Nystrom values).
SpectralTable spectral_table(const PropagatorRequest& req, const ModeFunction& f,
                             const std::vector<double>& xs = {});

// u(t, x) = int_0^inf e^{i t lambda^2} g(lambda, x) d lambda; rows follow ts (t != 0).
// Each coarse panel is integrated against the Lagrange basis on sub-panels spanning at most a
// quarter oscillation of e^{i t lambda^2}.
CMat propagate_table(const SpectralTable& table, const std::vector<double>& ts, int jobs = 1);

// e^{itH} P_c applied to one mode, on the grid of f.
ModeFunction mode_propagate(const PropagatorRequest& req, const ModeFunction& f);

// ||f||_{L^2(r^{n-1} dr)} on the grid of f.
double mode_norm(const ModeFunction& f);

struct SOperatorValue {
    cplx value;
    double tail_bound = 0.0;  // bound on the omitted levels
};

// x^{-(n-2)/2} sum_{levels < j_max} i^nu J_nu(x) phi(th1) phi(th2). Circle and S^d only.
SOperatorValue s_operator_entry(double x, const LinkSpectrum& spec, int j_max, const LinkPoint& th1,
                                const LinkPoint& th2);

// (i/2)^{(n-2)/2} / (Gamma(n/2) vol X).
cplx s_operator_limit(const LinkSpectrum& spec);

// L^2(X) -> L^2(X) norm of the truncated S(x): max over levels of x^{-(n-2)/2} |J_nu(x)|.
double s_operator_norm(double x, const LinkSpectrum& spec, int j_max);

struct ConeField {
    std::vector<double> r;
    std::vector<LinkPoint> theta;
    CMat values;  // (r, theta)
    std::vector<double> mode_norms;
};

// sum_j u_j(t, r) phi_j(theta), u_j the propagated radial profile of mode j (modes[j]).
// V = 0 uses the Weber kernel, otherwise the spectral quadrature.
ConeField full_cone_propagate(const LinkSpectrum& spec, double t, const std::vector<ModeFunction>& modes,
                              const std::vector<double>& r_out, const std::vector<LinkPoint>& thetas,
                              const PropagatorRequest& base = {});

// Free mode-summed kernel at (r1, th1), (r2, th2) over the first j_max levels.
cplx free_cone_kernel(const LinkSpectrum& spec, int j_max, double t, double r1, const LinkPoint& th1,
                      double r2, const LinkPoint& th2);

// Smooth real data: exp(-((r - c)/w)^2) cut to zero for |r - c| > cut w.
ModeFunction gaussian_profile(const GridPtr& grid, double center, double width, double cut = 6.1);

}  // namespace conewave
