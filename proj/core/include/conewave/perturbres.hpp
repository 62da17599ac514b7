#pragma once

#include <vector>

#include "conewave/freeres.hpp"
#include "conewave/potential.hpp"

namespace conewave {

// Solver for R_V = (I + K0 W D_V)^{-1} K0 on one (grid, nu, lambda, sign). K0 = p lo(r<) hi(r>)
// is semiseparable, so each solve is two O(N) outward sweeps (particular + homogeneous).
// All applications include the quadrature weights: apply(f) returns sum_b K_V(a,b) w_b f_b.
class PerturbedSolver {
public:
    PerturbedSolver(GridPtr grid, double nu, double lambda, KernelSign sign, const PotentialSpec& V,
                    int kmax = 0);

    // d^k/dlambda^k K_V applied (k <= kmax).
    CVec apply(const CVec& f, int k = 0) const;
    // Im K_V applied (uses K_V(-i0) = conj K_V(+i0)); requires sign == Plus.
    CVec apply_im(const CVec& f, int k = 0) const;
    CMat dense(int k = 0) const;

    // Smallest singular value of I + rho^s V K0 rho^-s in the symmetrized weighted L^2.
    double fredholm_indicator(double sigma) const;

    const std::vector<std::size_t>& support() const { return support_; }
    const GridPtr& grid() const { return grid_; }
    const SeparableKernel& free_part(int k = 0) const { return free_[k]; }
    const CVec& v_nodes() const { return v_; }

private:
    // (I + K0 W D_V)^{-1} rhs
    CVec solve_(const CVec& rhs) const;
    // outward sweep with S_0 = beta; returns S_N
    cplx sweep_(const CVec& rhs, cplx beta, CVec& v) const;

    GridPtr grid_;
    double nu_, lambda_;
    KernelSign sign_;
    int kmax_;
    std::vector<std::size_t> support_;
    CVec v_;  // V at all nodes
    std::vector<SeparableKernel> free_;
    CVec hom_;         // homogeneous sweep (rhs = 0, S_0 = 1)
    cplx hom_end_{};   // its S_N; vanishes at a resonance
};

// Dense perturbed kernel with residual check ||(I + K0 W D_V) X - K0|| <= 1e-8 ||K0||.
// Throws NearSingularError when the Fredholm indicator is below `threshold`.
KernelMatrix perturbed_kernel(const GridPtr& grid, double nu, double lambda, KernelSign sign,
                              const PotentialSpec& V, double threshold = 1e-6, double sigma = -1.0);

struct BirmanSchwinger {
    KernelMatrix series_part;
    KernelMatrix remainder;
};

// sum_{l<2M} K0 (-W D K0)^l and (K0 W D)^M K_V (W D K0)^M.
BirmanSchwinger birman_schwinger(const GridPtr& grid, double nu, double lambda, KernelSign sign,
                                 const PotentialSpec& V, int M);

struct FredholmReport {
    std::vector<double> lambda;
    std::vector<double> indicator;
    std::vector<int> flag;  // 0 healthy, 1 dip below threshold, 2 dip confirmed on refined grid
    double threshold = 1e-6;
};

// Indicator per lambda; lambda = 0 uses the zero-energy kernel. Dips are re-checked on a
// grid with twice the nodes.
FredholmReport fredholm_scan(const GridPtr& grid, double nu, const PotentialSpec& V,
                             const std::vector<double>& lambdas, KernelSign sign = KernelSign::Plus,
                             double threshold = 1e-6, int jobs = 1);

// Indicator at lambda = 0 (needs nu > 0).
double zero_energy_indicator(const GridPtr& grid, double nu, const PotentialSpec& V);

struct CouplingTuning {
    double coupling = 0.0;   // amplitude multiplier at the zero-energy crossing
    double indicator = 0.0;  // zero-energy indicator there
};

// Bisection on the amplitude multiplier c in [c_lo, c_hi] for a sign change of
// det(I + K0(0) W D_{cV}).
CouplingTuning tune_zero_energy(const GridPtr& grid, double nu, const PotentialSpec& V, double c_lo,
                                double c_hi);

struct NeumannThreshold {
    double C = 0.0;    // sup over sampled lambda of lambda ||rho^-s R0 rho^-s||
    double M_V = 0.0;  // 2 A C: above this, ||rho^s V R0 rho^-s|| <= 1/2
};

NeumannThreshold neumann_threshold(const GridPtr& grid, double nu, const PotentialSpec& V,
                                   const std::vector<double>& lambdas);

struct JostSolutions {
    int n = 3;
    std::vector<double> r;  // descending
    std::vector<cplx> up, um, dup, dum;
    int iterations = 0;
    double defect = 0.0;
    std::vector<cplx> wronskian() const;  // r^{n-1}(u+ u-' - u+' u-)
};

// Jost solutions u_pm ~ e^{pm i lambda r} r^{-(n-1)/2} of the mode-nu radial equation by
// Picard iteration of the Volterra equation, trapezoid rule on the given r-grid.
JostSolutions jost_solutions(int n, double lambda, const PotentialSpec& V, std::vector<double> r_grid,
                             double nu = 0.5, int max_iter = 64, double tol = 1e-9);

// Free Jost solution sqrt(pi lambda/2) e^{pm i(nu pi/2 + pi/4)} r^{-(n-2)/2} H_nu(lambda r) and its r-derivative.
void free_jost(int n, double nu, double lambda, double r, int pm, cplx& u, cplx& du);

// Negative eigenvalues of the discretized mode operator -d^2 - (n-1)/r d + mu^2/r^2 + V on
// (0, R) with Dirichlet ends (finite differences), by Sturm count.
int count_negative_eigenvalues(int n, double nu, const PotentialSpec& V, double rmax, int points = 4000);

}  // namespace conewave
