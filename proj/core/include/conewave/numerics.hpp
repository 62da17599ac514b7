#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

namespace conewave {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

struct GaussRule {
    std::vector<double> nodes;    // on [-1, 1], increasing
    std::vector<double> weights;
};

// Gauss-Legendre rule of the given order (cached, thread-safe).
const GaussRule& gauss_legendre(int order);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;   // root-mean-square of y - fit
    double slope_halfwidth = 0.0;  // 95% confidence half-width of the slope
    std::size_t count = 0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// log-log fit of y against x (all entries must be positive).
LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y);

std::vector<double> logspace(double lo, double hi, std::size_t count);

// Barycentric weights of the Lagrange interpolant through the given nodes.
std::vector<double> barycentric_weights(const std::vector<double>& nodes);

// Values of all Lagrange basis polynomials at x.
void lagrange_basis(const std::vector<double>& nodes, const std::vector<double>& bw, double x,
                    std::vector<double>& out);

// Largest singular value of a linear operator of size m x n given matvecs with A and A^H.
// Golub-Kahan-Lanczos bidiagonalization with full reorthogonalization; deterministic start.
double top_singular_value(const std::function<CVec(const CVec&)>& apply,
                          const std::function<CVec(const CVec&)>& apply_adjoint, Eigen::Index cols,
                          int max_steps = 80, double rel_tol = 1e-10, std::uint64_t seed = 12345);

// Runs body(i) for i in [0, count) on up to `jobs` threads. Results must be written
// to per-index slots so the outcome does not depend on scheduling.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body);

}  // namespace conewave
