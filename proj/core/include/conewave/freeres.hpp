#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <vector>

#include "conewave/grid.hpp"
#include "conewave/linkspec.hpp"
#include "conewave/numerics.hpp"

namespace conewave {

enum class KernelSign { Plus, Minus, Im };

const char* to_string(KernelSign s);

// Radial factors of a semiseparable kernel
//   K(r,s) = pref * sum_t binom(k,t) lo^{(t)}(min(r,s)) hi^{(k-t)}(max(r,s)),
// where ^{(i)} is the i-th lambda derivative.
class KernelFactors {
public:
    virtual ~KernelFactors() = default;
    virtual cplx lo(double r, int i) const = 0;
    virtual cplx hi(double r, int i) const = 0;
    virtual cplx prefactor() const = 0;
    virtual double nu() const = 0;
};

// Free outgoing/incoming/Im factors: lo = r^{-d} J_nu(lambda r), hi = r^{-d} H_nu(lambda r)
// (H1 for +i0, H2 for -i0, J for Im), d = (n-2)/2. Requires lambda > 0.
class FreeFactors final : public KernelFactors {
public:
    FreeFactors(int n, double nu, double lambda, KernelSign sign);
    cplx lo(double r, int i) const override;
    cplx hi(double r, int i) const override;
    cplx prefactor() const override;
    double nu() const override { return nu_; }
    double lambda() const { return lambda_; }
    KernelSign sign() const { return sign_; }

private:
    double nu_, lambda_, delta_;
    KernelSign sign_;
};

// lambda = 0 kernel (rs)^{-d} (r_</r_>)^nu / (2 nu); requires nu > 0.
class ZeroEnergyFactors final : public KernelFactors {
public:
    ZeroEnergyFactors(int n, double nu);
    cplx lo(double r, int i) const override;
    cplx hi(double r, int i) const override;
    cplx prefactor() const override { return 1.0 / (2.0 * nu_); }
    double nu() const override { return nu_; }

private:
    double nu_, delta_;
};

// Node samples of KernelFactors with O(N) application.
struct SeparableKernel {
    GridPtr grid;
    cplx pref{1.0, 0.0};
    int k = 0;
    std::vector<CVec> lo;  // lo[t](b) already carries binom(k,t)
    std::vector<CVec> hi;

    cplx entry(std::size_t a, std::size_t b) const;
    // u_a = sum_b K(a,b) w_b f_b
    CVec apply(const CVec& f) const;
    // conj(K) applied: K is complex symmetric, so this is the adjoint of K W.
    CVec apply_conj(const CVec& f) const;
    CMat dense() const;  // K(a,b) without weights
};

SeparableKernel sample_factors(const KernelFactors& fac, const GridPtr& grid, int k);

struct KernelMatrix {
    GridPtr grid;
    double nu = 0.0;
    double lambda = 0.0;
    KernelSign sign = KernelSign::Plus;
    int k = 0;
    CMat values;  // entry (a,b) = kernel(r_a, s_b)
};

struct ModeFunction {
    GridPtr grid;
    CVec values;
};

// Free kernel R_0(lambda +- i0) (k-th lambda derivative); lambda < 0 by reflection.
KernelMatrix free_kernel(const GridPtr& grid, double nu, double lambda, KernelSign sign, int k = 0);

// Im R_0(lambda + i0) and its lambda derivatives.
KernelMatrix im_free_kernel(const GridPtr& grid, double nu, double lambda, int k = 0);

// Separable form of the same kernels (for large grids).
SeparableKernel free_separable(const GridPtr& grid, double nu, double lambda, KernelSign sign,
                               int k = 0);

// u(r_a) = sum_b K(a,b) f(s_b) w_b, dense path.
ModeFunction apply_kernel(const KernelMatrix& K, const ModeFunction& f);

// Product-integration application at arbitrary points: f is interpolated inside each panel
// and the panel containing x is split at x, so the kink of the kernel does not spoil accuracy.
CVec kernel_apply_at(const KernelFactors& fac, int k, const RadialGrid& grid, const CVec& f,
                     const std::vector<double>& xs);

// Rows Q(x, b) such that sum_b Q(x,b) g_b approximates int K(x,s) g(s) s^{n-1} ds with the
// same product rule (columns restricted to `cols`, which must be whole panels to be exact).
CMat product_rule_rows(const KernelFactors& fac, const RadialGrid& grid,
                       const std::vector<double>& xs, const std::vector<std::size_t>& cols);

// Spectral density (lambda/pi) Im R_0 for each flattened mode in j_set.
std::vector<KernelMatrix> spectral_density(const GridPtr& grid, const LinkSpectrum& spec,
                                           double lambda, const std::vector<std::size_t>& j_set);

// Discrete L^{2,s_in} -> L^{2,-s_out} norm of a complex-symmetric kernel given by
// apply(f) = sum_b K(a,b) w_b f_b (Lanczos, O(N) per step for separable kernels).
double weighted_operator_norm(const RadialGrid& grid, const std::function<CVec(const CVec&)>& apply,
                              double sigma_out, double sigma_in);

// Grid with twice the nodes (and half the panel cap) of the given one.
GridPtr refined(const RadialGrid& grid);

struct GreenResidual {
    double relative = 0.0;
    std::size_t nodes = 0;
};

// ||(L + lambda^2) u + f|| / ||f|| on grid nodes inside [r_lo, r_hi], u = R_0(lambda+i0) f,
// L = d^2 + (n-1)/r d - mu^2/r^2 with mu^2 = nu^2 - ((n-2)/2)^2, 4th-order differences.
GreenResidual green_residual(const RadialGrid& grid, double nu, double lambda, const CVec& f,
                             double r_lo, double r_hi);

}  // namespace conewave
