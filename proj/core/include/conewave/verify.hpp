#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "conewave/freeres.hpp"
#include "conewave/linkspec.hpp"
#include "conewave/perturbres.hpp"
#include "conewave/potential.hpp"
#include "conewave/propagate.hpp"

namespace conewave {

// Largest singular value of diag(rho^{-s_out} sqrt(w)) K diag(rho^{-s_in} sqrt(w)),
// the discrete L^{2,s_in} -> L^{2,-s_out} norm. Dense SVD.
double weighted_opnorm(const KernelMatrix& K, double sigma_out, double sigma_in);

enum class ClaimKind {
    Equal,       // |fit - claim| <= tol
    UpperBound,  // fit <= claim + tol (growth bounded by the claim)
    LowerBound   // fit >= claim - tol (small-lambda decay at least as fast as the claim)
};

const char* to_string(ClaimKind k);

// One fitted regime [lo, hi] of a scan.
struct Regime {
    std::string label;
    double lo = 0.0;
    double hi = 0.0;
    double claim = 0.0;
    double tolerance = 0.1;
    ClaimKind kind = ClaimKind::Equal;
    LinearFit fit;

    bool pass() const;
};

// Residual cap: 95% half-width of the fitted slope.
constexpr double kFitResidualCap = 0.05;

struct NormScan {
    std::string name;
    std::vector<double> x;      // lambda (or t) samples, log-spaced
    std::vector<double> value;  // measured norms
    std::vector<Regime> regimes;
    double min_indicator = 1.0;        // smallest Fredholm indicator over the samples (perturbed scans)
    double derivative_check = 0.0;     // worst FD defect of the lambda derivatives (0 if k = 0)

    bool pass() const;
    // Fits every regime on the samples inside [lo, hi] (at least 10 required).
    void fit();
};

struct ScanOptions {
    double lambda_lo = 1.0;
    double lambda_hi = 100.0;
    std::size_t samples = 21;  // per side of lambda = 1 for split scans
    double fit_lo = 0.0;  // fit window; 0 means the sample range
    double fit_hi = 0.0;
    double tolerance = 0.0;  // 0: the scan's default (lap 0.1, im 0.15, lq 0.2, pointwise 0.2)
    int jobs = 1;
    std::uint64_t seed = 12345;  // spot-check points of the derivative check
    int derivative_checks = 20;
};

// ||d^k R(lambda+i0)||_{L^{2,s} -> L^{2,-s}} for lambda in the given range; slope claim -1.
// V.is_zero() gives the free resolvent.
NormScan lap_scan(const GridPtr& grid, double nu, double sigma, int k, const PotentialSpec& V,
                  const ScanOptions& opt = {});

// ||d^k Im R(lambda+i0)||_{L^{2,s} -> L^{2,-s}}, claim n - 2 - k.
NormScan im_lowfreq_scan(const GridPtr& grid, double nu, double sigma, int k, const PotentialSpec& V,
                         const ScanOptions& opt = {});

// sup_r ||d^k R(lambda; r, .)||_{L^q(rho^{-q s} s^{n-1} ds)} / (1 + lambda r)^{k - (n-1)/2}.
// Claims: imaginary, lambda >= 1: n - 2 - k + max(-n/q, k - (n-1)/2) (Equal for k = 0);
// imaginary, lambda <= 1: n - 2 - k (the displayed lambda^{n-2} is exceeded for k > 0); non-imaginary, lambda <= 1: -k (LowerBound:
// only an upper bound on the norm; sharp when n = 2, nu = 0).
NormScan lq_slice_scan(const GridPtr& grid, double nu, double sigma, double q, int k, bool imaginary,
                       const ScanOptions& opt = {});

// sup_{r,s} rho^{-alpha}(r) |d^k Im R_V(lambda; r, s)| rho^{-alpha}(s). lambda <= 1: claim n - 2 - k
// (Equal); lambda >= 1: claim 2 ceil(n/4)(n-2) - 1 (UpperBound, +0.2).
NormScan pointwise_bound_scan(const GridPtr& grid, double nu, const PotentialSpec& V, double alpha,
                              int k, const ScanOptions& opt = {});

struct DecayReport {
    std::string name;
    std::vector<double> t;
    std::vector<double> norm;  // sup_r rho^{-alpha} |u(t, r)| (or sup_r ||u(t, r, .)||_{L^2(X)})
    std::vector<double> constant;  // norm t^{n/2} / data_norm
    double data_norm = 0.0;
    double alpha = 0.0;
    Regime regime;  // slope fitted on the last decade of t

    bool pass() const { return regime.pass(); }
};

// alpha of the dispersive estimate: 2 ceil(n/4)(n-2) - (n-1)/2 + 2 (inclusive).
double dispersive_alpha(int n);

struct DecayOptions {
    double t_lo = 10.0;
    double t_hi = 100.0;
    std::size_t samples = 12;
    double r_obs = 10.0;     // sup over r in (0, r_obs]
    std::size_t r_points = 200;
    double tolerance = 0.0;  // 0: 0.1 for odd n, 0.05 for even n
    ClaimKind kind = ClaimKind::Equal;
    double claim = 0.0;      // 0: -n/2 for odd n, -(n-1)/2 (UpperBound) for even n
    PropagatorRequest request;  // nu, V, tolerances (t is ignored)
};

// Weighted sup-norm decay of mode j with data f.
DecayReport decay_fit(const LinkSpectrum& spec, std::size_t j, const ModeFunction& f,
                      const DecayOptions& opt);

// sup_r ||u(t, r, .)||_{L^2(X)} for free data sum_j f_j(r) phi_j; the sup runs over
// r in (0, r_obs + r_speed t]. Claim -n/2.
struct ConeDecayOptions {
    double t_lo = 10.0;
    double t_hi = 100.0;
    std::size_t samples = 10;
    double r_obs = 10.0;
    double r_speed = 8.0;
    std::size_t r_points = 400;
    double tolerance = 0.1;
    int jobs = 1;
};

DecayReport free_l1l2_linf_l2(const LinkSpectrum& spec, const std::vector<ModeFunction>& modes,
                              const ConeDecayOptions& opt = {});

// Relative defect between int_0^R e^{it l^2} chi(l/R) l h(l) dl and its N-fold integrated-by-parts
// form (-1/(2it))^N int e^{it l^2} l D^N[chi h] dl, D = l^{-1} d/dl, with
// h(l) = (2/pi) <f, Im R_V(l+i0) f>. Requires N < nu + 1 (no boundary terms at 0) and N <= 8.
double ibp_consistency(const GridPtr& grid, double nu, const PotentialSpec& V, double t, int N,
                       const ModeFunction& f, const CutoffSpec& cutoff = {});

constexpr int kIbpMaxOrder = 8;

// "PASS|FAIL name fitted claimed tolerance" per regime.
std::string summary_lines(const NormScan& s);
std::string summary_line(const DecayReport& d);

// CSV rows x,value,claim,fit (no header comment; callers add it).
void write_csv(std::ostream& os, const NormScan& s);
void write_csv(std::ostream& os, const DecayReport& d);

}  // namespace conewave
