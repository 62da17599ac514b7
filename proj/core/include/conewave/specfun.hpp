#pragma once

#include <cmath>
#include <complex>
#include <numbers>

namespace conewave {

using cplx = std::complex<double>;

enum class BesselKind { J, Y, H1, H2, I };

const char* to_string(BesselKind k);
BesselKind bessel_kind_from_string(const char* s);

struct BesselLimits {
    double nu_max = 200.0;
    double x_max = 1e6;
};

// Value plus overflow tag. Overflowed results carry value 0 and must not be used.
struct BesselResult {
    cplx value{0.0, 0.0};
    bool overflow = false;
};

// C_nu(x) for nu >= 0, x > 0. Throws DomainError outside the domain.
BesselResult bessel(BesselKind kind, double nu, double x, const BesselLimits& lim = {});

// Same, but throws OverflowError instead of returning the tag.
cplx bessel_value(BesselKind kind, double nu, double x, const BesselLimits& lim = {});

// Any real order (negative orders through reflection). I is restricted to nu >= 0.
BesselResult bessel_any_order(BesselKind kind, double nu, double x);

struct ScaledBesselRequest {
    double nu = 0.0;
    double x = 0.0;
    double power_shift = 0.0;  // p in x^p C_nu(x)
};

// x^p C_nu(x). For J (and I) with p >= -nu the value at x = 0 is the analytic limit
// and tiny x is handled by the series in scaled form.
BesselResult scaled_bessel(const ScaledBesselRequest& req, BesselKind kind);

// d^k/dlambda^k C_nu(lambda r) = r^k 2^-k sum_i (-1)^i binom(k,i) C_{nu-k+2i}(lambda r).
BesselResult bessel_dlambda(BesselKind kind, double nu, double lambda, double r, int k);

// H1_nu(x) J_nu'(x) - H1_nu'(x) J_nu(x); equals -2i/(pi x).
cplx wronskian_check(double nu, double x);

// i^nu on the principal branch.
inline cplx i_pow(double nu) { return std::polar(1.0, 0.5 * std::numbers::pi * nu); }

// Power series for x^p J_nu(x), valid for nu >= 0 and any x >= 0 with modest x.
double j_series_scaled(double nu, double x, double p);

}  // namespace conewave

