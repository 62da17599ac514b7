#include "conewave/specfun.hpp"

#include <array>
#include <cmath>
#include <cstring>
#include <limits>
#include <numbers>
#include <string>

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/sin_pi.hpp>
#include <boost/math/special_functions/cos_pi.hpp>
#include <boost/math/special_functions/binomial.hpp>

#include "conewave/errors.hpp"

namespace conewave {

namespace {

namespace bp = boost::math::policies;
using Pol = bp::policy<bp::domain_error<bp::errno_on_error>,
                       bp::overflow_error<bp::errno_on_error>,
                       bp::evaluation_error<bp::errno_on_error>,
                       bp::promote_double<false>>;

constexpr double kHuge = 1e300;

bool bad(double v) { return !std::isfinite(v) || std::abs(v) > kHuge; }

double bj(double nu, double x) { return boost::math::cyl_bessel_j(nu, x, Pol()); }
double by(double nu, double x) { return boost::math::cyl_neumann(nu, x, Pol()); }
double bi(double nu, double x) { return boost::math::cyl_bessel_i(nu, x, Pol()); }

BesselResult overflowed() { return {cplx(0.0, 0.0), true}; }

// x^p I_nu(x) by its (positive) series, log-scaled.
double i_series_scaled(double nu, double x, double p) {
    if (x == 0.0) {
        if (p + nu == 0.0) return std::exp(-nu * std::numbers::ln2 - std::lgamma(nu + 1.0));
        return 0.0;
    }
    const double lead = (p + nu) * std::log(x) - nu * std::numbers::ln2 - std::lgamma(nu + 1.0);
    const double q = 0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (k * (nu + k));
        sum += term;
        if (term < 1e-17 * sum) break;
    }
    return std::exp(lead) * sum;
}

bool use_series(double nu, double x) { return x * x <= 4.0 * std::max(1.0, nu + 1.0); }

}  // namespace

const char* to_string(BesselKind k) {
    switch (k) {
        case BesselKind::J: return "J";
        case BesselKind::Y: return "Y";
        case BesselKind::H1: return "H1";
        case BesselKind::H2: return "H2";
        case BesselKind::I: return "I";
    }
    return "?";
}

BesselKind bessel_kind_from_string(const char* s) {
    if (!std::strcmp(s, "J")) return BesselKind::J;
    if (!std::strcmp(s, "Y")) return BesselKind::Y;
    if (!std::strcmp(s, "H1")) return BesselKind::H1;
    if (!std::strcmp(s, "H2")) return BesselKind::H2;
    if (!std::strcmp(s, "I")) return BesselKind::I;
    throw DomainError(std::string("unknown Bessel kind ") + s);
}

double j_series_scaled(double nu, double x, double p) {
    if (x == 0.0) {
        if (p + nu == 0.0) return std::exp(-nu * std::numbers::ln2 - std::lgamma(nu + 1.0));
        return 0.0;
    }
    const double lead = (p + nu) * std::log(x) - nu * std::numbers::ln2 - std::lgamma(nu + 1.0);
    const double q = -0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 500; ++k) {
        term *= q / (k * (nu + k));
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) break;
    }
    return std::exp(lead) * sum;
}

BesselResult bessel(BesselKind kind, double nu, double x, const BesselLimits& lim) {
    if (!(x > 0.0) || !(nu >= 0.0))
        throw DomainError("bessel: requires nu >= 0 and x > 0");
    if (nu > lim.nu_max || x > lim.x_max)
        throw DomainError("bessel: argument beyond validated range");
    return bessel_any_order(kind, nu, x);
}

cplx bessel_value(BesselKind kind, double nu, double x, const BesselLimits& lim) {
    auto r = bessel(kind, nu, x, lim);
    if (r.overflow) throw OverflowError("bessel: result overflows");
    return r.value;
}

BesselResult bessel_any_order(BesselKind kind, double nu, double x) {
    if (!(x > 0.0)) throw DomainError("bessel: requires x > 0");
    if (kind == BesselKind::I) {
        if (nu < 0.0) throw DomainError("bessel: negative order of I not supported");
        double v = bi(nu, x);
        if (bad(v)) return overflowed();
        return {cplx(v, 0.0), false};
    }
    double jv, yv;
    if (nu >= 0.0) {
        jv = bj(nu, x);
        yv = (kind == BesselKind::J) ? 0.0 : by(nu, x);
    } else {
        const double mu = -nu;
        const double c = boost::math::cos_pi(mu), s = boost::math::sin_pi(mu);
        const double jm = bj(mu, x);
        const double ym = by(mu, x);
        if (bad(ym) && s != 0.0) return overflowed();
        jv = c * jm - (s != 0.0 ? s * ym : 0.0);
        yv = s * jm + c * ym;
    }
    if (bad(jv) || ((kind != BesselKind::J) && bad(yv))) return overflowed();
    switch (kind) {
        case BesselKind::J: return {cplx(jv, 0.0), false};
        case BesselKind::Y: return {cplx(yv, 0.0), false};
        case BesselKind::H1: return {cplx(jv, yv), false};
        case BesselKind::H2: return {cplx(jv, -yv), false};
        default: break;
    }
    return overflowed();
}

BesselResult scaled_bessel(const ScaledBesselRequest& req, BesselKind kind) {
    const double nu = req.nu, x = req.x, p = req.power_shift;
    if (!(nu >= 0.0) || !(x >= 0.0)) throw DomainError("scaled_bessel: requires nu >= 0, x >= 0");
    if (kind == BesselKind::J || kind == BesselKind::I) {
        if (x == 0.0 && p < -nu) throw DomainError("scaled_bessel: singular at x = 0");
        if (use_series(nu, x) || x == 0.0) {
            double v = kind == BesselKind::J ? j_series_scaled(nu, x, p) : i_series_scaled(nu, x, p);
            if (bad(v)) return overflowed();
            return {cplx(v, 0.0), false};
        }
        auto r = bessel_any_order(kind, nu, x);
        if (r.overflow) return r;
        r.value *= std::pow(x, p);
        if (bad(std::abs(r.value))) return overflowed();
        return r;
    }
    if (x == 0.0) throw DomainError("scaled_bessel: Y/H kernels are singular at x = 0");
    auto r = bessel_any_order(kind, nu, x);
    if (r.overflow) return r;
    // combine in log space when the power alone would overflow
    const double lp = p * std::log(x);
    const double la = std::log(std::abs(r.value)) + lp;
    if (std::abs(r.value) == 0.0) return {cplx(0.0, 0.0), false};
    if (la > std::log(kHuge)) return overflowed();
    r.value = (r.value / std::abs(r.value)) * std::exp(la);
    return r;
}

BesselResult bessel_dlambda(BesselKind kind, double nu, double lambda, double r, int k) {
    if (k < 0 || k > 8) throw DomainError("bessel_dlambda: derivative order must be in [0,8]");
    if (kind == BesselKind::I) throw DomainError("bessel_dlambda: I kind not supported");
    if (!(nu >= 0.0)) throw DomainError("bessel_dlambda: requires nu >= 0");
    const double x = lambda * r;
    if (k == 0) return bessel_any_order(kind, nu, x);
    cplx acc(0.0, 0.0);
    for (int i = 0; i <= k; ++i) {
        auto c = bessel_any_order(kind, nu - k + 2 * i, x);
        if (c.overflow) return overflowed();
        const double b = boost::math::binomial_coefficient<double>(k, i);
        acc += ((i % 2) ? -b : b) * c.value;
    }
    acc *= std::pow(0.5 * r, k);
    if (bad(std::abs(acc))) return overflowed();
    return {acc, false};
}

cplx wronskian_check(double nu, double x) {
    auto h = bessel_any_order(BesselKind::H1, nu, x);
    auto j = bessel_any_order(BesselKind::J, nu, x);
    auto hd = bessel_dlambda(BesselKind::H1, nu, x, 1.0, 1);
    auto jd = bessel_dlambda(BesselKind::J, nu, x, 1.0, 1);
    if (h.overflow || hd.overflow) throw OverflowError("wronskian_check: overflow");
    return h.value * jd.value - hd.value * j.value;
}

}  // namespace conewave
