#include <chrono>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/bessel.hpp>

#include "doctest.h"
#include "conewave/errors.hpp"
#include "conewave/propagate.hpp"
#include "conewave/specfun.hpp"

using namespace conewave;
using std::numbers::pi;

namespace {
std::vector<double> lattice(double lo, double hi, int m) {
    std::vector<double> x(m);
    for (int i = 0; i < m; ++i) x[i] = lo + (hi - lo) * i / (m - 1);
    return x;
}
double max_rel(const CVec& a, const CVec& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("cutoff") {
    CutoffSpec c;
    CHECK(c.chi(0.0) == 1.0);
    CHECK(c.chi(0.5) == 1.0);
    CHECK(c.chi(-0.5) == 1.0);
    CHECK(c.chi(1.0) == 0.0);
    CHECK(c.chi(-1.3) == 0.0);
    CHECK(c.chi(0.75) == doctest::Approx(0.5).epsilon(1e-14));
    for (double x : {-0.9, -0.6, 0.55, 0.7, 0.93}) {
        CHECK(c.chi(x) >= 0.0);
        CHECK(c.chi(x) <= 1.0);
        CHECK(c.chi(x) == doctest::Approx(c.chi(-x)).epsilon(1e-15));
        auto J = c.chi_jet(x, 4);
        const double h = 1e-4;
        double d1 = (c.chi(x + h) - c.chi(x - h)) / (2 * h);
        double d2 = (c.chi(x + h) - 2 * c.chi(x) + c.chi(x - h)) / (h * h);
        CHECK(J.derivative(1) == doctest::Approx(d1).epsilon(1e-5));
        CHECK(J.derivative(2) == doctest::Approx(d2).epsilon(1e-4));
    }
    auto edge = c.chi_jet(0.5 + 1e-3, 6);
    for (int k = 1; k <= 6; ++k) CHECK(std::abs(edge.derivative(k)) < 1e-100);
    CHECK_THROWS_AS(c.chi_jet(0.7, kJetMax + 1), DomainError);
}

TEST_CASE("jet arithmetic") {
    auto x = Jet::variable(0.3, 6);
    auto one = Jet::constant(1.0, 6);
    auto e = exp(x * x);
    auto r = one / (one + x);
    for (int k = 0; k <= 6; ++k) CHECK(r.derivative(k) == doctest::Approx(std::pow(-1.0, k) * std::tgamma(k + 1.0) / std::pow(1.3, k + 1)));
    CHECK(e.derivative(1) == doctest::Approx(2 * 0.3 * std::exp(0.09)));
    CHECK(e.d().c[0] == doctest::Approx(e.derivative(1)));
}

TEST_CASE("Weber kernel closed forms") {
    for (double t : {0.5, 2.0})
        for (double r1 : {0.3, 2.0})
            for (double r2 : {0.7, 5.0}) {
                double x = r1 * r2 / (2 * t);
                double mag = std::abs(std::sin(x)) / (std::sqrt(pi * t) * r1 * r2) * std::sqrt(2.0);
                // n=3, nu=1/2: (1/2t)(r1 r2)^{-1/2} sqrt(2/(pi x)) |sin x|
                mag = std::abs(std::sin(x)) * std::sqrt(2.0 / (pi * x)) / (2 * t * std::sqrt(r1 * r2));
                CHECK(std::abs(weber_mode_kernel(3, 0.5, t, r1, r2)) == doctest::Approx(mag).epsilon(1e-13));
                CHECK(std::abs(weber_mode_kernel(2, 1.0, t, r1, r2)) ==
                      doctest::Approx(std::abs(boost::math::cyl_bessel_j(1.0, x)) / (2 * t)).epsilon(1e-13));
            }
    CHECK_THROWS_AS(weber_mode_kernel(3, 0.5, 0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("heat-kernel form of the Weber integral") {
    // int_0^inf e^{-s l^2} J(l r1) J(l r2) l dl = e^{-(r1^2+r2^2)/4s} I(r1 r2/2s)/(2s)
    const auto& gl = gauss_legendre(32);
    for (double nu : {0.5, 1.0, 2.0, 3.5})
        for (double s : {0.5, 1.0})
            for (auto [r1, r2] : {std::pair{0.5, 1.5}, std::pair{2.0, 3.0}}) {
                double sum = 0;
                const double L = std::sqrt(40.0 / s), h = 0.05;
                for (double a = 0; a < L; a += h)
                    for (int i = 0; i < 32; ++i) {
                        double l = a + 0.5 * h * (1 + gl.nodes[i]);
                        sum += 0.5 * h * gl.weights[i] * std::exp(-s * l * l) * boost::math::cyl_bessel_j(nu, l * r1) *
                               boost::math::cyl_bessel_j(nu, l * r2) * l;
                    }
                double closed = std::exp(-(r1 * r1 + r2 * r2) / (4 * s)) * boost::math::cyl_bessel_i(nu, r1 * r2 / (2 * s)) / (2 * s);
                CHECK(sum == doctest::Approx(closed).epsilon(1e-8));
            }
}

TEST_CASE("free spectral quadrature matches the Weber operator") {
    auto g = build_grid(3, 13.0, 900);
    auto f = gaussian_profile(g, 6.2, 1.0);
    auto xs = lattice(0.1, 10.0, 64);
    for (double nu : {0.5, 2.0}) {
        PropagatorRequest req;
        req.nu = nu;
        auto T = spectral_table(req, f, xs);
        auto U = propagate_table(T, {0.5, 5.0});
        double e1 = max_rel(U.row(0).transpose(), weber_apply(nu, 0.5, f, xs));
        double e2 = max_rel(U.row(1).transpose(), weber_apply(nu, 5.0, f, xs));
        CHECK(e1 < 1e-6);
        CHECK(e2 < 1e-6);
        MESSAGE("nu=" << nu << " rel err " << e1 << " " << e2 << " lambda_max " << T.edges.back());
    }
}

TEST_CASE("quadrature order: halving the panel width") {
    auto g = build_grid(3, 13.0, 900);
    auto f = gaussian_profile(g, 6.2, 1.0);
    auto xs = lattice(0.1, 10.0, 32);
    auto ref = weber_apply(1.5, 2.0, f, xs);
    double err[2];
    for (int h = 0; h < 2; ++h) {
        PropagatorRequest req;
        req.nu = 1.5;
        req.resolution = h == 0 ? 48.0 : 24.0;
        auto T = spectral_table(req, f, xs);
        err[h] = max_rel(propagate_table(T, {2.0}).row(0).transpose(), ref);
    }
    MESSAGE("coarse " << err[0] << " fine " << err[1]);
    CHECK(err[0] > 4 * err[1]);
}

TEST_CASE("unitarity, small time and phase symmetry") {
    auto g = build_grid(3, 30.0, 800);
    auto f = gaussian_profile(g, 6.2, 1.0);
    PropagatorRequest req;
    req.t = 0.5;
    auto u = mode_propagate(req, f);
    CHECK(mode_norm(u) == doctest::Approx(mode_norm(f)).epsilon(1e-4));
    req.t = 1e-3;
    auto u0 = mode_propagate(req, f);
    CHECK((u0.values - f.values).norm() / f.values.norm() < 5e-3);

    auto gs = build_grid(3, 10.0, 400);
    auto fs = gaussian_profile(gs, 3.5, 0.55);
    PropagatorRequest rv;
    rv.V = make_potential("gaussian", {0.3, 1.0});
    auto T = spectral_table(rv, fs);
    auto U = propagate_table(T, {2.0, -2.0});
    CHECK((U.row(1) - U.row(0).conjugate()).norm() < 1e-13 * U.row(0).norm());
    CHECK_THROWS_AS(propagate_table(T, {0.0}), DomainError);
}

TEST_CASE("perturbed path: vanishing potential and off-grid evaluation") {
    auto g = build_grid(3, 10.0, 400);
    auto f = gaussian_profile(g, 3.5, 0.55);
    PropagatorRequest r0, r1;
    r1.V = make_potential("gaussian", {1e-9, 1.0});
    r0.t = r1.t = 3.0;
    auto u0 = mode_propagate(r0, f), u1 = mode_propagate(r1, f);
    CHECK((u1.values - u0.values).norm() < 1e-6 * u0.values.norm());

    r1.V = make_potential("gaussian", {0.5, 1.0});
    std::vector<double> xs{0.4, 1.7, 3.3, 6.1};
    auto Ton = spectral_table(r1, f);
    auto Toff = spectral_table(r1, f, xs);
    CVec uon = propagate_table(Ton, {3.0}).row(0).transpose();
    CVec uoff = propagate_table(Toff, {3.0}).row(0).transpose();
    // product-rule evaluation at two nodes vs the plain Nystrom values there
    std::vector<double> node{g->r[100], g->r[200]};
    auto Tn = spectral_table(r1, f, node);
    CVec un = propagate_table(Tn, {3.0}).row(0).transpose();
    CHECK(std::abs(un[0] - uon[100]) < 1e-4 * uon.cwiseAbs().maxCoeff());
    CHECK(std::abs(un[1] - uon[200]) < 1e-4 * uon.cwiseAbs().maxCoeff());
    CHECK(uoff.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("S operator") {
    auto circ = build_spectrum(LinkKind::Circle, 2, 40, 2 * pi);
    auto s2 = build_spectrum(LinkKind::UnitSphere, 3, 40);
    CHECK(std::abs(s_operator_limit(circ) - 1.0 / (2 * pi)) < 1e-15);
    LinkPoint p{0.7, 1.1}, q{1.9, 0.4};
    for (double x : {1e-3, 0.5, 3.0}) {
        // coincident angles: S = e^{ix} times the limit for both links
        auto sc = s_operator_entry(x, circ, 40, p, p);
        auto ss = s_operator_entry(x, s2, 40, p, p);
        cplx ec = std::exp(cplx(0, x)) * s_operator_limit(circ);
        cplx es = std::exp(cplx(0, x)) * s_operator_limit(s2);
        CHECK(std::abs(sc.value - ec) < 1e-12);
        CHECK(std::abs(ss.value - es) < 1e-12);
    }
    // tail bound dominates the truncation error
    auto full = s_operator_entry(4.0, s2, 40, p, q);
    auto part = s_operator_entry(4.0, s2, 6, p, q);
    CHECK(std::abs(full.value - part.value) <= part.tail_bound);
    CHECK(part.tail_bound < 1.0);
    CHECK(s_operator_norm(1e-3, s2, 40) <= s_operator_norm(1.0, s2, 40) * 10);
    auto cust = custom_spectrum(3, {{0.0, 1}, {2.0, 3}}, 4 * pi);
    CHECK_THROWS_AS(s_operator_entry(1.0, cust, 2, p, p), DomainError);
}

TEST_CASE("mode sum recovers the Euclidean kernel") {
    auto s2 = build_spectrum(LinkKind::UnitSphere, 3, 30);
    LinkPoint th{1.2, 0.3};
    for (auto [r1, r2] : {std::pair{0.5, 1.0}, std::pair{1.3, 2.9}, std::pair{1.0, 3.9}}) {
        cplx k = free_cone_kernel(s2, 30, 1.0, r1, th, r2, th);
        double d = r1 - r2;
        cplx e3 = std::conj(std::pow(cplx(0, 4 * pi), -1.5) * std::exp(cplx(0, d * d / 4)));
        CHECK(std::abs(k - e3) / std::abs(e3) < 1e-10);
    }
}

TEST_CASE("full cone field") {
    auto s2 = build_spectrum(LinkKind::UnitSphere, 3, 3);
    auto g = build_grid(3, 14.0, 700);
    std::vector<ModeFunction> modes(s2.num_modes());
    for (auto& m : modes) {
        m.grid = g;
        m.values = CVec::Zero(static_cast<Eigen::Index>(g->size()));
    }
    modes[0] = gaussian_profile(g, 5.0, 1.0);
    std::vector<LinkPoint> th{{0.3, 0.1}, {1.4, 2.0}, {2.8, 5.0}};
    auto F = full_cone_propagate(s2, 0.7, modes, {0.5, 2.0, 4.0}, th);
    for (int i = 0; i < 3; ++i) CHECK(std::abs(F.values(i, 1) - F.values(i, 0)) < 1e-13 * std::abs(F.values(i, 0)));
    auto cust = custom_spectrum(3, {{0.0, 1}}, 4 * pi);
    CHECK_THROWS_AS(full_cone_propagate(cust, 0.7, {modes[0]}, {1.0}, th), DomainError);
}
