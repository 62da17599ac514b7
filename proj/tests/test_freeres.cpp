#include <cmath>
#include <numbers>

#include "doctest.h"
#include "conewave/errors.hpp"
#include "conewave/freeres.hpp"
#include "conewave/specfun.hpp"

using namespace conewave;
using std::numbers::pi;

namespace {
CVec bump(const RadialGrid& g, double c, double w) {
    CVec f(static_cast<Eigen::Index>(g.size()));
    for (std::size_t a = 0; a < g.size(); ++a) {
        double z = (g.r[a] - c) / w;
        f[static_cast<Eigen::Index>(a)] = std::abs(z) < 6.5 ? std::exp(-z * z) : 0.0;
    }
    return f;
}
}  // namespace

TEST_CASE("grid weights") {
    CHECK(build_grid(3, 1.0, 400)->w.size() > 0);
    auto sum = [](const GridPtr& g) {
        double s = 0;
        for (double w : g->w) s += w;
        return s;
    };
    CHECK(std::abs(sum(build_grid(3, 1.0, 400)) - 1.0 / 3) < 1e-10 / 3);
    CHECK(std::abs(sum(build_grid(2, 2.0, 400)) - 2.0) < 2e-10);
    CHECK(std::abs(sum(build_grid(5, 1.0, 400)) - 0.2) < 2e-11);
    auto g = build_grid(3, 40.0, 600);
    for (std::size_t i = 1; i < g->size(); ++i) CHECK(g->r[i] > g->r[i - 1]);
    CHECK(g->r.front() > 0.0);
    CHECK_THROWS_AS(build_grid(3, 1.0, 8), DomainError);
}

TEST_CASE("free kernel closed form n=3 nu=1/2") {
    auto g = build_grid(3, 5.0, 160);
    const double lam = 1.7;
    auto K = free_kernel(g, 0.5, lam, KernelSign::Plus);
    auto Ki = im_free_kernel(g, 0.5, lam);
    auto Km = free_kernel(g, 0.5, lam, KernelSign::Minus);
    double worst = 0, wi = 0, wc = 0, wdef = 0;
    for (std::size_t a = 0; a < g->size(); a += 7)
        for (std::size_t b = 0; b < g->size(); b += 5) {
            double r = g->r[a], s = g->r[b], rl = std::min(r, s), rg = std::max(r, s);
            cplx expect = std::exp(cplx(0, lam * rg)) * std::sin(lam * rl) / (lam * r * s);
            worst = std::max(worst, std::abs(K.values(a, b) - expect) / std::abs(expect));
            double ei = std::sin(lam * r) * std::sin(lam * s) / (lam * r * s);
            wi = std::max(wi, std::abs(Ki.values(a, b).real() - ei) / std::abs(expect));
            wc = std::max(wc, std::abs(Km.values(a, b) - std::conj(K.values(a, b))));
            cplx im = (K.values(a, b) - Km.values(a, b)) / cplx(0, 2);
            wdef = std::max(wdef, std::abs(im - Ki.values(a, b)));
        }
    CHECK(worst < 1e-12);
    CHECK(wi < 1e-12);
    CHECK(wc == 0.0);
    CHECK(wdef < 1e-13);
    CHECK_THROWS_AS(free_kernel(g, 0.5, 0.0, KernelSign::Plus), DomainError);
    CHECK((Ki.values - Ki.values.transpose()).norm() == 0.0);
}

TEST_CASE("independent re-evaluation and scaling") {
    const int n = 4;
    auto g = build_grid(n, 6.0, 128);
    const double nu = std::sqrt(3.0), lam = 2.3, d = 1.0;
    auto K = free_kernel(g, nu, lam, KernelSign::Plus);
    double worst = 0;
    for (std::size_t a = 3; a < g->size(); a += 11)
        for (std::size_t b = 2; b < g->size(); b += 13) {
            double r = g->r[a], s = g->r[b];
            cplx direct = cplx(0, pi / 2) * std::pow(r * s, -d) *
                          bessel(BesselKind::J, nu, lam * std::min(r, s)).value.real() *
                          bessel(BesselKind::H1, nu, lam * std::max(r, s)).value;
            worst = std::max(worst, std::abs(K.values(a, b) - direct) / std::abs(direct));
        }
    CHECK(worst < 1e-12);
    // homogeneity: K(cr, cs; lambda/c) = c^{-(n-2)} K(r, s; lambda)
    FreeFactors f1(n, nu, lam, KernelSign::Plus), f2(n, nu, lam / 2.5, KernelSign::Plus);
    const double r = 0.7, s = 1.9, c = 2.5;
    cplx k1 = f1.prefactor() * f1.lo(r, 0) * f1.hi(s, 0);
    cplx k2 = f2.prefactor() * f2.lo(c * r, 0) * f2.hi(c * s, 0);
    CHECK(std::abs(k2 - std::pow(c, -(n - 2)) * k1) < 1e-13 * std::abs(k1));
}

TEST_CASE("small lambda Im kernel limit") {
    const int n = 3;
    const double nu = 1.5, r = 0.8, s = 1.3, d = 0.5;
    FreeFactors f(n, nu, 1e-4, KernelSign::Im);
    double got = (f.prefactor() * f.lo(r, 0) * f.hi(s, 0)).real();
    double lead = std::pow(1e-4, 2 * nu) * std::pow(r * s, nu - d) * (pi / 2) /
                  std::pow(std::pow(2.0, nu) * std::tgamma(nu + 1), 2);
    CHECK(got == doctest::Approx(lead).epsilon(1e-6));
}

TEST_CASE("apply kernel fast path, linearity, zero") {
    auto g = build_grid(3, 10.0, 320);
    auto S = free_separable(g, 1.5, 3.0, KernelSign::Plus, 0);
    auto K = free_kernel(g, 1.5, 3.0, KernelSign::Plus);
    ModeFunction f{g, bump(*g, 4, 0.6)}, h{g, bump(*g, 2, 0.3)};
    auto u = apply_kernel(K, f);
    CVec fast = S.apply(f.values);
    CHECK((u.values - fast).norm() <= 1e-12 * u.values.norm());
    ModeFunction comb{g, 2.0 * f.values - cplx(0, 3) * h.values};
    auto uc = apply_kernel(K, comb);
    CVec lin = 2.0 * u.values - cplx(0, 3) * apply_kernel(K, h).values;
    CHECK((uc.values - lin).norm() <= 1e-13 * lin.norm());
    ModeFunction z{g, CVec::Zero(g->size())};
    CHECK(apply_kernel(K, z).values.norm() == 0.0);
    // derivative kernels: separable vs dense
    auto S2 = free_separable(g, 1.5, 3.0, KernelSign::Minus, 2);
    auto K2 = free_kernel(g, 1.5, 3.0, KernelSign::Minus, 2);
    CHECK((apply_kernel(K2, f).values - S2.apply(f.values)).norm() <= 1e-12 * S2.apply(f.values).norm());
}

TEST_CASE("lambda derivative kernels against differences") {
    auto g = build_grid(3, 4.0, 64);
    const double lam = 1.9, h = 1e-4 * lam;
    for (int k = 1; k <= 3; ++k) {
        auto Kk = free_kernel(g, 1.5, lam, KernelSign::Plus, k).values;
        auto Kp = free_kernel(g, 1.5, lam + h, KernelSign::Plus, k - 1).values;
        auto Km = free_kernel(g, 1.5, lam - h, KernelSign::Plus, k - 1).values;
        CMat fd = (Kp - Km) / (2 * h);
        CHECK((fd - Kk).norm() <= 1e-6 * Kk.norm());
    }
    // reflection: Im R(-lambda) = -Im R(lambda)
    auto a = im_free_kernel(g, 0.5, 1.2).values, b = im_free_kernel(g, 0.5, -1.2).values;
    CHECK((a + b).norm() < 1e-14 * a.norm());
}

TEST_CASE("product rule apply and Green residual") {
    auto g = build_grid(3, 12.0, 640);
    CVec f = bump(*g, 4.0, 0.5);
    FreeFactors fac(3, 0.5, 2.0, KernelSign::Plus);
    // against the closed form at n=3, nu=1/2, by a dense fine quadrature
    std::vector<double> xs = {0.3, 1.7, 4.05, 7.2};
    CVec u = kernel_apply_at(fac, 0, *g, f, xs);
    auto fine = build_grid(3, 12.0, 16 * 600);
    for (std::size_t q = 0; q < xs.size(); ++q) {
        cplx acc = 0;
        const double r = xs[q];
        for (std::size_t b = 0; b < fine->size(); ++b) {
            double s = fine->r[b], z = (s - 4.0) / 0.5;
            double fv = std::abs(z) < 6.5 ? std::exp(-z * z) : 0.0;
            acc += std::exp(cplx(0, 2.0 * std::max(r, s))) * std::sin(2.0 * std::min(r, s)) / (2.0 * r * s) *
                   fv * fine->w[b];
        }
        CHECK(std::abs(u[q] - acc) < 1e-7 * std::abs(acc));
    }
    auto res = green_residual(*g, 0.5, 2.0, f, 0.1, 11.0);
    CHECK(res.nodes > 100);
    CHECK(res.relative < 1e-4);
    // product-rule rows reproduce the same application
    std::vector<std::size_t> cols(g->size());
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
    CMat Q = product_rule_rows(fac, *g, xs, cols);
    CHECK((Q * f - u).norm() < 1e-12 * u.norm());
}

TEST_CASE("spectral density normalization") {
    auto g = build_grid(3, 5.0, 64);
    auto spec = build_spectrum(LinkKind::UnitSphere, 3, 3);
    auto d = spectral_density(g, spec, 2.0, {0, 1});
    auto ki = im_free_kernel(g, 0.5, 2.0).values;
    CHECK((d[0].values - ki * (2.0 / pi)).norm() < 1e-14 * ki.norm());
    CHECK(d[1].nu == doctest::Approx(1.5));
    CHECK((d[0].values - d[0].values.transpose()).norm() == 0.0);
}
