#include "doctest.h"

#include <algorithm>
#include <sstream>

#include "conewave/errors.hpp"
#include "conewave/verify.hpp"

using namespace conewave;

namespace {

const PotentialSpec kZero = make_potential("zero", {});

ScanOptions low_range() {
    ScanOptions o;
    o.lambda_lo = 1e-3;
    o.lambda_hi = 1e-1;
    o.samples = 11;
    return o;
}

}  // namespace

TEST_CASE("weighted_opnorm: identity, homogeneity, dense vs Lanczos") {
    auto g = build_grid(3, 10, 160);
    KernelMatrix I;
    I.grid = g;
    I.values = CMat::Zero(160, 160);
    for (int a = 0; a < 160; ++a) I.values(a, a) = 1.0 / g->w[a];
    CHECK(weighted_opnorm(I, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));

    auto K = free_kernel(g, 0.5, 3.0, KernelSign::Plus);
    const double a = weighted_opnorm(K, 1, 1);
    auto K2 = K;
    K2.values *= cplx(0.0, -2.5);
    CHECK(weighted_opnorm(K2, 1, 1) == doctest::Approx(2.5 * a).epsilon(1e-12));

    const auto S = free_separable(g, 0.5, 3.0, KernelSign::Plus);
    const double b = weighted_operator_norm(*g, [&](const CVec& f) { return S.apply(f); }, 1, 1);
    CHECK(b == doctest::Approx(a).epsilon(1e-9));
}

TEST_CASE("weighted_opnorm: free kernel halves from lambda 10 to 20") {
    auto g = build_grid(3, 20, 1200);
    const double n10 = weighted_opnorm(free_kernel(g, 0.5, 10.0, KernelSign::Plus), 1, 1);
    const double n20 = weighted_opnorm(free_kernel(g, 0.5, 20.0, KernelSign::Plus), 1, 1);
    CHECK(n10 / n20 == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("lap_scan: slope -1, V = 0 equals free, derivative check, refinement") {
    auto g = build_grid(3, 20, 2400);
    const auto s = lap_scan(g, 0.5, 1.0, 0, kZero);
    CHECK(s.pass());
    CHECK(s.regimes.at(0).fit.slope == doctest::Approx(-1.0).epsilon(0.1));

    const auto zero_gauss = make_potential("gaussian", {0.0, 1.0});
    const auto sz = lap_scan(g, 0.5, 1.0, 0, zero_gauss);
    for (std::size_t i = 0; i < s.value.size(); ++i) CHECK(sz.value[i] == doctest::Approx(s.value[i]).epsilon(1e-10));

    const auto s1 = lap_scan(g, 0.5, 2.0, 1, kZero);
    CHECK(s1.pass());
    CHECK(s1.derivative_check < 1e-6);
    CHECK(s1.derivative_check > 0.0);

    const auto sr = lap_scan(refined(*g), 0.5, 1.0, 0, kZero);
    CHECK(std::abs(sr.regimes[0].fit.slope - s.regimes[0].fit.slope) < 0.02);

    CHECK_THROWS_AS(lap_scan(g, 0.5, 1.5, 1, kZero), DomainError);
}

TEST_CASE("lap_scan: gaussian potential") {
    auto g = build_grid(3, 20, 2400);
    const auto s = lap_scan(g, 1.5, 1.0, 0, make_potential("gaussian", {1.0, 1.0}));
    CHECK(s.pass());
    CHECK(s.min_indicator > 0.5);
}

TEST_CASE("im_lowfreq_scan: exponents n - 2 - k") {
    auto g3 = build_grid(3, 30, 600);
    auto s = im_lowfreq_scan(g3, 0.5, 2.0, 0, kZero, low_range());
    CHECK(s.pass());
    CHECK(s.regimes[0].fit.slope == doctest::Approx(1.0).epsilon(0.15));

    s = im_lowfreq_scan(g3, 0.5, 2.0, 0, make_potential("gaussian", {1.0, 1.0}), low_range());
    CHECK(s.pass());

    auto g2 = build_grid(2, 30, 600);
    const auto circle = build_spectrum(LinkKind::Circle, 2, 2);
    s = im_lowfreq_scan(g2, circle.nu(0), 1.5, 0, kZero, low_range());
    CHECK(s.pass());
    CHECK(std::abs(s.regimes[0].fit.slope) < 0.15);

    auto g4 = build_grid(4, 30, 600);
    const auto link = custom_spectrum(4, {{0.0, 1}, {3.0, 2}}, 1.0);
    s = im_lowfreq_scan(g4, link.nu(0), 3.5, 1, kZero, low_range());
    CHECK(s.pass());
    CHECK(s.regimes[0].claim == 1.0);

    CHECK_THROWS_AS(im_lowfreq_scan(g3, 0.5, 1.5, 0, kZero, low_range()), DomainError);
}

TEST_CASE("lq_slice_scan: imaginary and non-imaginary regimes") {
    auto g = build_grid(3, 20, 800);
    ScanOptions o;
    o.lambda_lo = 1e-3;
    o.lambda_hi = 30;
    auto s = lq_slice_scan(g, 0.5, 2.0, 2.0, 0, true, o);
    CHECK(s.pass());
    REQUIRE(s.regimes.size() == 2);
    CHECK(s.regimes[1].claim == doctest::Approx(0.0));  // n-2 + max(-n/q, -(n-1)/2) = 1 - 1

    s = lq_slice_scan(g, 0.5, 3.5, 1.0, 0, true, o);
    CHECK(s.regimes[1].claim == doctest::Approx(0.0));  // 1 + max(-3, -1)
    CHECK(s.pass());

    ScanOptions lo = low_range();
    lo.samples = 21;
    auto g2 = build_grid(2, 20, 800);
    s = lq_slice_scan(g2, 0.0, 3.5, 2.0, 1, false, lo);
    CHECK(s.pass());
    CHECK(s.regimes[0].fit.slope == doctest::Approx(-1.0).epsilon(0.2));

    CHECK_THROWS_AS(lq_slice_scan(g, 0.5, 1.0, 2.0, 0, true, o), DomainError);
    CHECK_THROWS_AS(lq_slice_scan(g, 0.5, 9.0, 4.0, 0, false, o), DomainError);
}

TEST_CASE("pointwise_bound_scan: low exponent n-2-k, high growth bounded") {
    auto g = build_grid(3, 20, 800);
    ScanOptions o;
    o.lambda_lo = 1e-3;
    o.lambda_hi = 10;
    auto s = pointwise_bound_scan(g, 0.5, kZero, 0.0, 0, o);
    CHECK(s.pass());
    CHECK(s.regimes[0].fit.slope == doctest::Approx(1.0).epsilon(0.2));

    o.lambda_hi = 0.1;
    o.lambda_lo = 1e-3;
    o.samples = 11;
    const auto V = make_potential("gaussian", {0.5, 1.0}, 4.0);
    s = pointwise_bound_scan(g, 0.5, V, 0.0, 1, o);
    CHECK(s.pass());
    CHECK(std::abs(s.regimes[0].fit.slope) < 0.2);
    CHECK(s.derivative_check < 1e-6);

    CHECK_THROWS_AS(pointwise_bound_scan(g, 0.5, make_potential("gaussian", {0.5, 1.0}, 2.0), 0.0, 1, o),
                    DomainError);
}

TEST_CASE("decay_fit: n = 3 free and perturbed, n = 2 even-n bound") {
    const auto s2 = build_spectrum(LinkKind::UnitSphere, 3, 3);
    auto g = build_grid(3, 12, 400);
    const auto f = gaussian_profile(g, 4.0, 0.6);
    DecayOptions o;
    o.request.alpha = dispersive_alpha(3);
    CHECK(o.request.alpha == 3.0);
    auto d = decay_fit(s2, 0, f, o);
    CHECK(d.pass());
    CHECK(d.regime.fit.slope == doctest::Approx(-1.5).epsilon(0.1 / 1.5));
    for (double c : d.constant) CHECK(c < 2.0 * d.constant.back());

    o.request.V = make_potential("gaussian", {0.3, 1.0}, 8.0);
    d = decay_fit(s2, 0, f, o);
    CHECK(d.pass());

    const auto circle = build_spectrum(LinkKind::Circle, 2, 3);
    auto g2 = build_grid(2, 12, 400);
    DecayOptions o2;
    o2.request.alpha = dispersive_alpha(2);
    d = decay_fit(circle, 0, gaussian_profile(g2, 4.0, 0.6), o2);
    CHECK(d.pass());
    CHECK(d.regime.kind == ClaimKind::UpperBound);
    CHECK(d.regime.fit.slope <= -0.45);
}

TEST_CASE("free_l1l2_linf_l2: slopes -n/2, single mode is the radial estimate") {
    for (int n : {2, 3}) {
        const auto spec = build_spectrum(n == 2 ? LinkKind::Circle : LinkKind::UnitSphere, n, 3);
        auto g = build_grid(n, 12, 300);
        std::vector<ModeFunction> m;
        for (std::size_t j = 0; j < 4; ++j) m.push_back(gaussian_profile(g, 4.0 + 0.5 * j, 0.6));
        const auto d = free_l1l2_linf_l2(spec, m);
        CHECK(d.pass());
        CHECK(d.regime.fit.slope == doctest::Approx(-0.5 * n).epsilon(0.1));
    }
    const auto spec = build_spectrum(LinkKind::UnitSphere, 3, 2);
    auto g = build_grid(3, 12, 300);
    ConeDecayOptions o;
    o.samples = 10;
    const auto one = free_l1l2_linf_l2(spec, {gaussian_profile(g, 4.0, 0.6)}, o);
    std::vector<double> xs(o.r_points);
    const double t = one.t[3];
    for (std::size_t q = 0; q < xs.size(); ++q) xs[q] = (o.r_obs + o.r_speed * t) * (q + 1.0) / xs.size();
    const double direct = weber_apply(0.5, t, gaussian_profile(g, 4.0, 0.6), xs).cwiseAbs().maxCoeff();
    CHECK(one.norm[3] == doctest::Approx(direct).epsilon(1e-14));
}

TEST_CASE("ibp_consistency") {
    auto g = build_grid(3, 12, 400);
    const auto f = gaussian_profile(g, 4.0, 0.6);
    CHECK(ibp_consistency(g, 0.5, kZero, 2.0, 0, f) == 0.0);
    CHECK(ibp_consistency(g, 0.5, kZero, 2.0, 1, f) < 1e-6);
    CHECK(ibp_consistency(g, 0.5, make_potential("gaussian", {0.3, 1.0}), 2.0, 1, f) < 1e-6);
    CHECK(ibp_consistency(g, 1.5, kZero, 2.0, 2, f) < 1e-6);
    CHECK_THROWS_AS(ibp_consistency(g, 0.5, kZero, 2.0, 2, f), DomainError);
    CHECK_THROWS_AS(ibp_consistency(g, 20.0, kZero, 2.0, 9, f), DomainError);
}

TEST_CASE("report formats") {
    auto g = build_grid(3, 20, 2400);
    const auto s = lap_scan(g, 0.5, 1.0, 0, kZero);
    const std::string line = summary_lines(s);
    CHECK(line.rfind("PASS lap.free.nu0.5.k0 ", 0) == 0);
    std::ostringstream os;
    write_csv(os, s);
    std::istringstream is(os.str());
    std::string row;
    std::getline(is, row);
    CHECK(row == "x,value,claim,fit");
    int rows = 0;
    while (std::getline(is, row)) {
        CHECK(std::count(row.begin(), row.end(), ',') == 3);
        ++rows;
    }
    CHECK(rows == 21);
}
