#include "conewave/acceptance.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "conewave/errors.hpp"
#include "conewave/specfun.hpp"
#include "conewave/verify.hpp"

namespace conewave {

namespace {

constexpr double pi = std::numbers::pi;

// Pinned tolerances.
constexpr double kWeberTol = 1e-6;
constexpr double kEuclidTol = 1e-3;
constexpr double kGreenTol = 1e-3;
constexpr double kWronskianTol = 1e-8;
constexpr double kLapTol = 0.1;
constexpr double kImLowTol = 0.15;
constexpr double kBirmanTol = 1e-8;
constexpr double kDecayOddTol = 0.1;
constexpr double kDecayEvenSlack = 0.05;
constexpr double kSLimitTol = 1e-3;
constexpr double kSExponentTol = 0.2;
constexpr double kJostTol = 1e-6;
constexpr double kIndicatorHalf = 0.5;
constexpr double kL1L2Tol = 0.1;

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

std::vector<double> lattice(double lo, double hi, int m) {
    std::vector<double> x(m);
    for (int i = 0; i < m; ++i) x[i] = lo + (hi - lo) * i / (m - 1);
    return x;
}

template <class Report>
void dump(const AcceptanceOptions& opt, const std::string& file, const Report& rep) {
    if (opt.csv_dir.empty()) return;
    std::ofstream os(opt.csv_dir + "/" + file + ".csv");
    if (!os) throw ConfigError("cannot write " + opt.csv_dir + "/" + file + ".csv");
    if (!opt.csv_header.empty()) os << opt.csv_header << '\n';
    write_csv(os, rep);
}

void add_lines(CriterionResult& r, const std::string& text) {
    std::size_t start = 0;
    while (start < text.size()) {
        auto end = text.find('\n', start);
        if (end == std::string::npos) end = text.size();
        if (end > start) r.details.push_back(text.substr(start, end - start));
        start = end + 1;
    }
}

CriterionResult weber_oracle(const AcceptanceOptions& opt) {
    CriterionResult r;
    r.threshold = kWeberTol;
    auto g = build_grid(3, 13.0, 900);
    const auto f = gaussian_profile(g, 6.2, 1.0);
    const auto xs = lattice(0.1, 10.0, 64);
    const std::vector<double> ts = {0.5, 1.0, 2.0, 5.0};
    for (double nu : {0.5, 1.0, 1.5, 2.0, 3.5}) {
        PropagatorRequest req;
        req.nu = nu;
        req.jobs = opt.jobs;
        const auto T = spectral_table(req, f, xs);
        const CMat U = propagate_table(T, ts, opt.jobs);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const CVec w = weber_apply(nu, ts[i], f, xs);
            const double e = (U.row(static_cast<Eigen::Index>(i)).transpose() - w).cwiseAbs().maxCoeff() /
                             w.cwiseAbs().maxCoeff();
            r.measured = std::max(r.measured, e);
            r.details.push_back("nu " + num(nu) + " t " + num(ts[i]) + " rel " + num(e));
        }
    }
    r.pass = r.measured <= r.threshold;
    return r;
}

CriterionResult euclidean_recovery(const AcceptanceOptions&) {
    CriterionResult r;
    r.threshold = kEuclidTol;
    const auto s2 = build_spectrum(LinkKind::UnitSphere, 3, 30);
    const LinkPoint th{1.2, 0.3};
    const double t = 1.0;
    const std::vector<std::pair<double, double>> pts = {{0.2, 0.5}, {0.5, 1.0}, {0.9, 0.3}, {1.0, 1.0}, {1.3, 2.9},
                                                        {1.0, 3.9}, {2.0, 2.0}, {0.1, 7.5}, {3.0, 1.2}, {1.9, 2.1}};
    for (auto [r1, r2] : pts) {
        if (r1 * r2 / (2 * t) > 2.0) throw DomainError("euclidean_recovery: test point outside r1 r2 / 2t <= 2");
        const cplx k = free_cone_kernel(s2, 30, t, r1, th, r2, th);
        const double d = r1 - r2;
        // conjugate of (4 pi i t)^{-3/2} e^{i|x-y|^2/4t}: the kernel carries e^{(r1^2+r2^2)/(4it)}
        const cplx e3 = std::conj(std::pow(cplx(0, 4 * pi * t), -1.5) * std::exp(cplx(0, d * d / (4 * t))));
        const double e = std::abs(k - e3) / std::abs(e3);
        r.measured = std::max(r.measured, e);
        r.details.push_back("r1 " + num(r1) + " r2 " + num(r2) + " rel " + num(e));
    }
    r.pass = r.measured <= r.threshold;
    return r;
}

CriterionResult green_function(const AcceptanceOptions&) {
    CriterionResult r;
    r.threshold = kGreenTol;
    for (int n : {2, 3, 4}) {
        const auto spec = build_spectrum(n == 2 ? LinkKind::Circle : LinkKind::UnitSphere, n, 3);
        auto g = build_grid(n, 12.0, 640);
        const auto f = gaussian_profile(g, 4.0, 0.5);
        for (std::size_t l = 0; l < 3; ++l)
            for (double lam : {0.5, 2.0, 10.0}) {
                const auto res = green_residual(*g, spec.nu(l), lam, f.values, 0.1, 11.0);
                r.measured = std::max(r.measured, res.relative);
                r.details.push_back("n " + std::to_string(n) + " nu " + num(spec.nu(l)) + " lambda " + num(lam) +
                                    " residual " + num(res.relative));
            }
    }
    r.pass = r.measured <= r.threshold;
    return r;
}

CriterionResult wronskian(const AcceptanceOptions&) {
    CriterionResult r;
    r.threshold = kWronskianTol;
    for (double nu : {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.5, 7.5, 12.0}) {
        double worst = 0.0;
        for (double x : logspace(1e-2, 1e3, 61)) {
            const cplx w = wronskian_check(nu, x);
            const cplx exact(0.0, -2.0 / (pi * x));
            worst = std::max(worst, std::abs(w - exact) / std::abs(exact));
        }
        r.measured = std::max(r.measured, worst);
        r.details.push_back("nu " + num(nu) + " max rel " + num(worst));
    }
    r.pass = r.measured <= r.threshold;
    return r;
}

CriterionResult lap_slope(const AcceptanceOptions& opt) {
    CriterionResult r;
    r.threshold = kLapTol;
    r.pass = true;
    auto g = build_grid(3, 20.0, 2400);
    ScanOptions so;
    so.tolerance = kLapTol;
    so.jobs = opt.jobs;
    so.seed = opt.seed;
    for (double nu : {0.5, 1.5})
        for (const auto& V : {make_potential("zero", {}), make_potential("gaussian", {1.0, 1.0})}) {
            const auto s = lap_scan(g, nu, 1.0, 0, V, so);
            r.pass = r.pass && s.pass();
            r.measured = std::max(r.measured, std::abs(s.regimes[0].fit.slope + 1.0));
            add_lines(r, summary_lines(s));
            dump(opt, s.name, s);
        }
    return r;
}

CriterionResult im_lowfreq(const AcceptanceOptions& opt) {
    CriterionResult r;
    r.threshold = kImLowTol;
    r.pass = true;
    ScanOptions so;
    so.lambda_lo = 1e-3;
    so.lambda_hi = 1e-1;
    so.samples = 11;
    so.tolerance = kImLowTol;
    so.jobs = opt.jobs;
    so.seed = opt.seed;
    struct Case {
        int n, k;
        double nu, sigma;
    };
    for (const Case c : {Case{3, 0, 0.5, 2.0}, Case{3, 1, 0.5, 3.0}, Case{4, 0, 1.0, 2.5}}) {
        auto g = build_grid(c.n, 30.0, 600);
        for (const auto& V : {make_potential("zero", {}), make_potential("gaussian", {1.0, 1.0})}) {
            if (!V.is_zero()) {
                const double z = zero_energy_indicator(g, c.nu, V);
                r.details.push_back("zero-energy indicator n " + std::to_string(c.n) + " " + num(z));
                if (z < 1e-3) r.pass = false;
            }
            const auto s = im_lowfreq_scan(g, c.nu, c.sigma, c.k, V, so);
            r.pass = r.pass && s.pass();
            r.measured = std::max(r.measured, std::abs(s.regimes[0].fit.slope - s.regimes[0].claim));
            add_lines(r, summary_lines(s));
            dump(opt, s.name, s);
        }
    }
    return r;
}

CriterionResult birman_schwinger_exact(const AcceptanceOptions&) {
    CriterionResult r;
    r.threshold = kBirmanTol;
    const int n = 3;
    auto g = build_grid(n, 8.0, 320);
    const int M0 = static_cast<int>(std::ceil(n / 4.0));
    for (const auto& V : {make_potential("gaussian", {1.0, 1.0}), make_potential("polywell", {0.7, 1.5})})
        for (double lam : {0.1, 1.0, 10.0}) {
            const auto K = perturbed_kernel(g, 0.5, lam, KernelSign::Plus, V).values;
            for (int M : {M0, M0 + 1}) {
                const auto bs = birman_schwinger(g, 0.5, lam, KernelSign::Plus, V, M);
                const CMat sum = bs.series_part.values + bs.remainder.values;
                const double e = (sum - K).cwiseAbs().maxCoeff() / K.cwiseAbs().maxCoeff();
                r.measured = std::max(r.measured, e);
                r.details.push_back(V.family + " lambda " + num(lam) + " M " + std::to_string(M) + " rel " + num(e));
            }
        }
    r.pass = r.measured <= r.threshold;
    return r;
}

CriterionResult decay_odd(const AcceptanceOptions& opt) {
    CriterionResult r;
    r.threshold = kDecayOddTol;
    r.pass = true;
    const auto s2 = build_spectrum(LinkKind::UnitSphere, 3, 3);
    auto g = build_grid(3, 12.0, 400);
    const auto f = gaussian_profile(g, 4.0, 0.6);
    for (const auto& V : {make_potential("zero", {}), make_potential("gaussian", {0.3, 1.0}, 8.0)}) {
        DecayOptions o;
        o.tolerance = kDecayOddTol;
        o.request.alpha = dispersive_alpha(3);
        o.request.V = V;
        o.request.jobs = opt.jobs;
        if (!V.is_zero()) {
            const double z = zero_energy_indicator(g, 0.5, V);
            r.details.push_back("zero-energy indicator " + num(z));
            if (z < 1e-3) r.pass = false;
        }
        const auto d = decay_fit(s2, 0, f, o);
        r.pass = r.pass && d.pass();
        r.measured = std::max(r.measured, std::abs(d.regime.fit.slope + 1.5));
        add_lines(r, summary_line(d));
        dump(opt, d.name, d);
    }
    return r;
}

CriterionResult decay_even(const AcceptanceOptions& opt) {
    CriterionResult r;
    const auto circle = build_spectrum(LinkKind::Circle, 2, 3);
    auto g = build_grid(2, 12.0, 400);
    DecayOptions o;
    o.tolerance = kDecayEvenSlack;
    o.request.alpha = dispersive_alpha(2);
    o.request.jobs = opt.jobs;
    const auto d = decay_fit(circle, 0, gaussian_profile(g, 4.0, 0.6), o);
    r.measured = d.regime.fit.slope;
    r.threshold = -0.5 + kDecayEvenSlack;
    r.pass = d.pass();
    add_lines(r, summary_line(d));
    dump(opt, d.name, d);
    return r;
}

CriterionResult s_operator(const AcceptanceOptions&) {
    CriterionResult r;
    r.threshold = kSLimitTol;
    r.pass = true;
    const LinkPoint p{0.7, 1.1};
    for (const auto& spec : {build_spectrum(LinkKind::Circle, 2, 40, 2 * pi), build_spectrum(LinkKind::UnitSphere, 3, 40)}) {
        const cplx L = s_operator_limit(spec);
        const double e = std::abs(s_operator_entry(1e-3, spec, 40, p, p).value - L) / std::abs(L);
        r.measured = std::max(r.measured, e);
        std::vector<double> xs = logspace(1e-3, 1e-1, 12), ys;
        for (double x : xs) ys.push_back(std::abs(s_operator_entry(x, spec, 40, p, p).value - L));
        const auto fit = loglog_fit(xs, ys);
        const double claim = std::min(2.0, spec.nu(1) - spec.delta());
        const bool ok = e <= kSLimitTol && std::abs(fit.slope - claim) <= kSExponentTol;
        r.pass = r.pass && ok;
        r.details.push_back(std::string(ok ? "PASS " : "FAIL ") + "s_operator.n" + std::to_string(spec.n) + " " +
                            num(fit.slope) + " " + num(claim) + " " + num(kSExponentTol) + " limit_rel " + num(e));
    }
    return r;
}

CriterionResult jost_suite(const AcceptanceOptions& opt) {
    CriterionResult r;
    r.threshold = kJostTol;
    r.pass = true;
    const double lam = 1.3;
    std::vector<double> rg;
    for (double x = 12.0; x > 0.05; x -= 2e-4) rg.push_back(x);
    const auto V = make_potential("gaussian", {1.5, 1.0});
    for (int n : {3, 4}) {
        const auto J = jost_solutions(n, lam, V, rg, 0.5 * (n - 2));
        const auto W = J.wronskian();
        double spread = 0.0;
        for (auto w : W) spread = std::max(spread, std::abs(w - W.front()));
        spread /= std::abs(W.front());
        r.measured = std::max(r.measured, spread);
        r.details.push_back("wronskian n " + std::to_string(n) + " spread " + num(spread));
    }
    r.pass = r.measured <= kJostTol;

    auto g = build_grid(3, 10.0, 1200);
    const auto zero = fredholm_scan(g, 0.5, make_potential("zero", {}), {0.0, 0.5, 2.0, 8.0});
    double dev = 0.0;
    for (double x : zero.indicator) dev = std::max(dev, std::abs(x - 1.0));
    r.details.push_back("V = 0 indicator deviation from 1 " + num(dev));
    r.pass = r.pass && dev <= 1e-12;

    const auto W = make_potential("gaussian", {1.0, 1.0});
    const auto nt = neumann_threshold(g, 0.5, W, logspace(1.0, 20.0, 8));
    const auto lams = logspace(std::max(nt.M_V, 0.5), 4.0 * std::max(nt.M_V, 0.5), 8);
    const auto scan = fredholm_scan(g, 0.5, W, lams, KernelSign::Plus, 1e-6, opt.jobs);
    const double mn = *std::min_element(scan.indicator.begin(), scan.indicator.end());
    r.details.push_back("Neumann C " + num(nt.C) + " M_V " + num(nt.M_V) + " min indicator over [M_V, 4 M_V] " + num(mn));
    r.pass = r.pass && mn >= kIndicatorHalf;
    return r;
}

CriterionResult l1l2(const AcceptanceOptions& opt) {
    CriterionResult r;
    r.threshold = kL1L2Tol;
    r.pass = true;
    for (int n : {2, 3}) {
        const auto spec = build_spectrum(n == 2 ? LinkKind::Circle : LinkKind::UnitSphere, n, 3);
        auto g = build_grid(n, 12.0, 300);
        std::vector<ModeFunction> m;
        for (std::size_t j = 0; j < 4; ++j) m.push_back(gaussian_profile(g, 4.0 + 0.5 * j, 0.6));
        ConeDecayOptions o;
        o.tolerance = kL1L2Tol;
        o.jobs = opt.jobs;
        const auto d = free_l1l2_linf_l2(spec, m, o);
        r.pass = r.pass && d.pass();
        r.measured = std::max(r.measured, std::abs(d.regime.fit.slope + 0.5 * n));
        add_lines(r, summary_line(d));
        dump(opt, d.name, d);
    }
    return r;
}

}  // namespace

const char* criterion_name(int id) {
    static const char* names[] = {"weber_oracle",   "euclidean_recovery", "green_residual",    "wronskian",
                                  "lap_slope",      "im_lowfreq",         "birman_schwinger",  "decay_odd",
                                  "decay_even",     "s_operator",         "jost_indicator",    "free_l1l2_linf_l2"};
    if (id < 1 || id > kCriterionCount) throw DomainError("criterion id out of range");
    return names[id - 1];
}

CriterionResult run_criterion(int id, const AcceptanceOptions& opt) {
    CriterionResult r;
    try {
        switch (id) {
            case 1: r = weber_oracle(opt); break;
            case 2: r = euclidean_recovery(opt); break;
            case 3: r = green_function(opt); break;
            case 4: r = wronskian(opt); break;
            case 5: r = lap_slope(opt); break;
            case 6: r = im_lowfreq(opt); break;
            case 7: r = birman_schwinger_exact(opt); break;
            case 8: r = decay_odd(opt); break;
            case 9: r = decay_even(opt); break;
            case 10: r = s_operator(opt); break;
            case 11: r = jost_suite(opt); break;
            case 12: r = l1l2(opt); break;
            default: throw DomainError("criterion id out of range");
        }
    } catch (const NumericalError& e) {
        r = CriterionResult{};
        r.pass = false;
        r.details.push_back(std::string("numerical failure: ") + e.what());
    }
    r.id = id;
    r.name = criterion_name(id);
    return r;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& opt) {
    std::vector<int> ids = opt.only;
    if (ids.empty())
        for (int i = 1; i <= kCriterionCount; ++i) ids.push_back(i);
    std::vector<CriterionResult> out;
    for (int id : ids) {
        out.push_back(run_criterion(id, opt));
        if (opt.on_result) opt.on_result(out.back());
    }
    return out;
}

std::string format_result(const CriterionResult& r) {
    return std::string(r.pass ? "PASS " : "FAIL ") + std::to_string(r.id) + " " + r.name + " measured " +
           num(r.measured) + " threshold " + num(r.threshold);
}

}  // namespace conewave
