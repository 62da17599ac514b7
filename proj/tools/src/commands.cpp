#include "conewave_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "conewave/acceptance.hpp"
#include "conewave/freeres.hpp"
#include "conewave/perturbres.hpp"
#include "conewave/propagate.hpp"
#include "conewave/specfun.hpp"

namespace conewave::cli {

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", x);
    return buf;
}

std::string csv_comment(const std::string& hash) { return "# conewave config " + hash; }

CsvFile::CsvFile(const std::string& dir, const std::string& name, const std::string& hash,
                 const std::string& columns) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    path_ = (std::filesystem::path(dir) / name).string();
    os_.open(path_);
    if (!os_) throw ConfigError("cannot write " + path_);
    os_ << csv_comment(hash) << '\n' << columns << '\n';
}

void CsvFile::row(std::initializer_list<double> values) {
    bool first = true;
    for (double v : values) {
        if (!first) os_ << ',';
        os_ << fmt(v);
        first = false;
    }
    os_ << '\n';
}

namespace {

GridPtr make_grid(const ExperimentConfig& e) { return build_grid(e.spec.n, e.rmax, e.nodes); }

PotentialSpec certified(const ExperimentConfig& e, const GridPtr& g) {
    PotentialSpec V = e.V;
    certify(V, *g);
    return V;
}

double rel_diff(const CMat& a, const CMat& b) {
    const double nb = b.norm();
    return nb > 0.0 ? (a - b).norm() / nb : (a - b).norm();
}

void dump_kernel(const ExperimentConfig& e, const std::string& name, const KernelMatrix& K) {
    CsvFile csv(e.out_dir, name, e.hash, "r,s,re,im");
    const auto& r = K.grid->r;
    for (std::size_t a = 0; a < r.size(); ++a)
        for (std::size_t b = 0; b < r.size(); ++b) {
            const cplx v = K.values(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
            csv.row({r[a], r[b], v.real(), v.imag()});
        }
}

}  // namespace

int cmd_spectrum(const ExperimentConfig& e, std::ostream& log) {
    const auto& s = e.spec;
    CsvFile csv(e.out_dir, "spectrum.csv", e.hash, "level,mu2,mu,nu,multiplicity,first_mode");
    for (std::size_t l = 0; l < s.num_levels(); ++l)
        csv.row({static_cast<double>(l), s.entries[l].mu2, s.mu(l), s.nu(l),
                 static_cast<double>(s.entries[l].multiplicity), static_cast<double>(s.level_start(l))});
    log << "levels " << s.num_levels() << " modes " << s.num_modes() << " volume " << fmt(s.volume)
        << " delta " << fmt(s.delta()) << '\n';
    if (s.num_modes() > 2) log << "weyl_exponent " << fmt(weyl_check(s)) << '\n';
    log << "wrote " << csv.path() << '\n';
    return kPass;
}

int cmd_resolvent(const ExperimentConfig& e, std::ostream& log) {
    const auto g = make_grid(e);
    PotentialSpec V = certified(e, g);
    if (e.tune_hi > 0.0) {
        const auto tuned = tune_zero_energy(g, e.nu, V, e.tune_lo, e.tune_hi);
        V = scaled(V, tuned.coupling);
        certify(V, *g);
        log << "tuned coupling " << fmt(tuned.coupling) << " zero-energy indicator " << fmt(tuned.indicator) << '\n';
    }
    const KernelSign solve_sign = e.sign == "minus" ? KernelSign::Minus : KernelSign::Plus;
    log << "mode " << e.mode << " nu " << fmt(e.nu) << " lambda " << fmt(e.lambda) << " sign " << e.sign
        << " k " << e.k << " nodes " << g->size() << '\n';

    bool resonance = false;
    const KernelMatrix K0 = e.sign == "im" ? im_free_kernel(g, e.nu, e.lambda, e.k)
                                           : free_kernel(g, e.nu, e.lambda, solve_sign, e.k);
    PerturbedSolver P(g, e.nu, e.lambda, solve_sign, V, e.k);
    const double ind = P.fredholm_indicator(e.sigma);
    log << "fredholm_indicator " << fmt(ind) << '\n';
    if (ind < e.threshold) {
        resonance = true;
        log << "indicator below threshold " << fmt(e.threshold) << ": perturbed kernel not formed\n";
    } else {
        KernelMatrix KV = K0;
        KV.values = P.dense(e.k);
        if (e.sign == "im") KV.values = (KV.values - KV.values.conjugate()) / cplx(0.0, 2.0);
        log << "perturbed_vs_free " << fmt(rel_diff(KV.values, K0.values)) << '\n';
        if (e.k == 0 && e.sign != "im" && !V.is_zero()) {
            const auto bs = birman_schwinger(g, e.nu, e.lambda, solve_sign, V, e.bs_order);
            log << "birman_schwinger_defect M=" << e.bs_order << ' '
                << fmt(rel_diff(bs.series_part.values + bs.remainder.values, KV.values)) << '\n';
        }
        if (e.dump_kernel) {
            dump_kernel(e, "free_kernel.csv", K0);
            dump_kernel(e, "perturbed_kernel.csv", KV);
        }
    }

    auto lams = logspace(e.lambda_lo, e.lambda_hi, static_cast<std::size_t>(e.lambda_samples));
    if (e.tune_hi > 0.0 && e.nu > 0.0) lams.insert(lams.begin(), 0.0);
    const auto rep = fredholm_scan(g, e.nu, V, lams, solve_sign, e.threshold, e.jobs);
    CsvFile csv(e.out_dir, "fredholm.csv", e.hash, "lambda,smin,flag");
    double smin = 1.0;
    for (std::size_t i = 0; i < rep.lambda.size(); ++i) {
        csv.row({rep.lambda[i], rep.indicator[i], static_cast<double>(rep.flag[i])});
        smin = std::min(smin, rep.indicator[i]);
        if (rep.flag[i] > 0) {
            resonance = true;
            log << "resonance flag " << rep.flag[i] << " at lambda " << fmt(rep.lambda[i]) << " indicator "
                << fmt(rep.indicator[i]) << '\n';
        }
    }
    log << "fredholm_scan min " << fmt(smin) << " over " << rep.lambda.size() << " samples\n";

    if (e.jost) {
        std::vector<double> rg;
        for (double r = e.rmax; r > 0.05; r -= 1e-3) rg.push_back(r);
        const auto J = jost_solutions(e.spec.n, e.lambda, V, rg, e.nu);
        CsvFile jc(e.out_dir, "jost.csv", e.hash, "r,re_uplus,im_uplus,re_uminus,im_uminus");
        for (std::size_t i = 0; i < J.r.size(); ++i)
            jc.row({J.r[i], J.up[i].real(), J.up[i].imag(), J.um[i].real(), J.um[i].imag()});
        const auto W = J.wronskian();
        double spread = 0.0;
        for (const auto& w : W) spread = std::max(spread, std::abs(w - W.front()) / std::abs(W.front()));
        log << "jost iterations " << J.iterations << " wronskian_spread " << fmt(spread) << '\n';
    }
    return resonance ? kNumericalError : kPass;
}

int cmd_propagate(const ExperimentConfig& e, std::ostream& log) {
    const auto g = make_grid(e);
    PropagatorRequest req;
    req.t = e.t;
    req.V = certified(e, g);
    req.alpha = e.alpha;
    req.tol = e.tol;
    req.jobs = e.jobs;

    if (e.propagate_kind == "mode") {
        req.nu = e.nu;
        const auto f = gaussian_profile(g, e.data_center, e.data_width);
        const auto u = mode_propagate(req, f);
        CsvFile csv(e.out_dir, "mode.csv", e.hash, "r,re,im");
        for (std::size_t a = 0; a < g->size(); ++a) {
            const cplx v = u.values[static_cast<Eigen::Index>(a)];
            csv.row({g->r[a], v.real(), v.imag()});
        }
        const double nf = mode_norm(f);
        log << "mode " << e.mode << " nu " << fmt(e.nu) << " t " << fmt(e.t) << '\n';
        log << "unitarity_defect " << fmt(std::abs(mode_norm(u) - nf) / nf) << '\n';
        if (req.V.is_zero()) {
            const CVec w = weber_apply(e.nu, e.t, f, g->r);
            log << "weber_oracle_defect " << fmt((u.values - w).cwiseAbs().maxCoeff() / w.cwiseAbs().maxCoeff())
                << '\n';
        }
        log << "wrote " << csv.path() << '\n';
        return kPass;
    }

    std::vector<ModeFunction> modes;
    for (int j = 0; j < e.data_modes; ++j) {
        auto f = gaussian_profile(g, e.data_center, e.data_width);
        f.values /= 1.0 + j;
        modes.push_back(std::move(f));
    }
    std::vector<double> r_out(static_cast<std::size_t>(e.r_points));
    for (std::size_t q = 0; q < r_out.size(); ++q) r_out[q] = e.out_rmax * (q + 1.0) / r_out.size();
    std::vector<LinkPoint> th(static_cast<std::size_t>(e.theta_points));
    for (std::size_t i = 0; i < th.size(); ++i) {
        if (e.spec.kind == LinkKind::Circle)
            th[i].theta = e.spec.circumference * i / th.size();
        else
            th[i].theta = std::numbers::pi * (i + 0.5) / th.size();
    }
    const auto field = full_cone_propagate(e.spec, e.t, modes, r_out, th, req);
    CsvFile csv(e.out_dir, "field.csv", e.hash, "r,theta,re,im");
    for (std::size_t q = 0; q < r_out.size(); ++q)
        for (std::size_t i = 0; i < th.size(); ++i) {
            const cplx v = field.values(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(i));
            csv.row({r_out[q], th[i].theta, v.real(), v.imag()});
        }
    log << "cone t " << fmt(e.t) << " modes " << modes.size() << '\n';
    for (std::size_t j = 0; j < field.mode_norms.size(); ++j) log << "mode_norm " << j << ' ' << fmt(field.mode_norms[j]) << '\n';
    if (e.data_modes == 1) {
        const double peak = field.values.cwiseAbs().maxCoeff();
        double spread = 0.0;
        for (Eigen::Index q = 0; q < field.values.rows(); ++q)
            for (Eigen::Index i = 1; i < field.values.cols(); ++i)
                spread = std::max(spread, std::abs(field.values(q, i) - field.values(q, 0)));
        log << "theta_spread " << fmt(peak > 0.0 ? spread / peak : spread) << '\n';
    }
    log << "wrote " << csv.path() << '\n';
    return kPass;
}

int cmd_verify(const ExperimentConfig& e, std::ostream& log) {
    std::error_code ec;
    std::filesystem::create_directories(e.out_dir, ec);
    AcceptanceOptions opt;
    opt.jobs = e.jobs;
    opt.seed = e.seed;
    opt.only = e.criteria;
    opt.csv_dir = e.out_dir;
    opt.csv_header = csv_comment(e.hash);
    opt.on_result = [&log](const CriterionResult& r) {
        log << format_result(r) << '\n';
        for (const auto& d : r.details) log << "    " << d << '\n';
        log.flush();
    };
    const auto results = run_acceptance(opt);
    const bool ok = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.pass; });
    return ok ? kPass : kVerifyFail;
}

namespace {

struct Check {
    std::string name;
    double measured = 0.0;
    double threshold = 0.0;
    bool pass() const { return measured <= threshold; }
};

void report(std::ostream& log, const Check& c, bool& ok) {
    log << (c.pass() ? "PASS " : "FAIL ") << c.name << " measured " << fmt(c.measured) << " threshold "
        << fmt(c.threshold) << '\n';
    ok = ok && c.pass();
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

int cmd_selftest(std::ostream& log, const std::string& data_dir) {
    bool ok = true;

    std::ifstream in(data_dir + "/bessel_table.txt");
    if (!in) {
        log << "FAIL bessel_table missing in " << data_dir << '\n';
        ok = false;
    } else {
        std::string kind;
        double nu, x, re, im;
        double worst = 0.0;
        int checked = 0;
        while (in >> kind >> nu >> x >> re >> im) {
            if (x < 1e-8 || nu > 100.0) continue;
            const auto k = bessel_kind_from_string(kind.c_str());
            const auto got = bessel_any_order(k, nu, x);
            if (got.overflow) continue;
            double scale = std::abs(cplx(re, im));
            if (k == BesselKind::J || k == BesselKind::Y)
                scale = std::max(scale, 1e-6 * std::abs(bessel_any_order(BesselKind::H1, nu, x).value));
            worst = std::max(worst, std::abs(got.value - cplx(re, im)) / std::max(scale, 1e-300));
            ++checked;
        }
        report(log, {"bessel_table(" + std::to_string(checked) + ")", worst, 1e-10}, ok);
    }

    const double pi = std::numbers::pi;
    double ex = 0.0;
    ex = std::max(ex, rel(bessel(BesselKind::J, 1.0, 1.0).value, 0.4400505857449335));
    ex = std::max(ex, rel(bessel(BesselKind::Y, 0.0, 1.0).value, 0.0882569642156770));
    ex = std::max(ex, std::abs(bessel(BesselKind::J, 0.5, pi).value));
    ex = std::max(ex, rel(scaled_bessel({0.5, pi / 2, -0.5}, BesselKind::J).value, 0.5079490874739278));
    ex = std::max(ex, rel(scaled_bessel({2.0, 0.0, -2.0}, BesselKind::J).value, 0.125));
    ex = std::max(ex, rel(bessel_dlambda(BesselKind::J, 1.0, 1.0, 1.0, 1).value, 0.3251471008130331));
    report(log, {"bessel_examples", ex, 1e-13}, ok);

    double wr = 0.0;
    for (auto [nu, x] : {std::pair{0.0, 1.0}, {0.5, 2.0}, {3.7, 5.0}})
        wr = std::max(wr, rel(wronskian_check(nu, x), cplx(0.0, -2.0 / (pi * x))));
    report(log, {"wronskian_examples", wr, 1e-8}, ok);

    AcceptanceOptions opt;
    const auto w = run_criterion(4, opt);
    report(log, {"wronskian_grid", w.measured, w.threshold}, ok);

    double gw = 0.0;
    for (int n : {2, 3, 4}) {
        const auto g = build_grid(n, 10.0, 400);
        for (int m = 0; m + n - 1 <= 2 * g->order - 1; m += 3) {
            double s = 0.0;
            for (std::size_t a = 0; a < g->size(); ++a) s += g->w[a] * std::pow(g->r[a], m);
            const double exact = std::pow(10.0, m + n) / (m + n);
            gw = std::max(gw, std::abs(s - exact) / exact);
        }
    }
    report(log, {"grid_weights", gw, 1e-12}, ok);
    return ok ? kPass : kVerifyFail;
}

}  // namespace conewave::cli
