#include "conewave/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>

#include "conewave/errors.hpp"

namespace conewave {

namespace {

constexpr double kIndicatorFloor = 1e-6;
constexpr double kFdStep = 1e-4;  // relative to lambda
constexpr double kPointwiseSlack = 0.2;

// f(lambda, k, g) = d^k K(lambda) W g
using LambdaOp = std::function<CVec(double, int, const CVec&)>;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17e", v);
    return buf;
}

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

RVec weight(const RadialGrid& g, double sigma) {
    RVec d(static_cast<Eigen::Index>(g.size()));
    for (std::size_t a = 0; a < g.size(); ++a) d[static_cast<Eigen::Index>(a)] = std::pow(rho(g.r[a]), -sigma);
    return d;
}

// Worst relative defect, in the weighted L^2 norm, between d^k K g and central differences of
// d^{k-1} K g with base step 1e-4 lambda (Richardson-extrapolated), at `count` random lambdas (log-uniform) and random data.
double derivative_check(const RadialGrid& g, const LambdaOp& op, int k, double lo, double hi, double sigma,
                        int count, std::uint64_t seed) {
    if (k == 0 || count <= 0) return 0.0;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const auto N = static_cast<Eigen::Index>(g.size());
    const RVec d = weight(g, sigma);
    RVec sw(N);
    for (Eigen::Index a = 0; a < N; ++a) sw[a] = std::sqrt(g.w[static_cast<std::size_t>(a)]);
    double worst = 0.0;
    for (int i = 0; i < count; ++i) {
        const double lam = lo * std::pow(hi / lo, u(rng));
        CVec f(N);
        for (Eigen::Index a = 0; a < N; ++a) f[a] = cplx(2.0 * u(rng) - 1.0, 2.0 * u(rng) - 1.0) * d[a];
        const double h = kFdStep * lam;
        const CVec exact = op(lam, k, f);
        auto central = [&](double s) { return CVec((op(lam + s, k - 1, f) - op(lam - s, k - 1, f)) / (2.0 * s)); };
        // Richardson table on steps h, h/2, h/4
        const CVec d1 = central(h), d2 = central(0.5 * h), d3 = central(0.25 * h);
        const CVec e1 = (4.0 * d2 - d1) / 3.0, e2 = (4.0 * d3 - d2) / 3.0;
        const CVec fd = (16.0 * e2 - e1) / 15.0;
        const CVec diff = (exact - fd).cwiseProduct(d).cwiseProduct(sw);
        const double scale = exact.cwiseProduct(d).cwiseProduct(sw).norm();
        if (scale > 0.0) worst = std::max(worst, diff.norm() / scale);
    }
    return worst;
}

std::vector<double> samples(const ScanOptions& opt) {
    if (!(opt.lambda_lo > 0.0) || !(opt.lambda_hi > opt.lambda_lo))
        throw DomainError("scan: need 0 < lambda_lo < lambda_hi");
    if (opt.samples < 10) throw DomainError("scan: at least 10 samples required");
    return logspace(opt.lambda_lo, opt.lambda_hi, opt.samples);
}

// Regime split at lambda = 1: samples cover each side with opt.samples points.
std::vector<double> split_samples(const ScanOptions& opt) {
    if (opt.lambda_lo < 1.0 && opt.lambda_hi > 1.0) {
        auto a = logspace(opt.lambda_lo, 1.0, opt.samples);
        auto b = logspace(1.0, opt.lambda_hi, opt.samples);
        a.insert(a.end(), b.begin() + 1, b.end());
        return a;
    }
    return samples(opt);
}

double tol_or(const ScanOptions& opt, double def) { return opt.tolerance > 0.0 ? opt.tolerance : def; }

// Fit windows away from the split at lambda = 1: a low regime reaching 1 drops its last decade when
// it spans two or more, the high regime keeps only its last decade when it spans two or more.
std::pair<double, double> low_window(double lo, double hi) {
    return (hi >= 1.0 && lo <= 0.01 * hi) ? std::pair{lo, 0.1 * hi} : std::pair{lo, hi};
}
std::pair<double, double> high_window(double lo, double hi) {
    return hi >= 100.0 * lo ? std::pair{0.1 * hi, hi} : std::pair{lo, hi};
}

Regime make_regime(std::string label, double lo, double hi, double claim, double tol, ClaimKind kind) {
    Regime r;
    r.label = std::move(label);
    r.lo = lo;
    r.hi = hi;
    r.claim = claim;
    r.tolerance = tol;
    r.kind = kind;
    return r;
}

const Regime& nearest_regime(const NormScan& s, double x) {
    const Regime* best = &s.regimes.front();
    double dist = 1e300;
    for (const auto& r : s.regimes) {
        double d = x < r.lo ? std::log(r.lo / x) : (x > r.hi ? std::log(x / r.hi) : 0.0);
        if (d < dist) dist = d, best = &r;
    }
    return *best;
}

double fitted(const Regime& r, double x) { return std::exp(r.fit.intercept) * std::pow(x, r.fit.slope); }

// Claimed power law through the fitted value at the regime's geometric centre.
double claimed(const Regime& r, double x) {
    const double c = std::sqrt(r.lo * r.hi);
    return fitted(r, c) * std::pow(x / c, r.claim);
}

}  // namespace

double weighted_opnorm(const KernelMatrix& K, double sigma_out, double sigma_in) {
    const auto& g = *K.grid;
    const auto N = static_cast<Eigen::Index>(g.size());
    if (K.values.rows() != N || K.values.cols() != N) throw DomainError("weighted_opnorm: kernel/grid mismatch");
    RVec dout(N), din(N);
    for (Eigen::Index a = 0; a < N; ++a) {
        const double sw = std::sqrt(g.w[static_cast<std::size_t>(a)]), r = rho(g.r[static_cast<std::size_t>(a)]);
        dout[a] = sw * std::pow(r, -sigma_out);
        din[a] = sw * std::pow(r, -sigma_in);
    }
    const CMat B = dout.asDiagonal() * K.values * din.asDiagonal();
    Eigen::BDCSVD<CMat> svd(B);
    return svd.singularValues()(0);
}

const char* to_string(ClaimKind k) {
    switch (k) {
        case ClaimKind::Equal: return "equal";
        case ClaimKind::UpperBound: return "upper";
        case ClaimKind::LowerBound: return "lower";
    }
    return "?";
}

bool Regime::pass() const {
    if (fit.count < 10) return false;
    if (!(fit.slope_halfwidth < kFitResidualCap)) return false;
    switch (kind) {
        case ClaimKind::Equal: return std::abs(fit.slope - claim) <= tolerance;
        case ClaimKind::UpperBound: return fit.slope <= claim + tolerance;
        case ClaimKind::LowerBound: return fit.slope >= claim - tolerance;
    }
    return false;
}

constexpr double kDerivativeCheckTol = 1e-6;

bool NormScan::pass() const {
    if (regimes.empty()) return false;
    if (derivative_check > kDerivativeCheckTol) return false;
    return std::all_of(regimes.begin(), regimes.end(), [](const Regime& r) { return r.pass(); });
}

void NormScan::fit() {
    for (auto& r : regimes) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i] >= r.lo * (1 - 1e-12) && x[i] <= r.hi * (1 + 1e-12)) xs.push_back(x[i]), ys.push_back(value[i]);
        if (xs.size() < 10) throw DomainError("NormScan: regime '" + r.label + "' has fewer than 10 samples");
        r.fit = loglog_fit(xs, ys);
    }
}

NormScan lap_scan(const GridPtr& grid, double nu, double sigma, int k, const PotentialSpec& V,
                  const ScanOptions& opt) {
    if (!(sigma > 0.5 + k)) throw DomainError("lap_scan: need sigma > 1/2 + k");
    if (opt.lambda_lo < 1.0) throw DomainError("lap_scan: high-frequency range must have lambda >= 1");
    NormScan s;
    s.name = "lap." + std::string(V.is_zero() ? "free" : V.family) + ".nu" + short_num(nu) + ".k" +
             std::to_string(k);
    s.x = samples(opt);
    s.value.assign(s.x.size(), 0.0);
    std::vector<double> ind(s.x.size(), 1.0);
    const auto& g = *grid;
    parallel_for(s.x.size(), opt.jobs, [&](std::size_t i) {
        const double lam = s.x[i];
        if (V.is_zero()) {
            const auto S = free_separable(grid, nu, lam, KernelSign::Plus, k);
            s.value[i] = weighted_operator_norm(g, [&](const CVec& f) { return S.apply(f); }, sigma, sigma);
        } else {
            PerturbedSolver P(grid, nu, lam, KernelSign::Plus, V, k);
            ind[i] = P.fredholm_indicator(V.sigma);
            s.value[i] = weighted_operator_norm(g, [&](const CVec& f) { return P.apply(f, k); }, sigma, sigma);
        }
    });
    s.min_indicator = *std::min_element(ind.begin(), ind.end());
    if (s.min_indicator < kIndicatorFloor)
        throw NearSingularError("lap_scan: Fredholm indicator below threshold (possible resonance)", s.min_indicator);
    const double flo = opt.fit_lo > 0 ? opt.fit_lo : std::max(opt.lambda_lo, opt.lambda_hi / 10.0);
    const double fhi = opt.fit_hi > 0 ? opt.fit_hi : opt.lambda_hi;
    s.regimes.push_back(make_regime("high", flo, fhi, -1.0, tol_or(opt, 0.1), ClaimKind::Equal));
    s.fit();
    const LambdaOp op = [&](double lam, int kk, const CVec& f) -> CVec {
        if (V.is_zero()) return free_separable(grid, nu, lam, KernelSign::Plus, kk).apply(f);
        return PerturbedSolver(grid, nu, lam, KernelSign::Plus, V, kk).apply(f, kk);
    };
    s.derivative_check = derivative_check(g, op, k, opt.lambda_lo, opt.lambda_hi, sigma, opt.derivative_checks, opt.seed);
    return s;
}

NormScan im_lowfreq_scan(const GridPtr& grid, double nu, double sigma, int k, const PotentialSpec& V,
                         const ScanOptions& opt) {
    const int n = grid->n;
    if (!(sigma > 0.5 * n + k)) throw DomainError("im_lowfreq_scan: need sigma > n/2 + k");
    if (opt.lambda_hi > 1.0) throw DomainError("im_lowfreq_scan: low-frequency range must have lambda <= 1");
    NormScan s;
    s.name = "im_low." + std::string(V.is_zero() ? "free" : V.family) + ".n" + std::to_string(n) + ".k" +
             std::to_string(k);
    s.x = samples(opt);
    s.value.assign(s.x.size(), 0.0);
    std::vector<double> ind(s.x.size(), 1.0);
    const auto& g = *grid;
    parallel_for(s.x.size(), opt.jobs, [&](std::size_t i) {
        const double lam = s.x[i];
        if (V.is_zero()) {
            const auto S = free_separable(grid, nu, lam, KernelSign::Im, k);
            s.value[i] = weighted_operator_norm(g, [&](const CVec& f) { return S.apply(f); }, sigma, sigma);
        } else {
            PerturbedSolver P(grid, nu, lam, KernelSign::Plus, V, k);
            ind[i] = P.fredholm_indicator(V.sigma);
            s.value[i] = weighted_operator_norm(g, [&](const CVec& f) { return P.apply_im(f, k); }, sigma, sigma);
        }
    });
    s.min_indicator = *std::min_element(ind.begin(), ind.end());
    if (s.min_indicator < kIndicatorFloor)
        throw NearSingularError("im_lowfreq_scan: Fredholm indicator below threshold (possible resonance)",
                                s.min_indicator);
    const double flo = opt.fit_lo > 0 ? opt.fit_lo : opt.lambda_lo;
    const double fhi = opt.fit_hi > 0 ? opt.fit_hi : opt.lambda_hi;
    s.regimes.push_back(make_regime("low", flo, fhi, n - 2.0 - k, tol_or(opt, 0.15), ClaimKind::Equal));
    s.fit();
    const LambdaOp op = [&](double lam, int kk, const CVec& f) -> CVec {
        if (V.is_zero()) return free_separable(grid, nu, lam, KernelSign::Im, kk).apply(f);
        return PerturbedSolver(grid, nu, lam, KernelSign::Plus, V, kk).apply_im(f, kk);
    };
    s.derivative_check = derivative_check(g, op, k, opt.lambda_lo, opt.lambda_hi, sigma, opt.derivative_checks, opt.seed);
    return s;
}

NormScan lq_slice_scan(const GridPtr& grid, double nu, double sigma, double q, int k, bool imaginary,
                       const ScanOptions& opt) {
    const int n = grid->n;
    if (!(q >= 1.0)) throw DomainError("lq_slice_scan: need q >= 1");
    if (!(sigma > n / q + k)) throw DomainError("lq_slice_scan: need sigma > n/q + k");
    if (!imaginary && n > 2 && q > static_cast<double>(n) / (n - 2))
        throw DomainError("lq_slice_scan: non-imaginary kernels need q <= n/(n-2)");
    NormScan s;
    s.name = std::string("lq.") + (imaginary ? "im" : "re") + ".n" + std::to_string(n) + ".k" + std::to_string(k);
    s.x = split_samples(opt);
    s.value.assign(s.x.size(), 0.0);
    const auto& g = *grid;
    const std::size_t N = g.size();
    const double ex = k - 0.5 * (n - 1);
    std::vector<double> ws(N);
    for (std::size_t b = 0; b < N; ++b) ws[b] = g.w[b] * std::pow(rho(g.r[b]), -q * sigma);
    parallel_for(s.x.size(), opt.jobs, [&](std::size_t i) {
        const double lam = s.x[i];
        const auto S = free_separable(grid, nu, lam, imaginary ? KernelSign::Im : KernelSign::Plus, k);
        double best = 0.0;
        for (std::size_t a = 0; a < N; ++a) {
            double acc = 0.0;
            for (std::size_t b = 0; b < N; ++b) acc += ws[b] * std::pow(std::abs(S.entry(a, b)), q);
            best = std::max(best, std::pow(acc, 1.0 / q) / std::pow(1.0 + lam * g.r[a], ex));
        }
        s.value[i] = best;
    });
    const double tol = tol_or(opt, 0.2);
    if (opt.lambda_lo < 1.0) {
        const auto [lo, hi] = low_window(opt.lambda_lo, std::min(opt.lambda_hi, 1.0));
        const bool sharp = imaginary || (n == 2 && nu == 0.0);
        s.regimes.push_back(make_regime("low", lo, hi, imaginary ? n - 2.0 - k : -static_cast<double>(k), tol,
                                        sharp ? ClaimKind::Equal : ClaimKind::LowerBound));
    }
    if (opt.lambda_hi > 1.0) {
        const auto [lo, hi] = high_window(std::max(opt.lambda_lo, 1.0), opt.lambda_hi);
        if (imaginary)
            s.regimes.push_back(make_regime("high", lo, hi, n - 2.0 - k + std::max(-n / q, ex), tol,
                                            k == 0 ? ClaimKind::Equal : ClaimKind::UpperBound));
        else
            s.regimes.push_back(make_regime("high", lo, hi, n - 2.0 - k + std::max(0.0, ex), tol,
                                            ClaimKind::UpperBound));
    }
    s.fit();
    return s;
}

NormScan pointwise_bound_scan(const GridPtr& grid, double nu, const PotentialSpec& V, double alpha, int k,
                              const ScanOptions& opt) {
    const int n = grid->n;
    const double quarter = std::ceil(n / 4.0);
    if (!V.is_zero() && !(V.sigma > 4.0 * quarter - 2.0 + k))
        throw DomainError("pointwise_bound_scan: need sigma(V) > 4 ceil(n/4) - 2 + k");
    if (alpha < std::max(k - 0.5 * (n - 1), 0.0)) throw DomainError("pointwise_bound_scan: alpha too small");
    NormScan s;
    s.name = "pointwise." + std::string(V.is_zero() ? "free" : V.family) + ".n" + std::to_string(n) + ".k" +
             std::to_string(k);
    s.x = split_samples(opt);
    s.value.assign(s.x.size(), 0.0);
    std::vector<double> ind(s.x.size(), 1.0);
    const auto& g = *grid;
    const RVec d = weight(g, alpha);
    parallel_for(s.x.size(), opt.jobs, [&](std::size_t i) {
        const double lam = s.x[i];
        CMat K;
        if (V.is_zero()) {
            K = free_separable(grid, nu, lam, KernelSign::Im, k).dense();
        } else {
            PerturbedSolver P(grid, nu, lam, KernelSign::Plus, V, k);
            ind[i] = P.fredholm_indicator(V.sigma);
            K = P.dense(k).imag().cast<cplx>();
        }
        s.value[i] = (d.asDiagonal() * K * d.asDiagonal()).cwiseAbs().maxCoeff();
    });
    s.min_indicator = *std::min_element(ind.begin(), ind.end());
    if (s.min_indicator < kIndicatorFloor)
        throw NearSingularError("pointwise_bound_scan: Fredholm indicator below threshold (possible resonance)",
                                s.min_indicator);
    if (opt.lambda_lo < 1.0) {
        const auto [lo, hi] = low_window(opt.lambda_lo, std::min(opt.lambda_hi, 1.0));
        s.regimes.push_back(make_regime("low", lo, hi, n - 2.0 - k, tol_or(opt, 0.2), ClaimKind::Equal));
    }
    if (opt.lambda_hi > 1.0) {
        const auto [lo, hi] = high_window(std::max(opt.lambda_lo, 1.0), opt.lambda_hi);
        s.regimes.push_back(make_regime("high", lo, hi, 2.0 * quarter * (n - 2) - 1.0, kPointwiseSlack,
                                        ClaimKind::UpperBound));
    }
    s.fit();
    const LambdaOp op = [&](double lam, int kk, const CVec& f) -> CVec {
        if (V.is_zero()) return free_separable(grid, nu, lam, KernelSign::Im, kk).apply(f);
        return PerturbedSolver(grid, nu, lam, KernelSign::Plus, V, kk).apply_im(f, kk);
    };
    s.derivative_check = derivative_check(g, op, k, opt.lambda_lo, opt.lambda_hi, alpha, opt.derivative_checks, opt.seed);
    return s;
}

double dispersive_alpha(int n) { return 2.0 * std::ceil(n / 4.0) * (n - 2) - 0.5 * (n - 1) + 2.0; }

namespace {

double l1_weighted(const ModeFunction& f, double alpha) {
    const auto& g = *f.grid;
    double s = 0.0;
    for (std::size_t b = 0; b < g.size(); ++b) s += g.w[b] * std::pow(rho(g.r[b]), alpha) * std::abs(f.values[b]);
    return s;
}

Regime decay_regime(const std::vector<double>& t, const std::vector<double>& norm, double t_hi, double claim,
                    double tol, ClaimKind kind) {
    Regime r = make_regime("last-decade", t_hi / 10.0, t_hi, claim, tol, kind);
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < t.size(); ++i)
        if (t[i] >= r.lo * (1 - 1e-12)) xs.push_back(t[i]), ys.push_back(norm[i]);
    if (xs.size() < 2) throw DomainError("decay fit: fewer than two samples in the last decade");
    r.fit = loglog_fit(xs, ys);
    return r;
}

}  // namespace

DecayReport decay_fit(const LinkSpectrum& spec, std::size_t j, const ModeFunction& f, const DecayOptions& opt) {
    if (f.grid->n != spec.n) throw DomainError("decay_fit: grid dimension differs from the link");
    if (j >= spec.num_modes()) throw DomainError("decay_fit: mode index beyond the spectrum");
    if (!(opt.t_hi >= 10.0 * opt.t_lo)) throw DomainError("decay_fit: t range must span at least a decade");
    const int n = spec.n;
    DecayReport rep;
    rep.alpha = opt.request.alpha;
    rep.name = "decay.n" + std::to_string(n) + ".j" + std::to_string(j) + "." +
               (opt.request.V.is_zero() ? std::string("free") : opt.request.V.family);
    rep.t = logspace(opt.t_lo, opt.t_hi, opt.samples);
    rep.data_norm = l1_weighted(f, rep.alpha);
    PropagatorRequest req = opt.request;
    req.nu = spec.nu_of_mode(j);
    std::vector<double> xs(opt.r_points);
    for (std::size_t q = 0; q < xs.size(); ++q) xs[q] = opt.r_obs * (q + 1.0) / static_cast<double>(xs.size());
    const auto T = spectral_table(req, f, xs);
    const CMat U = propagate_table(T, rep.t, req.jobs);
    rep.norm.resize(rep.t.size());
    rep.constant.resize(rep.t.size());
    for (std::size_t i = 0; i < rep.t.size(); ++i) {
        double m = 0.0;
        for (std::size_t q = 0; q < xs.size(); ++q)
            m = std::max(m, std::pow(rho(xs[q]), -rep.alpha) * std::abs(U(static_cast<Eigen::Index>(i),
                                                                          static_cast<Eigen::Index>(q))));
        if (!(m > 0.0)) throw NumericalError("decay_fit: vanishing solution");
        rep.norm[i] = m;
        rep.constant[i] = m * std::pow(rep.t[i], 0.5 * n) / rep.data_norm;
    }
    double claim = opt.claim;
    ClaimKind kind = opt.kind;
    if (claim == 0.0) {
        claim = (n % 2 == 1) ? -0.5 * n : -0.5 * (n - 1);
        if (n % 2 == 0) kind = ClaimKind::UpperBound;
    }
    const double tol = opt.tolerance > 0.0 ? opt.tolerance : (n % 2 == 1 ? 0.1 : 0.05);
    rep.regime = decay_regime(rep.t, rep.norm, opt.t_hi, claim, tol, kind);
    return rep;
}

DecayReport free_l1l2_linf_l2(const LinkSpectrum& spec, const std::vector<ModeFunction>& modes,
                              const ConeDecayOptions& opt) {
    if (modes.empty()) throw DomainError("free_l1l2_linf_l2: no modes");
    if (modes.size() > spec.num_modes()) throw DomainError("free_l1l2_linf_l2: more modes than the spectrum");
    const auto& g = *modes.front().grid;
    for (const auto& m : modes)
        if (m.grid.get() != &g) throw DomainError("free_l1l2_linf_l2: modes must share a grid");
    if (g.n != spec.n) throw DomainError("free_l1l2_linf_l2: grid dimension differs from the link");
    const int n = spec.n;
    DecayReport rep;
    rep.name = "l1l2.n" + std::to_string(n);
    rep.t = logspace(opt.t_lo, opt.t_hi, opt.samples);
    for (std::size_t b = 0; b < g.size(); ++b) {
        double s = 0.0;
        for (const auto& m : modes) s += std::norm(m.values[static_cast<Eigen::Index>(b)]);
        rep.data_norm += g.w[b] * std::sqrt(s);
    }
    rep.norm.assign(rep.t.size(), 0.0);
    rep.constant.assign(rep.t.size(), 0.0);
    parallel_for(rep.t.size(), opt.jobs, [&](std::size_t i) {
        const double t = rep.t[i];
        const double rhi = opt.r_obs + opt.r_speed * t;
        std::vector<double> xs(opt.r_points);
        for (std::size_t q = 0; q < xs.size(); ++q) xs[q] = rhi * (q + 1.0) / static_cast<double>(xs.size());
        RVec acc = RVec::Zero(static_cast<Eigen::Index>(xs.size()));
        for (std::size_t j = 0; j < modes.size(); ++j) {
            if (modes[j].values.cwiseAbs().maxCoeff() == 0.0) continue;
            acc += weber_apply(spec.nu_of_mode(j), t, modes[j], xs).cwiseAbs2();
        }
        rep.norm[i] = std::sqrt(acc.maxCoeff());
        rep.constant[i] = rep.norm[i] * std::pow(t, 0.5 * n) / rep.data_norm;
    });
    rep.regime = decay_regime(rep.t, rep.norm, opt.t_hi, -0.5 * n, opt.tolerance, ClaimKind::Equal);
    return rep;
}

double ibp_consistency(const GridPtr& grid, double nu, const PotentialSpec& V, double t, int N,
                       const ModeFunction& f, const CutoffSpec& cutoff) {
    if (N < 0 || N > kIbpMaxOrder || N > kJetMax) throw DomainError("ibp_consistency: derivative-order cap exceeded");
    if (!(N < nu + 1.0))
        throw DomainError("ibp_consistency: N >= nu + 1 leaves boundary terms at lambda = 0");
    if (t == 0.0) throw DomainError("ibp_consistency: t must be nonzero");
    if (N == 0) return 0.0;
    const double R = cutoff.R;
    const auto& g = *grid;
    // panels: [R 2^{-(m+1)}, R 2^{-m}] for m >= 1, [0, R 2^{-L}], and [R/2, R] split to follow the phase
    std::vector<std::pair<double, double>> panels;
    constexpr int kLevels = 40;
    panels.emplace_back(0.0, R * std::ldexp(1.0, -kLevels));
    for (int m = kLevels - 1; m >= 1; --m) panels.emplace_back(R * std::ldexp(1.0, -(m + 1)), R * std::ldexp(1.0, -m));
    const int top = std::max(4, static_cast<int>(std::ceil(std::abs(t) * R * R)));
    for (int p = 0; p < top; ++p) panels.emplace_back(0.5 * R * (1.0 + p / double(top)), 0.5 * R * (1.0 + (p + 1) / double(top)));
    const auto& rule = gauss_legendre(16);
    std::vector<double> lam, wq;
    for (const auto& [a, b] : panels)
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            lam.push_back(0.5 * (a + b) + 0.5 * (b - a) * rule.nodes[q]);
            wq.push_back(0.5 * (b - a) * rule.weights[q]);
        }
    const CVec fw = f.values.cwiseProduct(Eigen::Map<const RVec>(g.w.data(), static_cast<Eigen::Index>(g.size())));
    std::vector<cplx> before(lam.size()), after(lam.size());
    parallel_for(lam.size(), 1, [&](std::size_t i) {
        const double l = lam[i];
        PerturbedSolver P(grid, nu, l, KernelSign::Plus, V, N);
        Jet h = Jet::constant(0.0, N);
        for (int k = 0; k <= N; ++k)
            h.c[k] = (2.0 / std::numbers::pi) * std::real(fw.dot(P.apply_im(f.values, k))) / std::tgamma(k + 1.0);
        Jet chi = cutoff.chi_jet(l / R, N);
        for (int k = 1; k <= N; ++k) chi.c[k] *= std::pow(R, -k);
        Jet gj = chi * h;
        const cplx phase = std::exp(cplx(0.0, t * l * l));
        before[i] = phase * l * gj.c[0];
        const Jet x = Jet::variable(l, N);
        for (int m = 0; m < N; ++m) gj = gj.d() / x;
        after[i] = phase * l * gj.c[0];
    });
    cplx I0 = 0.0, I1 = 0.0;
    for (std::size_t i = 0; i < lam.size(); ++i) I0 += wq[i] * before[i], I1 += wq[i] * after[i];
    I1 *= std::pow(cplx(0.0, 1.0 / (2.0 * t)), N);  // (-1/(2it))^N
    return std::abs(I1 - I0) / std::abs(I0);
}

std::string summary_lines(const NormScan& s) {
    std::string out;
    for (const auto& r : s.regimes) {
        const bool ok = r.pass() && s.derivative_check <= kDerivativeCheckTol;
        out += std::string(ok ? "PASS " : "FAIL ") + s.name + (s.regimes.size() > 1 ? "." + r.label : "") + " " +
               fmt(r.fit.slope) + " " + fmt(r.claim) + " " + fmt(r.tolerance) + "\n";
    }
    return out;
}

std::string summary_line(const DecayReport& d) {
    return std::string(d.pass() ? "PASS " : "FAIL ") + d.name + " " + fmt(d.regime.fit.slope) + " " +
           fmt(d.regime.claim) + " " + fmt(d.regime.tolerance) + "\n";
}

void write_csv(std::ostream& os, const NormScan& s) {
    os << "x,value,claim,fit\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
        const Regime& r = nearest_regime(s, s.x[i]);
        os << fmt(s.x[i]) << ',' << fmt(s.value[i]) << ',' << fmt(claimed(r, s.x[i])) << ','
           << fmt(fitted(r, s.x[i])) << '\n';
    }
}

void write_csv(std::ostream& os, const DecayReport& d) {
    os << "x,value,claim,fit\n";
    for (std::size_t i = 0; i < d.t.size(); ++i)
        os << fmt(d.t[i]) << ',' << fmt(d.norm[i]) << ',' << fmt(claimed(d.regime, d.t[i])) << ','
           << fmt(fitted(d.regime, d.t[i])) << '\n';
}

}  // namespace conewave
