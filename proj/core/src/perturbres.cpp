#include "conewave/perturbres.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/special_functions/binomial.hpp>

#include "conewave/errors.hpp"
#include "conewave/specfun.hpp"

namespace conewave {

using std::numbers::pi;

namespace {
double binom(int k, int i) { return boost::math::binomial_coefficient<double>(k, i); }
constexpr double kSupportCut = 1e-18;
}  // namespace

PerturbedSolver::PerturbedSolver(GridPtr grid, double nu, double lambda, KernelSign sign,
                                 const PotentialSpec& V, int kmax)
    : grid_(std::move(grid)), nu_(nu), lambda_(lambda), sign_(sign), kmax_(kmax) {
    if (sign == KernelSign::Im) throw DomainError("PerturbedSolver: use sign +i0 and apply_im");
    if (kmax < 0 || kmax > 8) throw DomainError("PerturbedSolver: derivative order must be in [0,8]");
    const auto N = static_cast<Eigen::Index>(grid_->size());
    v_ = CVec::Zero(N);
    double vmax = 0.0;
    for (Eigen::Index a = 0; a < N; ++a) {
        v_[a] = V.V(grid_->r[a]);
        vmax = std::max(vmax, std::abs(v_[a]));
    }
    for (Eigen::Index a = 0; a < N; ++a)
        if (vmax > 0.0 && std::abs(v_[a]) > kSupportCut * vmax) support_.push_back(static_cast<std::size_t>(a));
    if (lambda == 0.0) {
        if (kmax != 0) throw DomainError("PerturbedSolver: no lambda derivatives at lambda = 0");
        free_.push_back(sample_factors(ZeroEnergyFactors(grid_->n, nu), grid_, 0));
    } else {
        for (int i = 0; i <= kmax; ++i) free_.push_back(free_separable(grid_, nu, lambda, sign, i));
    }
    if (!support_.empty()) hom_end_ = sweep_(CVec::Zero(N), 1.0, hom_);
}

cplx PerturbedSolver::sweep_(const CVec& rhs, cplx beta, CVec& v) const {
    // v_a = rhs_a - p (hi_a A_{a-1} + lo_a S_a), A_{a-1} = sum_{b<a} lo_b h_b, S_a = sum_{b>=a} hi_b h_b
    const auto& K = free_[0];
    const auto N = static_cast<Eigen::Index>(grid_->size());
    const CVec& lo = K.lo[0];
    const CVec& hi = K.hi[0];
    v.resize(N);
    cplx A = 0.0, S = beta;
    for (Eigen::Index a = 0; a < N; ++a) {
        v[a] = rhs[a] - K.pref * (hi[a] * A + lo[a] * S);
        const cplx h = grid_->w[a] * v_[a] * v[a];
        A += lo[a] * h;
        S -= hi[a] * h;
    }
    return S;
}

CVec PerturbedSolver::solve_(const CVec& rhs) const {
    CVec v;
    const cplx end = sweep_(rhs, 0.0, v);
    if (hom_end_ == 0.0) throw NearSingularError("PerturbedSolver: singular at this lambda", 0.0);
    v -= (end / hom_end_) * hom_;
    return v;
}

CVec PerturbedSolver::apply(const CVec& f, int k) const {
    if (k < 0 || k > kmax_) throw DomainError("PerturbedSolver::apply: derivative order beyond kmax");
    if (support_.empty()) return free_[k].apply(f);
    std::vector<CVec> v(k + 1);
    for (int j = 0; j <= k; ++j) {
        CVec rhs = free_[j].apply(f);
        for (int i = 1; i <= j; ++i) rhs -= binom(j, i) * free_[i].apply(v_.cwiseProduct(v[j - i]));
        v[j] = solve_(rhs);
    }
    return v[k];
}

CVec PerturbedSolver::apply_im(const CVec& f, int k) const {
    if (sign_ != KernelSign::Plus) throw DomainError("apply_im requires the +i0 solver");
    return (apply(f, k) - apply(f.conjugate(), k).conjugate()) / cplx(0.0, 2.0);
}

CMat PerturbedSolver::dense(int k) const {
    if (support_.empty()) return free_[k].dense();
    const auto N = static_cast<Eigen::Index>(grid_->size());
    CMat K(N, N);
    CVec e = CVec::Zero(N);
    for (Eigen::Index b = 0; b < N; ++b) {
        e[b] = 1.0 / grid_->w[b];
        K.col(b) = apply(e, k);
        e[b] = 0.0;
    }
    return K;
}

double PerturbedSolver::fredholm_indicator(double sigma) const {
    const auto m = static_cast<Eigen::Index>(support_.size());
    if (m == 0) return 1.0;
    const auto N = static_cast<Eigen::Index>(grid_->size());
    RVec F(N), W(N);
    CVec E = CVec::Zero(N);
    for (Eigen::Index a = 0; a < N; ++a) {
        const double sw = std::sqrt(grid_->w[a]), rr = rho(grid_->r[a]);
        F[a] = sw * std::pow(rr, -sigma);
        E[a] = sw * std::pow(rr, sigma) * v_[a];
        W[a] = grid_->w[a];
    }
    // S = I + E K0 F. With K_V = (I + K0 W D_V)^{-1} K0 (complex symmetric):
    // S^{-1} = I - E K_V F and S^{-H} = I - F conj(K_V) conj(E), both O(N) through the sweep.
    const SeparableKernel& K = free_[0];
    auto kv = [&](const CVec& y) { return solve_(K.apply(y.cwiseQuotient(W.cast<cplx>()))); };
    auto inv = [&](const CVec& x) -> CVec { return x - E.cwiseProduct(kv(F.cast<cplx>().cwiseProduct(x))); };
    auto inv_adj = [&](const CVec& x) -> CVec {
        return x - F.cast<cplx>().cwiseProduct(kv(E.cwiseProduct(x.conjugate())).conjugate());
    };
    const double big = top_singular_value(inv, inv_adj, N, 120, 1e-12);
    return 1.0 / big;
}

KernelMatrix perturbed_kernel(const GridPtr& grid, double nu, double lambda, KernelSign sign,
                              const PotentialSpec& V, double threshold, double sigma) {
    if (lambda == 0.0) throw DomainError("perturbed_kernel: lambda = 0 rejected");
    KernelSign s = sign == KernelSign::Im ? KernelSign::Plus : sign;
    PerturbedSolver solver(grid, nu, lambda, s, V, 0);
    const double ind = solver.fredholm_indicator(sigma > 0 ? sigma : V.sigma);
    if (ind < threshold)
        throw NearSingularError("perturbed_kernel: Fredholm indicator below threshold (possible resonance)", ind);
    KernelMatrix K;
    K.grid = grid;
    K.nu = nu;
    K.lambda = lambda;
    K.sign = sign;
    K.values = solver.dense(0);
    // residual of (I + K0 W D) X = K0
    const CMat K0 = solver.free_part(0).dense();
    const auto N = static_cast<Eigen::Index>(grid->size());
    CVec wd(N);
    for (Eigen::Index a = 0; a < N; ++a) wd[a] = grid->w[a] * solver.v_nodes()[a];
    const CMat R = K.values + K0 * wd.asDiagonal() * K.values - K0;
    if (R.norm() > 1e-8 * K0.norm())
        throw NumericalError("perturbed_kernel: residual check failed");
    if (sign == KernelSign::Im) K.values = (K.values - K.values.conjugate()) / cplx(0.0, 2.0);
    return K;
}

BirmanSchwinger birman_schwinger(const GridPtr& grid, double nu, double lambda, KernelSign sign,
                                 const PotentialSpec& V, int M) {
    const int need = (grid->n + 3) / 4;
    if (M < need) throw DomainError("birman_schwinger: M must be >= ceil(n/4)");
    auto KV = perturbed_kernel(grid, nu, lambda, sign, V);
    const CMat K0 = free_kernel(grid, nu, lambda, sign).values;
    const auto N = static_cast<Eigen::Index>(grid->size());
    CVec wd(N);
    for (Eigen::Index a = 0; a < N; ++a) wd[a] = grid->w[a] * V.V(grid->r[a]);
    const CMat G = wd.asDiagonal() * K0;  // W D K0
    const CMat L = K0 * wd.asDiagonal();  // K0 W D
    CMat term = K0, series = K0;
    for (int l = 1; l < 2 * M; ++l) {
        term = -(term * G);
        series += term;
    }
    CMat left = CMat::Identity(N, N), right = CMat::Identity(N, N);
    for (int m = 0; m < M; ++m) {
        left = left * L;
        right = right * G;
    }
    BirmanSchwinger out;
    out.series_part = KV;
    out.series_part.values = series;
    out.remainder = KV;
    out.remainder.values = left * KV.values * right;
    return out;
}

double zero_energy_indicator(const GridPtr& grid, double nu, const PotentialSpec& V) {
    PerturbedSolver s(grid, nu, 0.0, KernelSign::Plus, V, 0);
    return s.fredholm_indicator(V.sigma);
}

FredholmReport fredholm_scan(const GridPtr& grid, double nu, const PotentialSpec& V,
                             const std::vector<double>& lambdas, KernelSign sign, double threshold, int jobs) {
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] < 0.0) throw DomainError("fredholm_scan: lambda grid must be nonnegative");
        if (i > 0 && lambdas[i] <= lambdas[i - 1]) throw DomainError("fredholm_scan: lambda grid must be sorted");
    }
    FredholmReport rep;
    rep.lambda = lambdas;
    rep.threshold = threshold;
    rep.indicator.assign(lambdas.size(), 0.0);
    rep.flag.assign(lambdas.size(), 0);
    auto eval = [&](const GridPtr& g, double lam) {
        if (lam == 0.0) return zero_energy_indicator(g, nu, V);
        PerturbedSolver s(g, nu, lam, sign == KernelSign::Im ? KernelSign::Plus : sign, V, 0);
        return s.fredholm_indicator(V.sigma);
    };
    parallel_for(lambdas.size(), jobs, [&](std::size_t i) { rep.indicator[i] = eval(grid, lambdas[i]); });
    GridPtr fine;
    for (std::size_t i = 0; i < lambdas.size(); ++i) {
        if (rep.indicator[i] >= threshold) continue;
        if (!fine) fine = refined(*grid);
        rep.flag[i] = eval(fine, lambdas[i]) < threshold ? 2 : 1;
    }
    return rep;
}

CouplingTuning tune_zero_energy(const GridPtr& grid, double nu, const PotentialSpec& V, double c_lo,
                                double c_hi) {
    auto det_sign = [&](double c) {
        auto Vc = scaled(V, c);
        PerturbedSolver s(grid, nu, 0.0, KernelSign::Plus, Vc, 0);
        if (s.support().empty()) return 1;
        // rebuild the real matrix I + K0(0) W D and take the sign of its determinant
        const auto& sup = s.support();
        const auto m = static_cast<Eigen::Index>(sup.size());
        Eigen::MatrixXd A = Eigen::MatrixXd::Identity(m, m);
        for (Eigen::Index p = 0; p < m; ++p)
            for (Eigen::Index q = 0; q < m; ++q)
                A(p, q) += s.free_part(0).entry(sup[p], sup[q]).real() * grid->w[sup[q]] * s.v_nodes()[sup[q]].real();
        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        double sg = lu.permutationP().determinant();
        for (Eigen::Index p = 0; p < m; ++p) sg *= lu.matrixLU()(p, p) < 0 ? -1.0 : 1.0;
        return sg < 0 ? -1 : 1;
    };
    int slo = det_sign(c_lo), shi = det_sign(c_hi);
    if (slo == shi) throw ConfigError("tune_zero_energy: no determinant sign change in the coupling bracket");
    double a = c_lo, b = c_hi;
    for (int it = 0; it < 200 && b - a > 1e-15 * std::max(std::abs(a), std::abs(b)); ++it) {
        const double c = 0.5 * (a + b);
        if (det_sign(c) == slo) a = c;
        else b = c;
    }
    CouplingTuning t;
    t.coupling = 0.5 * (a + b);
    t.indicator = zero_energy_indicator(grid, nu, scaled(V, t.coupling));
    return t;
}

NeumannThreshold neumann_threshold(const GridPtr& grid, double nu, const PotentialSpec& V,
                                   const std::vector<double>& lambdas) {
    NeumannThreshold out;
    for (double lam : lambdas) {
        auto S = free_separable(grid, nu, lam, KernelSign::Plus, 0);
        const double nrm = weighted_operator_norm(*grid, [&](const CVec& f) { return S.apply(f); }, V.sigma, V.sigma);
        out.C = std::max(out.C, lam * nrm);
    }
    PotentialSpec Vc = V;
    if (Vc.A == 0.0 && !Vc.is_zero()) certify(Vc, *grid);
    out.M_V = 2.0 * Vc.A * out.C;
    return out;
}

void free_jost(int n, double nu, double lambda, double r, int pm, cplx& u, cplx& du) {
    const double d = 0.5 * (n - 2);
    const BesselKind kind = pm > 0 ? BesselKind::H1 : BesselKind::H2;
    const cplx c = std::sqrt(pi * lambda / 2.0) * std::polar(1.0, pm * (0.5 * pi * nu + 0.25 * pi));
    auto h = bessel_any_order(kind, nu, lambda * r);
    auto hd = bessel_dlambda(kind, nu, lambda, r, 1);  // r H'(lambda r)
    if (h.overflow || hd.overflow) throw OverflowError("free_jost: overflow near r = 0");
    const double rp = std::pow(r, -d);
    u = c * rp * h.value;
    du = c * (-d * rp / r * h.value + rp * (lambda / r) * hd.value);
}

std::vector<cplx> JostSolutions::wronskian() const {
    std::vector<cplx> w(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) w[i] = std::pow(r[i], n - 1) * (up[i] * dum[i] - dup[i] * um[i]);
    return w;
}

namespace {

// Backward cumulative trapezoid: out[i] = int_{r[i]}^{r[0]} g, r descending.
void tail_integral(const std::vector<double>& r, const std::vector<cplx>& g, std::vector<cplx>& out) {
    out.assign(r.size(), 0.0);
    for (std::size_t i = 1; i < r.size(); ++i) out[i] = out[i - 1] + 0.5 * (r[i - 1] - r[i]) * (g[i - 1] + g[i]);
}

}  // namespace

JostSolutions jost_solutions(int n, double lambda, const PotentialSpec& V, std::vector<double> r_grid,
                             double nu, int max_iter, double tol) {
    if (!(lambda > 0.0)) throw DomainError("jost_solutions: lambda must be positive");
    if (r_grid.size() < 2) throw DomainError("jost_solutions: r grid too short");
    std::sort(r_grid.begin(), r_grid.end(), std::greater<>());
    if (!(r_grid.back() > 0.0)) throw DomainError("jost_solutions: r grid must be positive");
    const std::size_t M = r_grid.size();
    const cplx C(0.0, -2.0 * lambda);  // r^{n-1}(y+ y-' - y+' y-) for the free pair
    std::vector<cplx> y1(M), y2(M), d1(M), d2(M), sv(M);
    for (std::size_t i = 0; i < M; ++i) {
        free_jost(n, nu, lambda, r_grid[i], +1, y1[i], d1[i]);
        free_jost(n, nu, lambda, r_grid[i], -1, y2[i], d2[i]);
        sv[i] = std::pow(r_grid[i], n - 1) * V.V(r_grid[i]);
    }
    JostSolutions out;
    out.n = n;
    out.r = r_grid;
    std::vector<cplx> g(M), bm(M), bp(M);
    auto solve = [&](const std::vector<cplx>& u0, const std::vector<cplx>& du0, std::vector<cplx>& u,
                     std::vector<cplx>& du) {
        u = u0;
        double defect = 0.0;
        for (int it = 1; it <= max_iter; ++it) {
            for (std::size_t i = 0; i < M; ++i) g[i] = y2[i] * sv[i] * u[i];
            tail_integral(r_grid, g, bm);
            for (std::size_t i = 0; i < M; ++i) g[i] = y1[i] * sv[i] * u[i];
            tail_integral(r_grid, g, bp);
            double diff = 0.0, mag = 0.0;
            for (std::size_t i = 0; i < M; ++i) {
                const cplx nu_i = u0[i] + (y1[i] * bm[i] - y2[i] * bp[i]) / C;
                diff = std::max(diff, std::abs(nu_i - u[i]));
                mag = std::max(mag, std::abs(nu_i));
                u[i] = nu_i;
            }
            defect = diff / mag;
            out.iterations = std::max(out.iterations, it);
            if (defect <= tol) {
                du.resize(M);
                for (std::size_t i = 0; i < M; ++i) du[i] = du0[i] + (d1[i] * bm[i] - d2[i] * bp[i]) / C;
                out.defect = std::max(out.defect, defect);
                return;
            }
        }
        throw ConvergenceError("jost_solutions: Picard iteration did not contract", defect);
    };
    solve(y1, d1, out.up, out.dup);
    solve(y2, d2, out.um, out.dum);
    return out;
}

int count_negative_eigenvalues(int n, double nu, const PotentialSpec& V, double rmax, int points) {
    (void)n;
    const double h = rmax / points;
    const double c = nu * nu - 0.25;
    int count = 0;
    double dprev = 0.0;
    for (int i = 1; i < points; ++i) {
        const double r = i * h;
        const double a = 2.0 / (h * h) + c / (r * r) + V.V(r);
        const double off = 1.0 / (h * h);
        const double d = i == 1 ? a : a - off * off / dprev;
        if (d < 0.0) ++count;
        dprev = d == 0.0 ? 1e-300 : d;
    }
    return count;
}

}  // namespace conewave
