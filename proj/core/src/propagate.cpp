#include "conewave/propagate.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "conewave/errors.hpp"
#include "conewave/perturbres.hpp"
#include "conewave/specfun.hpp"

namespace conewave {

using std::numbers::pi;

// ---- jets ----

Jet Jet::constant(double v, int order) {
    Jet j;
    j.order = order;
    j.c[0] = v;
    return j;
}

Jet Jet::variable(double x0, int order) {
    Jet j = constant(x0, order);
    if (order >= 1) j.c[1] = 1.0;
    return j;
}

double Jet::derivative(int k) const {
    if (k > order) throw DomainError("Jet: derivative beyond jet order");
    return c[k] * std::tgamma(k + 1.0);
}

Jet Jet::d() const {
    if (order == 0) throw DomainError("Jet: cannot differentiate an order-0 jet");
    Jet j;
    j.order = order - 1;
    for (int k = 0; k < order; ++k) j.c[k] = (k + 1) * c[k + 1];
    return j;
}

Jet operator+(const Jet& a, const Jet& b) {
    Jet j;
    j.order = std::min(a.order, b.order);
    for (int k = 0; k <= j.order; ++k) j.c[k] = a.c[k] + b.c[k];
    return j;
}

Jet operator-(const Jet& a, const Jet& b) { return a + (-1.0) * b; }

Jet operator*(double s, const Jet& a) {
    Jet j = a;
    for (int k = 0; k <= j.order; ++k) j.c[k] *= s;
    return j;
}

Jet operator*(const Jet& a, const Jet& b) {
    Jet j;
    j.order = std::min(a.order, b.order);
    for (int k = 0; k <= j.order; ++k)
        for (int i = 0; i <= k; ++i) j.c[k] += a.c[i] * b.c[k - i];
    return j;
}

Jet operator/(const Jet& a, const Jet& b) {
    if (b.c[0] == 0.0) throw DomainError("Jet: division by a jet vanishing at the base point");
    Jet j;
    j.order = std::min(a.order, b.order);
    for (int k = 0; k <= j.order; ++k) {
        double s = a.c[k];
        for (int i = 1; i <= k; ++i) s -= b.c[i] * j.c[k - i];
        j.c[k] = s / b.c[0];
    }
    return j;
}

Jet exp(const Jet& a) {
    // e' = a' e
    Jet j;
    j.order = a.order;
    j.c[0] = std::exp(a.c[0]);
    for (int k = 1; k <= j.order; ++k) {
        double s = 0.0;
        for (int i = 1; i <= k; ++i) s += i * a.c[i] * j.c[k - i];
        j.c[k] = s / k;
    }
    return j;
}

// ---- cutoff ----

namespace {

Jet smooth_step(const Jet& y) {
    const double y0 = y.c[0];
    if (y0 >= 1.0) return Jet::constant(1.0, y.order);
    if (y0 <= 0.0) return Jet::constant(0.0, y.order);
    Jet one = Jet::constant(1.0, y.order);
    Jet p = exp((-1.0) * (one / y));
    Jet q = exp((-1.0) * (one / (one - y)));
    return p / (p + q);
}

}  // namespace

double CutoffSpec::chi(double x) const { return chi_jet(x, 0).c[0]; }

Jet CutoffSpec::chi_jet(double x, int order) const {
    if (order > kJetMax) throw DomainError("CutoffSpec: derivative order cap exceeded");
    Jet y = Jet::constant(2.0 - 2.0 * std::abs(x), order);
    if (order >= 1) y.c[1] = x >= 0.0 ? -2.0 : 2.0;
    return smooth_step(y);
}

// ---- Weber kernel ----

cplx weber_mode_kernel(int n, double nu, double t, double r1, double r2) {
    if (!(t > 0.0) || !(r1 > 0.0) || !(r2 > 0.0)) throw DomainError("weber_mode_kernel: needs t, r1, r2 > 0");
    const double d = 0.5 * (n - 2);
    const double x = r1 * r2 / (2.0 * t);
    const cplx phase = std::polar(1.0, -(r1 * r1 + r2 * r2) / (4.0 * t));
    return cplx(0.0, 1.0 / (2.0 * t)) * std::pow(r1 * r2, -d) * phase * i_pow(nu) * bessel_value(BesselKind::J, nu, x);
}

CVec weber_apply(double nu, double t, const ModeFunction& f, const std::vector<double>& xs) {
    const auto& g = *f.grid;
    CVec u(static_cast<Eigen::Index>(xs.size()));
    for (std::size_t q = 0; q < xs.size(); ++q) {
        cplx s = 0.0;
        for (std::size_t b = 0; b < g.size(); ++b)
            if (f.values[b] != 0.0) s += weber_mode_kernel(g.n, nu, t, xs[q], g.r[b]) * g.w[b] * f.values[b];
        u[static_cast<Eigen::Index>(q)] = s;
    }
    return u;
}

// ---- spectral table ----

namespace {

constexpr int kPanelOrder = 16;
constexpr int kZeroLevels = 6;
constexpr double kResolvedPhase = 14.0;  // max lambda * radial panel width

struct TableSampler {
    const PropagatorRequest& req;
    const ModeFunction& f;
    const std::vector<double>& xs;
    bool on_grid;
    std::vector<std::size_t> fsupp;

    // g(lambda, xs) into row; returns lambda |F(lambda)|, F the free transform of the data
    double sample(double lam, Eigen::Ref<Eigen::RowVectorXcd> row) const {
        const auto& g = *f.grid;
        const double d = 0.5 * (g.n - 2);
        const double nu = req.nu;
        cplx F = 0.0;
        for (auto b : fsupp)
            F += g.w[b] * std::pow(g.r[b], -d) * bessel_value(BesselKind::J, nu, lam * g.r[b]).real() * f.values[b];
        if (req.V.is_zero()) {
            for (std::size_t q = 0; q < xs.size(); ++q)
                row[q] = lam * std::pow(xs[q], -d) * bessel_value(BesselKind::J, nu, lam * xs[q]).real() * F;
            return lam * std::abs(F);
        }
        PerturbedSolver s(f.grid, nu, lam, KernelSign::Plus, req.V, 0);
        const CVec fc = f.values.conjugate();
        const CVec u1 = s.apply(f.values), u2 = s.apply(fc);
        CVec im;
        if (on_grid) {
            im = (u1 - u2.conjugate()) / cplx(0.0, 2.0);
        } else {
            FreeFactors fac(g.n, nu, lam, KernelSign::Plus);
            CVec h1 = f.values - s.v_nodes().cwiseProduct(u1);
            CVec h2 = fc - s.v_nodes().cwiseProduct(u2);
            CVec a1 = kernel_apply_at(fac, 0, g, h1, xs), a2 = kernel_apply_at(fac, 0, g, h2, xs);
            im = (a1 - a2.conjugate()) / cplx(0.0, 2.0);
        }
        for (Eigen::Index q = 0; q < im.size(); ++q) row[q] = (2.0 / pi) * lam * im[q];
        return lam * std::abs(F);
    }
};

}  // namespace

SpectralTable spectral_table(const PropagatorRequest& req, const ModeFunction& f, const std::vector<double>& xs_in) {
    if (!(req.tol > 0.0 && req.tol <= 1e-2)) throw DomainError("spectral_table: tolerance must be in (0, 1e-2]");
    if (!(req.resolution > 0.0)) throw DomainError("spectral_table: resolution must be positive");
    const auto& g = *f.grid;
    SpectralTable T;
    T.n = g.n;
    T.nu = req.nu;
    T.order = kPanelOrder;
    const bool on_grid = xs_in.empty();
    T.xs = on_grid ? g.r : xs_in;
    for (double x : T.xs)
        if (!(x > 0.0)) throw DomainError("spectral_table: observation points must be positive");

    TableSampler S{req, f, T.xs, on_grid, {}};
    double s_max = 0.0;
    for (std::size_t b = 0; b < g.size(); ++b)
        if (f.values[b] != 0.0) {
            S.fsupp.push_back(b);
            s_max = g.r[b];
        }
    if (S.fsupp.empty()) throw DomainError("spectral_table: data vanish identically");
    double r_v = 0.0;
    if (!req.V.is_zero()) {
        double vmax = 0.0;
        for (double r : g.r) vmax = std::max(vmax, std::abs(req.V(r)));
        for (double r : g.r)
            if (std::abs(req.V(r)) >= 1e-10 * vmax) r_v = r;
    }
    const double x_max = *std::max_element(T.xs.begin(), T.xs.end());
    const double width = req.resolution / std::max(4.0, x_max + s_max + 2.0 * r_v);

    double max_panel = 0.0;
    for (const auto& pan : g.panels) max_panel = std::max(max_panel, pan.hi - pan.lo);

    T.edges.push_back(0.0);
    for (int l = kZeroLevels; l >= 0; --l) T.edges.push_back(width / std::ldexp(1.0, l));
    const auto& gl = gauss_legendre(kPanelOrder);
    const std::size_t nx = T.xs.size();
    std::vector<Eigen::RowVectorXcd> rows;
    double gmax = 0.0;
    int quiet = 0;
    std::size_t next = 0;  // first panel not yet sampled
    const std::size_t batch = static_cast<std::size_t>(std::max(1, req.jobs)) * 2;
    while (true) {
        // sample panels [next, next + batch)
        while (T.edges.size() < next + batch + 1) T.edges.push_back(T.edges.back() + width);
        std::vector<double> lams;
        for (std::size_t p = next; p < next + batch; ++p) {
            const double a = T.edges[p], b = T.edges[p + 1];
            for (int i = 0; i < kPanelOrder; ++i) lams.push_back(0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i]);
        }
        std::vector<Eigen::RowVectorXcd> block(lams.size(), Eigen::RowVectorXcd(static_cast<Eigen::Index>(nx)));
        std::vector<double> env(lams.size());
        parallel_for(lams.size(), req.jobs, [&](std::size_t i) { env[i] = S.sample(lams[i], block[i]); });
        bool done = false;
        for (std::size_t p = 0; p < batch && !done; ++p) {
            double pmax = 0.0;
            for (int i = 0; i < kPanelOrder; ++i) {
                const auto& row = block[p * kPanelOrder + i];
                pmax = std::max(pmax, env[p * kPanelOrder + i]);
                rows.push_back(row);
                T.lambda.push_back(lams[p * kPanelOrder + i]);
            }
            gmax = std::max(gmax, pmax);
            T.tail = gmax > 0.0 ? pmax / gmax : 0.0;
            quiet = (gmax > 0.0 && pmax < req.tol * gmax) ? quiet + 1 : 0;
            ++next;
            if (quiet >= 2) done = true;
        }
        if (done) break;
        if (T.edges[next] * max_panel > kResolvedPhase)
            throw ToleranceError("spectral_table: radial grid too coarse for the spectral content of the data", T.tail);
        if (T.edges[next] > req.lambda_cap)
            throw ToleranceError("spectral_table: spectral tail not below tolerance at the lambda cap", T.tail);
    }
    T.edges.resize(next + 1);
    T.g.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(nx));
    for (std::size_t i = 0; i < rows.size(); ++i) T.g.row(static_cast<Eigen::Index>(i)) = rows[i];
    return T;
}

CMat propagate_table(const SpectralTable& T, const std::vector<double>& ts, int jobs) {
    const auto& gl = gauss_legendre(T.order);
    const std::size_t P = T.edges.size() - 1;
    std::vector<double> ref(gl.nodes.begin(), gl.nodes.end());
    const auto bw = barycentric_weights(ref);
    CMat out(static_cast<Eigen::Index>(ts.size()), T.g.cols());
    parallel_for(ts.size(), jobs, [&](std::size_t it) {
        const double t = ts[it];
        if (t == 0.0) throw DomainError("propagate_table: t = 0");
        CVec W(T.g.rows());
        std::vector<double> basis;
        for (std::size_t p = 0; p < P; ++p) {
            const double a = T.edges[p], b = T.edges[p + 1];
            const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
            const int m = std::max(1, static_cast<int>(std::ceil(std::abs(t) * (b * b - a * a) / (0.5 * pi))));
            std::vector<cplx> wl(T.order, 0.0);
            for (int s = 0; s < m; ++s) {
                const double sa = a + (b - a) * s / m, sb = a + (b - a) * (s + 1) / m;
                for (int i = 0; i < T.order; ++i) {
                    const double lam = 0.5 * (sa + sb) + 0.5 * (sb - sa) * gl.nodes[i];
                    const cplx e = std::polar(0.5 * (sb - sa) * gl.weights[i], t * lam * lam);
                    lagrange_basis(ref, bw, (lam - mid) / half, basis);
                    for (int j = 0; j < T.order; ++j) wl[j] += e * basis[j];
                }
            }
            for (int j = 0; j < T.order; ++j) W[static_cast<Eigen::Index>(p * T.order + j)] = wl[j];
        }
        out.row(static_cast<Eigen::Index>(it)) = W.transpose() * T.g;
    });
    return out;
}

ModeFunction mode_propagate(const PropagatorRequest& req, const ModeFunction& f) {
    if (!(req.t > 0.0)) throw DomainError("mode_propagate: t must be positive");
    auto T = spectral_table(req, f);
    ModeFunction u;
    u.grid = f.grid;
    u.values = propagate_table(T, {req.t}).row(0).transpose();
    return u;
}

double mode_norm(const ModeFunction& f) {
    double s = 0.0;
    for (std::size_t a = 0; a < f.grid->size(); ++a) s += f.grid->w[a] * std::norm(f.values[a]);
    return std::sqrt(s);
}

// ---- S operator ----

namespace {

void require_builtin(const LinkSpectrum& spec, const char* who) {
    if (spec.kind == LinkKind::Custom) throw DomainError(std::string(who) + ": unsupported link (custom)");
}

// x^{-d} |J_nu(x)| bound (x/2)^nu / Gamma(nu+1) x^{-d}, in logs.
double log_small_x_bound(double nu, double x, double d) {
    return nu * std::log(0.5 * x) - std::lgamma(nu + 1.0) - d * std::log(x);
}

}  // namespace

SOperatorValue s_operator_entry(double x, const LinkSpectrum& spec, int j_max, const LinkPoint& th1,
                                const LinkPoint& th2) {
    require_builtin(spec, "s_operator_entry");
    if (!(x > 0.0)) throw DomainError("s_operator_entry: x must be positive");
    if (j_max < 1 || static_cast<std::size_t>(j_max) > spec.num_levels())
        throw DomainError("s_operator_entry: j_max exceeds the spectrum");
    const double d = spec.delta();
    const double xd = std::pow(x, -d);
    SOperatorValue out;
    for (int l = 0; l < j_max; ++l) {
        const double nu = spec.nu(static_cast<std::size_t>(l));
        const cplx coef = xd * i_pow(nu) * bessel_value(BesselKind::J, nu, x);
        cplx s = 0.0;
        const std::size_t first = spec.level_start(static_cast<std::size_t>(l));
        for (std::size_t j = first; j < first + spec.entries[static_cast<std::size_t>(l)].multiplicity; ++j)
            s += eigenfunction(spec, j, th1) * std::conj(eigenfunction(spec, j, th2));
        out.value += coef * s;
    }
    // sum over a level of |phi_j(th1) phi_j(th2)| <= multiplicity / vol (addition theorem)
    const auto ext = build_spectrum(spec.kind, spec.n, j_max + 400, spec.circumference);
    for (std::size_t l = static_cast<std::size_t>(j_max); l < ext.num_levels(); ++l) {
        const double term = std::exp(log_small_x_bound(ext.nu(l), x, d)) * ext.entries[l].multiplicity / ext.volume;
        out.tail_bound += term;
        if (term < 1e-18 * std::max(1.0, std::abs(out.value)) && ext.nu(l) > x) break;
    }
    return out;
}

cplx s_operator_limit(const LinkSpectrum& spec) {
    const double d = spec.delta();
    return std::pow(cplx(0.0, 0.5), d) / (std::tgamma(0.5 * spec.n) * spec.volume);
}

double s_operator_norm(double x, const LinkSpectrum& spec, int j_max) {
    if (!(x > 0.0)) throw DomainError("s_operator_norm: x must be positive");
    const double xd = std::pow(x, -spec.delta());
    double m = 0.0;
    for (int l = 0; l < j_max && static_cast<std::size_t>(l) < spec.num_levels(); ++l)
        m = std::max(m, xd * std::abs(bessel_value(BesselKind::J, spec.nu(static_cast<std::size_t>(l)), x)));
    return m;
}

// ---- full cone ----

ConeField full_cone_propagate(const LinkSpectrum& spec, double t, const std::vector<ModeFunction>& modes,
                              const std::vector<double>& r_out, const std::vector<LinkPoint>& thetas,
                              const PropagatorRequest& base) {
    require_builtin(spec, "full_cone_propagate");
    if (modes.size() > spec.num_modes()) throw DomainError("full_cone_propagate: more modes than the spectrum");
    ConeField F;
    F.r = r_out;
    F.theta = thetas;
    F.values = CMat::Zero(static_cast<Eigen::Index>(r_out.size()), static_cast<Eigen::Index>(thetas.size()));
    std::vector<CVec> u(modes.size());
    parallel_for(modes.size(), base.jobs, [&](std::size_t j) {
        if (modes[j].values.cwiseAbs().maxCoeff() == 0.0) {
            u[j] = CVec::Zero(static_cast<Eigen::Index>(r_out.size()));
            return;
        }
        const double nu = spec.nu_of_mode(j);
        if (base.V.is_zero()) {
            u[j] = weber_apply(nu, t, modes[j], r_out);
        } else {
            PropagatorRequest req = base;
            req.nu = nu;
            req.jobs = 1;
            auto T = spectral_table(req, modes[j], r_out);
            u[j] = propagate_table(T, {t}).row(0).transpose();
        }
    });
    for (std::size_t j = 0; j < modes.size(); ++j) {
        if (u[j].cwiseAbs().maxCoeff() == 0.0) continue;
        for (std::size_t k = 0; k < thetas.size(); ++k) {
            const cplx phi = eigenfunction(spec, j, thetas[k]);
            F.values.col(static_cast<Eigen::Index>(k)) += phi * u[j];
        }
    }
    return F;
}

cplx free_cone_kernel(const LinkSpectrum& spec, int j_max, double t, double r1, const LinkPoint& th1, double r2,
                      const LinkPoint& th2) {
    require_builtin(spec, "free_cone_kernel");
    if (j_max < 1 || static_cast<std::size_t>(j_max) > spec.num_levels())
        throw DomainError("free_cone_kernel: j_max exceeds the spectrum");
    cplx sum = 0.0;
    for (int l = 0; l < j_max; ++l) {
        const auto L = static_cast<std::size_t>(l);
        cplx s = 0.0;
        const std::size_t first = spec.level_start(L);
        for (std::size_t j = first; j < first + spec.entries[L].multiplicity; ++j)
            s += eigenfunction(spec, j, th1) * std::conj(eigenfunction(spec, j, th2));
        sum += weber_mode_kernel(spec.n, spec.nu(L), t, r1, r2) * s;
    }
    return sum;
}

ModeFunction gaussian_profile(const GridPtr& grid, double center, double width, double cut) {
    ModeFunction f;
    f.grid = grid;
    f.values = CVec::Zero(static_cast<Eigen::Index>(grid->size()));
    for (std::size_t a = 0; a < grid->size(); ++a) {
        const double z = (grid->r[a] - center) / width;
        if (std::abs(z) <= cut) f.values[static_cast<Eigen::Index>(a)] = std::exp(-z * z);
    }
    return f;
}

}  // namespace conewave
