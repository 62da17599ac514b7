#include "conewave/freeres.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>

#include <boost/math/special_functions/binomial.hpp>

#include "conewave/errors.hpp"
#include "conewave/specfun.hpp"

namespace conewave {

using std::numbers::pi;

const char* to_string(KernelSign s) {
    switch (s) {
        case KernelSign::Plus: return "+i0";
        case KernelSign::Minus: return "-i0";
        case KernelSign::Im: return "Im";
    }
    return "?";
}

namespace {

double binom(int k, int i) { return boost::math::binomial_coefficient<double>(k, i); }

cplx checked(const BesselResult& r) {
    if (r.overflow) throw OverflowError("kernel factor overflows; refine the grid away from 0");
    return r.value;
}

}  // namespace

FreeFactors::FreeFactors(int n, double nu, double lambda, KernelSign sign)
    : nu_(nu), lambda_(lambda), delta_(0.5 * (n - 2)), sign_(sign) {
    if (!(lambda > 0.0)) throw DomainError("free kernel factors need lambda > 0");
    if (nu < delta_ - 1e-12) throw DomainError("free kernel: nu below (n-2)/2");
}

cplx FreeFactors::lo(double r, int i) const {
    if (i == 0) {
        // r^{-d} J(lambda r) = lambda^d (lambda r)^{-d} J(lambda r), finite at r -> 0
        return std::pow(lambda_, delta_) *
               checked(scaled_bessel({nu_, lambda_ * r, -delta_}, BesselKind::J));
    }
    return std::pow(r, -delta_) * checked(bessel_dlambda(BesselKind::J, nu_, lambda_, r, i));
}

cplx FreeFactors::hi(double r, int i) const {
    const BesselKind kind = sign_ == KernelSign::Plus    ? BesselKind::H1
                            : sign_ == KernelSign::Minus ? BesselKind::H2
                                                         : BesselKind::J;
    if (kind == BesselKind::J) return lo(r, i);
    return std::pow(r, -delta_) * checked(bessel_dlambda(kind, nu_, lambda_, r, i));
}

cplx FreeFactors::prefactor() const {
    switch (sign_) {
        case KernelSign::Plus: return cplx(0.0, 0.5 * pi);
        case KernelSign::Minus: return cplx(0.0, -0.5 * pi);
        case KernelSign::Im: return cplx(0.5 * pi, 0.0);
    }
    return 0.0;
}

ZeroEnergyFactors::ZeroEnergyFactors(int n, double nu) : nu_(nu), delta_(0.5 * (n - 2)) {
    if (!(nu > 0.0)) throw DomainError("zero-energy kernel needs nu > 0");
}

cplx ZeroEnergyFactors::lo(double r, int i) const {
    if (i != 0) throw DomainError("zero-energy kernel has no lambda derivatives");
    return std::pow(r, nu_ - delta_);
}

cplx ZeroEnergyFactors::hi(double r, int i) const {
    if (i != 0) throw DomainError("zero-energy kernel has no lambda derivatives");
    return std::pow(r, -nu_ - delta_);
}

cplx SeparableKernel::entry(std::size_t a, std::size_t b) const {
    const std::size_t l = std::min(a, b), h = std::max(a, b);
    cplx s(0.0, 0.0);
    for (std::size_t t = 0; t < lo.size(); ++t) s += lo[t][l] * hi[t][h];
    return pref * s;
}

CVec SeparableKernel::apply(const CVec& f) const {
    const auto N = static_cast<Eigen::Index>(grid->size());
    CVec y = CVec::Zero(N);
    for (std::size_t t = 0; t < lo.size(); ++t) {
        cplx run(0.0, 0.0);
        for (Eigen::Index a = 0; a < N; ++a) {
            run += lo[t][a] * grid->w[a] * f[a];
            y[a] += hi[t][a] * run;
        }
        run = 0.0;
        for (Eigen::Index a = N - 1; a >= 0; --a) {
            y[a] += lo[t][a] * run;
            run += hi[t][a] * grid->w[a] * f[a];
        }
    }
    return pref * y;
}

CVec SeparableKernel::apply_conj(const CVec& f) const { return apply(f.conjugate()).conjugate(); }

CMat SeparableKernel::dense() const {
    const auto N = static_cast<Eigen::Index>(grid->size());
    CMat K(N, N);
    for (Eigen::Index a = 0; a < N; ++a)
        for (Eigen::Index b = 0; b <= a; ++b) K(a, b) = K(b, a) = entry(b, a);
    return K;
}

SeparableKernel sample_factors(const KernelFactors& fac, const GridPtr& grid, int k) {
    SeparableKernel s;
    s.grid = grid;
    s.pref = fac.prefactor();
    s.k = k;
    const auto N = static_cast<Eigen::Index>(grid->size());
    std::vector<CVec> lod(k + 1, CVec(N)), hid(k + 1, CVec(N));
    for (int i = 0; i <= k; ++i)
        for (Eigen::Index a = 0; a < N; ++a) {
            lod[i][a] = fac.lo(grid->r[a], i);
            hid[i][a] = fac.hi(grid->r[a], i);
        }
    for (int t = 0; t <= k; ++t) {
        s.lo.push_back(binom(k, t) * lod[t]);
        s.hi.push_back(hid[k - t]);
    }
    return s;
}

SeparableKernel free_separable(const GridPtr& grid, double nu, double lambda, KernelSign sign, int k) {
    if (lambda == 0.0) throw DomainError("free kernel: lambda = 0 rejected");
    if (lambda > 0.0) return sample_factors(FreeFactors(grid->n, nu, lambda, sign), grid, k);
    // R(lambda+i0) = R(-lambda-i0) as functions of lambda, so derivatives pick up (-1)^k
    KernelSign flipped = sign == KernelSign::Plus    ? KernelSign::Minus
                         : sign == KernelSign::Minus ? KernelSign::Plus
                                                     : KernelSign::Im;
    auto s = sample_factors(FreeFactors(grid->n, nu, -lambda, flipped), grid, k);
    double parity = (k % 2) ? -1.0 : 1.0;
    if (sign == KernelSign::Im) parity = -parity;  // Im R(-lambda+i0) = -Im R(lambda+i0)
    s.pref *= parity;
    return s;
}

namespace {

KernelMatrix to_matrix(const SeparableKernel& s, double nu, double lambda, KernelSign sign, int k) {
    KernelMatrix K;
    K.grid = s.grid;
    K.nu = nu;
    K.lambda = lambda;
    K.sign = sign;
    K.k = k;
    K.values = s.dense();
    return K;
}

}  // namespace

KernelMatrix free_kernel(const GridPtr& grid, double nu, double lambda, KernelSign sign, int k) {
    if (sign == KernelSign::Im) return im_free_kernel(grid, nu, lambda, k);
    return to_matrix(free_separable(grid, nu, lambda, sign, k), nu, lambda, sign, k);
}

KernelMatrix im_free_kernel(const GridPtr& grid, double nu, double lambda, int k) {
    if (k < 0 || k > 8) throw DomainError("im_free_kernel: k must be in [0,8]");
    return to_matrix(free_separable(grid, nu, lambda, KernelSign::Im, k), nu, lambda,
                     KernelSign::Im, k);
}

ModeFunction apply_kernel(const KernelMatrix& K, const ModeFunction& f) {
    if (K.grid != f.grid && (K.grid->size() != f.grid->size() || K.grid->r != f.grid->r))
        throw DomainError("apply_kernel: grid mismatch");
    Eigen::Map<const RVec> w(K.grid->w.data(), static_cast<Eigen::Index>(K.grid->size()));
    ModeFunction u;
    u.grid = K.grid;
    u.values = K.values * (w.cast<cplx>().cwiseProduct(f.values));
    return u;
}

namespace {

struct PanelInterp {
    std::vector<double> nodes, bw;
};

PanelInterp panel_interp(const RadialGrid& g, std::size_t p) {
    PanelInterp pi;
    const auto& P = g.panels[p];
    pi.nodes.assign(g.r.begin() + P.first, g.r.begin() + P.first + P.count);
    pi.bw = barycentric_weights(pi.nodes);
    return pi;
}

// Gauss nodes and r^{n-1}-weights on [a, b].
void sub_rule(double a, double b, int n, int order, std::vector<double>& s, std::vector<double>& w) {
    const auto& gl = gauss_legendre(order);
    s.resize(order);
    w.resize(order);
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    for (int i = 0; i < order; ++i) {
        s[i] = c + h * gl.nodes[i];
        w[i] = h * gl.weights[i] * std::pow(s[i], n - 1);
    }
}

}  // namespace

CVec kernel_apply_at(const KernelFactors& fac, int k, const RadialGrid& g, const CVec& f,
                     const std::vector<double>& xs) {
    const std::size_t N = g.size(), P = g.panels.size();
    const int T = k + 1;
    // node samples
    std::vector<std::vector<cplx>> lo(T, std::vector<cplx>(N)), hi(T, std::vector<cplx>(N));
    for (int i = 0; i <= k; ++i)
        for (std::size_t b = 0; b < N; ++b) {
            lo[i][b] = fac.lo(g.r[b], i);
            hi[i][b] = fac.hi(g.r[b], i);
        }
    // per-panel sums, then prefix/suffix
    std::vector<std::vector<cplx>> pa(T, std::vector<cplx>(P + 1, 0.0)), sh(T, std::vector<cplx>(P + 1, 0.0));
    for (int t = 0; t <= k; ++t) {
        const double c = binom(k, t);
        for (std::size_t p = 0; p < P; ++p) {
            cplx sa = 0.0;
            const auto& pan = g.panels[p];
            for (std::size_t b = pan.first; b < pan.first + pan.count; ++b)
                sa += c * lo[t][b] * g.w[b] * f[b];
            pa[t][p + 1] = pa[t][p] + sa;
        }
        for (std::size_t p = P; p-- > 0;) {
            cplx s = 0.0;
            const auto& pan = g.panels[p];
            for (std::size_t b = pan.first; b < pan.first + pan.count; ++b)
                s += hi[k - t][b] * g.w[b] * f[b];
            sh[t][p] = sh[t][p + 1] + s;
        }
    }
    const int sub = g.order + 4;
    std::vector<double> s1, w1, s2, w2, basis;
    CVec out(static_cast<Eigen::Index>(xs.size()));
    std::map<std::size_t, PanelInterp> interp;
    for (std::size_t q = 0; q < xs.size(); ++q) {
        const double x = xs[q];
        const std::size_t p = g.panel_of(x);
        const auto& pan = g.panels[p];
        auto it = interp.find(p);
        if (it == interp.end()) it = interp.emplace(p, panel_interp(g, p)).first;
        const auto& ip = it->second;
        const double xc = std::clamp(x, pan.lo, pan.hi);
        sub_rule(pan.lo, xc, g.n, sub, s1, w1);
        sub_rule(xc, pan.hi, g.n, sub, s2, w2);
        auto fval = [&](double s) {
            lagrange_basis(ip.nodes, ip.bw, s, basis);
            cplx v = 0.0;
            for (std::size_t i = 0; i < basis.size(); ++i) v += basis[i] * f[pan.first + i];
            return v;
        };
        std::vector<cplx> f1(sub), f2(sub);
        for (int i = 0; i < sub; ++i) {
            f1[i] = fval(s1[i]);
            f2[i] = fval(s2[i]);
        }
        cplx u = 0.0;
        for (int t = 0; t <= k; ++t) {
            const double c = binom(k, t);
            cplx below = pa[t][p], above = sh[t][p + 1];
            for (int i = 0; i < sub; ++i) {
                below += c * fac.lo(s1[i], t) * w1[i] * f1[i];
                above += fac.hi(s2[i], k - t) * w2[i] * f2[i];
            }
            u += fac.hi(x, k - t) * below + c * fac.lo(x, t) * above;
        }
        out[static_cast<Eigen::Index>(q)] = fac.prefactor() * u;
    }
    return out;
}

CMat product_rule_rows(const KernelFactors& fac, const RadialGrid& g, const std::vector<double>& xs,
                       const std::vector<std::size_t>& cols) {
    const std::size_t N = g.size();
    std::vector<cplx> lo(N), hi(N);
    std::vector<char> need(N, 0);
    for (auto b : cols) need[b] = 1;
    for (std::size_t b = 0; b < N; ++b)
        if (need[b]) {
            lo[b] = fac.lo(g.r[b], 0);
            hi[b] = fac.hi(g.r[b], 0);
        }
    const int sub = g.order + 4;
    const cplx pref = fac.prefactor();
    CMat Q(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(cols.size()));
    std::vector<double> s1, w1, s2, w2, basis;
    std::vector<cplx> la(sub), hb(sub);
    std::map<std::size_t, PanelInterp> interp;
    for (std::size_t q = 0; q < xs.size(); ++q) {
        const double x = xs[q];
        const std::size_t p = g.panel_of(x);
        const auto& pan = g.panels[p];
        auto it = interp.find(p);
        if (it == interp.end()) it = interp.emplace(p, panel_interp(g, p)).first;
        const auto& ip = it->second;
        const double xc = std::clamp(x, pan.lo, pan.hi);
        sub_rule(pan.lo, xc, g.n, sub, s1, w1);
        sub_rule(xc, pan.hi, g.n, sub, s2, w2);
        for (int i = 0; i < sub; ++i) {
            la[i] = fac.lo(s1[i], 0) * w1[i];
            hb[i] = fac.hi(s2[i], 0) * w2[i];
        }
        const cplx hx = fac.hi(x, 0), lx = fac.lo(x, 0);
        // in-panel corrected weights per local node
        std::vector<cplx> local(pan.count, 0.0);
        for (int i = 0; i < sub; ++i) {
            lagrange_basis(ip.nodes, ip.bw, s1[i], basis);
            for (std::size_t m = 0; m < pan.count; ++m) local[m] += hx * la[i] * basis[m];
            lagrange_basis(ip.nodes, ip.bw, s2[i], basis);
            for (std::size_t m = 0; m < pan.count; ++m) local[m] += lx * hb[i] * basis[m];
        }
        for (std::size_t c = 0; c < cols.size(); ++c) {
            const std::size_t b = cols[c];
            cplx v;
            if (b >= pan.first && b < pan.first + pan.count) v = local[b - pan.first];
            else if (b < pan.first) v = hx * lo[b] * g.w[b];
            else v = lx * hi[b] * g.w[b];
            Q(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(c)) = pref * v;
        }
    }
    return Q;
}

std::vector<KernelMatrix> spectral_density(const GridPtr& grid, const LinkSpectrum& spec, double lambda,
                                           const std::vector<std::size_t>& j_set) {
    if (!(lambda > 0.0)) throw DomainError("spectral_density: lambda must be positive");
    std::map<double, KernelMatrix> cache;
    std::vector<KernelMatrix> out;
    for (auto j : j_set) {
        const double nu = spec.nu_of_mode(j);
        auto it = cache.find(nu);
        if (it == cache.end()) {
            auto K = im_free_kernel(grid, nu, lambda, 0);
            K.values *= lambda / pi;
            it = cache.emplace(nu, std::move(K)).first;
        }
        out.push_back(it->second);
    }
    return out;
}

double weighted_operator_norm(const RadialGrid& grid, const std::function<CVec(const CVec&)>& apply,
                              double sigma_out, double sigma_in) {
    const auto N = static_cast<Eigen::Index>(grid.size());
    RVec dout(N), din(N), w(N);
    for (Eigen::Index a = 0; a < N; ++a) {
        w[a] = grid.w[a];
        dout[a] = std::sqrt(grid.w[a]) * std::pow(rho(grid.r[a]), -sigma_out);
        din[a] = std::sqrt(grid.w[a]) * std::pow(rho(grid.r[a]), -sigma_in);
    }
    auto fwd = [&](const CVec& x) -> CVec {
        CVec z = din.cwiseQuotient(w).cast<cplx>().cwiseProduct(x);
        return dout.cast<cplx>().cwiseProduct(apply(z));
    };
    auto adj = [&](const CVec& x) -> CVec {
        CVec z = dout.cwiseQuotient(w).cast<cplx>().cwiseProduct(x.conjugate());
        return din.cast<cplx>().cwiseProduct(apply(z).conjugate());
    };
    return top_singular_value(fwd, adj, N);
}

GridPtr refined(const RadialGrid& grid) {
    GridScheme s = grid.scheme;
    if (s.max_panel > 0.0) s.max_panel *= 0.5;
    const int target = std::max(grid.target_nodes, static_cast<int>(grid.size()));
    return build_grid(grid.n, grid.rmax, 2 * target, s);
}

GreenResidual green_residual(const RadialGrid& grid, double nu, double lambda, const CVec& f,
                             double r_lo, double r_hi) {
    FreeFactors fac(grid.n, nu, lambda, KernelSign::Plus);
    const double d = 0.5 * (grid.n - 2);
    const double mu2 = nu * nu - d * d;
    const double h = 0.02 / std::max(1.0, lambda);
    std::vector<std::size_t> idx;
    std::vector<double> xs;
    for (std::size_t a = 0; a < grid.size(); ++a) {
        const double r = grid.r[a];
        if (r < r_lo || r > r_hi || r - 2 * h <= 0.0 || r + 2 * h >= grid.rmax) continue;
        idx.push_back(a);
        for (int m = -2; m <= 2; ++m) xs.push_back(r + m * h);
    }
    CVec u = kernel_apply_at(fac, 0, grid, f, xs);
    double num = 0.0, den = 0.0;
    for (std::size_t q = 0; q < idx.size(); ++q) {
        const auto a = idx[q];
        const double r = grid.r[a];
        const cplx* v = u.data() + 5 * q;
        const cplx d1 = (-v[4] + 8.0 * v[3] - 8.0 * v[1] + v[0]) / (12.0 * h);
        const cplx d2 = (-v[4] + 16.0 * v[3] - 30.0 * v[2] + 16.0 * v[1] - v[0]) / (12.0 * h * h);
        const cplx res = d2 + (grid.n - 1) / r * d1 - mu2 / (r * r) * v[2] + lambda * lambda * v[2] + f[a];
        num += grid.w[a] * std::norm(res);
        den += grid.w[a] * std::norm(f[a]);
    }
    GreenResidual g;
    g.nodes = idx.size();
    g.relative = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
    return g;
}

}  // namespace conewave
