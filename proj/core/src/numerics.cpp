#include "conewave/numerics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "conewave/errors.hpp"

namespace conewave {

const GaussRule& gauss_legendre(int order) {
    static std::mutex mu;
    static std::map<int, GaussRule> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(order);
    if (it != cache.end()) return it->second;
    if (order < 1) throw DomainError("gauss_legendre: order must be >= 1");
    GaussRule g;
    if (order == 1) {
        g.nodes = {0.0};
        g.weights = {2.0};
        return cache.emplace(order, std::move(g)).first->second;
    }
    g.nodes.resize(order);
    g.weights.resize(order);
    for (int i = 0; i < (order + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
        double dp = 1.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= order; ++k) {
                double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = order * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // recompute derivative at the converged node
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= order; ++k) {
            double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = order * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        g.nodes[i] = -x;
        g.nodes[order - 1 - i] = x;
        g.weights[i] = w;
        g.weights[order - 1 - i] = w;
    }
    if (order % 2 == 1) g.nodes[order / 2] = 0.0;
    return cache.emplace(order, std::move(g)).first->second;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw DomainError("linear_fit: need >= 2 paired points");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i], my += y[i];
    mx /= n, my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LinearFit f;
    f.count = n;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = y[i] - (f.intercept + f.slope * x[i]);
        ss += r * r;
    }
    f.rms_residual = std::sqrt(ss / n);
    if (n > 2) {
        boost::math::students_t t(static_cast<double>(n - 2));
        double q = boost::math::quantile(boost::math::complement(t, 0.025));
        f.slope_halfwidth = q * std::sqrt(ss / (n - 2) / sxx);
    }
    return f;
}

LinearFit loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("loglog_fit: nonpositive sample");
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    return linear_fit(lx, ly);
}

std::vector<double> logspace(double lo, double hi, std::size_t count) {
    std::vector<double> v(count);
    if (count == 1) {
        v[0] = lo;
        return v;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (std::size_t i = 0; i < count; ++i)
        v[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
    v.front() = lo;
    v.back() = hi;
    return v;
}

std::vector<double> barycentric_weights(const std::vector<double>& nodes) {
    const std::size_t n = nodes.size();
    std::vector<double> w(n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) w[i] /= (nodes[i] - nodes[j]);
    return w;
}

void lagrange_basis(const std::vector<double>& nodes, const std::vector<double>& bw, double x,
                    std::vector<double>& out) {
    const std::size_t n = nodes.size();
    out.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (x == nodes[i]) {
            out[i] = 1.0;
            return;
        }
    }
    double denom = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = bw[i] / (x - nodes[i]);
        denom += out[i];
    }
    for (auto& v : out) v /= denom;
}

double top_singular_value(const std::function<CVec(const CVec&)>& apply,
                          const std::function<CVec(const CVec&)>& apply_adjoint, Eigen::Index cols,
                          int max_steps, double rel_tol, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CVec v(cols);
    for (Eigen::Index i = 0; i < cols; ++i) v[i] = cplx(nd(rng), nd(rng));
    v.normalize();
    std::vector<CVec> V{v}, U;
    std::vector<double> alpha, beta;
    double prev = 0.0, est = 0.0;
    const int steps = static_cast<int>(std::min<Eigen::Index>(max_steps, cols));
    for (int k = 0; k < steps; ++k) {
        CVec u = apply(V.back());
        if (!U.empty()) u -= beta.back() * U.back();
        for (const auto& q : U) u -= q * q.dot(u);
        double a = u.norm();
        alpha.push_back(a);
        if (a == 0.0) break;
        u /= a;
        U.push_back(u);
        CVec w = apply_adjoint(u) - a * V.back();
        for (const auto& q : V) w -= q * q.dot(w);
        for (const auto& q : V) w -= q * q.dot(w);
        double b = w.norm();
        // singular values of the k x k upper bidiagonal
        const int m = static_cast<int>(alpha.size());
        Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m, m);
        for (int i = 0; i < m; ++i) {
            B(i, i) = alpha[i];
            if (i + 1 < m) B(i, i + 1) = beta[i];
        }
        est = Eigen::JacobiSVD<Eigen::MatrixXd>(B).singularValues()(0);
        if (k > 2 && std::abs(est - prev) <= rel_tol * est) break;
        prev = est;
        if (b <= 1e-14 * est) break;
        beta.push_back(b);
        V.push_back(w / b);
    }
    return est;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& body) {
    if (jobs <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr err;
    std::mutex err_mu;
    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(err_mu);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), count));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

}  // namespace conewave
