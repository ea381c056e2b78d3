#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "homlab/kernels.hpp"
#include "homlab/spectral.hpp"

/// Preconditioned Krylov solvers on flat coefficient vectors.
///
/// Operators and preconditioners are callables `void(const cplx* in, cplx* out)`
/// acting on vectors of the length of `b`. Residuals are relative: ||b - Ax|| / ||b||.
namespace homlab::krylov {

struct Options {
    double tol = 1e-10;
    int max_iters = 2000;
    int restart = 50;
};

struct Result {
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

namespace detail {

inline double norm(const CVec& v) { return std::sqrt(kernels::norm2(v)); }

template <class Op>
double true_residual(Op& A, std::span<const cplx> b, const CVec& x, CVec& r, double bnorm) {
    A(x.data(), r.data());
    kernels::xpay(b, -1.0, r);
    return norm(r) / bnorm;
}

}  // namespace detail

/// Conjugate gradients for Hermitian positive (semi)definite A with an HPD
/// preconditioner; x is used as the initial guess.
template <class Op, class Prec>
Result pcg(Op&& A, Prec&& M, std::span<const cplx> b, CVec& x, const Options& opt) {
    const std::size_t n = b.size();
    const double bnorm = std::sqrt(kernels::norm2(b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), cplx{});
        return {0, 0.0, true};
    }
    CVec r(n), z(n), p(n), q(n);
    double res = detail::true_residual(A, b, x, r, bnorm);
    if (res <= opt.tol) return {0, res, true};
    M(r.data(), z.data());
    p = z;
    cplx rz = kernels::dot(r, z);
    for (int it = 1; it <= opt.max_iters; ++it) {
        A(p.data(), q.data());
        const cplx alpha = rz / kernels::dot(p, q);
        kernels::axpy(alpha, p, x);
        kernels::axpy(-alpha, q, r);
        res = detail::norm(r) / bnorm;
        if (res <= opt.tol) {
            res = detail::true_residual(A, b, x, r, bnorm);
            if (res <= opt.tol) return {it, res, true};
        }
        M(r.data(), z.data());
        const cplx rz_new = kernels::dot(r, z);
        kernels::xpay(z, rz_new / rz, p);
        rz = rz_new;
    }
    return {opt.max_iters, res, false};
}

/// Right-preconditioned BiCGStab. Returns converged = false on breakdown or when
/// the iteration budget is exhausted; x then holds the best iterate.
template <class Op, class Prec>
Result bicgstab(Op&& A, Prec&& M, std::span<const cplx> b, CVec& x, const Options& opt) {
    const std::size_t n = b.size();
    const double bnorm = std::sqrt(kernels::norm2(b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), cplx{});
        return {0, 0.0, true};
    }
    CVec r(n), rhat(n), p(n), v(n), phat(n), s(n), shat(n), t(n);
    double res = detail::true_residual(A, b, x, r, bnorm);
    if (res <= opt.tol) return {0, res, true};
    rhat = r;
    cplx rho = 1.0, alpha = 1.0, omega = 1.0;
    int it = 0;
    while (it < opt.max_iters) {
        ++it;
        const cplx rho_new = kernels::dot(rhat, r);
        if (std::abs(rho_new) < 1e-300) break;
        if (it == 1) {
            p = r;
        } else {
            const cplx beta = (rho_new / rho) * (alpha / omega);
            kernels::axpy(-omega, v, p);
            kernels::xpay(r, beta, p);
        }
        rho = rho_new;
        M(p.data(), phat.data());
        A(phat.data(), v.data());
        const cplx rv = kernels::dot(rhat, v);
        if (std::abs(rv) < 1e-300) break;
        alpha = rho / rv;
        s = r;
        kernels::axpy(-alpha, v, s);
        if (detail::norm(s) / bnorm <= opt.tol) {
            kernels::axpy(alpha, phat, x);
            res = detail::true_residual(A, b, x, r, bnorm);
            if (res <= opt.tol) return {it, res, true};
            continue;
        }
        M(s.data(), shat.data());
        A(shat.data(), t.data());
        const double tt = kernels::norm2(t);
        if (tt == 0.0) break;
        omega = kernels::dot(t, s) / tt;
        kernels::axpy(alpha, phat, x);
        kernels::axpy(omega, shat, x);
        r = s;
        kernels::axpy(-omega, t, r);
        res = detail::norm(r) / bnorm;
        if (res <= opt.tol) {
            res = detail::true_residual(A, b, x, r, bnorm);
            if (res <= opt.tol) return {it, res, true};
            rhat = r;
            rho = alpha = omega = 1.0;
        }
        if (std::abs(omega) < 1e-300) break;
    }
    res = detail::true_residual(A, b, x, r, bnorm);
    return {it, res, res <= opt.tol};
}

/// Restarted right-preconditioned GMRES with modified Gram-Schmidt.
template <class Op, class Prec>
Result gmres(Op&& A, Prec&& M, std::span<const cplx> b, CVec& x, const Options& opt) {
    const std::size_t n = b.size();
    const double bnorm = std::sqrt(kernels::norm2(b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), cplx{});
        return {0, 0.0, true};
    }
    const int m = std::max(1, opt.restart);
    std::vector<CVec> V(m + 1, CVec(n));
    std::vector<cplx> H((m + 1) * m), cs(m), sn(m), g(m + 1), y(m);
    CVec r(n), w(n), z(n);
    int total = 0;
    double res = detail::true_residual(A, b, x, r, bnorm);
    while (total < opt.max_iters && res > opt.tol) {
        const double beta = detail::norm(r);
        V[0] = r;
        kernels::scale(1.0 / beta, V[0]);
        std::fill(g.begin(), g.end(), cplx{});
        g[0] = beta;
        int k = 0;
        for (; k < m && total < opt.max_iters; ++k, ++total) {
            M(V[k].data(), z.data());
            A(z.data(), w.data());
            for (int i = 0; i <= k; ++i) {
                const cplx h = kernels::dot(V[i], w);
                H[i * m + k] = h;
                kernels::axpy(-h, V[i], w);
            }
            const double hn = detail::norm(w);
            H[(k + 1) * m + k] = hn;
            for (int i = 0; i < k; ++i) {
                const cplx a = H[i * m + k];
                const cplx c = H[(i + 1) * m + k];
                H[i * m + k] = std::conj(cs[i]) * a + std::conj(sn[i]) * c;
                H[(i + 1) * m + k] = -sn[i] * a + cs[i] * c;
            }
            const cplx a = H[k * m + k];
            const double denom = std::hypot(std::abs(a), hn);
            cs[k] = denom == 0.0 ? cplx{1.0} : a / denom;
            sn[k] = denom == 0.0 ? cplx{0.0} : cplx{hn / denom};
            H[k * m + k] = std::conj(cs[k]) * a + std::conj(sn[k]) * hn;
            H[(k + 1) * m + k] = 0.0;
            g[k + 1] = -sn[k] * g[k];
            g[k] = std::conj(cs[k]) * g[k];
            if (hn > 0.0) {
                V[k + 1] = w;
                kernels::scale(1.0 / hn, V[k + 1]);
            }
            if (std::abs(g[k + 1]) / bnorm <= opt.tol || hn == 0.0) {
                ++k;
                ++total;
                break;
            }
        }
        for (int i = k - 1; i >= 0; --i) {
            cplx acc = g[i];
            for (int j = i + 1; j < k; ++j) acc -= H[i * m + j] * y[j];
            y[i] = acc / H[i * m + i];
        }
        std::fill(w.begin(), w.end(), cplx{});
        for (int i = 0; i < k; ++i) kernels::axpy(y[i], V[i], w);
        M(w.data(), z.data());
        kernels::axpy(1.0, z, x);
        res = detail::true_residual(A, b, x, r, bnorm);
    }
    return {total, res, res <= opt.tol};
}

}  // namespace homlab::krylov
