#include "homlab/norms.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <random>

#include "homlab/error.hpp"

namespace homlab {

namespace {

std::span<const cplx> cspan(const CVec& v) { return {v.data(), v.size()}; }

CVec random_coefs(std::size_t len, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    CVec x(len);
    for (auto& v : x) v = {normal(rng), normal(rng)};
    return x;
}

double vnorm(const CVec& v) { return std::sqrt(kernels::norm2(cspan(v))); }

}  // namespace

Field ErrorOperator::apply(const Field& f) const {
    if (!(f.grid == grid) || f.c != in_c) throw GridMismatch("field does not match error operator");
    const FourierField F = homlab::forward(f);
    FourierField U(grid, out_c);
    forward(F.coefs.data(), U.coefs.data());
    return inverse(U);
}

Field ErrorOperator::apply_adjoint(const Field& h) const {
    if (!(h.grid == grid) || h.c != out_c) throw GridMismatch("field does not match error operator");
    const FourierField H = homlab::forward(h);
    FourierField U(grid, in_c);
    adjoint(H.coefs.data(), U.coefs.data());
    return inverse(U);
}

NormEstimate op_norm(const ErrorOperator& E, const NormOptions& opt) {
    NormEstimate est;
    est.seed = opt.seed;
    CVec x = random_coefs(E.in_len(), opt.seed);
    CVec y(E.out_len()), z(E.in_len());
    kernels::scale(1.0 / vnorm(x), x);
    E.forward(x.data(), y.data());

    if (opt.check_adjoint) {
        CVec h = random_coefs(E.out_len(), opt.seed ^ 0x9e3779b97f4a7c15ULL);
        kernels::scale(1.0 / vnorm(h), h);
        E.adjoint(h.data(), z.data());
        const cplx lhs = kernels::dot(cspan(y), cspan(h));
        const cplx rhs = kernels::dot(cspan(x), cspan(z));
        const double scale = std::max({E.scale, vnorm(y), vnorm(z)});
        if (std::abs(lhs - rhs) > opt.adjoint_tol * std::max(scale, 1e-300)) {
            throw AdjointMismatch(E.descriptor + ": |<Ef,h> - <f,E*h>| = " +
                                  std::to_string(std::abs(lhs - rhs)) + " exceeds " +
                                  std::to_string(opt.adjoint_tol * scale));
        }
    }

    double prev = -1.0;
    for (int it = 1; it <= opt.max_iters; ++it) {
        if (it > 1) E.forward(x.data(), y.data());
        const double sigma = vnorm(y);
        est.history.push_back(sigma);
        est.iterations = it;
        est.value = std::max(est.value, sigma);
        if (sigma == 0.0 || (prev > 0.0 && std::abs(sigma - prev) <= opt.tol_rel * sigma)) {
            est.converged = true;
            break;
        }
        prev = sigma;
        E.adjoint(y.data(), z.data());
        const double zn = vnorm(z);
        if (zn == 0.0) {
            est.converged = true;
            break;
        }
        std::copy(z.begin(), z.end(), x.begin());
        kernels::scale(1.0 / zn, x);
    }
    return est;
}

ErrorOperator grad_compose(const ErrorOperator& E) {
    const TorusGrid grid = E.grid;
    const int c = E.out_c;
    const int d = grid.d;
    const std::size_t P = grid.points();
    // Wavenumber of every mode along every axis, [axis][mode].
    auto xi = std::make_shared<std::vector<double>>(d * P);
    for (std::size_t p = 0; p < P; ++p) {
        const auto idx = grid.unflatten(p);
        for (int a = 0; a < d; ++a) (*xi)[a * P + p] = grid.wavenumber(idx[a]);
    }
    ErrorOperator G;
    G.grid = grid;
    G.in_c = E.in_c;
    G.out_c = d * c;
    G.descriptor = "D(" + E.descriptor + ")";
    G.scale = E.grad_scale;
    G.forward = [E, xi, c, d, P](const cplx* in, cplx* out) {
        CVec v(P * c);
        E.forward(in, v.data());
        for (int a = 0; a < d; ++a) {
            for (int r = 0; r < c; ++r) {
                cplx* o = out + (a * c + r) * P;
                const cplx* s = v.data() + r * P;
                const double* k = xi->data() + a * P;
                for (std::size_t p = 0; p < P; ++p) o[p] = k[p] * s[p];
            }
        }
    };
    G.adjoint = [E, xi, c, d, P](const cplx* in, cplx* out) {
        CVec w(P * c);
        for (int a = 0; a < d; ++a) {
            for (int r = 0; r < c; ++r) {
                const cplx* s = in + (a * c + r) * P;
                cplx* o = w.data() + r * P;
                const double* k = xi->data() + a * P;
                for (std::size_t p = 0; p < P; ++p) o[p] += k[p] * s[p];
            }
        }
        E.adjoint(w.data(), out);
    };
    return G;
}

HomogenizationProblem::HomogenizationProblem(std::shared_ptr<const CoefficientField> g, Symbol sym,
                                             TorusGrid grid, ProblemOptions opt)
    : g_(std::move(g)), sym_(std::move(sym)), grid_(grid), opt_(opt) {
    if (g_->d() != grid_.d || sym_.d() != grid_.d || g_->m() != sym_.m()) {
        throw GridMismatch("coefficient, symbol and grid disagree on d or m");
    }
    if (g_->cell_n() % grid_.cell_points() != 0) {
        throw GridMismatch("coefficient resolution " + std::to_string(g_->cell_n()) +
                           " is not a multiple of the samples per cell " +
                           std::to_string(grid_.cell_points()));
    }
    grid_.check_memory(sym_.m() * 4, kDefaultMaxEntries);
    auto Lam = std::make_shared<CorrectorField>(solve_cell_problem(*g_, sym_, opt_.cell));
    EffectiveMatrix g0 = effective_matrix(*Lam, *g_, sym_);
    Lam_ = Lam;
    A0_ = std::make_shared<const EffectiveOperator>(grid_, sym_, std::move(g0));
    Aeps_ = std::make_shared<const EllipticOperator>(g_, sym_, grid_, opt_.cell.dealias);
    solver_ = std::make_unique<ResolventSolver>(Aeps_, opt_.resolvent);
    K_ = std::make_unique<CorrectorOperator>(Lam_, A0_, SmoothingMultiplier::make(grid_, opt_.smoothing));
}

ErrorOperator HomogenizationProblem::resolvent_error(cplx zeta, bool corrected, SolverStats* stats) const {
    const Shift shift = Shift::from(zeta);
    const std::size_t len = grid_.points() * sym_.n();
    const double eps = grid_.eps();
    ErrorOperator E;
    E.grid = grid_;
    E.in_c = E.out_c = sym_.n();
    E.descriptor = corrected ? "R_eps - R_0 - eps K" : "R_eps - R_0";
    E.scale = shift.c_phi / std::abs(zeta);
    E.grad_scale = shift.c_phi / std::sqrt(std::abs(zeta));
    auto apply = [this, len, eps, corrected, stats](cplx z, bool adj, const cplx* f, cplx* out) {
        solver_->solve_fourier(z, f, out, stats);
        CVec v(len);
        A0_->resolvent_fourier(z, f, v.data());
        kernels::axpy(-1.0, cspan(v), std::span<cplx>(out, len));
        if (!corrected) return;
        if (adj) {
            K_->elliptic_adjoint(std::conj(z), f, v.data());
        } else {
            K_->elliptic(z, f, v.data());
        }
        kernels::axpy(-eps, cspan(v), std::span<cplx>(out, len));
    };
    E.forward = [apply, zeta](const cplx* f, cplx* out) { apply(zeta, false, f, out); };
    E.adjoint = [apply, zeta](const cplx* h, cplx* out) { apply(std::conj(zeta), true, h, out); };
    return E;
}

ErrorOperator HomogenizationProblem::semigroup_error(double t, bool corrected, SolverStats* stats) const {
    if (!(t > 0.0)) throw InvalidTime("semigroup error needs t > 0");
    auto contour = std::make_shared<const Contour>(build_contour(t, opt_.n_arc, opt_.n_ray, opt_.contour_tol));
    const std::size_t len = grid_.points() * sym_.n();
    const double eps = grid_.eps();
    ErrorOperator E;
    E.grid = grid_;
    E.in_c = E.out_c = sym_.n();
    E.descriptor = corrected ? "exp(-tA_eps) - exp(-tA0) - eps Kt" : "exp(-tA_eps) - exp(-tA0)";
    E.scale = 1.0;
    E.grad_scale = 1.0 / std::sqrt(t);
    // The quadrature of the resolvent difference is Hermitian (mirrored nodes),
    // so forward and adjoint share it.
    auto apply = [this, contour, len, eps, t, corrected, stats](bool adj, const cplx* f, cplx* out) {
        std::vector<SolverStats> node_stats(contour->size());
        contour_sum(*contour, len,
                    [&](std::size_t j, cplx zeta, cplx* o) {
                        solver_->solve_fourier(zeta, f, o, &node_stats[j]);
                        CVec v(len);
                        A0_->resolvent_fourier(zeta, f, v.data());
                        kernels::axpy(-1.0, cspan(v), std::span<cplx>(o, len));
                    },
                    out);
        if (stats) {
            for (const auto& s : node_stats) stats->merge(s);
        }
        if (!corrected) return;
        CVec v(len);
        if (adj) {
            K_->parabolic_adjoint(t, f, v.data());
        } else {
            K_->parabolic(t, f, v.data());
        }
        kernels::axpy(-eps, cspan(v), std::span<cplx>(out, len));
    };
    E.forward = [apply](const cplx* f, cplx* out) { apply(false, f, out); };
    E.adjoint = [apply](const cplx* h, cplx* out) { apply(true, h, out); };
    return E;
}

bool is_elliptic(const std::string& m) { return m.rfind("res_", 0) == 0; }

double paper_factor(const std::string& m, double eps, double t, const Shift* zeta) {
    if (is_elliptic(m)) {
        if (!zeta) throw ConfigInvalid("elliptic metric " + m + " needs zeta");
        const double c2 = zeta->c_phi * zeta->c_phi;
        const double az = std::abs(zeta->zeta);
        if (m == metric::res_diff || m == metric::res_corrected) return c2 * eps / std::sqrt(az);
        if (m == metric::res_grad_corrected) return c2 * eps;
        if (m == metric::res_grad_diff) return 1.0;
    } else {
        if (m == metric::semigroup_diff) return eps / std::sqrt(t + eps * eps);
        if (m == metric::semigroup_grad_corrected) return eps / t;
        if (m == metric::semigroup_corrected) return eps / std::sqrt(t);
        if (m == metric::semigroup_grad_diff) return 1.0;
    }
    throw ConfigInvalid("unknown metric " + m);
}

std::vector<MetricValue> error_suite(const HomogenizationProblem& problem, const SuitePoint& point,
                                     const SuiteOptions& opt) {
    if (point.zeta.has_value() == point.t.has_value()) {
        throw ConfigInvalid("a suite point needs exactly one of zeta and t");
    }
    struct Spec {
        const char* name;
        bool corrected;
        bool grad;
    };
    std::vector<Spec> specs;
    if (point.zeta) {
        specs = {{metric::res_diff, false, false},
                 {metric::res_grad_corrected, true, true},
                 {metric::res_corrected, true, false}};
        if (opt.gradient_diff) specs.push_back({metric::res_grad_diff, false, true});
    } else {
        if (!(*point.t > 0.0)) throw InvalidTime("suite point needs t > 0");
        specs = {{metric::semigroup_diff, false, false},
                 {metric::semigroup_grad_corrected, true, true},
                 {metric::semigroup_corrected, true, false}};
        if (opt.gradient_diff) specs.push_back({metric::semigroup_grad_diff, false, true});
    }

    std::vector<MetricValue> out;
    for (const Spec& s : specs) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), s.name) == opt.only.end()) {
            continue;
        }
        MetricValue mv;
        mv.metric = s.name;
        const auto t0 = std::chrono::steady_clock::now();
        ErrorOperator E = point.zeta ? problem.resolvent_error(point.zeta->zeta, s.corrected, &mv.stats)
                                     : problem.semigroup_error(*point.t, s.corrected, &mv.stats);
        if (s.grad) E = grad_compose(E);
        mv.norm = op_norm(E, opt.norm);
        mv.value = mv.norm.value;
        mv.paper_factor = paper_factor(s.name, problem.eps(), point.t.value_or(0.0),
                                       point.zeta ? &*point.zeta : nullptr);
        if (opt.timing) {
            mv.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        }
        out.push_back(std::move(mv));
    }
    return out;
}

}  // namespace homlab
