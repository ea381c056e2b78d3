#include "homlab/smoothing.hpp"

#include <cmath>

#include "homlab/error.hpp"
#include "homlab/norms.hpp"

namespace homlab {

SmoothingMultiplier SmoothingMultiplier::make(const TorusGrid& grid, bool enabled) {
    SmoothingMultiplier sm{grid, grid.eps(), enabled, std::vector<cplx>(grid.points(), 1.0)};
    if (!enabled) return sm;
    const int period = grid.L * grid.K;  // frequencies per eps-cell wavelength
    // Per-axis factors, shared by all axes.
    std::vector<cplx> axis(grid.N);
    for (int i = 0; i < grid.N; ++i) {
        const int k = grid.freq(i);
        if (k == 0) {
            axis[i] = 1.0;
        } else if (k % period == 0) {
            axis[i] = 0.0;
        } else {
            const double x = 0.5 * grid.wavenumber(i) * sm.eps;
            axis[i] = std::polar(std::sin(x) / x, -x);
        }
    }
    for (std::size_t p = 0; p < sm.s.size(); ++p) {
        const auto idx = grid.unflatten(p);
        cplx v = 1.0;
        for (int a = 0; a < grid.d; ++a) v *= axis[idx[a]];
        sm.s[p] = v;
    }
    return sm;
}

Field apply_S_eps(const SmoothingMultiplier& sm, const Field& f) {
    if (!(f.grid == sm.grid)) throw GridMismatch("field does not match smoothing grid");
    FourierField F = forward(f);
    kernels::multiply_modes(f.grid, f.c, sm.s, F.coefs.data(), F.coefs.data());
    return inverse(F);
}

PeriodicFactor PeriodicFactor::from(const CoefficientField& g) {
    return {g.d(), g.cell_n(), g.m(), g.m(), g.data()};
}

PeriodicFactor PeriodicFactor::from(const CorrectorField& Lam) {
    return {Lam.grid.d, Lam.grid.N, Lam.n, Lam.m, Lam.data};
}

PeriodicFactor PeriodicFactor::scalar(int d, int cell_n,
                                      const std::function<cplx(const std::array<double, 3>&)>& fn) {
    const TorusGrid cell = TorusGrid::cell(d, cell_n);
    PeriodicFactor f{d, cell_n, 1, 1, std::vector<cplx>(cell.points())};
    for (std::size_t p = 0; p < f.data.size(); ++p) {
        const auto idx = cell.unflatten(p);
        std::array<double, 3> x{};
        for (int a = 0; a < d; ++a) x[a] = static_cast<double>(idx[a]) / cell_n;
        f.data[p] = fn(x);
    }
    return f;
}

double PeriodicFactor::l2_norm() const {
    double acc = 0.0;
    for (const cplx& v : data) acc += std::norm(v);
    const double samples = static_cast<double>(data.size()) / (rows * cols);
    return std::sqrt(acc / samples);
}

double multiplied_smoothing_bound(const PeriodicFactor& f, const SmoothingMultiplier& sm,
                                  std::uint64_t seed, double tol_rel, int max_iters) {
    const TorusGrid& grid = sm.grid;
    if (f.d != grid.d || f.cell_n % grid.cell_points() != 0) {
        throw GridMismatch("factor resolution is not commensurate with the grid");
    }
    const std::size_t P = grid.points();
    std::vector<cplx> s_conj(sm.s.size());
    for (std::size_t p = 0; p < P; ++p) s_conj[p] = std::conj(sm.s[p]);

    ErrorOperator E;
    E.grid = grid;
    E.in_c = f.cols;
    E.out_c = f.rows;
    E.descriptor = "[f^eps] S_eps";
    E.forward = [&, P](const cplx* in, cplx* out) {
        CVec v(P * f.cols);
        kernels::multiply_modes(grid, f.cols, sm.s, in, v.data());
        inverse_inplace(grid, f.cols, v.data());
        kernels::multiply_periodic(grid, f.view(), v.data(), out, false);
        forward_inplace(grid, f.rows, out);
    };
    E.adjoint = [&, P](const cplx* in, cplx* out) {
        CVec v(in, in + P * f.rows);
        inverse_inplace(grid, f.rows, v.data());
        kernels::multiply_periodic(grid, f.view(), v.data(), out, true);
        forward_inplace(grid, f.cols, out);
        kernels::multiply_modes(grid, f.cols, s_conj, out, out);
    };
    NormOptions opt;
    opt.seed = seed;
    opt.tol_rel = tol_rel;
    opt.max_iters = max_iters;
    return op_norm(E, opt).value;
}

CorrectorOperator::CorrectorOperator(std::shared_ptr<const CorrectorField> Lam,
                                     std::shared_ptr<const EffectiveOperator> A0, SmoothingMultiplier sm)
    : Lam_(std::move(Lam)), A0_(std::move(A0)), sm_(std::move(sm)) {
    const TorusGrid& grid = A0_->grid();
    if (!(sm_.grid == grid)) throw GridMismatch("smoothing grid differs from operator grid");
    if (Lam_->grid.d != grid.d || Lam_->grid.N % grid.cell_points() != 0) {
        throw GridMismatch("corrector resolution is not commensurate with the grid");
    }
    if (Lam_->n != A0_->symbol().n() || Lam_->m != A0_->symbol().m()) {
        throw GridMismatch("corrector shape does not match the symbol");
    }
    s_conj_.resize(sm_.s.size());
    for (std::size_t p = 0; p < s_conj_.size(); ++p) s_conj_[p] = std::conj(sm_.s[p]);
}

void CorrectorOperator::chain(const cplx* v, cplx* out) const {
    const TorusGrid& grid = A0_->grid();
    const Symbol& sym = A0_->symbol();
    const std::size_t P = grid.points();
    CVec bv(P * sym.m());
    kernels::apply_symbol(grid, sym.view(), v, bv.data(), false);
    kernels::multiply_modes(grid, sym.m(), sm_.s, bv.data(), bv.data());
    inverse_inplace(grid, sym.m(), bv.data());
    kernels::multiply_periodic(grid, Lam_->view(), bv.data(), out, false);
    forward_inplace(grid, sym.n(), out);
}

void CorrectorOperator::chain_adjoint(const cplx* h, cplx* out) const {
    const TorusGrid& grid = A0_->grid();
    const Symbol& sym = A0_->symbol();
    const std::size_t P = grid.points();
    CVec v(h, h + P * sym.n());
    inverse_inplace(grid, sym.n(), v.data());
    CVec w(P * sym.m());
    kernels::multiply_periodic(grid, Lam_->view(), v.data(), w.data(), true);
    forward_inplace(grid, sym.m(), w.data());
    kernels::multiply_modes(grid, sym.m(), s_conj_, w.data(), w.data());
    kernels::apply_symbol(grid, sym.view(), w.data(), out, true);
}

void CorrectorOperator::elliptic(cplx zeta, const cplx* f, cplx* out) const {
    CVec u(grid().points() * A0_->symbol().n());
    A0_->resolvent_fourier(zeta, f, u.data());
    chain(u.data(), out);
}

void CorrectorOperator::elliptic_adjoint(cplx zeta, const cplx* h, cplx* out) const {
    CVec v(grid().points() * A0_->symbol().n());
    chain_adjoint(h, v.data());
    A0_->resolvent_fourier(std::conj(zeta), v.data(), out);
}

void CorrectorOperator::parabolic(double t, const cplx* f, cplx* out) const {
    if (!(t > 0.0)) throw InvalidTime("parabolic corrector needs t > 0");
    CVec u(grid().points() * A0_->symbol().n());
    A0_->exp_fourier(t, f, u.data());
    chain(u.data(), out);
}

void CorrectorOperator::parabolic_adjoint(double t, const cplx* h, cplx* out) const {
    if (!(t > 0.0)) throw InvalidTime("parabolic corrector needs t > 0");
    CVec v(grid().points() * A0_->symbol().n());
    chain_adjoint(h, v.data());
    A0_->exp_fourier(t, v.data(), out);
}

namespace {

CorrectorOperator make_corrector(const CorrectorField& Lam, const SmoothingMultiplier& sm,
                                 const EffectiveMatrix& g0, const Symbol& sym, const Field& f) {
    if (!(f.grid == sm.grid) || f.c != sym.n()) throw GridMismatch("field does not match corrector");
    return CorrectorOperator(std::make_shared<const CorrectorField>(Lam),
                             std::make_shared<const EffectiveOperator>(f.grid, sym, g0), sm);
}

}  // namespace

Field corrector_elliptic(const CorrectorField& Lam, const SmoothingMultiplier& sm,
                         const EffectiveMatrix& g0, const Symbol& sym, const Shift& zeta,
                         const Field& f) {
    const CorrectorOperator K = make_corrector(Lam, sm, g0, sym, f);
    const FourierField F = forward(f);
    FourierField U(f.grid, f.c);
    K.elliptic(zeta.zeta, F.coefs.data(), U.coefs.data());
    return inverse(U);
}

Field corrector_parabolic(const CorrectorField& Lam, const SmoothingMultiplier& sm,
                          const EffectiveMatrix& g0, const Symbol& sym, double t, const Field& f) {
    if (!(t > 0.0)) throw InvalidTime("parabolic corrector needs t > 0");
    const CorrectorOperator K = make_corrector(Lam, sm, g0, sym, f);
    const FourierField F = forward(f);
    FourierField U(f.grid, f.c);
    K.parabolic(t, F.coefs.data(), U.coefs.data());
    return inverse(U);
}

}  // namespace homlab
