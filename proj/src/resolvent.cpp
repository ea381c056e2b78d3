#include "homlab/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "homlab/error.hpp"
#include "homlab/krylov.hpp"

namespace homlab {

double c_of_phi(double phi) {
    constexpr double pi = std::numbers::pi;
    if (!(phi > 0.0 && phi < 2.0 * pi)) {
        throw InvalidAngle("phi must lie in (0, 2pi), got " + std::to_string(phi));
    }
    if (phi >= pi / 2 && phi <= 3 * pi / 2) return 1.0;
    return 1.0 / std::abs(std::sin(phi));
}

Shift Shift::from(cplx zeta) {
    double phi = std::arg(zeta);
    if (phi < 0.0) phi += 2.0 * std::numbers::pi;
    if (zeta.imag() == 0.0 && zeta.real() >= 0.0) {
        throw InvalidAngle("zeta lies on [0, inf)");
    }
    return {zeta, phi, c_of_phi(phi)};
}

Shift Shift::polar(double modulus, double phi) {
    if (!(modulus > 0.0)) throw InvalidAngle("|zeta| must be positive");
    const double c = c_of_phi(phi);
    return {std::polar(modulus, phi), phi, c};
}

void SolverStats::record(int iterations, double residual) {
    iters_max = std::max(iters_max, iterations);
    residual_max = std::max(residual_max, residual);
    ++solves;
}

void SolverStats::merge(const SolverStats& other) {
    iters_max = std::max(iters_max, other.iters_max);
    residual_max = std::max(residual_max, other.residual_max);
    solves += other.solves;
}

ResolventSolver::ResolventSolver(std::shared_ptr<const EllipticOperator> op, ResolventOptions opt)
    : op_(std::move(op)),
      opt_(opt),
      precond_(op_->grid(), op_->symbol(), op_->coefficient().mean()) {}

void ResolventSolver::solve_fourier(cplx zeta, const cplx* f, cplx* u, SolverStats* stats) const {
    const std::size_t len = op_->grid().points() * op_->symbol().n();
    auto A = [&](const cplx* in, cplx* out) {
        op_->apply_fourier(in, out);
        kernels::axpy(-zeta, std::span<const cplx>(in, len), std::span<cplx>(out, len));
    };
    auto M = [&](const cplx* in, cplx* out) {
        precond_.apply([zeta](double l) { return 1.0 / (l - zeta); }, in, out);
    };
    const std::span<const cplx> b(f, len);
    CVec x(len);
    M(f, x.data());

    const krylov::Options kopt{opt_.tol, opt_.max_iters, 50};
    krylov::Result res = opt_.method == KrylovMethod::bicgstab ? krylov::bicgstab(A, M, b, x, kopt)
                                                               : krylov::gmres(A, M, b, x, kopt);
    int iterations = res.iterations;
    if (!res.converged && opt_.method == KrylovMethod::bicgstab) {
        res = krylov::gmres(A, M, b, x, kopt);
        iterations += res.iterations;
    }
    if (!res.converged) {
        throw NoConvergence("resolvent solve at zeta = (" + std::to_string(zeta.real()) + ", " +
                                std::to_string(zeta.imag()) + ") did not converge",
                            iterations, res.residual);
    }
    if (stats) stats->record(iterations, res.residual);
    std::copy(x.begin(), x.end(), u);
}

Field ResolventSolver::solve(const Field& f, const Shift& zeta, SolverStats* stats) const {
    if (!(f.grid == op_->grid()) || f.c != op_->symbol().n()) {
        throw GridMismatch("field does not match operator");
    }
    FourierField F = forward(f);
    FourierField U(f.grid, f.c);
    solve_fourier(zeta.zeta, F.coefs.data(), U.coefs.data(), stats);
    return inverse(U);
}

EffectiveOperator::EffectiveOperator(const TorusGrid& grid, Symbol sym, EffectiveMatrix g0)
    : sym_(std::move(sym)), g0_(std::move(g0)), spectrum_(grid, sym_, g0_.g0) {}

void EffectiveOperator::apply_fourier(const cplx* in, cplx* out) const {
    spectrum_.apply([](double l) { return cplx{l}; }, in, out);
}

void EffectiveOperator::resolvent_fourier(cplx zeta, const cplx* f, cplx* u) const {
    const double scale = std::max(1.0, std::abs(zeta));
    if (spectrum_.distance_to(zeta) <= 1e-14 * scale) {
        throw SingularBlock("M(k) - zeta is numerically singular");
    }
    spectrum_.apply([zeta](double l) { return 1.0 / (l - zeta); }, f, u);
}

void EffectiveOperator::exp_fourier(double t, const cplx* f, cplx* u) const {
    spectrum_.apply([t](double l) { return cplx{std::exp(-t * l)}; }, f, u);
}

Field solve_resolvent_A_eps(const ResolventSolver& solver, const Field& f, const Shift& zeta,
                            SolverStats* stats) {
    return solver.solve(f, zeta, stats);
}

Field solve_resolvent_A0(const EffectiveMatrix& g0, const Symbol& sym, const Field& f,
                         const Shift& zeta) {
    const EffectiveOperator A0(f.grid, sym, g0);
    FourierField F = forward(f);
    FourierField U(f.grid, f.c);
    A0.resolvent_fourier(zeta.zeta, F.coefs.data(), U.coefs.data());
    return inverse(U);
}

}  // namespace homlab
