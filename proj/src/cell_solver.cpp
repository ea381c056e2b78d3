#include "homlab/cell_solver.hpp"

#include <algorithm>
#include <memory>

#include "homlab/error.hpp"
#include "homlab/krylov.hpp"

namespace homlab {

CMat CorrectorField::sample(std::size_t i) const {
    CMat L(n, m);
    for (int r = 0; r < n; ++r) {
        for (int c = 0; c < m; ++c) L(r, c) = data[(i * n + r) * m + c];
    }
    return L;
}

CMat CorrectorField::mean() const {
    CMat acc = CMat::Zero(n, m);
    const std::size_t P = grid.points();
    for (std::size_t i = 0; i < P; ++i) acc += sample(i);
    return acc / static_cast<double>(P);
}

bool CorrectorField::is_zero() const {
    return std::all_of(data.begin(), data.end(), [](const cplx& v) { return v == cplx{}; });
}

CorrectorField solve_cell_problem(const CoefficientField& g, const Symbol& sym,
                                  const CellSolveOptions& opt) {
    g.validate();
    const int d = g.d();
    const int n = sym.n();
    const int m = sym.m();
    const TorusGrid cell = TorusGrid::cell(d, g.cell_n());
    const std::size_t P = cell.points();

    auto gp = std::make_shared<const CoefficientField>(g);
    const EllipticOperator op(gp, sym, cell, opt.dealias);

    // Per-mode inverse of b^* <g> b; the k = 0 block (zero) is left at zero.
    const CMat gbar = g.mean();
    const auto prec_blocks = mode_blocks(cell, n, [&](const std::array<double, 3>& xi) {
        const CMat b = sym.at(xi);
        const CMat M = b.adjoint() * gbar * b;
        if (M.norm() == 0.0) return CMat(CMat::Zero(n, n));
        return CMat(M.inverse());
    });

    CorrectorField out{cell, n, m, std::vector<cplx>(P * n * m), 0, 0.0};
    std::vector<krylov::Result> results(m);
    std::vector<CVec> columns(m, CVec(P * n));

#pragma omp parallel for
    for (int j = 0; j < m; ++j) {
        // rhs = -b(D)^* g e_j in Fourier space.
        CVec gej(P * m);
        for (std::size_t p = 0; p < P; ++p) {
            for (int r = 0; r < m; ++r) gej[r * P + p] = g.data()[(p * m + r) * m + j];
        }
        forward_inplace(cell, m, gej.data());
        CVec rhs(P * n);
        kernels::apply_symbol(cell, sym.view(), gej.data(), rhs.data(), true);
        kernels::scale(-1.0, rhs);

        auto A = [&](const cplx* in, cplx* o) { op.apply_fourier(in, o); };
        auto M = [&](const cplx* in, cplx* o) {
            kernels::multiply_blocks(cell, n, prec_blocks, in, o);
        };
        CVec& x = columns[j];
        results[j] = krylov::pcg(A, M, rhs, x, {opt.tol, opt.max_iters, 0});
        inverse_inplace(cell, n, x.data());
    }

    for (int j = 0; j < m; ++j) {
        if (!results[j].converged) {
            throw NoConvergence("cell problem column " + std::to_string(j) + " did not converge",
                                results[j].iterations, results[j].residual);
        }
        out.iterations = std::max(out.iterations, results[j].iterations);
        out.residual = std::max(out.residual, results[j].residual);
        for (std::size_t p = 0; p < P; ++p) {
            for (int r = 0; r < n; ++r) out.data[(p * n + r) * m + j] = columns[j][r * P + p];
        }
    }
    return out;
}

EffectiveMatrix effective_matrix(const CorrectorField& Lam, const CoefficientField& g,
                                 const Symbol& sym) {
    const int n = Lam.n;
    const int m = Lam.m;
    const TorusGrid& cell = Lam.grid;
    if (g.cell_n() != cell.N || g.m() != m || sym.n() != n) {
        throw GridMismatch("corrector, coefficient and symbol do not match");
    }
    const std::size_t P = cell.points();
    CMat g0 = CMat::Zero(m, m);
    CVec col(P * n), bcol(P * m);
    for (int j = 0; j < m; ++j) {
        for (std::size_t p = 0; p < P; ++p) {
            for (int r = 0; r < n; ++r) col[r * P + p] = Lam.data[(p * n + r) * m + j];
        }
        forward_inplace(cell, n, col.data());
        kernels::apply_symbol(cell, sym.view(), col.data(), bcol.data(), false);
        inverse_inplace(cell, m, bcol.data());
        for (std::size_t p = 0; p < P; ++p) {
            Eigen::VectorXcd w(m);
            for (int r = 0; r < m; ++r) w(r) = bcol[r * P + p];
            w(j) += 1.0;
            g0.col(j) += g.sample(p) * w;
        }
    }
    g0 /= static_cast<double>(P);

    EffectiveMatrix out;
    out.hermitian_defect = (g0 - g0.adjoint()).norm();
    out.g0 = 0.5 * (g0 + g0.adjoint());

    for (const auto& theta : sample_directions(sym.d(), 64)) {
        const CMat b = sym.at(theta);
        Eigen::SelfAdjointEigenSolver<CMat> es(CMat(b.adjoint() * out.g0 * b), Eigen::EigenvaluesOnly);
        if (!(es.eigenvalues().minCoeff() > 0.0)) {
            throw NotPositive("effective symbol is not positive definite");
        }
    }
    return out;
}

EffectiveMatrix homogenize(const CoefficientField& g, const Symbol& sym, const CellSolveOptions& opt) {
    return effective_matrix(solve_cell_problem(g, sym, opt), g, sym);
}

}  // namespace homlab
