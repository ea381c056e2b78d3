#pragma once

// Dense reference for d = 1, scalar gradient symbol, on a grid small enough to
// materialize every operator on Fourier coefficients.

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>

#include "homlab/contour.hpp"
#include "homlab/norms.hpp"

namespace homlab::testing {

struct DenseGaps {
    double apply = 0.0;
    double resolvent = 0.0;
    double expm = 0.0;
    double norm_resolvent = 0.0;
    double norm_semigroup = 0.0;
};

inline double rel(const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    return (a - b).norm() / b.norm();
}

inline Eigen::VectorXcd to_eigen(const cplx* p, std::size_t n) {
    return Eigen::Map<const Eigen::VectorXcd>(p, static_cast<Eigen::Index>(n));
}

/// g(y) = 2 + cos 2 pi y on N = 8 points, eps = 1/2, unit torus.
inline DenseGaps dense_oracle_gaps(int N = 8, int K = 2, double t_exp = 0.5) {
    using Eigen::MatrixXcd;
    using Eigen::VectorXcd;
    const double pi = std::numbers::pi;
    const TorusGrid grid = TorusGrid::make(1, N, K, 1);
    const int ppp = grid.cell_points();
    auto g = std::make_shared<const CoefficientField>(CoefficientField::from_function(
        1, 1, ppp, [&](const std::array<double, 3>& x) {
            return CMat::Constant(1, 1, 2.0 + std::cos(2.0 * pi * x[0]));
        }));

    // Coefficient-space matrices: F maps samples to coefficients.
    MatrixXcd F(N, N), Finv(N, N), G = MatrixXcd::Zero(N, N), Dx = MatrixXcd::Zero(N, N);
    for (int p = 0; p < N; ++p) {
        for (int j = 0; j < N; ++j) {
            const double ang = 2.0 * pi * grid.freq(p) * j / N;
            F(p, j) = std::polar(1.0 / N, -ang);
            Finv(j, p) = std::polar(1.0, ang);
        }
        Dx(p, p) = grid.wavenumber(p);
        G(p, p) = 2.0 + std::cos(2.0 * pi * (p % ppp) / ppp);
    }
    const MatrixXcd A = Dx * F * G * Finv * Dx;

    DenseGaps out;
    ProblemOptions po;
    po.resolvent.tol = 1e-12;
    const HomogenizationProblem pb(g, Symbol::gradient(1), grid, po);

    const Field f = random_field(grid, 1, 11);
    const FourierField Fh = forward(f);
    const VectorXcd fv = to_eigen(Fh.coefs.data(), N);

    CVec buf(N);
    EllipticOperator op(g, Symbol::gradient(1), grid);
    op.apply_fourier(Fh.coefs.data(), buf.data());
    out.apply = rel(to_eigen(buf.data(), N), A * fv);

    const Shift z = Shift::polar(1.0, 3.0 * pi / 4.0);
    const MatrixXcd I = MatrixXcd::Identity(N, N);
    pb.solver().solve_fourier(z.zeta, Fh.coefs.data(), buf.data());
    out.resolvent = rel(to_eigen(buf.data(), N), (A - z.zeta * I).lu().solve(fv));

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(A);
    auto dense_exp = [&](double t) {
        return MatrixXcd(es.eigenvectors() * (-t * es.eigenvalues().array()).exp().matrix().asDiagonal() *
                         es.eigenvectors().adjoint());
    };
    const Field u = expm_contour(pb.solver(), t_exp, f, build_contour(t_exp));
    const FourierField Uh = forward(u);
    out.expm = rel(to_eigen(Uh.coefs.data(), N), dense_exp(t_exp) * fv);

    const double g0 = pb.g0().g0(0, 0).real();
    MatrixXcd A0 = MatrixXcd::Zero(N, N);
    for (int p = 0; p < N; ++p) A0(p, p) = g0 * Dx(p, p) * Dx(p, p);
    NormOptions no;
    no.tol_rel = 1e-6;
    no.max_iters = 2000;

    const MatrixXcd Er = (A - z.zeta * I).inverse() - (A0 - z.zeta * I).inverse();
    const double sr = Eigen::JacobiSVD<MatrixXcd>(Er).singularValues()(0);
    out.norm_resolvent = std::abs(op_norm(pb.resolvent_error(z.zeta, false, nullptr), no).value - sr) / sr;

    MatrixXcd E0 = MatrixXcd::Zero(N, N);
    for (int p = 0; p < N; ++p) E0(p, p) = std::exp(-t_exp * A0(p, p));
    const MatrixXcd Es = dense_exp(t_exp) - E0;
    const double ss = Eigen::JacobiSVD<MatrixXcd>(Es).singularValues()(0);
    out.norm_semigroup = std::abs(op_norm(pb.semigroup_error(t_exp, false, nullptr), no).value - ss) / ss;
    return out;
}

}  // namespace homlab::testing
