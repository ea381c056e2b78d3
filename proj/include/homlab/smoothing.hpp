#pragma once

#include <cstdint>
#include <memory>

#include "homlab/cell_solver.hpp"
#include "homlab/resolvent.hpp"

namespace homlab {

/// Steklov smoothing (S_eps u)(x) = int_{[0,1)^d} u(x - eps z) dz as the Fourier
/// multiplier s(k) = prod_j exp(-i xi_j eps / 2) sinc(xi_j eps / 2).
/// A disabled multiplier is the identity (s = 1).
struct SmoothingMultiplier {
    TorusGrid grid;
    double eps = 1.0;
    bool enabled = true;
    std::vector<cplx> s;

    static SmoothingMultiplier make(const TorusGrid& grid, bool enabled = true);
};

Field apply_S_eps(const SmoothingMultiplier& sm, const Field& f);

/// Owning periodic rows x cols matrix factor on the unit cell, multiplied in as f^eps.
struct PeriodicFactor {
    int d = 1;
    int cell_n = 1;
    int rows = 1;
    int cols = 1;
    std::vector<cplx> data;  // [sample][row][col]

    static PeriodicFactor from(const CoefficientField& g);
    static PeriodicFactor from(const CorrectorField& Lam);
    /// Scalar factor from a function on [0,1)^d.
    static PeriodicFactor scalar(int d, int cell_n,
                                 const std::function<cplx(const std::array<double, 3>&)>& fn);

    /// (cell mean of the squared Frobenius norm)^{1/2}.
    double l2_norm() const;
    kernels::CellMatrixView view() const { return {cell_n, rows, cols, data}; }
};

/// Power-iteration estimate of ||[f^eps] S_eps||_{L2 -> L2}.
double multiplied_smoothing_bound(const PeriodicFactor& f, const SmoothingMultiplier& sm,
                                  std::uint64_t seed = 7, double tol_rel = 1e-8, int max_iters = 500);

/// K(eps; zeta) = [Lambda^eps] S_eps b(D) (A0 - zeta)^{-1} and the parabolic
/// corrector [Lambda^eps] S_eps b(D) exp(-t A0), with their adjoints, on Fourier
/// coefficients of the fine grid.
class CorrectorOperator {
public:
    CorrectorOperator(std::shared_ptr<const CorrectorField> Lam,
                      std::shared_ptr<const EffectiveOperator> A0, SmoothingMultiplier sm);

    const TorusGrid& grid() const { return A0_->grid(); }
    const CorrectorField& corrector() const { return *Lam_; }
    const SmoothingMultiplier& smoothing() const { return sm_; }

    void elliptic(cplx zeta, const cplx* f, cplx* out) const;
    void elliptic_adjoint(cplx zeta, const cplx* h, cplx* out) const;
    void parabolic(double t, const cplx* f, cplx* out) const;
    void parabolic_adjoint(double t, const cplx* h, cplx* out) const;

private:
    // out = [Lambda^eps] S_eps b(D) v for n-component coefficients v.
    void chain(const cplx* v, cplx* out) const;
    // out = b(D)^* S_eps^* [Lambda^eps]^* h.
    void chain_adjoint(const cplx* h, cplx* out) const;

    std::shared_ptr<const CorrectorField> Lam_;
    std::shared_ptr<const EffectiveOperator> A0_;
    SmoothingMultiplier sm_;
    std::vector<cplx> s_conj_;
};

Field corrector_elliptic(const CorrectorField& Lam, const SmoothingMultiplier& sm,
                         const EffectiveMatrix& g0, const Symbol& sym, const Shift& zeta,
                         const Field& f);
/// Throws InvalidTime unless t > 0.
Field corrector_parabolic(const CorrectorField& Lam, const SmoothingMultiplier& sm,
                          const EffectiveMatrix& g0, const Symbol& sym, double t, const Field& f);

}  // namespace homlab
