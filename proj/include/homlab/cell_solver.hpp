#pragma once

#include "homlab/operators.hpp"

namespace homlab {

struct CellSolveOptions {
    double tol = 1e-10;
    int max_iters = 2000;
    bool dealias = false;
};

/// Mean-zero periodic n x m solution Lambda of b(D)^* g (b(D) Lambda + 1_m) = 0,
/// one column lambda_j per unit vector e_j, sampled on the unit cell.
struct CorrectorField {
    TorusGrid grid;
    int n = 1;
    int m = 1;
    std::vector<cplx> data;  // [sample][row][col]
    int iterations = 0;      // max over columns
    double residual = 0.0;   // max relative residual over columns

    CMat sample(std::size_t i) const;
    CMat mean() const;
    bool is_zero() const;
    kernels::CellMatrixView view() const { return {grid.N, n, m, data}; }
};

/// PCG on the mean-zero subspace, preconditioned per mode by b^* <g> b.
/// Throws NoConvergence when a column misses `tol`.
CorrectorField solve_cell_problem(const CoefficientField& g, const Symbol& sym,
                                  const CellSolveOptions& opt = {});

/// g0 = <g (b(D) Lambda + 1_m)>. Throws NotPositive if b(theta)^* g0 b(theta) is not
/// positive definite on the sampled unit directions.
EffectiveMatrix effective_matrix(const CorrectorField& Lam, const CoefficientField& g,
                                 const Symbol& sym);

/// Convenience: solve the cell problem and assemble g0.
EffectiveMatrix homogenize(const CoefficientField& g, const Symbol& sym,
                           const CellSolveOptions& opt = {});

}  // namespace homlab
