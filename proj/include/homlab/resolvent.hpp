#pragma once

#include <memory>

#include "homlab/cell_solver.hpp"
#include "homlab/operators.hpp"

namespace homlab {

/// Sector weight: 1/|sin phi| for phi in (0, pi/2) u (3pi/2, 2pi), 1 on [pi/2, 3pi/2].
/// Throws InvalidAngle outside (0, 2pi).
double c_of_phi(double phi);

/// Spectral parameter zeta off [0, inf) with phi = arg zeta in (0, 2pi).
struct Shift {
    cplx zeta;
    double phi;
    double c_phi;

    /// Throws InvalidAngle when zeta lies on [0, inf).
    static Shift from(cplx zeta);
    static Shift polar(double modulus, double phi);
};

/// Worst-case diagnostics accumulated over many solves.
struct SolverStats {
    int iters_max = 0;
    double residual_max = 0.0;
    long solves = 0;

    void record(int iterations, double residual);
    void merge(const SolverStats& other);
};

enum class KrylovMethod { bicgstab, gmres };

struct ResolventOptions {
    double tol = 1e-10;
    int max_iters = 2000;
    KrylovMethod method = KrylovMethod::bicgstab;
};

/// Iterative (A_eps - zeta)^{-1}, right-preconditioned by the exact resolvent of
/// the constant-coefficient operator built from the cell average of g.
class ResolventSolver {
public:
    explicit ResolventSolver(std::shared_ptr<const EllipticOperator> op, ResolventOptions opt = {});

    const EllipticOperator& op() const { return *op_; }
    const ResolventOptions& options() const { return opt_; }

    /// u = (A_eps - zeta)^{-1} f on n-component Fourier coefficients. Throws
    /// NoConvergence when neither BiCGStab nor the GMRES fallback meets tol.
    void solve_fourier(cplx zeta, const cplx* f, cplx* u, SolverStats* stats = nullptr) const;
    Field solve(const Field& f, const Shift& zeta, SolverStats* stats = nullptr) const;

private:
    std::shared_ptr<const EllipticOperator> op_;
    ResolventOptions opt_;
    ModeSpectrum precond_;
};

/// Constant-coefficient effective operator A0 = b(D)^* g0 b(D) on a grid, with
/// every function of it evaluated exactly per mode.
class EffectiveOperator {
public:
    EffectiveOperator(const TorusGrid& grid, Symbol sym, EffectiveMatrix g0);

    const TorusGrid& grid() const { return spectrum_.grid(); }
    const Symbol& symbol() const { return sym_; }
    const EffectiveMatrix& g0() const { return g0_; }
    const ModeSpectrum& spectrum() const { return spectrum_; }

    void apply_fourier(const cplx* in, cplx* out) const;
    /// Throws SingularBlock if some M(k) - zeta is numerically singular.
    void resolvent_fourier(cplx zeta, const cplx* f, cplx* u) const;
    void exp_fourier(double t, const cplx* f, cplx* u) const;

private:
    Symbol sym_;
    EffectiveMatrix g0_;
    ModeSpectrum spectrum_;
};

Field solve_resolvent_A_eps(const ResolventSolver& solver, const Field& f, const Shift& zeta,
                            SolverStats* stats = nullptr);
Field solve_resolvent_A0(const EffectiveMatrix& g0, const Symbol& sym, const Field& f,
                         const Shift& zeta);

}  // namespace homlab
