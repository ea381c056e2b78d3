#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "homlab/contour.hpp"
#include "homlab/smoothing.hpp"

namespace homlab {

/// Linear map between Fourier coefficient vectors on one grid. Coefficients are
/// an isometric image of fields (Plancherel), so norms computed here are L2 norms.
struct ErrorOperator {
    using Map = std::function<void(const cplx*, cplx*)>;

    TorusGrid grid;
    int in_c = 1;
    int out_c = 1;
    std::string descriptor;
    Map forward;
    Map adjoint;
    /// Size of the constituent operators; the adjoint check is relative to it.
    /// Zero means "use the measured norms".
    double scale = 0.0;
    /// The same for D E (used by grad_compose).
    double grad_scale = 0.0;

    std::size_t in_len() const { return grid.points() * in_c; }
    std::size_t out_len() const { return grid.points() * out_c; }

    Field apply(const Field& f) const;
    Field apply_adjoint(const Field& h) const;
};

struct NormOptions {
    std::uint64_t seed = 1;
    double tol_rel = 1e-4;
    int max_iters = 200;
    bool check_adjoint = true;
    double adjoint_tol = 1e-8;
};

struct NormEstimate {
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
    std::uint64_t seed = 0;
    std::vector<double> history;
};

/// Power iteration on E^* E from a seeded complex Gaussian start. The estimate
/// after each step is ||E x|| for the current unit x. Throws AdjointMismatch when
/// the initial adjoint check fails; hitting max_iters only clears `converged`.
NormEstimate op_norm(const ErrorOperator& E, const NormOptions& opt = {});

/// D E with D = -i grad, stacking d * out_c components (axis-major).
ErrorOperator grad_compose(const ErrorOperator& E);

/// Everything needed to measure the approximation errors at one eps.
struct ProblemOptions {
    CellSolveOptions cell;
    ResolventOptions resolvent;
    bool smoothing = true;
    int n_arc = 64;
    int n_ray = 128;
    double contour_tol = 1e-12;
};

class HomogenizationProblem {
public:
    /// g is sampled at its own cell resolution, which must be a multiple of the
    /// samples per eps-cell of `grid`. The cell problem is solved at that resolution.
    HomogenizationProblem(std::shared_ptr<const CoefficientField> g, Symbol sym, TorusGrid grid,
                          ProblemOptions opt = {});

    const TorusGrid& grid() const { return grid_; }
    const Symbol& symbol() const { return sym_; }
    const ProblemOptions& options() const { return opt_; }
    const CorrectorField& corrector() const { return *Lam_; }
    const EffectiveMatrix& g0() const { return A0_->g0(); }
    const ResolventSolver& solver() const { return *solver_; }
    const EffectiveOperator& A0() const { return *A0_; }
    const CorrectorOperator& correctors() const { return *K_; }
    double eps() const { return grid_.eps(); }

    /// R_eps(zeta) - R_0(zeta) [- eps K(eps; zeta)].
    ErrorOperator resolvent_error(cplx zeta, bool corrected, SolverStats* stats) const;
    /// e^{-tA_eps} - e^{-tA0} [- eps Kt(eps; t)], the exponentials from the contour
    /// integral of the resolvent difference.
    ErrorOperator semigroup_error(double t, bool corrected, SolverStats* stats) const;

private:
    std::shared_ptr<const CoefficientField> g_;
    Symbol sym_;
    TorusGrid grid_;
    ProblemOptions opt_;
    std::shared_ptr<const CorrectorField> Lam_;
    std::shared_ptr<const EffectiveOperator> A0_;
    std::shared_ptr<const EllipticOperator> Aeps_;
    std::unique_ptr<ResolventSolver> solver_;
    std::unique_ptr<CorrectorOperator> K_;
};

/// Metric names in record order.
namespace metric {
inline constexpr const char* res_diff = "res_diff";
inline constexpr const char* res_grad_corrected = "res_grad_corrected";
inline constexpr const char* res_corrected = "res_corrected";
inline constexpr const char* res_grad_diff = "res_grad_diff";
inline constexpr const char* semigroup_diff = "semigroup_diff";
inline constexpr const char* semigroup_grad_corrected = "semigroup_grad_corrected";
inline constexpr const char* semigroup_corrected = "semigroup_corrected";
inline constexpr const char* semigroup_grad_diff = "semigroup_grad_diff";
}  // namespace metric

/// Predicted scaling of a metric at (eps, t, zeta); c_phi only enters the elliptic ones.
double paper_factor(const std::string& metric, double eps, double t, const Shift* zeta);

bool is_elliptic(const std::string& metric);

struct MetricValue {
    std::string metric;
    double value = 0.0;
    double paper_factor = 0.0;
    NormEstimate norm;
    SolverStats stats;
    double wall_ms = 0.0;
};

struct SuitePoint {
    std::optional<Shift> zeta;
    std::optional<double> t;
};

struct SuiteOptions {
    NormOptions norm;
    /// Also measure the uncorrected gradient errors.
    bool gradient_diff = true;
    /// Restrict to these metrics when non-empty.
    std::vector<std::string> only;
    bool timing = false;
};

/// The elliptic metrics when zeta is set, the parabolic ones when t is set.
std::vector<MetricValue> error_suite(const HomogenizationProblem& problem, const SuitePoint& point,
                                     const SuiteOptions& opt = {});

}  // namespace homlab
