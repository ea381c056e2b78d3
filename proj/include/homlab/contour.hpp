#pragma once

#include <functional>
#include <vector>

#include "homlab/resolvent.hpp"

namespace homlab {

/// Quadrature on gamma_t = t^{-1} gamma, where gamma is the arc {rho e^{i phi}:
/// pi/4 <= phi <= 7pi/4} joined to the rays {r e^{+-i pi/4}: rho <= r <= R}.
///
/// Nodes are stored in traversal order: upper ray inward, arc, lower ray outward.
/// The lower ray and the lower half of the arc are exact conjugates of the upper
/// ones. Weights carry d(zeta) including orientation.
struct Contour {
    double t = 1.0;
    int n_arc = 0;
    int n_ray = 0;
    double R = 0.0;
    double arc_radius = 1.0;
    std::vector<cplx> eta;       // unscaled nodes
    std::vector<cplx> d_eta;     // unscaled weights
    std::vector<cplx> nodes;     // eta / t
    std::vector<cplx> weights;   // d_eta / t

    std::size_t size() const { return nodes.size(); }
};

/// R = sqrt(2) ln(2 sqrt(2) / tol), where the neglected tail of int |e^{-eta}| |d eta| is <= tol.
double truncation_radius(double tol);

/// Gauss-Legendre nodes and weights on [-1, 1], exactly antisymmetric.
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

/// Gauss-Legendre in phi on the arc and composite Gauss-Legendre on each ray,
/// with panels [rho, 2 rho], [2 rho, 4 rho], ... ending at R.
/// Throws InvalidTime if t <= 0 and ConfigInvalid if n_arc < 8 or n_ray < 8.
Contour build_contour(double t, int n_arc = 64, int n_ray = 128, double tol = 1e-12,
                      double arc_radius = 1.0);

/// Writes g(zeta_j) into out (length len) for node j.
using NodeFn = std::function<void(std::size_t j, cplx zeta, cplx* out)>;

/// out = -(1/2 pi i) sum_j w_j e^{-zeta_j t} g(zeta_j). Nodes are evaluated in
/// parallel batches and accumulated in node order. A NoConvergence thrown by a
/// node is rethrown with the node index attached.
void contour_sum(const Contour& c, std::size_t len, const NodeFn& g, cplx* out);

/// e^{-tA_eps} f through the resolvents of A_eps at the contour nodes.
Field expm_contour(const ResolventSolver& solver, double t, const Field& f, const Contour& c,
                   SolverStats* stats = nullptr);
/// The same quadrature applied to the exact resolvent of A0.
Field expm_contour(const EffectiveOperator& A0, double t, const Field& f, const Contour& c);

/// Per-mode e^{-t M(k)} f(k); t = 0 is the identity. Throws InvalidTime if t < 0.
Field expm_spectral_A0(const EffectiveMatrix& g0, const Symbol& sym, double t, const Field& f);

struct FrakC {
    double closed_form = 0.0;
    double quadrature = 0.0;
};

/// closed_form = 3e/2 + 2^{3/2} pi^{-1} e^{-1/sqrt 2}; quadrature = (1/pi) int_gamma |e^{-eta}| |d eta|.
FrakC frak_c(int n_arc = 64, int n_ray = 128);

}  // namespace homlab
