#pragma once

#include <Eigen/Dense>

#include <array>
#include <functional>
#include <memory>
#include <vector>

#include "homlab/kernels.hpp"
#include "homlab/spectral.hpp"

namespace homlab {

using CMat = Eigen::MatrixXcd;

/// Constant m x n matrices b_1..b_d of the first-order operator b(D) = sum_l b_l D_l.
class Symbol {
public:
    Symbol(int d, std::vector<CMat> b);

    /// b(D) = grad for scalar fields: m = d, n = 1, b_l = e_l.
    static Symbol gradient(int d);
    /// d = 1, m = n = 1, b(D) = D.
    static Symbol scalar();
    /// Plane linear elasticity in d = 2: m = 3 strain components, n = 2.
    static Symbol elasticity2d();

    int d() const { return d_; }
    int m() const { return m_; }
    int n() const { return n_; }
    const CMat& b(int l) const { return b_[l]; }

    /// b(xi) = sum_l b_l xi_l.
    CMat at(const std::array<double, 3>& xi) const;

    kernels::SymbolView view() const { return {d_, m_, n_, flat_}; }

private:
    int d_;
    int m_;
    int n_;
    std::vector<CMat> b_;
    std::vector<cplx> flat_;
};

struct EllipticityBounds {
    double alpha0 = 0.0;
    double alpha1 = 0.0;
};

/// alpha0/alpha1 = extreme eigenvalues of b(theta)^* b(theta) over sampled unit
/// directions. Throws RankDeficient when alpha0 <= 1e-10.
EllipticityBounds check_rank_condition(const Symbol& sym, int n_dirs);

/// Unit directions sampled for ellipticity checks (uniform angular grid).
std::vector<std::array<double, 3>> sample_directions(int d, int n_dirs);

/// Periodic m x m Hermitian matrix function sampled on the unit cell.
class CoefficientField {
public:
    CoefficientField(int d, int m, int cell_n, std::vector<cplx> data);

    /// Samples fn at x_i = i / cell_n on [0,1)^d.
    static CoefficientField from_function(int d, int m, int cell_n,
                                          const std::function<CMat(const std::array<double, 3>&)>& fn);
    static CoefficientField constant(int d, const CMat& value, int cell_n);

    int d() const { return d_; }
    int m() const { return m_; }
    int cell_n() const { return cell_n_; }
    std::size_t samples() const { return data_.size() / (m_ * m_); }
    CMat sample(std::size_t i) const;
    const std::vector<cplx>& data() const { return data_; }

    /// Cell average of g.
    CMat mean() const;
    /// Extreme eigenvalues over samples; throws NotPositive unless every sample
    /// is Hermitian to 1e-12 and positive definite.
    std::pair<double, double> validate() const;
    /// True when all samples coincide (to 1e-14).
    bool is_constant() const;

    kernels::CellMatrixView view() const { return {cell_n_, m_, m_, data_}; }

private:
    int d_;
    int m_;
    int cell_n_;
    std::vector<cplx> data_;
};

/// Effective matrix g0 (m x m). `hermitian_defect` records ||g0 - g0^*|| before
/// the stored value was replaced by its Hermitian part.
struct EffectiveMatrix {
    CMat g0;
    double hermitian_defect = 0.0;
};

/// Per-mode n x n blocks, [mode][row][col], built from a function of the wavenumber.
std::vector<cplx> mode_blocks(const TorusGrid& grid, int n,
                              const std::function<CMat(const std::array<double, 3>&)>& fn);

/// M(k) = b(xi_k)^* g b(xi_k) for a constant matrix g.
std::vector<cplx> constant_symbol_blocks(const TorusGrid& grid, const Symbol& sym, const CMat& g);

/// Per-mode Hermitian eigendecompositions of M(k) = b(xi_k)^* G b(xi_k) for a
/// constant Hermitian G, so any function of the constant-coefficient operator
/// b(D)^* G b(D) acts exactly, mode by mode.
class ModeSpectrum {
public:
    ModeSpectrum(const TorusGrid& grid, const Symbol& sym, const CMat& G);

    const TorusGrid& grid() const { return grid_; }
    int n() const { return n_; }
    /// Eigenvalues of M(k), ascending, [mode][i].
    const std::vector<double>& eigenvalues() const { return lambda_; }

    /// out(k) = Q_k diag(fn(lambda)) Q_k^* in(k) on n-component coefficients.
    template <class Fn>
    void apply(Fn&& fn, const cplx* in, cplx* out) const;

    /// Smallest |lambda - zeta| over all modes.
    double distance_to(cplx zeta) const;

private:
    TorusGrid grid_;
    int n_;
    std::vector<double> lambda_;
    std::vector<cplx> Q_;  // [mode][row][col], empty when n == 1
};

template <class Fn>
void ModeSpectrum::apply(Fn&& fn, const cplx* in, cplx* out) const {
    const auto P = static_cast<std::ptrdiff_t>(grid_.points());
    const int n = n_;
    if (n == 1) {
        kernels::for_range(kernels::worth_threads(P, 2048), P,
                           [&](std::ptrdiff_t p) { out[p] = fn(lambda_[p]) * in[p]; });
        return;
    }
    kernels::for_range(kernels::worth_threads(P, 512), P, [&](std::ptrdiff_t p) {
        const cplx* Q = Q_.data() + p * n * n;
        std::array<cplx, 8> tmp{};
        std::vector<cplx> big;
        cplx* t = tmp.data();
        if (n > 8) {
            big.resize(n);
            t = big.data();
        }
        for (int i = 0; i < n; ++i) {
            cplx acc{};
            for (int r = 0; r < n; ++r) acc += std::conj(Q[r * n + i]) * in[r * P + p];
            t[i] = fn(lambda_[p * n + i]) * acc;
        }
        for (int r = 0; r < n; ++r) {
            cplx acc{};
            for (int i = 0; i < n; ++i) acc += Q[r * n + i] * t[i];
            out[r * P + p] = acc;
        }
    });
}

/// Matrix-free A_eps = b(D)^* g^eps b(D) on a torus grid. Immutable once built.
class EllipticOperator {
public:
    /// Throws GridMismatch unless the samples per eps-cell divide g's cell resolution.
    /// With `dealias`, modes beyond 2/3 of the Nyquist band are dropped after the
    /// coefficient product.
    EllipticOperator(std::shared_ptr<const CoefficientField> g, Symbol sym, TorusGrid grid,
                     bool dealias = false);

    const TorusGrid& grid() const { return grid_; }
    const Symbol& symbol() const { return sym_; }
    const CoefficientField& coefficient() const { return *g_; }
    std::shared_ptr<const CoefficientField> coefficient_ptr() const { return g_; }
    double eps() const { return grid_.eps(); }

    /// out_hat = A_eps in_hat on n-component Fourier coefficients.
    void apply_fourier(const cplx* in, cplx* out) const;
    Field apply(const Field& u) const;

private:
    std::shared_ptr<const CoefficientField> g_;
    Symbol sym_;
    TorusGrid grid_;
    bool dealias_;
};

/// A_eps u (transform, b, inverse, g^eps, transform, b^*, inverse).
/// The oscillation period is taken from u.grid (eps = 1/K).
Field apply_A_eps(const CoefficientField& g, const Symbol& sym, const Field& u);

/// A0 u by exact per-mode multiplication with b(xi)^* g0 b(xi).
Field apply_A0(const EffectiveMatrix& g0, const Symbol& sym, const Field& u);

}  // namespace homlab
