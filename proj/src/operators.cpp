#include "homlab/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "homlab/error.hpp"

namespace homlab {

namespace {

CVec& scratch(std::size_t size) {
    thread_local CVec buf;
    if (buf.size() < size) buf.resize(size);
    return buf;
}

std::array<double, 3> wavenumbers(const TorusGrid& grid, std::size_t mode) {
    const auto idx = grid.unflatten(mode);
    std::array<double, 3> xi{};
    for (int a = 0; a < grid.d; ++a) xi[a] = grid.wavenumber(idx[a]);
    return xi;
}

void drop_aliased_modes(const TorusGrid& grid, int c, cplx* data) {
    const std::size_t P = grid.points();
    const int cutoff = grid.N / 3;
    for (std::size_t p = 0; p < P; ++p) {
        const auto idx = grid.unflatten(p);
        bool high = false;
        for (int a = 0; a < grid.d; ++a) high = high || std::abs(grid.freq(idx[a])) > cutoff;
        if (!high) continue;
        for (int j = 0; j < c; ++j) data[j * P + p] = 0.0;
    }
}

}  // namespace

Symbol::Symbol(int d, std::vector<CMat> b) : d_(d), b_(std::move(b)) {
    if (d < 1 || d > 3) throw ConfigInvalid("symbol dimension must be 1, 2 or 3");
    if (static_cast<int>(b_.size()) != d) {
        throw ConfigInvalid("symbol needs exactly d = " + std::to_string(d) + " matrices");
    }
    m_ = static_cast<int>(b_[0].rows());
    n_ = static_cast<int>(b_[0].cols());
    for (const auto& bl : b_) {
        if (bl.rows() != m_ || bl.cols() != n_) throw ConfigInvalid("symbol matrices differ in shape");
    }
    if (m_ < n_) throw ConfigInvalid("symbol requires m >= n");
    flat_.reserve(static_cast<std::size_t>(d * m_ * n_));
    for (const auto& bl : b_) {
        for (int r = 0; r < m_; ++r) {
            for (int c = 0; c < n_; ++c) flat_.push_back(bl(r, c));
        }
    }
}

Symbol Symbol::gradient(int d) {
    std::vector<CMat> b;
    for (int l = 0; l < d; ++l) {
        CMat bl = CMat::Zero(d, 1);
        bl(l, 0) = 1.0;
        b.push_back(bl);
    }
    return Symbol(d, std::move(b));
}

Symbol Symbol::scalar() { return gradient(1); }

Symbol Symbol::elasticity2d() {
    const double h = 1.0 / std::numbers::sqrt2;
    CMat b1 = CMat::Zero(3, 2);
    CMat b2 = CMat::Zero(3, 2);
    b1(0, 0) = 1.0;
    b1(2, 1) = h;
    b2(1, 1) = 1.0;
    b2(2, 0) = h;
    return Symbol(2, {b1, b2});
}

CMat Symbol::at(const std::array<double, 3>& xi) const {
    CMat out = CMat::Zero(m_, n_);
    for (int l = 0; l < d_; ++l) out += xi[l] * b_[l];
    return out;
}

std::vector<std::array<double, 3>> sample_directions(int d, int n_dirs) {
    std::vector<std::array<double, 3>> dirs;
    if (d == 1) {
        dirs.push_back({1.0, 0.0, 0.0});
        dirs.push_back({-1.0, 0.0, 0.0});
    } else if (d == 2) {
        for (int i = 0; i < n_dirs; ++i) {
            const double phi = 2.0 * std::numbers::pi * i / n_dirs;
            dirs.push_back({std::cos(phi), std::sin(phi), 0.0});
        }
    } else {
        // Polar/azimuth grid including both poles.
        const int n_polar = std::max(2, n_dirs / 2);
        for (int i = 0; i <= n_polar; ++i) {
            const double th = std::numbers::pi * i / n_polar;
            const int n_az = (i == 0 || i == n_polar) ? 1 : n_dirs;
            for (int j = 0; j < n_az; ++j) {
                const double ph = 2.0 * std::numbers::pi * j / n_az;
                dirs.push_back({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
            }
        }
    }
    return dirs;
}

EllipticityBounds check_rank_condition(const Symbol& sym, int n_dirs) {
    if (n_dirs < 2 * sym.d()) throw ConfigInvalid("n_dirs must be at least 2d");
    EllipticityBounds out{std::numeric_limits<double>::infinity(), 0.0};
    for (const auto& theta : sample_directions(sym.d(), n_dirs)) {
        const CMat bt = sym.at(theta);
        const CMat gram = bt.adjoint() * bt;
        Eigen::SelfAdjointEigenSolver<CMat> es(gram, Eigen::EigenvaluesOnly);
        out.alpha0 = std::min(out.alpha0, es.eigenvalues().minCoeff());
        out.alpha1 = std::max(out.alpha1, es.eigenvalues().maxCoeff());
    }
    if (out.alpha0 <= 1e-10) {
        throw RankDeficient("symbol violates the full rank condition (alpha0 = " +
                            std::to_string(out.alpha0) + ")");
    }
    return out;
}

CoefficientField::CoefficientField(int d, int m, int cell_n, std::vector<cplx> data)
    : d_(d), m_(m), cell_n_(cell_n), data_(std::move(data)) {
    std::size_t expect = static_cast<std::size_t>(m) * m;
    for (int a = 0; a < d; ++a) expect *= static_cast<std::size_t>(cell_n);
    if (d < 1 || d > 3 || m < 1 || cell_n < 1 || data_.size() != expect) {
        throw ConfigInvalid("coefficient field shape does not match its sample data");
    }
}

CoefficientField CoefficientField::from_function(
    int d, int m, int cell_n, const std::function<CMat(const std::array<double, 3>&)>& fn) {
    const TorusGrid cell = TorusGrid::cell(d, cell_n);
    std::vector<cplx> data;
    data.reserve(cell.points() * m * m);
    for (std::size_t p = 0; p < cell.points(); ++p) {
        const auto idx = cell.unflatten(p);
        std::array<double, 3> x{};
        for (int a = 0; a < d; ++a) x[a] = static_cast<double>(idx[a]) / cell_n;
        const CMat g = fn(x);
        if (g.rows() != m || g.cols() != m) throw ConfigInvalid("coefficient function returned wrong shape");
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) data.push_back(g(r, c));
        }
    }
    return CoefficientField(d, m, cell_n, std::move(data));
}

CoefficientField CoefficientField::constant(int d, const CMat& value, int cell_n) {
    return from_function(d, static_cast<int>(value.rows()), cell_n,
                         [&](const std::array<double, 3>&) { return value; });
}

CMat CoefficientField::sample(std::size_t i) const {
    CMat g(m_, m_);
    for (int r = 0; r < m_; ++r) {
        for (int c = 0; c < m_; ++c) g(r, c) = data_[(i * m_ + r) * m_ + c];
    }
    return g;
}

CMat CoefficientField::mean() const {
    CMat acc = CMat::Zero(m_, m_);
    for (std::size_t i = 0; i < samples(); ++i) acc += sample(i);
    return acc / static_cast<double>(samples());
}

std::pair<double, double> CoefficientField::validate() const {
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t i = 0; i < samples(); ++i) {
        const CMat g = sample(i);
        const double scale = std::max(1.0, g.norm());
        if ((g - g.adjoint()).norm() > 1e-12 * scale) {
            throw NotPositive("coefficient sample " + std::to_string(i) + " is not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<CMat> es(g, Eigen::EigenvaluesOnly);
        lo = std::min(lo, es.eigenvalues().minCoeff());
        hi = std::max(hi, es.eigenvalues().maxCoeff());
    }
    if (!(lo > 0.0)) {
        throw NotPositive("coefficient is not positive definite (min eigenvalue " +
                          std::to_string(lo) + ")");
    }
    return {lo, hi};
}

bool CoefficientField::is_constant() const {
    for (std::size_t i = 1; i < samples(); ++i) {
        for (int e = 0; e < m_ * m_; ++e) {
            if (std::abs(data_[i * m_ * m_ + e] - data_[e]) > 1e-14) return false;
        }
    }
    return true;
}

std::vector<cplx> mode_blocks(const TorusGrid& grid, int n,
                              const std::function<CMat(const std::array<double, 3>&)>& fn) {
    const std::size_t P = grid.points();
    std::vector<cplx> blocks(P * n * n);
    for (std::size_t p = 0; p < P; ++p) {
        const CMat B = fn(wavenumbers(grid, p));
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) blocks[(p * n + r) * n + c] = B(r, c);
        }
    }
    return blocks;
}

std::vector<cplx> constant_symbol_blocks(const TorusGrid& grid, const Symbol& sym, const CMat& g) {
    return mode_blocks(grid, sym.n(), [&](const std::array<double, 3>& xi) {
        const CMat b = sym.at(xi);
        return CMat(b.adjoint() * g * b);
    });
}

ModeSpectrum::ModeSpectrum(const TorusGrid& grid, const Symbol& sym, const CMat& G)
    : grid_(grid), n_(sym.n()) {
    const std::size_t P = grid.points();
    const int n = n_;
    lambda_.resize(P * n);
    if (n > 1) Q_.resize(P * n * n);
    for (std::size_t p = 0; p < P; ++p) {
        const CMat b = sym.at(wavenumbers(grid, p));
        const CMat M = b.adjoint() * G * b;
        if (n == 1) {
            lambda_[p] = M(0, 0).real();
            continue;
        }
        Eigen::SelfAdjointEigenSolver<CMat> es(M);
        for (int i = 0; i < n; ++i) lambda_[p * n + i] = es.eigenvalues()(i);
        for (int r = 0; r < n; ++r) {
            for (int c = 0; c < n; ++c) Q_[(p * n + r) * n + c] = es.eigenvectors()(r, c);
        }
    }
}

double ModeSpectrum::distance_to(cplx zeta) const {
    double best = std::numeric_limits<double>::infinity();
    for (double l : lambda_) best = std::min(best, std::abs(l - zeta));
    return best;
}

EllipticOperator::EllipticOperator(std::shared_ptr<const CoefficientField> g, Symbol sym,
                                   TorusGrid grid, bool dealias)
    : g_(std::move(g)), sym_(std::move(sym)), grid_(grid), dealias_(dealias) {
    if (g_->d() != grid_.d || sym_.d() != grid_.d) throw GridMismatch("dimension mismatch");
    if (g_->m() != sym_.m()) throw GridMismatch("coefficient size differs from symbol m");
    if (g_->cell_n() % grid_.cell_points() != 0) {
        throw GridMismatch("samples per eps-cell (" + std::to_string(grid_.cell_points()) +
                           ") do not divide the coefficient resolution (" +
                           std::to_string(g_->cell_n()) + ")");
    }
}

void EllipticOperator::apply_fourier(const cplx* in, cplx* out) const {
    const std::size_t P = grid_.points();
    const int m = sym_.m();
    CVec& w = scratch(2 * m * P);
    cplx* bu = w.data();
    cplx* gbu = w.data() + m * P;
    kernels::apply_symbol(grid_, sym_.view(), in, bu, false);
    inverse_inplace(grid_, m, bu);
    kernels::multiply_periodic(grid_, g_->view(), bu, gbu, false);
    forward_inplace(grid_, m, gbu);
    if (dealias_) drop_aliased_modes(grid_, m, gbu);
    kernels::apply_symbol(grid_, sym_.view(), gbu, out, true);
}

Field EllipticOperator::apply(const Field& u) const {
    if (!(u.grid == grid_) || u.c != sym_.n()) throw GridMismatch("field does not match operator");
    FourierField U = forward(u);
    FourierField V(grid_, sym_.n());
    apply_fourier(U.coefs.data(), V.coefs.data());
    return inverse(V);
}

Field apply_A_eps(const CoefficientField& g, const Symbol& sym, const Field& u) {
    auto gp = std::make_shared<const CoefficientField>(g);
    return EllipticOperator(gp, sym, u.grid).apply(u);
}

Field apply_A0(const EffectiveMatrix& g0, const Symbol& sym, const Field& u) {
    if (u.c != sym.n()) throw GridMismatch("field components differ from symbol n");
    const ModeSpectrum spec(u.grid, sym, g0.g0);
    FourierField U = forward(u);
    FourierField V(u.grid, u.c);
    spec.apply([](double l) { return cplx{l}; }, U.coefs.data(), V.coefs.data());
    return inverse(V);
}

}  // namespace homlab
