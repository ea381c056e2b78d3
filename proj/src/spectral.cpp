#include "homlab/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <string>
#include <tuple>

#include "homlab/error.hpp"
#include "homlab/kernels.hpp"

namespace homlab {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// FFTW planning is not thread-safe; execution with new-array functions is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan get(int d, int N, int sign) {
        std::lock_guard lock(mutex_);
        const auto key = std::make_tuple(d, N, sign);
        if (auto it = plans_.find(key); it != plans_.end()) return it->second;
        std::size_t P = 1;
        std::array<int, 3> dims{};
        for (int a = 0; a < d; ++a) {
            dims[a] = N;
            P *= static_cast<std::size_t>(N);
        }
        auto* buf = fftw_alloc_complex(P);
        fftw_plan plan = fftw_plan_dft(d, dims.data(), buf, buf, sign, FFTW_ESTIMATE);
        fftw_free(buf);
        plans_.emplace(key, plan);
        return plan;
    }

private:
    PlanCache() = default;
    ~PlanCache() {
        for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
    }

    std::mutex mutex_;
    std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void transform(const TorusGrid& grid, int components, cplx* data, int sign) {
    fftw_plan plan = PlanCache::instance().get(grid.d, grid.N, sign);
    const std::size_t P = grid.points();
    for (int j = 0; j < components; ++j) {
        auto* slab = reinterpret_cast<fftw_complex*>(data + j * P);
        fftw_execute_dft(plan, slab, slab);
    }
}

}  // namespace

TorusGrid TorusGrid::make(int d, int N, int K, int L) {
    if (d < 1 || d > 3) throw GridMismatch("dimension must be 1, 2 or 3, got " + std::to_string(d));
    if (!is_power_of_two(N)) throw GridMismatch("N must be a power of two, got " + std::to_string(N));
    if (K < 1 || L < 1) throw GridMismatch("K and L must be positive");
    if (N % (L * K) != 0) {
        throw GridMismatch("L*K = " + std::to_string(L * K) + " does not divide N = " +
                           std::to_string(N));
    }
    if (N / (L * K) < 4) {
        throw GridMismatch("fewer than 4 samples per oscillation period (N=" + std::to_string(N) +
                           ", L*K=" + std::to_string(L * K) + ")");
    }
    return TorusGrid{d, N, K, L};
}

std::size_t TorusGrid::points() const {
    std::size_t P = 1;
    for (int a = 0; a < d; ++a) P *= static_cast<std::size_t>(N);
    return P;
}

double TorusGrid::wavenumber(int index) const {
    return 2.0 * std::numbers::pi * freq(index) / L;
}

std::array<int, 3> TorusGrid::unflatten(std::size_t flat) const {
    std::array<int, 3> idx{};
    for (int a = d - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % N);
        flat /= N;
    }
    return idx;
}

std::size_t TorusGrid::flatten(const std::array<int, 3>& idx) const {
    std::size_t flat = 0;
    for (int a = 0; a < d; ++a) flat = flat * N + static_cast<std::size_t>(idx[a]);
    return flat;
}

void TorusGrid::check_memory(int components, std::size_t max_entries) const {
    const std::size_t need = static_cast<std::size_t>(d) * components * points();
    if (need > max_entries) {
        throw GridMismatch("grid footprint " + std::to_string(need) + " exceeds cap " +
                           std::to_string(max_entries));
    }
}

Field::Field(const TorusGrid& g, int components)
    : grid(g), c(components), values(static_cast<std::size_t>(components) * g.points()) {}

FourierField::FourierField(const TorusGrid& g, int components)
    : grid(g), c(components), coefs(static_cast<std::size_t>(components) * g.points()) {}

cplx& FourierField::coef(const std::array<int, 3>& k, int comp) {
    std::array<int, 3> idx{};
    for (int a = 0; a < grid.d; ++a) idx[a] = ((k[a] % grid.N) + grid.N) % grid.N;
    return coefs[comp * grid.points() + grid.flatten(idx)];
}

const cplx& FourierField::coef(const std::array<int, 3>& k, int comp) const {
    return const_cast<FourierField*>(this)->coef(k, comp);
}

void forward_inplace(const TorusGrid& grid, int components, cplx* data) {
    transform(grid, components, data, FFTW_FORWARD);
    const double s = 1.0 / static_cast<double>(grid.points());
    kernels::scale(s, std::span<cplx>(data, components * grid.points()));
}

void inverse_inplace(const TorusGrid& grid, int components, cplx* data) {
    transform(grid, components, data, FFTW_BACKWARD);
}

FourierField forward(const Field& f) {
    FourierField F(f.grid, f.c);
    std::copy(f.values.begin(), f.values.end(), F.coefs.begin());
    forward_inplace(F.grid, F.c, F.coefs.data());
    return F;
}

Field inverse(const FourierField& F) {
    Field f(F.grid, F.c);
    std::copy(F.coefs.begin(), F.coefs.end(), f.values.begin());
    inverse_inplace(f.grid, f.c, f.values.data());
    return f;
}

double l2_norm(const Field& f) {
    return std::sqrt(kernels::norm2(f.values) / static_cast<double>(f.grid.points()));
}

cplx inner(const Field& a, const Field& b) {
    return kernels::dot(a.values, b.values) / static_cast<double>(a.grid.points());
}

double coef_norm(const FourierField& F) { return std::sqrt(kernels::norm2(F.coefs)); }

cplx coef_inner(const FourierField& a, const FourierField& b) {
    return kernels::dot(a.coefs, b.coefs);
}

Field random_field(const TorusGrid& grid, int components, std::uint64_t seed) {
    Field f(grid, components);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& v : f.values) {
        const double re = normal(rng);
        const double im = normal(rng);
        v = {re, im};
    }
    return f;
}

}  // namespace homlab
