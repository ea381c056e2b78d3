#include "homlab/kernels.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace homlab::kernels {

namespace {

std::atomic<Backend> g_backend{Backend::parallel};

constexpr std::ptrdiff_t kMinParallel = 2048;
// Reductions are split into this many chunks regardless of thread count.
constexpr std::ptrdiff_t kChunks = 64;

template <bool Par>
void axpy_impl(cplx a, std::span<const cplx> x, std::span<cplx> y) {
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    for_range(Par && worth_threads(n, kMinParallel), n, [&](std::ptrdiff_t i) { y[i] += a * x[i]; });
}

template <bool Par>
void xpay_impl(std::span<const cplx> x, cplx a, std::span<cplx> y) {
    const auto n = static_cast<std::ptrdiff_t>(y.size());
    for_range(Par && worth_threads(n, kMinParallel), n,
              [&](std::ptrdiff_t i) { y[i] = x[i] + a * y[i]; });
}

template <bool Par>
void scale_impl(cplx a, std::span<cplx> x) {
    const auto n = static_cast<std::ptrdiff_t>(x.size());
    for_range(Par && worth_threads(n, kMinParallel), n, [&](std::ptrdiff_t i) { x[i] *= a; });
}

// Sum a per-index term over fixed chunks, then add the partials in order.
template <class T, class Term>
T chunked_sum(std::ptrdiff_t n, Term term) {
    std::array<T, kChunks> partial{};
    const std::ptrdiff_t len = (n + kChunks - 1) / kChunks;
    for_range(worth_threads(n, kMinParallel), kChunks, [&](std::ptrdiff_t c) {
        T acc{};
        const std::ptrdiff_t lo = c * len;
        const std::ptrdiff_t hi = std::min(n, lo + len);
        for (std::ptrdiff_t i = lo; i < hi; ++i) acc += term(i);
        partial[c] = acc;
    });
    T total{};
    for (const auto& p : partial) total += p;
    return total;
}

// Grid index arithmetic; N is a power of two.
struct Indexer {
    int d;
    int shift;
    std::size_t mask;

    explicit Indexer(const TorusGrid& grid)
        : d(grid.d), shift(std::countr_zero(static_cast<unsigned>(grid.N))), mask(grid.N - 1) {}

    int axis(std::size_t p, int a) const {
        return static_cast<int>((p >> (shift * (d - 1 - a))) & mask);
    }
};

// Per-point wavenumber and cell-sample tables. Kernels are called many times on
// the same grid, so the last tables are kept per thread.
struct WavenumberTable {
    TorusGrid grid{0, 0, 0, 0};
    std::array<std::vector<double>, 3> xi;
};

struct SampleTable {
    TorusGrid grid{0, 0, 0, 0};
    int cell_n = 0;
    std::vector<std::size_t> sample;
};

const WavenumberTable& wavenumbers(const TorusGrid& grid) {
    thread_local WavenumberTable t;
    if (t.grid == grid) return t;
    const Indexer ix(grid);
    const std::size_t P = grid.points();
    for (int a = 0; a < 3; ++a) t.xi[a].clear();
    for (int a = 0; a < grid.d; ++a) {
        t.xi[a].resize(P);
        for (std::size_t p = 0; p < P; ++p) t.xi[a][p] = grid.wavenumber(ix.axis(p, a));
    }
    t.grid = grid;
    return t;
}

const std::vector<std::size_t>& samples(const TorusGrid& grid, int cell_n) {
    thread_local SampleTable t;
    if (t.grid == grid && t.cell_n == cell_n) return t.sample;
    const Indexer ix(grid);
    const std::size_t P = grid.points();
    const int per = grid.cell_points();
    const int stride = cell_n / per;
    t.sample.resize(P);
    for (std::size_t p = 0; p < P; ++p) {
        std::size_t s = 0;
        for (int a = 0; a < grid.d; ++a) {
            s = s * static_cast<std::size_t>(cell_n) + static_cast<std::size_t>((ix.axis(p, a) % per) * stride);
        }
        t.sample[p] = s;
    }
    t.grid = grid;
    t.cell_n = cell_n;
    return t.sample;
}

template <bool Par>
void apply_symbol_impl(const TorusGrid& grid, const SymbolView& sym, const cplx* in, cplx* out,
                       bool adjoint) {
    const auto P = static_cast<std::ptrdiff_t>(grid.points());
    const int m = sym.rows;
    const int n = sym.cols;
    const int d = grid.d;
    const int in_c = adjoint ? m : n;
    const int out_c = adjoint ? n : m;
    const bool par = Par && worth_threads(P, kMinParallel);
    const auto& xi = wavenumbers(grid).xi;
    for (int o = 0; o < out_c; ++o) {
        cplx* __restrict y = out + o * P;
        for_range(par, P, [&](std::ptrdiff_t p) { y[p] = 0.0; });
        for (int i = 0; i < in_c; ++i) {
            const int r = adjoint ? i : o;
            const int c = adjoint ? o : i;
            const cplx* __restrict x = in + i * P;
            for (int a = 0; a < d; ++a) {
                cplx b = sym.b[(a * m + r) * n + c];
                if (b == cplx{}) continue;
                if (adjoint) b = std::conj(b);
                const double* __restrict k = xi[a].data();
                for_range(par, P, [&](std::ptrdiff_t p) { y[p] += (b * k[p]) * x[p]; });
            }
        }
    }
}

template <bool Par>
void multiply_periodic_impl(const TorusGrid& grid, const CellMatrixView& M, const cplx* in,
                            cplx* out, bool adjoint) {
    const auto P = static_cast<std::ptrdiff_t>(grid.points());
    const int rows = M.rows;
    const int cols = M.cols;
    const int in_c = adjoint ? rows : cols;
    const int out_c = adjoint ? cols : rows;
    const bool par = Par && worth_threads(P, kMinParallel);
    const auto& sample = samples(grid, M.cell_n);
    const std::size_t block = static_cast<std::size_t>(rows) * cols;
    const cplx* g = M.data.data();
    const std::size_t* __restrict smp = sample.data();
    for (int o = 0; o < out_c; ++o) {
        cplx* __restrict y = out + o * P;
        for (int i = 0; i < in_c; ++i) {
            const cplx* __restrict x = in + i * P;
            const std::size_t off = adjoint ? static_cast<std::size_t>(i) * cols + o
                                            : static_cast<std::size_t>(o) * cols + i;
            if (i == 0) {
                if (adjoint) {
                    for_range(par, P, [&](std::ptrdiff_t p) { y[p] = std::conj(g[smp[p] * block + off]) * x[p]; });
                } else {
                    for_range(par, P, [&](std::ptrdiff_t p) { y[p] = g[smp[p] * block + off] * x[p]; });
                }
            } else if (adjoint) {
                for_range(par, P, [&](std::ptrdiff_t p) { y[p] += std::conj(g[smp[p] * block + off]) * x[p]; });
            } else {
                for_range(par, P, [&](std::ptrdiff_t p) { y[p] += g[smp[p] * block + off] * x[p]; });
            }
        }
    }
}

template <bool Par>
void multiply_blocks_impl(const TorusGrid& grid, int n, std::span<const cplx> blocks,
                          const cplx* in, cplx* out) {
    const auto P = static_cast<std::ptrdiff_t>(grid.points());
    for_range(Par && worth_threads(P, kMinParallel / 4), P, [&](std::ptrdiff_t p) {
        const cplx* B = blocks.data() + p * n * n;
        if (n == 1) {
            out[p] = B[0] * in[p];
            return;
        }
        std::array<cplx, 16> tmp{};
        std::vector<cplx> big;
        cplx* t = tmp.data();
        if (n > 16) {
            big.resize(n);
            t = big.data();
        }
        for (int r = 0; r < n; ++r) {
            cplx acc{};
            for (int c = 0; c < n; ++c) acc += B[r * n + c] * in[c * P + p];
            t[r] = acc;
        }
        for (int r = 0; r < n; ++r) out[r * P + p] = t[r];
    });
}

template <bool Par>
void multiply_modes_impl(const TorusGrid& grid, int c, std::span<const cplx> s, const cplx* in,
                         cplx* out) {
    const auto P = static_cast<std::ptrdiff_t>(grid.points());
    const bool par = Par && worth_threads(P, kMinParallel);
    for (int j = 0; j < c; ++j) {
        for_range(par, P, [&](std::ptrdiff_t p) { out[j * P + p] = s[p] * in[j * P + p]; });
    }
}

}  // namespace

void set_backend(Backend b) { g_backend.store(b); }
Backend backend() { return g_backend.load(); }

bool worth_threads(std::ptrdiff_t n, std::ptrdiff_t threshold) {
#ifdef _OPENMP
    static const int threads = omp_get_max_threads();
    return n > threshold && threads > 1 && !omp_in_parallel();
#else
    (void)n;
    (void)threshold;
    return false;
#endif
}

namespace serial {

void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) { axpy_impl<false>(a, x, y); }
void xpay(std::span<const cplx> x, cplx a, std::span<cplx> y) { xpay_impl<false>(x, a, y); }
void scale(cplx a, std::span<cplx> x) { scale_impl<false>(a, x); }

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    cplx acc{};
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
}

double norm2(std::span<const cplx> a) {
    double acc = 0.0;
    for (const auto& v : a) acc += std::norm(v);
    return acc;
}

void apply_symbol(const TorusGrid& grid, const SymbolView& sym, const cplx* in, cplx* out,
                  bool adjoint) {
    apply_symbol_impl<false>(grid, sym, in, out, adjoint);
}
void multiply_periodic(const TorusGrid& grid, const CellMatrixView& M, const cplx* in, cplx* out,
                       bool adjoint) {
    multiply_periodic_impl<false>(grid, M, in, out, adjoint);
}
void multiply_blocks(const TorusGrid& grid, int n, std::span<const cplx> blocks, const cplx* in,
                     cplx* out) {
    multiply_blocks_impl<false>(grid, n, blocks, in, out);
}
void multiply_modes(const TorusGrid& grid, int c, std::span<const cplx> s, const cplx* in,
                    cplx* out) {
    multiply_modes_impl<false>(grid, c, s, in, out);
}

}  // namespace serial

namespace parallel {

void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) { axpy_impl<true>(a, x, y); }
void xpay(std::span<const cplx> x, cplx a, std::span<cplx> y) { xpay_impl<true>(x, a, y); }
void scale(cplx a, std::span<cplx> x) { scale_impl<true>(a, x); }

cplx dot(std::span<const cplx> a, std::span<const cplx> b) {
    return chunked_sum<cplx>(static_cast<std::ptrdiff_t>(a.size()),
                             [&](std::ptrdiff_t i) { return std::conj(a[i]) * b[i]; });
}

double norm2(std::span<const cplx> a) {
    return chunked_sum<double>(static_cast<std::ptrdiff_t>(a.size()),
                               [&](std::ptrdiff_t i) { return std::norm(a[i]); });
}

void apply_symbol(const TorusGrid& grid, const SymbolView& sym, const cplx* in, cplx* out,
                  bool adjoint) {
    apply_symbol_impl<true>(grid, sym, in, out, adjoint);
}
void multiply_periodic(const TorusGrid& grid, const CellMatrixView& M, const cplx* in, cplx* out,
                       bool adjoint) {
    multiply_periodic_impl<true>(grid, M, in, out, adjoint);
}
void multiply_blocks(const TorusGrid& grid, int n, std::span<const cplx> blocks, const cplx* in,
                     cplx* out) {
    multiply_blocks_impl<true>(grid, n, blocks, in, out);
}
void multiply_modes(const TorusGrid& grid, int c, std::span<const cplx> s, const cplx* in,
                    cplx* out) {
    multiply_modes_impl<true>(grid, c, s, in, out);
}

}  // namespace parallel

#define HOMLAB_DISPATCH(call) \
    return backend() == Backend::parallel ? parallel::call : serial::call

void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y) { HOMLAB_DISPATCH(axpy(a, x, y)); }
void xpay(std::span<const cplx> x, cplx a, std::span<cplx> y) { HOMLAB_DISPATCH(xpay(x, a, y)); }
void scale(cplx a, std::span<cplx> x) { HOMLAB_DISPATCH(scale(a, x)); }
cplx dot(std::span<const cplx> a, std::span<const cplx> b) { HOMLAB_DISPATCH(dot(a, b)); }
double norm2(std::span<const cplx> a) { HOMLAB_DISPATCH(norm2(a)); }
void apply_symbol(const TorusGrid& grid, const SymbolView& sym, const cplx* in, cplx* out,
                  bool adjoint) {
    HOMLAB_DISPATCH(apply_symbol(grid, sym, in, out, adjoint));
}
void multiply_periodic(const TorusGrid& grid, const CellMatrixView& M, const cplx* in, cplx* out,
                       bool adjoint) {
    HOMLAB_DISPATCH(multiply_periodic(grid, M, in, out, adjoint));
}
void multiply_blocks(const TorusGrid& grid, int n, std::span<const cplx> blocks, const cplx* in,
                     cplx* out) {
    HOMLAB_DISPATCH(multiply_blocks(grid, n, blocks, in, out));
}
void multiply_modes(const TorusGrid& grid, int c, std::span<const cplx> s, const cplx* in,
                    cplx* out) {
    HOMLAB_DISPATCH(multiply_modes(grid, c, s, in, out));
}

#undef HOMLAB_DISPATCH

}  // namespace homlab::kernels
