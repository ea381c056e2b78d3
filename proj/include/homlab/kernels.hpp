#pragma once

#include <cstddef>
#include <span>

#include "homlab/spectral.hpp"

/// Data-parallel inner loops shared by the operators and solvers.
///
/// Every kernel exists twice: `serial::` is the plain reference loop kept for
/// testing, `parallel::` is the OpenMP version. The unqualified functions in
/// `kernels::` dispatch on the process-wide backend (parallel by default).
/// Reductions in `parallel::` use a fixed chunking that does not depend on the
/// thread count, so results are bit-reproducible for a fixed build.
namespace homlab::kernels {

enum class Backend { serial, parallel };

void set_backend(Backend b);
Backend backend();

/// True when a loop of n iterations should be split across threads: more than one
/// thread is available, we are not already inside a parallel region, and n > threshold.
bool worth_threads(std::ptrdiff_t n, std::ptrdiff_t threshold);

/// body(i) for i in [0, n), threaded only when `par` is set. A region with an
/// `if` clause still enters the runtime, which is measurable on short loops.
template <class Body>
void for_range(bool par, std::ptrdiff_t n, Body&& body) {
    if (par) {
#pragma omp parallel for
        for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
        return;
    }
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

/// Row-major d x rows x cols stack of constant symbol matrices b_1..b_d.
struct SymbolView {
    int d = 1;
    int rows = 1;  // m
    int cols = 1;  // n
    std::span<const cplx> b;
};

/// Per-sample rows x cols matrices on a cell grid of cell_n points per axis.
struct CellMatrixView {
    int cell_n = 1;
    int rows = 1;
    int cols = 1;
    std::span<const cplx> data;  // [sample][row][col]
};

#define HOMLAB_KERNEL_DECLS                                                                  \
    void axpy(cplx a, std::span<const cplx> x, std::span<cplx> y);                           \
    void xpay(std::span<const cplx> x, cplx a, std::span<cplx> y);                           \
    void scale(cplx a, std::span<cplx> x);                                                   \
    cplx dot(std::span<const cplx> a, std::span<const cplx> b);                              \
    double norm2(std::span<const cplx> a);                                                   \
    /* out(k) = b(xi_k) in(k)  (or b(xi_k)^* in(k) when adjoint) */                          \
    void apply_symbol(const TorusGrid& grid, const SymbolView& sym, const cplx* in,           \
                      cplx* out, bool adjoint);                                              \
    /* out(x) = M(x/eps) in(x) with M sampled by index arithmetic (M^* when adjoint) */       \
    void multiply_periodic(const TorusGrid& grid, const CellMatrixView& M, const cplx* in,   \
                           cplx* out, bool adjoint);                                         \
    /* out(k) = B_k in(k) for per-mode square blocks [mode][row][col] of size n */           \
    void multiply_blocks(const TorusGrid& grid, int n, std::span<const cplx> blocks,         \
                         const cplx* in, cplx* out);                                         \
    /* out(k) = s(k) in(k) on each of c components */                                        \
    void multiply_modes(const TorusGrid& grid, int c, std::span<const cplx> s, const cplx* in, \
                        cplx* out);

namespace serial {
HOMLAB_KERNEL_DECLS
}

namespace parallel {
HOMLAB_KERNEL_DECLS
}

HOMLAB_KERNEL_DECLS

#undef HOMLAB_KERNEL_DECLS

}  // namespace homlab::kernels
