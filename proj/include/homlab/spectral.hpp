#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <new>
#include <vector>

namespace homlab {

using cplx = std::complex<double>;

/// 64-byte aligned allocator so every component slab can be handed to FFTW.
template <class T>
struct AlignedAllocator {
    using value_type = T;
    static constexpr std::align_val_t alignment{64};

    AlignedAllocator() noexcept = default;
    template <class U>
    AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), alignment));
    }
    void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

    template <class U>
    bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using CVec = std::vector<cplx, AlignedAllocator<cplx>>;

/// Uniform grid on the torus [0, L)^d carrying coefficients of period eps = 1/K.
///
/// Frequencies are integer vectors k in [-N/2, N/2)^d; D = -i grad acts on the
/// mode k as multiplication by the wavenumber 2*pi*k/L.
struct TorusGrid {
    int d = 1;
    int N = 0;
    int K = 1;
    int L = 1;

    /// Validates and returns a grid; throws GridMismatch on any violated invariant.
    static TorusGrid make(int d, int N, int K, int L = 1);

    /// Single-cell grid with N points per axis (K = L = 1), used by the cell problem.
    static TorusGrid cell(int d, int N) { return make(d, N, 1, 1); }

    double eps() const { return 1.0 / K; }
    std::size_t points() const;
    /// Samples per axis inside one eps-cell.
    int cell_points() const { return N / (L * K); }

    /// Signed frequency of the FFT index along one axis.
    int freq(int index) const { return index < N / 2 ? index : index - N; }
    double wavenumber(int index) const;

    /// Multi-index of a flat (row-major) point or mode index.
    std::array<int, 3> unflatten(std::size_t flat) const;
    std::size_t flatten(const std::array<int, 3>& idx) const;

    /// Rejects grids whose d*c*N^d footprint exceeds `max_entries`.
    void check_memory(int components, std::size_t max_entries) const;

    bool operator==(const TorusGrid&) const = default;
};

/// Default footprint cap (complex entries) accepted by TorusGrid::check_memory.
inline constexpr std::size_t kDefaultMaxEntries = std::size_t{1} << 26;

/// Vector-valued samples on a TorusGrid, stored component-major.
struct Field {
    TorusGrid grid;
    int c = 1;
    CVec values;

    Field() = default;
    Field(const TorusGrid& g, int components);

    cplx* component(int j) { return values.data() + static_cast<std::size_t>(j) * grid.points(); }
    const cplx* component(int j) const {
        return values.data() + static_cast<std::size_t>(j) * grid.points();
    }
    cplx& at(int comp, std::size_t point) { return values[comp * grid.points() + point]; }
    const cplx& at(int comp, std::size_t point) const { return values[comp * grid.points() + point]; }
};

/// Fourier coefficients of a Field, stored component-major in FFT index order.
struct FourierField {
    TorusGrid grid;
    int c = 1;
    CVec coefs;

    FourierField() = default;
    FourierField(const TorusGrid& g, int components);

    cplx* component(int j) { return coefs.data() + static_cast<std::size_t>(j) * grid.points(); }
    const cplx* component(int j) const {
        return coefs.data() + static_cast<std::size_t>(j) * grid.points();
    }
    /// Coefficient of the signed frequency vector k (unused trailing entries ignored).
    cplx& coef(const std::array<int, 3>& k, int comp);
    const cplx& coef(const std::array<int, 3>& k, int comp) const;
};

/// coef(k) = N^{-d} sum_x f(x) exp(-2 pi i k.x / L), so sum |coef|^2 = mean |f|^2.
FourierField forward(const Field& f);
Field inverse(const FourierField& F);

/// In-place transforms of a component-major buffer holding `components` slabs.
void forward_inplace(const TorusGrid& grid, int components, cplx* data);
void inverse_inplace(const TorusGrid& grid, int components, cplx* data);

/// sqrt of the grid mean of |f|^2 summed over components.
double l2_norm(const Field& f);
/// Grid mean of conj(a) . b.
cplx inner(const Field& a, const Field& b);

double coef_norm(const FourierField& F);
cplx coef_inner(const FourierField& a, const FourierField& b);

/// Seeded complex Gaussian samples (deterministic for a fixed seed).
Field random_field(const TorusGrid& grid, int components, std::uint64_t seed);

}  // namespace homlab
