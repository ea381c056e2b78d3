#include <doctest.h>

#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "homlab/kernels.hpp"
#include "homlab/operators.hpp"

using namespace homlab;
namespace k = homlab::kernels;

namespace {

CVec noise(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    CVec v(n);
    for (auto& z : v) z = {nd(rng), nd(rng)};
    return v;
}

struct Threads {
    int saved = 1;
    explicit Threads(int n) {
#ifdef _OPENMP
        saved = omp_get_max_threads();
        omp_set_num_threads(n);
#else
        (void)n;
#endif
    }
    ~Threads() {
#ifdef _OPENMP
        omp_set_num_threads(saved);
#endif
    }
};

}  // namespace

TEST_CASE("parallel kernels reproduce the serial reference") {
    Threads threads(4);
    for (int d : {1, 2, 3}) {
        const int N = d == 1 ? 4096 : (d == 2 ? 64 : 16);
        const TorusGrid grid = TorusGrid::make(d, N, 2, 2);
        const std::size_t P = grid.points();
        const Symbol sym = Symbol::gradient(d);
        const int m = sym.m();
        const CVec x = noise(P * m, 1 + d), y0 = noise(P * m, 2 + d);
        const cplx a{0.3, -1.7};
        CAPTURE(d);

        CVec ys = y0, yp = y0;
        k::serial::axpy(a, x, ys);
        k::parallel::axpy(a, x, yp);
        CHECK(ys == yp);
        k::serial::xpay(x, a, ys);
        k::parallel::xpay(x, a, yp);
        CHECK(ys == yp);
        k::serial::scale(a, ys);
        k::parallel::scale(a, yp);
        CHECK(ys == yp);

        const cplx ds = k::serial::dot(x, y0), dp = k::parallel::dot(x, y0);
        CHECK(std::abs(ds - dp) <= 1e-12 * std::abs(ds));
        CHECK(k::parallel::norm2(x) == doctest::Approx(k::serial::norm2(x)).epsilon(1e-13));

        CVec os(P * m), op(P * m);
        const CVec u = noise(P, 9);
        k::serial::apply_symbol(grid, sym.view(), u.data(), os.data(), false);
        k::parallel::apply_symbol(grid, sym.view(), u.data(), op.data(), false);
        CHECK(os == op);
        CVec bs(P), bp(P);
        k::serial::apply_symbol(grid, sym.view(), x.data(), bs.data(), true);
        k::parallel::apply_symbol(grid, sym.view(), x.data(), bp.data(), true);
        CHECK(bs == bp);

        const auto g = CoefficientField::from_function(d, m, grid.cell_points() * 2, [&](const std::array<double, 3>& p) {
            CMat M = CMat::Identity(m, m) * (2.0 + std::cos(6.28 * p[0]));
            if (m > 1) M(0, 1) = M(1, 0) = 0.3 * std::sin(6.28 * p[d - 1]);
            return M;
        });
        CVec ms(P * m), mp(P * m);
        for (bool adj : {false, true}) {
            k::serial::multiply_periodic(grid, g.view(), x.data(), ms.data(), adj);
            k::parallel::multiply_periodic(grid, g.view(), x.data(), mp.data(), adj);
            CHECK(ms == mp);
        }

        const CVec blocks = noise(P * 4, 5);
        CVec in2 = noise(P * 2, 6), s2(P * 2), p2(P * 2);
        k::serial::multiply_blocks(grid, 2, blocks, in2.data(), s2.data());
        k::parallel::multiply_blocks(grid, 2, blocks, in2.data(), p2.data());
        CHECK(s2 == p2);
        const CVec sc = noise(P, 7);
        k::serial::multiply_modes(grid, 2, sc, in2.data(), s2.data());
        k::parallel::multiply_modes(grid, 2, sc, in2.data(), p2.data());
        CHECK(s2 == p2);
    }
}

TEST_CASE("parallel reductions do not depend on the thread count") {
    const CVec x = noise(100000, 3), y = noise(100000, 4);
    cplx d1, d4;
    double n1, n4;
    {
        Threads t(1);
        d1 = k::parallel::dot(x, y);
        n1 = k::parallel::norm2(x);
    }
    {
        Threads t(4);
        d4 = k::parallel::dot(x, y);
        n4 = k::parallel::norm2(x);
    }
    CHECK(d1 == d4);
    CHECK(n1 == n4);
}

TEST_CASE("backend switch") {
    k::set_backend(k::Backend::serial);
    CHECK(k::backend() == k::Backend::serial);
    k::set_backend(k::Backend::parallel);
    CHECK(k::backend() == k::Backend::parallel);
}
