#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "homlab/kernels.hpp"
#include "homlab/operators.hpp"
#include "homlab/resolvent.hpp"

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

TorusGrid grid_2d(benchmark::State& state) {
    const int N = static_cast<int>(state.range(0));
    return TorusGrid::make(2, N, N / 16, 1);
}

template <auto Fn>
void axpy(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const CVec x = noise(n, 1);
    CVec y = noise(n, 2);
    for (auto _ : state) {
        Fn(cplx{1e-3, 0.0}, x, y);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * n);
}

template <auto Fn>
void dot(benchmark::State& state) {
    const std::size_t n = static_cast<std::size_t>(state.range(0));
    const CVec x = noise(n, 1), y = noise(n, 2);
    for (auto _ : state) benchmark::DoNotOptimize(Fn(x, y));
    state.SetItemsProcessed(state.iterations() * n);
}

template <auto Fn>
void apply_symbol(benchmark::State& state) {
    const TorusGrid grid = grid_2d(state);
    const Symbol sym = Symbol::gradient(2);
    const CVec u = noise(grid.points(), 1);
    CVec out(grid.points() * 2);
    for (auto _ : state) {
        Fn(grid, sym.view(), u.data(), out.data(), false);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * grid.points());
}

template <auto Fn>
void multiply_periodic(benchmark::State& state) {
    const TorusGrid grid = grid_2d(state);
    const auto g = CoefficientField::from_function(2, 2, 16, [](const std::array<double, 3>& x) {
        return CMat((2.0 + std::cos(6.283185307179586 * x[0])) * CMat::Identity(2, 2));
    });
    const CVec u = noise(grid.points() * 2, 1);
    CVec out(grid.points() * 2);
    for (auto _ : state) {
        Fn(grid, g.view(), u.data(), out.data(), false);
        benchmark::ClobberMemory();
    }
    state.SetItemsProcessed(state.iterations() * grid.points());
}

// Whole operator application with the process-wide backend switched.
void apply_A_eps(benchmark::State& state, k::Backend backend) {
    const TorusGrid grid = grid_2d(state);
    auto g = std::make_shared<const CoefficientField>(
        CoefficientField::from_function(2, 2, 16, [](const std::array<double, 3>& x) {
            return CMat((2.0 + std::cos(6.283185307179586 * x[0]) * std::cos(6.283185307179586 * x[1])) *
                        CMat::Identity(2, 2));
        }));
    const EllipticOperator A(g, Symbol::gradient(2), grid);
    const CVec u = noise(grid.points(), 1);
    CVec out(grid.points());
    k::set_backend(backend);
    for (auto _ : state) {
        A.apply_fourier(u.data(), out.data());
        benchmark::ClobberMemory();
    }
    k::set_backend(k::Backend::parallel);
    state.SetItemsProcessed(state.iterations() * grid.points());
}

}  // namespace

BENCHMARK(axpy<k::serial::axpy>)->Name("axpy/serial")->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK(axpy<k::parallel::axpy>)->Name("axpy/parallel")->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK(dot<k::serial::dot>)->Name("dot/serial")->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK(dot<k::parallel::dot>)->Name("dot/parallel")->Arg(1 << 12)->Arg(1 << 20);
BENCHMARK(apply_symbol<k::serial::apply_symbol>)->Name("apply_symbol/serial")->Arg(128)->Arg(512);
BENCHMARK(apply_symbol<k::parallel::apply_symbol>)->Name("apply_symbol/parallel")->Arg(128)->Arg(512);
BENCHMARK(multiply_periodic<k::serial::multiply_periodic>)->Name("multiply_periodic/serial")->Arg(128)->Arg(512);
BENCHMARK(multiply_periodic<k::parallel::multiply_periodic>)->Name("multiply_periodic/parallel")->Arg(128)->Arg(512);
BENCHMARK_CAPTURE(apply_A_eps, serial, k::Backend::serial)->Arg(128)->Arg(512);
BENCHMARK_CAPTURE(apply_A_eps, parallel, k::Backend::parallel)->Arg(128)->Arg(512);

BENCHMARK_MAIN();
