#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homlab/error.hpp"
#include "homlab/resolvent.hpp"

using namespace homlab;

namespace {
const double pi = std::numbers::pi;
}

TEST_CASE("sector weight") {
    CHECK(c_of_phi(pi) == 1.0);
    CHECK(c_of_phi(pi / 2) == 1.0);
    CHECK(c_of_phi(pi / 4) == doctest::Approx(std::sqrt(2.0)));
    CHECK(c_of_phi(7 * pi / 4) == doctest::Approx(std::sqrt(2.0)));
    CHECK_THROWS_AS(c_of_phi(0.0), InvalidAngle);
    CHECK_THROWS_AS(c_of_phi(2 * pi), InvalidAngle);
    CHECK_THROWS_AS(Shift::from({2.0, 0.0}), InvalidAngle);
    const Shift s = Shift::polar(4.0, 3 * pi / 4);
    CHECK(std::abs(s.zeta) == doctest::Approx(4.0));
    CHECK(s.c_phi == 1.0);
}

TEST_CASE("resolvent residual") {
    const TorusGrid grid = TorusGrid::make(2, 32, 2, 2);
    auto g = std::make_shared<const CoefficientField>(
        CoefficientField::from_function(2, 2, 8, [](const std::array<double, 3>& x) {
            return CMat((2.0 + std::cos(2 * pi * x[0]) * std::cos(2 * pi * x[1])) * CMat::Identity(2, 2));
        }));
    auto op = std::make_shared<const EllipticOperator>(g, Symbol::gradient(2), grid);
    const ResolventSolver solver(op, {1e-11, 500, KrylovMethod::bicgstab});
    const Field f = random_field(grid, 1, 3);
    for (const Shift z : {Shift::polar(1.0, 3 * pi / 4), Shift::polar(10.0, 0.2), Shift::polar(0.5, pi)}) {
        SolverStats st;
        const Field u = solver.solve(f, z, &st);
        Field r = op->apply(u);
        for (std::size_t i = 0; i < r.values.size(); ++i) r.values[i] -= z.zeta * u.values[i] + f.values[i];
        CHECK(l2_norm(r) < 1e-9 * l2_norm(f));
        CHECK(st.iters_max > 0);
    }
}

TEST_CASE("effective resolvent is exact per mode") {
    const TorusGrid grid = TorusGrid::make(1, 64, 1, 4);
    const EffectiveMatrix g0{CMat::Constant(1, 1, std::sqrt(3.0)), 0.0};
    Field f(grid, 1);
    for (int j = 0; j < 64; ++j) f.at(0, j) = std::polar(1.0, 2 * pi * 5 * j / 64.0);
    const Shift z = Shift::polar(2.0, 2.0);
    const Field u = solve_resolvent_A0(g0, Symbol::gradient(1), f, z);
    const double xi = 2 * pi * 5 / 4;
    const cplx factor = 1.0 / (std::sqrt(3.0) * xi * xi - z.zeta);
    double err = 0.0;
    for (int j = 0; j < 64; ++j) err = std::max(err, std::abs(u.at(0, j) - factor * f.at(0, j)));
    CHECK(err < 1e-14);
}

TEST_CASE("stats merge keeps the worst case") {
    SolverStats a, b;
    a.record(5, 1e-12);
    b.record(9, 1e-11);
    a.merge(b);
    CHECK(a.iters_max == 9);
    CHECK(a.residual_max == 1e-11);
    CHECK(a.solves == 2);
}
