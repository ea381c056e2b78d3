#include <doctest.h>

#include <cmath>
#include <numbers>

#include "homlab/error.hpp"
#include "homlab/spectral.hpp"

using namespace homlab;

TEST_CASE("transform round trip and Plancherel") {
    for (int d : {1, 2, 3}) {
        const TorusGrid g = TorusGrid::make(d, d == 3 ? 16 : 32, 2, 2);
        const Field f = random_field(g, 2, 3);
        const FourierField F = forward(f);
        CHECK(coef_norm(F) == doctest::Approx(l2_norm(f)).epsilon(1e-13));
        const Field back = inverse(F);
        double err = 0.0;
        for (std::size_t i = 0; i < f.values.size(); ++i) err = std::max(err, std::abs(back.values[i] - f.values[i]));
        CHECK(err < 1e-13);
    }
}

TEST_CASE("single mode lands on its coefficient") {
    const TorusGrid g = TorusGrid::make(1, 32, 1, 4);
    Field f(g, 1);
    for (int j = 0; j < 32; ++j) f.at(0, j) = std::polar(1.0, 2.0 * std::numbers::pi * 3 * j / 32.0);
    const FourierField F = forward(f);
    CHECK(std::abs(F.coef({3, 0, 0}, 0) - 1.0) < 1e-14);
    CHECK(g.wavenumber(3) == doctest::Approx(2.0 * std::numbers::pi * 3 / 4));
}

TEST_CASE("grid validation") {
    CHECK_THROWS_AS(TorusGrid::make(1, 12, 1, 1), GridMismatch);  // not a power of two
    CHECK_THROWS_AS(TorusGrid::make(1, 16, 8, 1), GridMismatch);  // 2 samples per period
    CHECK_THROWS_AS(TorusGrid::make(1, 16, 3, 1), GridMismatch);
    CHECK_THROWS_AS(TorusGrid::make(4, 16, 1, 1), GridMismatch);
    const TorusGrid g = TorusGrid::make(2, 64, 4, 2);
    CHECK(g.cell_points() == 8);
    CHECK(g.eps() == 0.25);
    CHECK_THROWS(g.check_memory(4, 1000));
}

TEST_CASE("random fields are reproducible") {
    const TorusGrid g = TorusGrid::make(1, 64, 1, 1);
    const Field a = random_field(g, 1, 42), b = random_field(g, 1, 42), c = random_field(g, 1, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
}
