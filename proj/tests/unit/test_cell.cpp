#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "homlab/cell_solver.hpp"
#include "homlab/error.hpp"
#include "homlab/harness/presets.hpp"

using namespace homlab;

namespace {

const double two_pi = 2.0 * std::numbers::pi;

nlohmann::json oracle() {
    std::ifstream is(HOMLAB_ORACLE_DIR "/bloch_values.json");
    return nlohmann::json::parse(is);
}

}  // namespace

TEST_CASE("cos1d effective coefficient") {
    const auto g = CoefficientField::from_function(1, 1, 64, [](const std::array<double, 3>& x) {
        return CMat::Constant(1, 1, 2.0 + std::cos(two_pi * x[0]));
    });
    const EffectiveMatrix g0 = homogenize(g, Symbol::gradient(1));
    CHECK(std::abs(g0.g0(0, 0) - oracle()["cos1d_g0"].get<double>()) < 1e-12);
}

TEST_CASE("1-D corrector satisfies D Lambda = g0/g - 1") {
    const int n = 32;
    const auto g = CoefficientField::from_function(1, 1, n, [](const std::array<double, 3>& x) {
        return CMat::Constant(1, 1, 3.0 + std::sin(two_pi * x[0]) + 0.5 * std::cos(2 * two_pi * x[0]));
    });
    const Symbol sym = Symbol::gradient(1);
    const CorrectorField Lam = solve_cell_problem(g, sym);
    const EffectiveMatrix g0 = effective_matrix(Lam, g, sym);
    Field L(Lam.grid, 1);
    for (int i = 0; i < n; ++i) L.at(0, i) = Lam.sample(i)(0, 0);
    FourierField F = forward(L);
    for (int p = 0; p < n; ++p) F.coefs[p] *= Lam.grid.wavenumber(p);
    const Field DL = inverse(F);
    double err = 0.0;
    for (int i = 0; i < n; ++i) {
        err = std::max(err, std::abs(DL.at(0, i) - (g0.g0(0, 0) / g.sample(i)(0, 0) - 1.0)));
    }
    CHECK(err < 1e-9);
    CHECK(std::abs(Lam.mean()(0, 0)) < 1e-12);
}

TEST_CASE("layered and constant presets") {
    harness::ExperimentConfig cfg;
    cfg.preset = "layered2d";
    cfg.d = 2;
    const auto p = harness::make_preset(cfg);
    const EffectiveMatrix g0 = homogenize(p.sample(64), p.symbol);
    CHECK((g0.g0 - *p.g0_oracle).cwiseAbs().maxCoeff() < 1e-8);

    cfg.preset = "constant";
    cfg.d = 1;
    const auto c = harness::make_preset(cfg);
    const CorrectorField Lam = solve_cell_problem(c.sample(16), c.symbol);
    CHECK(Lam.is_zero());
}

TEST_CASE("Voigt and Reuss bounds enclose g0") {
    harness::ExperimentConfig cfg;
    cfg.preset = "checker2d-smooth";
    cfg.d = 2;
    const auto p = harness::make_preset(cfg);
    const EffectiveMatrix g0 = homogenize(p.sample(32), p.symbol);
    Eigen::SelfAdjointEigenSolver<CMat> es(g0.g0);
    CHECK(es.eigenvalues()(0) >= p.harmonic_mean - 1e-10);
    CHECK(es.eigenvalues()(1) <= p.arithmetic_mean + 1e-10);
    CHECK(g0.hermitian_defect < 1e-10);
}

TEST_CASE("elasticity cell problem") {
    const auto g = CoefficientField::from_function(2, 3, 16, [](const std::array<double, 3>& x) {
        return CMat((2.0 + std::cos(two_pi * x[0])) * CMat::Identity(3, 3));
    });
    const EffectiveMatrix g0 = homogenize(g, Symbol::elasticity2d());
    Eigen::SelfAdjointEigenSolver<CMat> es(g0.g0);
    CHECK(es.eigenvalues()(0) > 0.0);
    CHECK((g0.g0 - g0.g0.adjoint()).norm() < 1e-12);
}

TEST_CASE("cell solver reports non-convergence") {
    const auto g = CoefficientField::from_function(2, 2, 32, [](const std::array<double, 3>& x) {
        return CMat((2.0 + 1.9 * std::cos(two_pi * x[0]) * std::cos(two_pi * x[1])) * CMat::Identity(2, 2));
    });
    CHECK_THROWS_AS(solve_cell_problem(g, Symbol::gradient(2), {1e-14, 2, false}), NoConvergence);
}
