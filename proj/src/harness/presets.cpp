#include "homlab/harness/presets.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "homlab/error.hpp"

namespace homlab::harness {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Midpoint-rule means of gamma over the unit cube; exact for trigonometric
// polynomials of degree below n.
void cell_means(const Preset& p, int n, double& arith, double& harm) {
    double s = 0.0, h = 0.0;
    std::size_t count = 0;
    std::array<int, 3> i{};
    const int n1 = n;
    const int n2 = p.d >= 2 ? n : 1;
    const int n3 = p.d >= 3 ? n : 1;
    for (i[0] = 0; i[0] < n1; ++i[0]) {
        for (i[1] = 0; i[1] < n2; ++i[1]) {
            for (i[2] = 0; i[2] < n3; ++i[2]) {
                std::array<double, 3> x{};
                for (int a = 0; a < p.d; ++a) x[a] = (i[a] + 0.5) / n;
                const double g = p.gamma(x);
                s += g;
                h += 1.0 / g;
                ++count;
            }
        }
    }
    arith = s / count;
    harm = count / h;
}

}  // namespace

CoefficientField Preset::sample(int cell_n) const {
    const int m = symbol.m();
    return CoefficientField::from_function(d, m, cell_n, [&](const std::array<double, 3>& x) {
        return CMat(gamma(x) * CMat::Identity(m, m));
    });
}

std::shared_ptr<const CoefficientField> Preset::sample_shared(int cell_n) const {
    return std::make_shared<const CoefficientField>(sample(cell_n));
}

Preset make_preset(const ExperimentConfig& cfg) {
    cfg.validate();
    Preset p;
    p.name = cfg.preset;
    p.d = cfg.d;
    p.symbol = cfg.symbol == "elasticity2d" ? Symbol::elasticity2d() : Symbol::gradient(cfg.d);
    const double a = cfg.a;
    const int m = p.symbol.m();

    if (cfg.preset == "constant") {
        p.gamma = [a](const std::array<double, 3>&) { return a; };
        p.g0_oracle = CMat(a * CMat::Identity(m, m));
    } else if (cfg.preset == "cos1d") {
        p.gamma = [a](const std::array<double, 3>& x) { return a + std::cos(two_pi * x[0]); };
        // 1 / int_0^1 dx / (a + cos 2 pi x) = sqrt(a^2 - 1).
        p.g0_oracle = CMat(std::sqrt(a * a - 1.0) * CMat::Identity(1, 1));
    } else if (cfg.preset == "layered2d") {
        p.gamma = [a](const std::array<double, 3>& x) { return a + std::cos(two_pi * x[0]); };
        if (cfg.symbol == "gradient") {
            CMat g0 = CMat::Zero(2, 2);
            g0(0, 0) = std::sqrt(a * a - 1.0);  // harmonic mean across the layers
            g0(1, 1) = a;                       // arithmetic mean along them
            p.g0_oracle = g0;
        }
    } else if (cfg.preset == "checker2d-smooth") {
        p.gamma = [a](const std::array<double, 3>& x) {
            return a + std::cos(two_pi * x[0]) * std::cos(two_pi * x[1]);
        };
    } else {
        auto terms = cfg.fourier;
        const int d = cfg.d;
        p.gamma = [terms, d](const std::array<double, 3>& x) {
            double v = 0.0;
            for (const auto& t : terms) {
                double phase = 0.0;
                for (int j = 0; j < d; ++j) phase += t.k[j] * x[j];
                v += t.a * std::cos(two_pi * phase) + t.b * std::sin(two_pi * phase);
            }
            return v;
        };
    }
    const int quad_n = p.d == 1 ? 4096 : (p.d == 2 ? 512 : 64);
    cell_means(p, quad_n, p.arithmetic_mean, p.harmonic_mean);
    if (!(p.harmonic_mean > 0.0)) throw NotPositive("preset coefficient is not positive");
    return p;
}

std::string problem_key(const ExperimentConfig& cfg) {
    std::ostringstream os;
    os.precision(17);
    os << cfg.preset << ";d=" << cfg.d << ";symbol=" << cfg.symbol << ";a=" << cfg.a << ";L=" << cfg.L
       << ";cell_points=" << cfg.cell_points << ";N=" << cfg.N << ";smoothing=" << cfg.smoothing;
    for (const auto& t : cfg.fourier) {
        os << ";(" << t.k[0] << "," << t.k[1] << "," << t.k[2] << "," << t.a << "," << t.b << ")";
    }
    return os.str();
}

}  // namespace homlab::harness
