#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>

#include "homlab/harness/config.hpp"
#include "homlab/operators.hpp"

namespace homlab::harness {

/// Coefficient and symbol of a named problem, plus the analytic g0 when one exists.
struct Preset {
    std::string name;
    int d = 1;
    Symbol symbol = Symbol::gradient(1);
    /// Scalar profile gamma(x); the coefficient is gamma(x) times the m x m identity.
    std::function<double(const std::array<double, 3>&)> gamma;
    std::optional<CMat> g0_oracle;
    /// Voigt and Reuss means of gamma (arithmetic and harmonic), from 1-D or
    /// tensor-product quadrature.
    double arithmetic_mean = 0.0;
    double harmonic_mean = 0.0;

    CoefficientField sample(int cell_n) const;
    std::shared_ptr<const CoefficientField> sample_shared(int cell_n) const;
};

Preset make_preset(const ExperimentConfig& cfg);

/// Stable text identifying the problem (preset, parameters, symbol).
std::string problem_key(const ExperimentConfig& cfg);

}  // namespace homlab::harness
