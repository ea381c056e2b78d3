#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "homlab/harness/config.hpp"
#include "homlab/harness/records.hpp"
#include "homlab/norms.hpp"

namespace homlab::harness {

struct SweepPoint {
    int index = 0;
    int K = 1;
    std::optional<Shift> zeta;
    std::optional<double> t;
};

/// Star design: every eps at the anchor zeta / anchor t, plus every zeta and t at
/// the anchor eps. Product design: every eps with every zeta and every t.
/// Elliptic points come first, then parabolic, each ordered by (K, zeta or t).
std::vector<SweepPoint> plan_sweep(const ExperimentConfig& cfg);

/// Fine grid used for 1/eps = K.
TorusGrid grid_for(const ExperimentConfig& cfg, int K);

/// Largest relative gap between the contour quadrature and the spectral
/// exponential of A0 at time t, on a seeded random field of `grid`.
double contour_gap(const EffectiveOperator& A0, double t, int n_arc, int n_ray, double tol,
                   std::uint64_t seed);

/// Runs every point; a failing point yields NaN records for its metrics and the
/// sweep continues. Records are ordered by (point index, metric order).
std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg, std::ostream* log = nullptr);

}  // namespace homlab::harness
