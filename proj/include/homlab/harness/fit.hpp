#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "homlab/contour.hpp"
#include "homlab/harness/records.hpp"

namespace homlab::harness {

enum class FitVariable { eps, t, abs_zeta };

FitVariable parse_fit_variable(const std::string& s);
const char* to_string(FitVariable v);

/// Successful records of `metric` in the largest group where only `v` changes.
/// Throws InsufficientPoints below min_distinct values of `v`.
std::vector<const ResultRecord*> fit_group(const std::vector<ResultRecord>& records, const std::string& metric,
                                           FitVariable v, std::size_t min_distinct = 3);

struct RateFit {
    std::string metric;
    FitVariable variable = FitVariable::eps;
    double slope = 0.0;
    double intercept = 0.0;
    double residual = 0.0;  // rms of the log-log residuals
    int points = 0;
};

/// Least squares of log(value / c_phi^2) against log(variable) over the largest
/// group of successful records in which only `variable` changes.
RateFit fit_rate(const std::vector<ResultRecord>& records, const std::string& metric, FitVariable variable);

struct Uniformity {
    std::string metric;
    FitVariable variable = FitVariable::t;
    double max_compensated = 0.0;
    double min_compensated = 0.0;
    double ratio = 1.0;
    double span = 1.0;  // max/min of the variable
    int points = 0;
    bool skipped = false;  // every value below the noise floor
};

/// Spread of compensated values over the same group fit_rate would use. The
/// group must span at least a decade in `variable`.
Uniformity uniformity_check(const std::vector<ResultRecord>& records, const std::string& metric,
                            FitVariable variable, double noise_floor = 1e-7);

struct FittedConstant {
    std::string name;
    std::string metric;
    double value = 0.0;  // max compensated over the sweep
    double max_measured = 0.0;
    int points = 0;
    bool below_noise = false;
};

struct ChainCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    bool pass = false;
    bool skipped = false;
};

struct ConstantsReport {
    FrakC frak_c;
    std::vector<FittedConstant> constants;  // C1..C6
    std::vector<ChainCheck> checks;
    double slack = 1.1;

    const FittedConstant& C(int i) const { return constants.at(i - 1); }
    bool all_pass() const;
    nlohmann::json to_json() const;
    std::string to_text() const;
};

/// Throws MissingMetrics unless every diff/corrected metric has a successful record.
ConstantsReport constants_report(const std::vector<ResultRecord>& records, double noise_floor = 1e-7,
                                 double slack = 1.1);

}  // namespace homlab::harness
