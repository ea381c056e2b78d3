#pragma once

#include <string>
#include <vector>

#include "homlab/harness/records.hpp"

namespace homlab::harness {

/// Log-log error against eps, one series per metric (at the largest eps group).
std::string svg_error_vs_eps(const std::vector<ResultRecord>& records);

/// Compensated value against t (log t axis), one series per parabolic metric.
std::string svg_compensated_vs_t(const std::vector<ResultRecord>& records);

/// Writes error_vs_eps.svg and compensated_vs_t.svg into dir; returns the paths written.
std::vector<std::string> write_plots(const std::string& dir, const std::vector<ResultRecord>& records);

}  // namespace homlab::harness
