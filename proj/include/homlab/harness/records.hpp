#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace homlab::harness {

/// One measured metric at one sweep point. Not-applicable coordinates are NaN
/// (t for elliptic metrics, zeta/phi/c_phi for parabolic ones).
struct ResultRecord {
    std::string experiment_id;
    std::string problem_hash;
    std::string preset;
    int d = 1;
    int n = 1;
    int m = 1;
    int N = 0;
    int K = 1;
    double eps = 1.0;
    double t = 0.0;
    double zeta_re = 0.0;
    double zeta_im = 0.0;
    double phi = 0.0;
    double c_phi = 0.0;
    std::string metric;
    double value = 0.0;
    double paper_factor = 0.0;
    double compensated = 0.0;
    int iters_max = 0;
    double residual_max = 0.0;
    double wall_ms = 0.0;
    std::uint64_t seed = 0;
    int point_index = 0;
    /// Empty on success, else the error that stopped this point.
    std::string error;

    double abs_zeta() const;
    bool ok() const { return error.empty(); }
};

/// Column order of the CSV form.
const std::vector<std::string>& csv_columns();

/// FNV-1a of the text, as 16 hex digits.
std::string hash_text(const std::string& text);

void write_csv(std::ostream& os, const std::vector<ResultRecord>& records);
void write_csv(const std::string& path, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_csv(std::istream& is);
std::vector<ResultRecord> read_csv(const std::string& path);

nlohmann::json to_json(const std::vector<ResultRecord>& records);
void write_json(const std::string& path, const std::vector<ResultRecord>& records);

}  // namespace homlab::harness
