#include "homlab/harness/records.hpp"

#include <boost/algorithm/string.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "homlab/error.hpp"

namespace homlab::harness {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Shortest round-trip form; NaN is an empty field.
std::string fmt(double v) {
    if (std::isnan(v)) return "";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double parse(const std::string& s) {
    if (s.empty() || s == "nan") return nan;
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ConfigInvalid("records: cannot parse number '" + s + "'");
    }
    return v;
}

}  // namespace

double ResultRecord::abs_zeta() const { return std::hypot(zeta_re, zeta_im); }

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols{
        "experiment_id", "preset", "d", "n", "m", "N", "K", "eps", "t", "zeta_re", "zeta_im",
        "phi", "c_phi", "metric", "value", "paper_factor", "compensated", "iters_max",
        "residual_max", "wall_ms", "seed"};
    return cols;
}

std::string hash_text(const std::string& text) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void write_csv(std::ostream& os, const std::vector<ResultRecord>& records) {
    const auto& cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto& r : records) {
        os << r.experiment_id << ',' << r.preset << ',' << r.d << ',' << r.n << ',' << r.m << ','
           << r.N << ',' << r.K << ',' << fmt(r.eps) << ',' << fmt(r.t) << ',' << fmt(r.zeta_re) << ','
           << fmt(r.zeta_im) << ',' << fmt(r.phi) << ',' << fmt(r.c_phi) << ',' << r.metric << ','
           << (r.ok() ? fmt(r.value) : "nan") << ',' << fmt(r.paper_factor) << ','
           << (r.ok() ? fmt(r.compensated) : "nan") << ',' << r.iters_max << ',' << fmt(r.residual_max)
           << ',' << fmt(r.wall_ms) << ',' << r.seed << '\n';
    }
}

void write_csv(const std::string& path, const std::vector<ResultRecord>& records) {
    std::ofstream os(path);
    if (!os) throw ConfigInvalid("cannot write " + path);
    write_csv(os, records);
}

std::vector<ResultRecord> read_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigInvalid("records: empty CSV");
    std::vector<std::string> header;
    boost::split(header, line, boost::is_any_of(","));
    if (header != csv_columns()) throw ConfigInvalid("records: unexpected CSV header");
    std::vector<ResultRecord> out;
    int index = 0;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        boost::split(f, line, boost::is_any_of(","));
        if (f.size() != header.size()) throw ConfigInvalid("records: wrong field count in '" + line + "'");
        ResultRecord r;
        r.experiment_id = f[0];
        r.preset = f[1];
        r.d = std::stoi(f[2]);
        r.n = std::stoi(f[3]);
        r.m = std::stoi(f[4]);
        r.N = std::stoi(f[5]);
        r.K = std::stoi(f[6]);
        r.eps = parse(f[7]);
        r.t = parse(f[8]);
        r.zeta_re = parse(f[9]);
        r.zeta_im = parse(f[10]);
        r.phi = parse(f[11]);
        r.c_phi = parse(f[12]);
        r.metric = f[13];
        r.value = parse(f[14]);
        r.paper_factor = parse(f[15]);
        r.compensated = parse(f[16]);
        r.iters_max = std::stoi(f[17]);
        r.residual_max = parse(f[18]);
        r.wall_ms = parse(f[19]);
        r.seed = std::stoull(f[20]);
        r.point_index = index++;
        if (std::isnan(r.value)) r.error = "failed";
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<ResultRecord> read_csv(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigInvalid("cannot read " + path);
    return read_csv(is);
}

nlohmann::json to_json(const std::vector<ResultRecord>& records) {
    auto num = [](double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); };
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) {
        nlohmann::json j;
        j["experiment_id"] = r.experiment_id;
        j["problem_hash"] = r.problem_hash;
        j["preset"] = r.preset;
        j["d"] = r.d;
        j["n"] = r.n;
        j["m"] = r.m;
        j["N"] = r.N;
        j["K"] = r.K;
        j["eps"] = num(r.eps);
        j["t"] = num(r.t);
        j["zeta_re"] = num(r.zeta_re);
        j["zeta_im"] = num(r.zeta_im);
        j["phi"] = num(r.phi);
        j["c_phi"] = num(r.c_phi);
        j["metric"] = r.metric;
        j["value"] = r.ok() ? num(r.value) : nlohmann::json(nullptr);
        j["paper_factor"] = num(r.paper_factor);
        j["compensated"] = r.ok() ? num(r.compensated) : nlohmann::json(nullptr);
        j["iters_max"] = r.iters_max;
        j["residual_max"] = num(r.residual_max);
        j["wall_ms"] = num(r.wall_ms);
        j["seed"] = r.seed;
        if (!r.ok()) j["error"] = r.error;
        arr.push_back(std::move(j));
    }
    return arr;
}

void write_json(const std::string& path, const std::vector<ResultRecord>& records) {
    std::ofstream os(path);
    if (!os) throw ConfigInvalid("cannot write " + path);
    os << to_json(records).dump(2) << '\n';
}

}  // namespace homlab::harness
