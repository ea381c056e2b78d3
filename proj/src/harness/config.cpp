#include "homlab/harness/config.hpp"

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <functional>
#include <map>
#include <numbers>
#include <set>

#include "homlab/error.hpp"

namespace homlab::harness {

namespace {

std::vector<std::string> split(const std::string& text, const char* seps) {
    std::vector<std::string> parts;
    boost::split(parts, text, boost::is_any_of(seps), boost::token_compress_on);
    std::vector<std::string> out;
    for (auto& p : parts) {
        boost::trim(p);
        if (!p.empty()) out.push_back(p);
    }
    return out;
}

double parse_number(const std::string& s, const std::string& field) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigInvalid(field + ": '" + s + "' is not a number");
    }
}

// Radians, or a multiple of pi written "0.75pi" / "3pi/4".
double parse_angle(std::string s) {
    boost::trim(s);
    const auto pos = s.find("pi");
    if (pos == std::string::npos) return parse_number(s, "zeta phi");
    const std::string head = s.substr(0, pos);
    const std::string tail = s.substr(pos + 2);
    double v = std::numbers::pi * (head.empty() ? 1.0 : parse_number(head, "zeta phi"));
    if (!tail.empty()) {
        if (tail[0] != '/') throw ConfigInvalid("zeta phi: cannot parse '" + s + "'");
        v /= parse_number(tail.substr(1), "zeta phi");
    }
    return v;
}

bool parse_bool(const std::string& s, const std::string& field) {
    const std::string v = boost::to_lower_copy(s);
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigInvalid(field + ": '" + s + "' is not a boolean");
}

int parse_int(const std::string& s, const std::string& field) {
    const double v = parse_number(s, field);
    if (v != std::floor(v)) throw ConfigInvalid(field + ": '" + s + "' is not an integer");
    return static_cast<int>(v);
}

}  // namespace

std::vector<int> parse_eps_list(const std::string& text) {
    std::vector<int> out;
    for (const auto& item : split(text, ",")) {
        double K = 0.0;
        if (const auto slash = item.find('/'); slash != std::string::npos) {
            const double num = parse_number(item.substr(0, slash), "eps_list");
            const double den = parse_number(item.substr(slash + 1), "eps_list");
            K = den / num;
        } else {
            K = 1.0 / parse_number(item, "eps_list");
        }
        const double r = std::round(K);
        if (!(r >= 1.0) || std::abs(K - r) > 1e-9 * r) {
            throw ConfigInvalid("eps_list: 1/eps must be a positive integer, got eps = " + item);
        }
        out.push_back(static_cast<int>(r));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const auto& item : split(text, ",")) out.push_back(parse_number(item, "list"));
    return out;
}

std::vector<ZetaSpec> parse_zeta_list(const std::string& text) {
    std::vector<ZetaSpec> out;
    for (const auto& item : split(text, ",")) {
        const auto at = item.find('@');
        if (at == std::string::npos) throw ConfigInvalid("zeta_list: expected modulus@phi, got " + item);
        out.push_back({parse_number(item.substr(0, at), "zeta_list modulus"), parse_angle(item.substr(at + 1))});
    }
    return out;
}

std::vector<FourierTerm> parse_fourier_table(const std::string& text) {
    std::vector<FourierTerm> out;
    for (const auto& row : split(text, ";")) {
        const auto f = split(row, " \t");
        if (f.size() != 5) throw ConfigInvalid("fourier: each term needs 'k1 k2 k3 a b', got '" + row + "'");
        FourierTerm t;
        for (int a = 0; a < 3; ++a) t.k[a] = parse_int(f[a], "fourier k");
        t.a = parse_number(f[3], "fourier a");
        t.b = parse_number(f[4], "fourier b");
        out.push_back(t);
    }
    return out;
}

void ExperimentConfig::validate() const {
    static const std::set<std::string> presets{"constant", "cos1d", "layered2d", "checker2d-smooth", "fourier"};
    if (!presets.count(preset)) throw ConfigInvalid("problem.preset: unknown preset '" + preset + "'");
    if (d < 1 || d > 3) throw ConfigInvalid("problem.d: must be 1, 2 or 3");
    if (symbol != "gradient" && symbol != "elasticity2d") {
        throw ConfigInvalid("problem.symbol: unknown symbol '" + symbol + "'");
    }
    if (symbol == "elasticity2d" && d != 2) throw ConfigInvalid("problem.symbol: elasticity2d needs d = 2");
    if (preset == "cos1d" && d != 1) throw ConfigInvalid("problem.d: cos1d is one-dimensional");
    if ((preset == "layered2d" || preset == "checker2d-smooth") && d != 2) {
        throw ConfigInvalid("problem.d: " + preset + " is two-dimensional");
    }
    if (preset == "fourier" && fourier.empty()) throw ConfigInvalid("problem.fourier: empty table");
    if (preset != "constant" && preset != "fourier" && !(a > 1.0)) {
        throw ConfigInvalid("problem.a: must exceed 1 for a positive coefficient");
    }
    if (preset == "constant" && !(a > 0.0)) throw ConfigInvalid("problem.a: must be positive");

    auto pow2 = [](int v) { return v > 0 && (v & (v - 1)) == 0; };
    if (N != 0 && !pow2(N)) throw ConfigInvalid("grid.N: must be a power of two");
    if (!pow2(cell_points) || cell_points < 4) throw ConfigInvalid("grid.cell_points: power of two >= 4");
    if (L < 1) throw ConfigInvalid("grid.L: must be positive");
    if (N_cell < 4 || !pow2(N_cell)) throw ConfigInvalid("grid.N_cell: power of two >= 4");

    if (K_list.empty()) throw ConfigInvalid("sweep.eps_list: empty");
    for (int K : K_list) {
        if (K < 1) throw ConfigInvalid("sweep.eps_list: 1/eps must be a positive integer");
        if (N != 0 && (N % (L * K) != 0 || N / (L * K) < 4)) {
            throw ConfigInvalid("sweep.eps_list: eps = 1/" + std::to_string(K) +
                                " needs L/eps to divide grid.N with >= 4 points per period");
        }
    }
    for (double t : t_list) {
        if (!(t > 0.0)) throw ConfigInvalid("sweep.t_list: contour paths need t > 0");
    }
    for (const auto& z : zeta_list) {
        if (!(z.modulus > 0.0)) throw ConfigInvalid("sweep.zeta_list: |zeta| must be positive");
        if (!(z.phi > 0.0 && z.phi < 2.0 * std::numbers::pi)) {
            throw ConfigInvalid("sweep.zeta_list: phi must lie in (0, 2pi)");
        }
    }
    if (!(anchor_zeta.phi > 0.0 && anchor_zeta.phi < 2.0 * std::numbers::pi) || !(anchor_zeta.modulus > 0.0)) {
        throw ConfigInvalid("sweep.anchor_zeta: invalid");
    }
    if (!(anchor_t > 0.0)) throw ConfigInvalid("sweep.anchor_t: must be positive");
    if (design != "star" && design != "product") throw ConfigInvalid("sweep.design: star or product");
    if (!(cell_tol > 0.0) || !(resolvent_tol > 0.0)) throw ConfigInvalid("solver: tolerances must be positive");
    if (max_iters < 1) throw ConfigInvalid("solver.max_iters: must be positive");
    if (n_arc < 8 || n_ray < 8) throw ConfigInvalid("contour: n_arc and n_ray must be >= 8");
    if (!(norm_tol > 0.0) || norm_max_iters < 1) throw ConfigInvalid("norms: invalid tolerance");
    if (format != "csv" && format != "json") throw ConfigInvalid("output.format: csv or json");
}

ExperimentConfig load_config(const std::string& path) {
    boost::property_tree::ptree tree;
    try {
        boost::property_tree::read_ini(path, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ConfigInvalid("config " + path + ": " + e.what());
    }
    ExperimentConfig c;
    using Setter = std::function<void(const std::string&)>;
    const std::map<std::string, Setter> keys{
        {"experiment.id", [&](const std::string& v) { c.experiment_id = v; }},
        {"problem.preset", [&](const std::string& v) { c.preset = v; }},
        {"problem.d", [&](const std::string& v) { c.d = parse_int(v, "problem.d"); }},
        {"problem.symbol", [&](const std::string& v) { c.symbol = v; }},
        {"problem.a", [&](const std::string& v) { c.a = parse_number(v, "problem.a"); }},
        {"problem.fourier", [&](const std::string& v) { c.fourier = parse_fourier_table(v); }},
        {"grid.N", [&](const std::string& v) { c.N = parse_int(v, "grid.N"); }},
        {"grid.cell_points", [&](const std::string& v) { c.cell_points = parse_int(v, "grid.cell_points"); }},
        {"grid.L", [&](const std::string& v) { c.L = parse_int(v, "grid.L"); }},
        {"grid.N_cell", [&](const std::string& v) { c.N_cell = parse_int(v, "grid.N_cell"); }},
        {"sweep.eps_list", [&](const std::string& v) { c.K_list = parse_eps_list(v); }},
        {"sweep.t_list", [&](const std::string& v) { c.t_list = parse_double_list(v); }},
        {"sweep.zeta_list", [&](const std::string& v) { c.zeta_list = parse_zeta_list(v); }},
        {"sweep.design", [&](const std::string& v) { c.design = v; }},
        {"sweep.anchor_eps", [&](const std::string& v) {
             const auto K = parse_eps_list(v);
             if (K.size() != 1) throw ConfigInvalid("sweep.anchor_eps: exactly one value");
             c.anchor_K = K[0];
         }},
        {"sweep.anchor_t", [&](const std::string& v) { c.anchor_t = parse_number(v, "sweep.anchor_t"); }},
        {"sweep.anchor_zeta", [&](const std::string& v) {
             const auto z = parse_zeta_list(v);
             if (z.size() != 1) throw ConfigInvalid("sweep.anchor_zeta: exactly one value");
             c.anchor_zeta = z[0];
         }},
        {"sweep.elliptic", [&](const std::string& v) { c.elliptic = parse_bool(v, "sweep.elliptic"); }},
        {"sweep.parabolic", [&](const std::string& v) { c.parabolic = parse_bool(v, "sweep.parabolic"); }},
        {"sweep.metrics", [&](const std::string& v) { c.metrics = split(v, ","); }},
        {"solver.cell_tol", [&](const std::string& v) { c.cell_tol = parse_number(v, "solver.cell_tol"); }},
        {"solver.resolvent_tol", [&](const std::string& v) { c.resolvent_tol = parse_number(v, "solver.resolvent_tol"); }},
        {"solver.max_iters", [&](const std::string& v) { c.max_iters = parse_int(v, "solver.max_iters"); }},
        {"solver.dealias", [&](const std::string& v) { c.dealias = parse_bool(v, "solver.dealias"); }},
        {"solver.smoothing", [&](const std::string& v) { c.smoothing = parse_bool(v, "solver.smoothing"); }},
        {"contour.n_arc", [&](const std::string& v) { c.n_arc = parse_int(v, "contour.n_arc"); }},
        {"contour.n_ray", [&](const std::string& v) { c.n_ray = parse_int(v, "contour.n_ray"); }},
        {"contour.tol", [&](const std::string& v) { c.contour_tol = parse_number(v, "contour.tol"); }},
        {"contour.check_tol", [&](const std::string& v) { c.contour_check_tol = parse_number(v, "contour.check_tol"); }},
        {"norms.seed", [&](const std::string& v) { c.seed = static_cast<std::uint64_t>(parse_int(v, "norms.seed")); }},
        {"norms.tol", [&](const std::string& v) { c.norm_tol = parse_number(v, "norms.tol"); }},
        {"norms.max_iters", [&](const std::string& v) { c.norm_max_iters = parse_int(v, "norms.max_iters"); }},
        {"norms.gradient_diff", [&](const std::string& v) { c.gradient_diff = parse_bool(v, "norms.gradient_diff"); }},
        {"report.uniformity_ratio", [&](const std::string& v) { c.uniformity_ratio = parse_number(v, "report.uniformity_ratio"); }},
        {"report.noise_floor", [&](const std::string& v) { c.noise_floor = parse_number(v, "report.noise_floor"); }},
        {"output.dir", [&](const std::string& v) { c.out_dir = v; }},
        {"output.format", [&](const std::string& v) { c.format = v; }},
        {"output.plot", [&](const std::string& v) { c.plot = parse_bool(v, "output.plot"); }},
        {"output.timing", [&](const std::string& v) { c.timing = parse_bool(v, "output.timing"); }},
    };
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty()) {
            throw ConfigInvalid("config " + path + ": key '" + section + "' outside a section");
        }
        for (const auto& [key, value] : body) {
            const std::string full = section + "." + key;
            const auto it = keys.find(full);
            if (it == keys.end()) throw ConfigInvalid("config " + path + ": unknown key '" + full + "'");
            it->second(boost::trim_copy(value.data()));
        }
    }
    c.validate();
    return c;
}

}  // namespace homlab::harness
