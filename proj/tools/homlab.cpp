#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "homlab/cell_solver.hpp"
#include "homlab/contour.hpp"
#include "homlab/error.hpp"
#include "homlab/harness/config.hpp"
#include "homlab/harness/fit.hpp"
#include "homlab/harness/presets.hpp"
#include "homlab/harness/records.hpp"
#include "homlab/harness/svg.hpp"
#include "homlab/harness/sweep.hpp"
#include "homlab/norms.hpp"

namespace fs = std::filesystem;
using namespace homlab;
using namespace homlab::harness;

namespace {

struct Flags {
    std::string config;
    std::optional<std::string> out;
    std::optional<int> grid;
    std::optional<std::string> eps_list, t_list, zeta_list, preset, metrics, design;
    std::optional<double> tol, a;
    std::optional<int> d;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_arc, n_ray;
    bool no_smoothing = false;
    std::optional<std::string> format;
    bool plot = false;
    bool timing = false;
    std::string records;
};

ExperimentConfig make_config(const Flags& f) {
    ExperimentConfig cfg = f.config.empty() ? ExperimentConfig{} : load_config(f.config);
    if (f.out) cfg.out_dir = *f.out;
    if (f.grid) cfg.N = *f.grid;
    if (f.eps_list) cfg.K_list = parse_eps_list(*f.eps_list);
    if (f.t_list) cfg.t_list = parse_double_list(*f.t_list);
    if (f.zeta_list) cfg.zeta_list = parse_zeta_list(*f.zeta_list);
    if (f.preset) {
        cfg.preset = *f.preset;
        if (cfg.preset == "cos1d") cfg.d = 1;
        if (cfg.preset == "layered2d" || cfg.preset == "checker2d-smooth") cfg.d = 2;
    }
    if (f.d) cfg.d = *f.d;
    if (f.a) cfg.a = *f.a;
    if (f.design) cfg.design = *f.design;
    if (f.metrics) {
        cfg.metrics.clear();
        std::stringstream ss(*f.metrics);
        for (std::string m; std::getline(ss, m, ',');) cfg.metrics.push_back(m);
    }
    if (f.tol) cfg.cell_tol = cfg.resolvent_tol = *f.tol;
    if (f.seed) cfg.seed = *f.seed;
    if (f.n_arc) cfg.n_arc = *f.n_arc;
    if (f.n_ray) cfg.n_ray = *f.n_ray;
    if (f.no_smoothing) cfg.smoothing = false;
    if (f.format) cfg.format = *f.format;
    if (f.plot) cfg.plot = true;
    if (f.timing) cfg.timing = true;
    cfg.validate();
    return cfg;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& name) {
    fs::create_directories(cfg.out_dir);
    return (fs::path(cfg.out_dir) / name).string();
}

void save_records(const ExperimentConfig& cfg, const std::vector<ResultRecord>& records) {
    const std::string p = out_path(cfg, cfg.format == "json" ? "records.json" : "records.csv");
    if (cfg.format == "json") {
        write_json(p, records);
    } else {
        write_csv(p, records);
    }
    std::cout << "wrote " << p << '\n';
}

void print_matrix(const CMat& m) {
    for (int i = 0; i < m.rows(); ++i) {
        std::cout << "  ";
        for (int j = 0; j < m.cols(); ++j) {
            const cplx z = m(i, j);
            std::cout << std::setw(22) << z.real();
            if (std::abs(z.imag()) > 1e-14) std::cout << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
        }
        std::cout << '\n';
    }
}

int cmd_effective(const ExperimentConfig& cfg) {
    const Preset p = make_preset(cfg);
    const auto g = p.sample(cfg.N_cell);
    const EffectiveMatrix g0 = homogenize(g, p.symbol, {cfg.cell_tol, cfg.max_iters, cfg.dealias});
    nlohmann::json j;
    j["preset"] = cfg.preset;
    j["N_cell"] = cfg.N_cell;
    j["arithmetic_mean"] = p.arithmetic_mean;
    j["harmonic_mean"] = p.harmonic_mean;
    j["hermitian_defect"] = g0.hermitian_defect;
    for (int i = 0; i < g0.g0.rows(); ++i) {
        for (int k = 0; k < g0.g0.cols(); ++k) j["g0"][i].push_back(g0.g0(i, k).real());
    }
    double err = NAN;
    if (p.g0_oracle) {
        err = (g0.g0 - *p.g0_oracle).cwiseAbs().maxCoeff();
        j["oracle_error"] = err;
    }
    if (cfg.format == "json") {
        std::cout << j.dump(2) << '\n';
        return 0;
    }
    std::cout << std::setprecision(15) << "g0 (" << cfg.preset << ", N_cell=" << cfg.N_cell << "):\n";
    print_matrix(g0.g0);
    std::cout << "Voigt (arithmetic) " << p.arithmetic_mean << ", Reuss (harmonic) " << p.harmonic_mean << '\n';
    if (p.g0_oracle) {
        std::cout << "oracle:\n";
        print_matrix(*p.g0_oracle);
        std::cout << "max |g0 - oracle| = " << std::setprecision(3) << err << '\n';
    }
    return 0;
}

int cmd_cell(const ExperimentConfig& cfg) {
    const Preset p = make_preset(cfg);
    const auto g = p.sample(cfg.N_cell);
    const CorrectorField Lam = solve_cell_problem(g, p.symbol, {cfg.cell_tol, cfg.max_iters, cfg.dealias});
    const std::string path = out_path(cfg, "corrector.csv");
    std::ofstream os(path);
    os << std::setprecision(17) << "index,x1,x2,x3,row,col,re,im\n";
    for (std::size_t i = 0; i < Lam.grid.points(); ++i) {
        const auto idx = Lam.grid.unflatten(i);
        const CMat s = Lam.sample(i);
        for (int r = 0; r < s.rows(); ++r) {
            for (int c = 0; c < s.cols(); ++c) {
                os << i << ',' << double(idx[0]) / Lam.grid.N << ',' << double(idx[1]) / Lam.grid.N << ','
                   << double(idx[2]) / Lam.grid.N << ',' << r << ',' << c << ',' << s(r, c).real() << ','
                   << s(r, c).imag() << '\n';
            }
        }
    }
    std::cout << "cell problem: " << Lam.iterations << " iterations, residual " << Lam.residual << '\n'
              << "wrote " << path << '\n';
    return 0;
}

int cmd_point(ExperimentConfig cfg, bool elliptic) {
    cfg.elliptic = elliptic;
    cfg.parabolic = !elliptic;
    cfg.design = "product";
    if (cfg.zeta_list.empty()) cfg.zeta_list = {cfg.anchor_zeta};
    const auto records = run_sweep(cfg, &std::cerr);
    std::cout << std::setprecision(6);
    for (const auto& r : records) {
        std::cout << r.metric << " eps=" << r.eps;
        if (elliptic) {
            std::cout << " |zeta|=" << r.abs_zeta() << " phi=" << r.phi;
        } else {
            std::cout << " t=" << r.t;
        }
        if (r.ok()) {
            std::cout << " value=" << r.value << " compensated=" << r.compensated << '\n';
        } else {
            std::cout << " FAILED: " << r.error << '\n';
        }
    }
    save_records(cfg, records);
    return std::all_of(records.begin(), records.end(), [](const ResultRecord& r) { return r.ok(); }) ? 0 : 1;
}

int cmd_contour_check(const ExperimentConfig& cfg) {
    const Preset p = make_preset(cfg);
    const auto g = p.sample(cfg.N_cell);
    const EffectiveMatrix g0 = homogenize(g, p.symbol, {cfg.cell_tol, cfg.max_iters, cfg.dealias});
    const TorusGrid grid = grid_for(cfg, cfg.anchor_K);
    const EffectiveOperator A0(grid, p.symbol, g0);
    bool ok = true;
    std::cout << std::setprecision(3);
    for (double t : cfg.t_list) {
        std::cout << "t=" << t << ':';
        int a = 8, r = 16;
        while (a < cfg.n_arc) {
            std::cout << " (" << a << "," << r << ") " << contour_gap(A0, t, a, r, cfg.contour_tol, cfg.seed);
            a *= 2;
            r *= 2;
        }
        const double gap = contour_gap(A0, t, cfg.n_arc, cfg.n_ray, cfg.contour_tol, cfg.seed);
        std::cout << " (" << cfg.n_arc << "," << cfg.n_ray << ") " << gap
                  << (gap <= cfg.contour_check_tol ? "  ok" : "  ABOVE check_tol") << '\n';
        ok = ok && gap <= cfg.contour_check_tol;
    }
    return ok ? 0 : 1;
}

void analyse(const ExperimentConfig& cfg, const std::vector<ResultRecord>& records) {
    nlohmann::json j;
    std::cout << std::setprecision(4);
    const std::vector<std::string> names{metric::res_diff,       metric::res_grad_corrected,
                                         metric::res_corrected,  metric::res_grad_diff,
                                         metric::semigroup_diff, metric::semigroup_grad_corrected,
                                         metric::semigroup_corrected, metric::semigroup_grad_diff};
    for (const auto& m : names) {
        for (FitVariable v : {FitVariable::eps, FitVariable::t, FitVariable::abs_zeta}) {
            try {
                const RateFit f = fit_rate(records, m, v);
                std::cout << "slope " << m << " vs " << to_string(v) << ": " << f.slope << " (rms "
                          << f.residual << ", " << f.points << " points)\n";
                j["fits"][m][to_string(v)] = {{"slope", f.slope}, {"intercept", f.intercept},
                                              {"residual", f.residual}, {"points", f.points}};
            } catch (const InsufficientPoints&) {
            }
            if (v == FitVariable::eps) continue;
            try {
                const Uniformity u = uniformity_check(records, m, v, cfg.noise_floor);
                std::cout << "spread " << m << " over " << to_string(v) << ": ";
                if (u.skipped) {
                    std::cout << "skipped (below noise)\n";
                } else {
                    std::cout << u.ratio << (u.ratio <= cfg.uniformity_ratio ? "  ok" : "  ABOVE threshold") << '\n';
                }
                j["uniformity"][m][to_string(v)] = {{"ratio", u.skipped ? nlohmann::json(nullptr) : nlohmann::json(u.ratio)},
                                                    {"max", u.max_compensated}, {"min", u.min_compensated},
                                                    {"skipped", u.skipped}, {"points", u.points}};
            } catch (const InsufficientPoints&) {
            }
        }
    }
    try {
        const ConstantsReport rep = constants_report(records, cfg.noise_floor);
        std::cout << rep.to_text();
        j["constants"] = rep.to_json();
    } catch (const MissingMetrics& e) {
        std::cout << "constants: " << e.what() << '\n';
    }
    const std::string p = out_path(cfg, "report.json");
    std::ofstream(p) << j.dump(2) << '\n';
    std::cout << "wrote " << p << '\n';
    if (cfg.plot) {
        for (const auto& s : write_plots(cfg.out_dir, records)) std::cout << "wrote " << s << '\n';
    }
}

std::vector<ResultRecord> load_records(const ExperimentConfig& cfg, const std::string& path) {
    const std::string p = path.empty() ? (fs::path(cfg.out_dir) / "records.csv").string() : path;
    return read_csv(p);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Periodic homogenization lab"};
    app.require_subcommand(1);
    app.fallthrough();
    Flags f;
    app.add_option("--config", f.config, "INI config file")->check(CLI::ExistingFile);
    app.add_option("--out", f.out, "output directory");
    app.add_option("--grid", f.grid, "fixed points per axis (default: cell_points * L / eps)");
    app.add_option("--eps-list", f.eps_list, "comma-separated eps values, e.g. 1/4,1/8");
    app.add_option("--t-list", f.t_list, "comma-separated times");
    app.add_option("--zeta-list", f.zeta_list, "comma-separated modulus@phi pairs, e.g. 1@0.75pi");
    app.add_option("--preset", f.preset, "coefficient preset");
    app.add_option("--d", f.d, "dimension");
    app.add_option("--a", f.a, "mean level of the preset coefficient");
    app.add_option("--design", f.design, "star or product");
    app.add_option("--metrics", f.metrics, "comma-separated metric names");
    app.add_option("--tol", f.tol, "cell and resolvent solver tolerance");
    app.add_option("--seed", f.seed, "norm-estimation seed");
    app.add_option("--n-arc", f.n_arc, "contour nodes on the arc");
    app.add_option("--n-ray", f.n_ray, "contour nodes per ray");
    app.add_flag("--no-smoothing", f.no_smoothing, "drop the Steklov smoothing from the correctors");
    app.add_option("--format", f.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    app.add_flag("--plot", f.plot, "write SVG plots");
    app.add_flag("--timing", f.timing, "record wall times (output is then not reproducible)");

    auto* effective = app.add_subcommand("effective", "print g0 and compare with the analytic value");
    auto* cell = app.add_subcommand("cell", "solve the cell problem and dump the corrector");
    auto* res = app.add_subcommand("resolvent-error", "resolvent error norms at each eps and zeta");
    auto* semi = app.add_subcommand("semigroup-error", "semigroup error norms at each eps and t");
    auto* cc = app.add_subcommand("contour-check", "contour exponential of A0 against the spectral one");
    auto* constants = app.add_subcommand("constants", "frak_c and, given records, the constant chain");
    auto* sweep = app.add_subcommand("sweep", "run the configured sweep, fit and report");
    auto* report = app.add_subcommand("report", "fit and plot from an existing records CSV");
    constants->add_option("--records", f.records, "records CSV");
    report->add_option("--records", f.records, "records CSV (default <out>/records.csv)");

    CLI11_PARSE(app, argc, argv);
    try {
        const ExperimentConfig cfg = make_config(f);
        if (effective->parsed()) return cmd_effective(cfg);
        if (cell->parsed()) return cmd_cell(cfg);
        if (res->parsed()) return cmd_point(cfg, true);
        if (semi->parsed()) return cmd_point(cfg, false);
        if (cc->parsed()) return cmd_contour_check(cfg);
        if (constants->parsed()) {
            const FrakC c = frak_c(cfg.n_arc, cfg.n_ray);
            std::cout << std::setprecision(12) << "frak_c closed form " << c.closed_form << ", quadrature "
                      << c.quadrature << '\n';
            if (!f.records.empty()) {
                const ConstantsReport rep = constants_report(read_csv(f.records), cfg.noise_floor);
                std::cout << rep.to_text();
                return rep.all_pass() ? 0 : 1;
            }
            return 0;
        }
        if (sweep->parsed()) {
            const auto records = run_sweep(cfg, &std::cerr);
            save_records(cfg, records);
            analyse(cfg, records);
            return 0;
        }
        if (report->parsed()) {
            analyse(cfg, load_records(cfg, f.records));
            return 0;
        }
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
