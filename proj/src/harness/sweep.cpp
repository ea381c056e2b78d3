#include "homlab/harness/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include "homlab/error.hpp"
#include "homlab/harness/presets.hpp"

namespace homlab::harness {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> metric_names(bool elliptic, const ExperimentConfig& cfg) {
    std::vector<std::string> all;
    if (elliptic) {
        all = {metric::res_diff, metric::res_grad_corrected, metric::res_corrected};
        if (cfg.gradient_diff) all.push_back(metric::res_grad_diff);
    } else {
        all = {metric::semigroup_diff, metric::semigroup_grad_corrected, metric::semigroup_corrected};
        if (cfg.gradient_diff) all.push_back(metric::semigroup_grad_diff);
    }
    if (cfg.metrics.empty()) return all;
    std::vector<std::string> out;
    for (const auto& m : all) {
        if (std::find(cfg.metrics.begin(), cfg.metrics.end(), m) != cfg.metrics.end()) out.push_back(m);
    }
    return out;
}

}  // namespace

std::vector<SweepPoint> plan_sweep(const ExperimentConfig& cfg) {
    cfg.validate();
    std::vector<std::pair<int, ZetaSpec>> ell;
    std::vector<std::pair<int, double>> par;
    auto add_ell = [&](int K, const ZetaSpec& z) {
        for (const auto& [k2, z2] : ell) {
            if (k2 == K && z2.modulus == z.modulus && z2.phi == z.phi) return;
        }
        ell.emplace_back(K, z);
    };
    auto add_par = [&](int K, double t) {
        for (const auto& [k2, t2] : par) {
            if (k2 == K && t2 == t) return;
        }
        par.emplace_back(K, t);
    };
    if (cfg.design == "product") {
        const auto zs = cfg.zeta_list.empty() ? std::vector<ZetaSpec>{cfg.anchor_zeta} : cfg.zeta_list;
        for (int K : cfg.K_list) {
            for (const auto& z : zs) add_ell(K, z);
            for (double t : cfg.t_list) add_par(K, t);
        }
    } else {
        for (int K : cfg.K_list) add_ell(K, cfg.anchor_zeta);
        for (const auto& z : cfg.zeta_list) add_ell(cfg.anchor_K, z);
        for (int K : cfg.K_list) add_par(K, cfg.anchor_t);
        for (double t : cfg.t_list) add_par(cfg.anchor_K, t);
    }
    std::stable_sort(ell.begin(), ell.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first < b.first;
        if (a.second.modulus != b.second.modulus) return a.second.modulus < b.second.modulus;
        return a.second.phi < b.second.phi;
    });
    std::stable_sort(par.begin(), par.end());

    std::vector<SweepPoint> out;
    if (cfg.elliptic) {
        for (const auto& [K, z] : ell) {
            out.push_back({static_cast<int>(out.size()), K, Shift::polar(z.modulus, z.phi), std::nullopt});
        }
    }
    if (cfg.parabolic) {
        for (const auto& [K, t] : par) out.push_back({static_cast<int>(out.size()), K, std::nullopt, t});
    }
    return out;
}

TorusGrid grid_for(const ExperimentConfig& cfg, int K) {
    const int N = cfg.N != 0 ? cfg.N : cfg.cell_points * cfg.L * K;
    try {
        return TorusGrid::make(cfg.d, N, K, cfg.L);
    } catch (const GridMismatch& e) {
        throw ConfigInvalid(std::string("grid: ") + e.what());
    }
}

double contour_gap(const EffectiveOperator& A0, double t, int n_arc, int n_ray, double tol,
                   std::uint64_t seed) {
    const Field f = random_field(A0.grid(), A0.symbol().n(), seed);
    const Contour c = build_contour(t, n_arc, n_ray, tol);
    const Field q = expm_contour(A0, t, f, c);
    const Field s = expm_spectral_A0(A0.g0(), A0.symbol(), t, f);
    Field diff = q;
    for (std::size_t i = 0; i < diff.values.size(); ++i) diff.values[i] -= s.values[i];
    return l2_norm(diff) / std::max(l2_norm(s), 1e-300);
}

std::vector<ResultRecord> run_sweep(const ExperimentConfig& cfg, std::ostream* log) {
    const Preset preset = make_preset(cfg);
    const auto points = plan_sweep(cfg);
    const std::string hash = hash_text(problem_key(cfg));

    ProblemOptions po;
    po.cell = {cfg.cell_tol, cfg.max_iters, cfg.dealias};
    po.resolvent = {cfg.resolvent_tol, cfg.max_iters, KrylovMethod::bicgstab};
    po.smoothing = cfg.smoothing;
    po.n_arc = cfg.n_arc;
    po.n_ray = cfg.n_ray;
    po.contour_tol = cfg.contour_tol;

    SuiteOptions so;
    so.norm.seed = cfg.seed;
    so.norm.tol_rel = cfg.norm_tol;
    so.norm.max_iters = cfg.norm_max_iters;
    so.gradient_diff = cfg.gradient_diff;
    so.only = cfg.metrics;
    so.timing = cfg.timing;

    std::vector<ResultRecord> records;
    std::map<int, std::unique_ptr<HomogenizationProblem>> problems;
    std::map<int, std::string> setup_errors;
    std::map<std::pair<int, double>, std::string> contour_errors;

    for (const auto& pt : points) {
        const bool elliptic = pt.zeta.has_value();
        const auto names = metric_names(elliptic, cfg);
        const TorusGrid grid = grid_for(cfg, pt.K);

        auto base = [&](const std::string& name) {
            ResultRecord r;
            r.experiment_id = cfg.experiment_id;
            r.problem_hash = hash;
            r.preset = cfg.preset;
            r.d = cfg.d;
            r.n = preset.symbol.n();
            r.m = preset.symbol.m();
            r.N = grid.N;
            r.K = pt.K;
            r.eps = grid.eps();
            r.t = elliptic ? nan : *pt.t;
            r.zeta_re = elliptic ? pt.zeta->zeta.real() : nan;
            r.zeta_im = elliptic ? pt.zeta->zeta.imag() : nan;
            r.phi = elliptic ? pt.zeta->phi : nan;
            r.c_phi = elliptic ? pt.zeta->c_phi : nan;
            r.metric = name;
            r.paper_factor = paper_factor(name, r.eps, elliptic ? 0.0 : *pt.t, elliptic ? &*pt.zeta : nullptr);
            r.seed = cfg.seed;
            r.point_index = pt.index;
            return r;
        };
        auto fail = [&](const std::string& what) {
            if (log) *log << "point " << pt.index << " failed: " << what << '\n';
            for (const auto& name : names) {
                ResultRecord r = base(name);
                r.value = r.compensated = nan;
                r.error = what;
                records.push_back(std::move(r));
            }
        };

        if (!problems.count(pt.K) && !setup_errors.count(pt.K)) {
            try {
                const int cell_n = grid.cell_points();
                problems[pt.K] = std::make_unique<HomogenizationProblem>(preset.sample_shared(cell_n),
                                                                         preset.symbol, grid, po);
            } catch (const Error& e) {
                setup_errors[pt.K] = e.what();
            }
        }
        if (setup_errors.count(pt.K)) {
            fail(setup_errors[pt.K]);
            continue;
        }
        const HomogenizationProblem& pb = *problems[pt.K];

        if (!elliptic) {
            const auto key = std::make_pair(pt.K, *pt.t);
            if (!contour_errors.count(key)) {
                const double gap = contour_gap(pb.A0(), *pt.t, cfg.n_arc, cfg.n_ray, cfg.contour_tol, cfg.seed);
                contour_errors[key] =
                    gap <= cfg.contour_check_tol
                        ? ""
                        : "contour quadrature gap " + std::to_string(gap) + " exceeds contour.check_tol";
            }
            if (!contour_errors[key].empty()) {
                fail(contour_errors[key]);
                continue;
            }
        }

        SuitePoint sp;
        sp.zeta = pt.zeta;
        sp.t = pt.t;
        try {
            for (const auto& mv : error_suite(pb, sp, so)) {
                ResultRecord r = base(mv.metric);
                r.value = mv.value;
                r.compensated = r.paper_factor > 0.0 ? mv.value / r.paper_factor : nan;
                r.iters_max = mv.stats.iters_max;
                r.residual_max = mv.stats.residual_max;
                r.wall_ms = mv.wall_ms;
                if (!mv.norm.converged && log) {
                    *log << "point " << pt.index << " " << mv.metric << ": power iteration hit max_iters\n";
                }
                records.push_back(std::move(r));
            }
        } catch (const Error& e) {
            fail(e.what());
            continue;
        }
        if (log) {
            *log << "point " << pt.index << " K=" << pt.K << " N=" << grid.N;
            if (elliptic) {
                *log << " |zeta|=" << std::abs(pt.zeta->zeta) << " phi=" << pt.zeta->phi;
            } else {
                *log << " t=" << *pt.t;
            }
            *log << " done\n";
        }
    }
    return records;
}

}  // namespace homlab::harness
