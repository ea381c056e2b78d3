#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "homlab/error.hpp"
#include "homlab/harness/config.hpp"
#include "homlab/harness/fit.hpp"
#include "homlab/harness/records.hpp"
#include "homlab/harness/svg.hpp"
#include "homlab/harness/sweep.hpp"

using namespace homlab;
using namespace homlab::harness;

namespace {

const double pi = std::numbers::pi;

std::string temp_file(const std::string& name, const std::string& body) {
    const auto p = std::filesystem::temp_directory_path() / ("homlab_test_" + name);
    std::ofstream(p) << body;
    return p.string();
}

ResultRecord rec(const std::string& m, double eps, double t, double value, double factor) {
    ResultRecord r;
    r.metric = m;
    r.eps = eps;
    r.K = static_cast<int>(std::lround(1.0 / eps));
    r.t = t;
    r.zeta_re = r.zeta_im = r.phi = r.c_phi = NAN;
    r.value = value;
    r.paper_factor = factor;
    r.compensated = value / factor;
    return r;
}

ExperimentConfig tiny(const std::string& preset) {
    ExperimentConfig cfg;
    cfg.preset = preset;
    cfg.L = 2;
    cfg.cell_points = 8;
    cfg.K_list = {2, 4};
    cfg.t_list = {0.5};
    cfg.zeta_list = {{2.0, pi}};
    cfg.anchor_K = 2;
    cfg.n_arc = 16;
    cfg.n_ray = 32;
    cfg.contour_check_tol = 1e-6;
    cfg.metrics = {metric::res_diff, metric::res_corrected, metric::semigroup_diff};
    return cfg;
}

}  // namespace

TEST_CASE("list parsers") {
    CHECK(parse_eps_list("1/4, 0.125,1/16") == std::vector<int>{4, 8, 16});
    CHECK_THROWS_AS(parse_eps_list("0.3"), ConfigInvalid);
    CHECK(parse_double_list("0.05,1,2") == std::vector<double>{0.05, 1.0, 2.0});
    const auto z = parse_zeta_list("1@3pi/4,4@0.75pi,2@2.0");
    REQUIRE(z.size() == 3);
    CHECK(z[0].phi == doctest::Approx(3 * pi / 4));
    CHECK(z[1].phi == doctest::Approx(3 * pi / 4));
    CHECK(z[1].modulus == 4.0);
    CHECK(z[2].phi == 2.0);
    const auto f = parse_fourier_table("0 0 0 2 0; 1 0 0 0.5 0.25");
    REQUIRE(f.size() == 2);
    CHECK(f[1].k[0] == 1);
    CHECK(f[1].b == 0.25);
}

TEST_CASE("config file") {
    const auto path = temp_file("ok.ini",
                                "[problem]\npreset = constant\na = 1.5\n"
                                "[sweep]\neps_list = 1/2,1/4\nzeta_list = 1@0.75pi\n"
                                "[contour]\nn_arc = 16\n");
    const ExperimentConfig cfg = load_config(path);
    CHECK(cfg.preset == "constant");
    CHECK(cfg.a == 1.5);
    CHECK(cfg.K_list == std::vector<int>{2, 4});
    CHECK(cfg.n_arc == 16);
    CHECK(cfg.n_ray == 128);

    auto bad = [](const std::string& name, const std::string& body, const std::string& needle) {
        try {
            load_config(temp_file(name, body));
            FAIL("accepted " << body);
        } catch (const ConfigInvalid& e) {
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
    };
    bad("unknown.ini", "[grid]\nwidth = 3\n", "grid.width");
    bad("eps.ini", "[sweep]\neps_list = 0.3\n", "eps_list");
    bad("phi.ini", "[sweep]\nzeta_list = 1@0\n", "zeta_list");
    bad("t.ini", "[sweep]\nt_list = 0\n", "t_list");
    bad("a.ini", "[problem]\na = 0.5\n", "problem.a");
}

TEST_CASE("CSV round trip") {
    std::vector<ResultRecord> rs{rec(metric::semigroup_diff, 0.25, 1.0, 1.0 / 3.0, 0.2)};
    ResultRecord failed = rec(metric::semigroup_diff, 0.125, 1.0, NAN, 0.1);
    failed.error = "boom";
    rs.push_back(failed);
    std::stringstream ss;
    write_csv(ss, rs);
    const std::string text = ss.str();
    CHECK(text.rfind("experiment_id,preset,d,n,m,N,K,eps,t,zeta_re,zeta_im,phi,c_phi,metric,value,paper_factor,"
                     "compensated,iters_max,residual_max,wall_ms,seed\n",
                     0) == 0);
    const auto back = read_csv(ss);
    REQUIRE(back.size() == 2);
    CHECK(back[0].value == rs[0].value);
    CHECK(std::isnan(back[0].zeta_re));
    CHECK_FALSE(back[1].ok());
    std::stringstream again;
    write_csv(again, back);
    CHECK(again.str() == text);
    CHECK(hash_text("abc") == hash_text("abc"));
    CHECK(hash_text("abc") != hash_text("abd"));
}

TEST_CASE("rate fits on exact power laws") {
    std::vector<ResultRecord> rs;
    for (int K : {4, 8, 16, 32}) rs.push_back(rec(metric::semigroup_diff, 1.0 / K, 1.0, 3.0 / K, 1.0 / K));
    for (double t : {0.05, 0.1, 0.5, 1.0, 2.0}) {
        rs.push_back(rec(metric::semigroup_corrected, 0.0625, t, 0.0625 / std::sqrt(t), 0.0625 / std::sqrt(t)));
    }
    const RateFit fe = fit_rate(rs, metric::semigroup_diff, FitVariable::eps);
    CHECK(std::abs(fe.slope - 1.0) < 1e-12);
    CHECK(std::exp(fe.intercept) == doctest::Approx(3.0));
    CHECK(fe.points == 4);
    const RateFit ft = fit_rate(rs, metric::semigroup_corrected, FitVariable::t);
    CHECK(std::abs(ft.slope + 0.5) < 1e-12);
    const Uniformity u = uniformity_check(rs, metric::semigroup_corrected, FitVariable::t);
    CHECK(u.ratio == doctest::Approx(1.0));
    CHECK_THROWS_AS(fit_rate(rs, metric::semigroup_diff, FitVariable::t), InsufficientPoints);
    CHECK_THROWS_AS(uniformity_check(rs, metric::semigroup_diff, FitVariable::eps), InsufficientPoints);

    for (auto& r : rs) r.value *= 1e-12;
    CHECK(uniformity_check(rs, metric::semigroup_corrected, FitVariable::t).skipped);
}

TEST_CASE("constants report") {
    std::vector<ResultRecord> rs;
    for (const char* m : {metric::res_diff, metric::res_grad_corrected, metric::res_corrected}) {
        ResultRecord r = rec(m, 0.25, NAN, 0.01, 0.5);
        r.zeta_re = -1.0;
        r.zeta_im = 1e-3;
        r.phi = pi;
        r.c_phi = 1.0;
        rs.push_back(r);
    }
    CHECK_THROWS_AS(constants_report(rs), MissingMetrics);
    rs.push_back(rec(metric::semigroup_diff, 0.25, 1.0, 0.01, 0.25));
    rs.push_back(rec(metric::semigroup_grad_corrected, 0.25, 1.0, 0.02, 0.25));
    rs.push_back(rec(metric::semigroup_corrected, 0.25, 1.0, 0.5, 0.25));
    const ConstantsReport rep = constants_report(rs);
    CHECK(rep.C(1).value == doctest::Approx(0.02));
    CHECK(rep.C(6).value == doctest::Approx(2.0));
    REQUIRE(rep.checks.size() == 4);
    CHECK(rep.checks[0].pass);
    CHECK(rep.checks[1].pass);
    CHECK_FALSE(rep.checks[2].pass);  // C6 = 2 > frak_c * 0.02 * 1.1
    CHECK_FALSE(rep.all_pass());
    CHECK(rep.to_json()["checks"].size() == 4);
}

TEST_CASE("sweep plan") {
    ExperimentConfig cfg;
    cfg.K_list = {4, 8};
    cfg.anchor_K = 8;
    cfg.t_list = {0.5, 1.0};
    cfg.zeta_list = {{4.0, 3 * pi / 4}};
    const auto star = plan_sweep(cfg);
    // eps scan at the anchors plus one extra zeta and one extra t at the anchor eps.
    CHECK(star.size() == 3 + 3);
    CHECK(star.front().zeta.has_value());
    CHECK(star.back().t.has_value());
    for (std::size_t i = 0; i < star.size(); ++i) CHECK(star[i].index == static_cast<int>(i));
    cfg.design = "product";
    CHECK(plan_sweep(cfg).size() == 2 * 1 + 2 * 2);
}

TEST_CASE("sweep is deterministic and records failures") {
    const ExperimentConfig cfg = tiny("cos1d");
    std::stringstream a, b;
    const auto r1 = run_sweep(cfg);
    write_csv(a, r1);
    write_csv(b, run_sweep(cfg));
    CHECK(a.str() == b.str());
    // 3 elliptic points x 2 metrics, 3 parabolic points x 1 metric.
    CHECK(r1.size() == 9);
    for (const auto& r : r1) {
        CHECK(r.ok());
        CHECK(r.compensated > 0.0);
    }

    ExperimentConfig broken = cfg;
    broken.resolvent_tol = 1e-15;
    broken.max_iters = 1;
    const auto r2 = run_sweep(broken);
    CHECK(r2.size() == 9);
    for (const auto& r : r2) {
        CHECK_FALSE(r.ok());
        CHECK(std::isnan(r.value));
    }

    ExperimentConfig rough = cfg;
    rough.n_arc = rough.n_ray = 8;
    rough.contour_check_tol = 1e-12;
    int contour_failures = 0;
    for (const auto& r : run_sweep(rough)) contour_failures += r.error.find("contour") != std::string::npos;
    CHECK(contour_failures == 3);
}

TEST_CASE("constant coefficient sweep is exact") {
    ExperimentConfig cfg = tiny("constant");
    cfg.metrics.clear();
    for (const auto& r : run_sweep(cfg)) {
        CAPTURE(r.metric);
        CHECK(r.value <= 1e-10);
    }
}

TEST_CASE("plots") {
    std::vector<ResultRecord> rs;
    for (int K : {4, 8, 16}) rs.push_back(rec(metric::semigroup_diff, 1.0 / K, 1.0, 1.0 / K, 1.0 / K));
    const std::string svg = svg_error_vs_eps(rs);
    CHECK(svg.find("<svg") == 0);
    CHECK(svg.find("semigroup_diff") != std::string::npos);
    CHECK(svg.find("<polyline") != std::string::npos);
}
