#include "homlab/harness/fit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "homlab/error.hpp"
#include "homlab/norms.hpp"

namespace homlab::harness {

namespace {

std::string key_part(double v) {
    if (std::isnan(v)) return "-";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

double coordinate(const ResultRecord& r, FitVariable v) {
    switch (v) {
        case FitVariable::eps: return r.eps;
        case FitVariable::t: return r.t;
        case FitVariable::abs_zeta: return r.abs_zeta();
    }
    return 0.0;
}

// Everything except `v` that identifies a sweep point.
std::string fixed_key(const ResultRecord& r, FitVariable v) {
    std::string k;
    if (v != FitVariable::eps) k += "K=" + std::to_string(r.K) + ";";
    if (v != FitVariable::t) k += "t=" + key_part(r.t) + ";";
    if (v == FitVariable::abs_zeta) {
        k += "phi=" + key_part(r.phi) + ";";
    } else {
        k += "z=" + key_part(r.zeta_re) + "," + key_part(r.zeta_im) + ";";
    }
    return k;
}

}  // namespace

std::vector<const ResultRecord*> fit_group(const std::vector<ResultRecord>& records, const std::string& metric,
                                           FitVariable v, std::size_t min_distinct) {
    std::map<std::string, std::vector<const ResultRecord*>> groups;
    for (const auto& r : records) {
        if (r.metric != metric || !r.ok() || std::isnan(coordinate(r, v))) continue;
        groups[fixed_key(r, v)].push_back(&r);
    }
    std::vector<const ResultRecord*> best;
    std::size_t best_distinct = 0;
    for (auto& [key, g] : groups) {
        std::set<double> xs;
        for (const auto* r : g) xs.insert(coordinate(*r, v));
        if (xs.size() > best_distinct) {
            best_distinct = xs.size();
            best = g;
        }
    }
    if (best_distinct < min_distinct) {
        throw InsufficientPoints("fit: metric " + metric + " has " + std::to_string(best_distinct) +
                                 " distinct " + to_string(v) + " values, need " + std::to_string(min_distinct));
    }
    return best;
}

FitVariable parse_fit_variable(const std::string& s) {
    if (s == "eps") return FitVariable::eps;
    if (s == "t") return FitVariable::t;
    if (s == "abs_zeta") return FitVariable::abs_zeta;
    throw ConfigInvalid("fit variable must be eps, t or abs_zeta, got '" + s + "'");
}

const char* to_string(FitVariable v) {
    switch (v) {
        case FitVariable::eps: return "eps";
        case FitVariable::t: return "t";
        case FitVariable::abs_zeta: return "abs_zeta";
    }
    return "?";
}

RateFit fit_rate(const std::vector<ResultRecord>& records, const std::string& metric, FitVariable variable) {
    const auto group = fit_group(records, metric, variable);
    std::vector<double> x, y;
    for (const auto* r : group) {
        if (!(r->value > 0.0)) continue;
        double v = r->value;
        if (is_elliptic(metric) && !std::isnan(r->c_phi)) v /= r->c_phi * r->c_phi;
        x.push_back(std::log(coordinate(*r, variable)));
        y.push_back(std::log(v));
    }
    if (std::set<double>(x.begin(), x.end()).size() < 3) {
        throw InsufficientPoints("fit: metric " + metric + " has fewer than 3 positive values");
    }
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    RateFit f;
    f.metric = metric;
    f.variable = variable;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss += e * e;
    }
    f.residual = std::sqrt(ss / n);
    f.points = static_cast<int>(x.size());
    return f;
}

Uniformity uniformity_check(const std::vector<ResultRecord>& records, const std::string& metric,
                            FitVariable variable, double noise_floor) {
    const auto group = fit_group(records, metric, variable);
    Uniformity u;
    u.metric = metric;
    u.variable = variable;
    u.points = static_cast<int>(group.size());
    double lo = INFINITY, hi = 0.0, vmax = 0.0;
    u.min_compensated = INFINITY;
    u.max_compensated = 0.0;
    for (const auto* r : group) {
        const double x = coordinate(*r, variable);
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        vmax = std::max(vmax, r->value);
        u.min_compensated = std::min(u.min_compensated, r->compensated);
        u.max_compensated = std::max(u.max_compensated, r->compensated);
    }
    u.span = hi / lo;
    if (u.span < 10.0 * (1.0 - 1e-12)) {
        throw InsufficientPoints("uniformity: metric " + metric + " spans a factor " + key_part(u.span) +
                                 " in " + to_string(variable) + ", need a decade");
    }
    if (vmax < noise_floor) {
        u.skipped = true;
        u.ratio = NAN;
        return u;
    }
    u.ratio = u.max_compensated / u.min_compensated;
    return u;
}

bool ConstantsReport::all_pass() const {
    return std::all_of(checks.begin(), checks.end(), [](const ChainCheck& c) { return c.pass || c.skipped; });
}

nlohmann::json ConstantsReport::to_json() const {
    nlohmann::json j;
    j["frak_c"] = {{"closed_form", frak_c.closed_form}, {"quadrature", frak_c.quadrature}};
    j["slack"] = slack;
    for (const auto& c : constants) {
        j["constants"][c.name] = {{"metric", c.metric},
                                  {"value", c.value},
                                  {"max_measured", c.max_measured},
                                  {"points", c.points},
                                  {"below_noise", c.below_noise}};
    }
    for (int i = 1; i <= 3; ++i) {
        j["derived"]["frak_c*C" + std::to_string(i)] = frak_c.closed_form * C(i).value;
    }
    for (const auto& c : checks) {
        j["checks"][c.name] = {{"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}, {"skipped", c.skipped}};
    }
    j["all_pass"] = all_pass();
    return j;
}

std::string ConstantsReport::to_text() const {
    std::ostringstream os;
    os.precision(6);
    os << "frak_c closed form " << frak_c.closed_form << ", quadrature " << frak_c.quadrature << '\n';
    for (const auto& c : constants) {
        os << c.name << " (" << c.metric << ") = " << c.value << " over " << c.points << " points";
        if (c.below_noise) os << " [below noise]";
        os << '\n';
    }
    for (int i = 1; i <= 3; ++i) {
        os << "frak_c*C" << i << " = " << frak_c.closed_form * C(i).value << '\n';
    }
    for (const auto& c : checks) {
        os << c.name << ": " << c.lhs << " <= " << c.rhs << "  "
           << (c.skipped ? "SKIPPED" : (c.pass ? "ok" : "FAILED")) << '\n';
    }
    return os.str();
}

ConstantsReport constants_report(const std::vector<ResultRecord>& records, double noise_floor, double slack) {
    static const char* names[6] = {metric::res_diff,       metric::res_grad_corrected,
                                   metric::res_corrected,  metric::semigroup_diff,
                                   metric::semigroup_grad_corrected, metric::semigroup_corrected};
    ConstantsReport rep;
    rep.frak_c = frak_c();
    rep.slack = slack;
    std::string missing;
    for (int i = 0; i < 6; ++i) {
        FittedConstant c;
        c.name = "C" + std::to_string(i + 1);
        c.metric = names[i];
        for (const auto& r : records) {
            if (r.metric != names[i] || !r.ok()) continue;
            c.value = std::max(c.value, r.compensated);
            c.max_measured = std::max(c.max_measured, r.value);
            ++c.points;
        }
        if (c.points == 0) missing += std::string(missing.empty() ? "" : ", ") + names[i];
        c.below_noise = c.max_measured < noise_floor;
        rep.constants.push_back(c);
    }
    if (!missing.empty()) throw MissingMetrics("constants: no successful records for " + missing);

    const double fc = rep.frak_c.closed_form;
    auto add = [&](const std::string& name, double lhs, double rhs, bool skip) {
        rep.checks.push_back({name, lhs, rhs, lhs <= rhs, skip});
    };
    const bool noisy4 = rep.C(4).below_noise;
    add("C4 <= sqrt2*max(2, c*C1)*slack", rep.C(4).value,
        std::sqrt(2.0) * std::max(2.0, fc * rep.C(1).value) * slack, noisy4);
    add("C5 <= c*C2*slack", rep.C(5).value, fc * rep.C(2).value * slack,
        rep.C(5).below_noise || rep.C(2).below_noise);
    add("C6 <= c*C3*slack", rep.C(6).value, fc * rep.C(3).value * slack,
        rep.C(6).below_noise || rep.C(3).below_noise);

    // Worst ratio of semigroup_diff to min{2, c C1 eps t^{-1/2}}.
    double worst = 0.0;
    for (const auto& r : records) {
        if (r.metric != metric::semigroup_diff || !r.ok()) continue;
        const double bound = std::min(2.0 + 1e-7, fc * rep.C(1).value * r.eps / std::sqrt(r.t));
        worst = std::max(worst, r.value / bound);
    }
    add("semigroup_diff <= min(2, c*C1*eps/sqrt(t))", worst, 1.0, noisy4 || rep.C(1).below_noise);
    return rep;
}

}  // namespace homlab::harness
