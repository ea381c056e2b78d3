#include "homlab/harness/svg.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "homlab/error.hpp"
#include "homlab/harness/fit.hpp"
#include "homlab/norms.hpp"

namespace homlab::harness {

namespace {

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> pts;
};

const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

const std::vector<std::string>& all_metrics() {
    static const std::vector<std::string> m{metric::res_diff,       metric::res_grad_corrected,
                                            metric::res_corrected,  metric::res_grad_diff,
                                            metric::semigroup_diff, metric::semigroup_grad_corrected,
                                            metric::semigroup_corrected, metric::semigroup_grad_diff};
    return m;
}

std::string plot(const std::string& title, const std::string& xlabel, const std::string& ylabel, bool logy,
                 const std::vector<Series>& series) {
    const double W = 640, H = 420, left = 70, right = 190, top = 40, bottom = 50;
    double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
    auto ty = [&](double y) { return logy ? std::log10(y) : y; };
    for (const auto& s : series) {
        for (const auto& [x, y] : s.pts) {
            x0 = std::min(x0, std::log10(x));
            x1 = std::max(x1, std::log10(x));
            y0 = std::min(y0, ty(y));
            y1 = std::max(y1, ty(y));
        }
    }
    if (!(x1 > x0)) x0 -= 0.5, x1 += 0.5;
    if (!(y1 > y0)) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    auto px = [&](double x) { return left + (std::log10(x) - x0) / (x1 - x0) * (W - left - right); };
    auto py = [&](double y) { return top + (y1 - ty(y)) / (y1 - y0) * (H - top - bottom); };

    std::ostringstream os;
    os.precision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << W - left - right << "\" height=\""
       << H - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = x0 + (x1 - x0) * i / 4.0;
        const double yv = y0 + (y1 - y0) * i / 4.0;
        const double gx = left + (W - left - right) * i / 4.0;
        const double gy = H - bottom - (H - top - bottom) * i / 4.0;
        os << "<text x=\"" << gx << "\" y=\"" << H - bottom + 16 << "\" text-anchor=\"middle\">"
           << std::pow(10.0, xv) << "</text>\n";
        os << "<text x=\"" << left - 6 << "\" y=\"" << gy + 4 << "\" text-anchor=\"end\">"
           << (logy ? std::pow(10.0, yv) : yv) << "</text>\n";
    }
    os << "<text x=\"" << left + (W - left - right) / 2 << "\" y=\"" << H - 10 << "\" text-anchor=\"middle\">"
       << xlabel << "</text>\n";
    os << "<text x=\"16\" y=\"" << top + (H - top - bottom) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << top + (H - top - bottom) / 2 << ")\">" << ylabel << "</text>\n";
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* col = palette[s % std::size(palette)];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" points=\"";
        for (const auto& [x, y] : series[s].pts) os << px(x) << ',' << py(y) << ' ';
        os << "\"/>\n";
        for (const auto& [x, y] : series[s].pts) {
            os << "<circle cx=\"" << px(x) << "\" cy=\"" << py(y) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
        }
        const double ly = top + 10 + 18 * s;
        os << "<line x1=\"" << W - right + 10 << "\" y1=\"" << ly << "\" x2=\"" << W - right + 30 << "\" y2=\"" << ly
           << "\" stroke=\"" << col << "\"/>\n";
        os << "<text x=\"" << W - right + 36 << "\" y=\"" << ly + 4 << "\">" << series[s].name << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::vector<Series> collect(const std::vector<ResultRecord>& records, FitVariable v, bool compensated,
                            bool parabolic_only) {
    std::vector<Series> out;
    for (const auto& m : all_metrics()) {
        if (parabolic_only && is_elliptic(m)) continue;
        std::vector<const ResultRecord*> group;
        try {
            group = fit_group(records, m, v, 2);
        } catch (const InsufficientPoints&) {
            continue;
        }
        Series s{m, {}};
        for (const auto* r : group) {
            const double y = compensated ? r->compensated : r->value;
            if (y > 0.0) s.pts.emplace_back(v == FitVariable::eps ? r->eps : r->t, y);
        }
        std::sort(s.pts.begin(), s.pts.end());
        if (s.pts.size() >= 2) out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

std::string svg_error_vs_eps(const std::vector<ResultRecord>& records) {
    return plot("error vs eps", "eps", "operator norm", true, collect(records, FitVariable::eps, false, false));
}

std::string svg_compensated_vs_t(const std::vector<ResultRecord>& records) {
    return plot("compensated error vs t", "t", "value / predicted factor", false,
                collect(records, FitVariable::t, true, true));
}

std::vector<std::string> write_plots(const std::string& dir, const std::vector<ResultRecord>& records) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> paths;
    auto emit = [&](const std::string& name, const std::string& body) {
        const std::string p = (std::filesystem::path(dir) / name).string();
        std::ofstream os(p);
        if (!os) throw ConfigInvalid("cannot write " + p);
        os << body;
        paths.push_back(p);
    };
    emit("error_vs_eps.svg", svg_error_vs_eps(records));
    emit("compensated_vs_t.svg", svg_compensated_vs_t(records));
    return paths;
}

}  // namespace homlab::harness
