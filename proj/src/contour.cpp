#include "homlab/contour.hpp"

#include <cmath>
#include <exception>
#include <numbers>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "homlab/error.hpp"

namespace homlab {

namespace {

constexpr double pi = std::numbers::pi;

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

}  // namespace

double truncation_radius(double tol) {
    if (!(tol > 0.0 && tol < 1.0)) throw ConfigInvalid("contour tol must lie in (0, 1)");
    return std::numbers::sqrt2 * std::log(2.0 * std::numbers::sqrt2 / tol);
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 1; j <= n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = n * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        // Recompute the derivative at the converged root.
        double p0 = 1.0, p1 = 0.0;
        for (int j = 1; j <= n; ++j) {
            const double p2 = p1;
            p1 = p0;
            p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
        }
        dp = n * (z * p0 - p1) / (z * z - 1.0);
        const double wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = wi;
    }
    if (n % 2 == 1) x[n / 2] = 0.0;
}

Contour build_contour(double t, int n_arc, int n_ray, double tol, double arc_radius) {
    if (!(t > 0.0)) throw InvalidTime("contour needs t > 0");
    if (n_arc < 8 || n_ray < 8) throw ConfigInvalid("contour needs n_arc >= 8 and n_ray >= 8");
    if (!(arc_radius > 0.0)) throw ConfigInvalid("arc radius must be positive");

    Contour c;
    c.t = t;
    c.n_arc = n_arc;
    c.n_ray = n_ray;
    c.arc_radius = arc_radius;
    c.R = std::max(truncation_radius(tol), 2.0 * arc_radius);

    // Ray panels, doubling in length away from the arc.
    std::vector<double> edges{arc_radius};
    while (edges.back() * 2.0 < c.R) edges.push_back(edges.back() * 2.0);
    edges.push_back(c.R);
    const int panels = static_cast<int>(edges.size()) - 1;

    std::vector<double> r, wr;
    std::vector<double> gx, gw;
    for (int p = 0; p < panels; ++p) {
        const int q = std::max(1, n_ray / panels + (p < n_ray % panels ? 1 : 0));
        gauss_legendre(q, gx, gw);
        const double a = edges[p], b = edges[p + 1];
        for (int i = 0; i < q; ++i) {
            r.push_back(0.5 * (a + b) + 0.5 * (b - a) * gx[i]);
            wr.push_back(0.5 * (b - a) * gw[i]);
        }
    }

    const cplx up = std::polar(1.0, pi / 4);
    // Upper ray, inward.
    for (std::size_t i = r.size(); i-- > 0;) {
        c.eta.push_back(r[i] * up);
        c.d_eta.push_back(-wr[i] * up);
    }
    // Arc, phi from pi/4 to 7pi/4 (phi = pi + 3pi/4 x).
    gauss_legendre(n_arc, gx, gw);
    std::vector<cplx> arc(n_arc), darc(n_arc);
    for (int i = 0; i < (n_arc + 1) / 2; ++i) {
        const double phi = pi + 0.75 * pi * gx[i];
        const cplx z = std::polar(arc_radius, phi);
        const cplx dz = cplx{0.0, 1.0} * z * (0.75 * pi * gw[i]);
        arc[i] = z;
        darc[i] = dz;
        arc[n_arc - 1 - i] = std::conj(z);
        darc[n_arc - 1 - i] = -std::conj(dz);
    }
    if (n_arc % 2 == 1) {
        arc[n_arc / 2] = -arc_radius;
        darc[n_arc / 2] = cplx{0.0, -arc_radius * 0.75 * pi * gw[n_arc / 2]};
    }
    c.eta.insert(c.eta.end(), arc.begin(), arc.end());
    c.d_eta.insert(c.d_eta.end(), darc.begin(), darc.end());
    // Lower ray, outward: mirror of the upper ray.
    const std::size_t nr = r.size();
    for (std::size_t i = 0; i < nr; ++i) {
        c.eta.push_back(std::conj(c.eta[nr - 1 - i]));
        c.d_eta.push_back(-std::conj(c.d_eta[nr - 1 - i]));
    }

    c.nodes.resize(c.eta.size());
    c.weights.resize(c.eta.size());
    for (std::size_t j = 0; j < c.eta.size(); ++j) {
        c.nodes[j] = c.eta[j] / t;
        c.weights[j] = c.d_eta[j] / t;
    }
    return c;
}

void contour_sum(const Contour& c, std::size_t len, const NodeFn& g, cplx* out) {
    std::fill(out, out + len, cplx{});
    const auto n_nodes = static_cast<std::ptrdiff_t>(c.size());
    const std::ptrdiff_t batch = std::max<std::ptrdiff_t>(1, std::min<std::ptrdiff_t>(n_nodes, max_threads()));
    std::vector<CVec> buf(batch, CVec(len));
    std::vector<std::exception_ptr> errors(batch);
    const cplx factor = -1.0 / (2.0 * pi * cplx{0.0, 1.0});

    for (std::ptrdiff_t start = 0; start < n_nodes; start += batch) {
        const std::ptrdiff_t count = std::min(batch, n_nodes - start);
#pragma omp parallel for schedule(dynamic, 1) if (count > 1)
        for (std::ptrdiff_t b = 0; b < count; ++b) {
            errors[b] = nullptr;
            try {
                const auto j = static_cast<std::size_t>(start + b);
                g(j, c.nodes[j], buf[b].data());
            } catch (...) {
                errors[b] = std::current_exception();
            }
        }
        for (std::ptrdiff_t b = 0; b < count; ++b) {
            if (!errors[b]) continue;
            const std::size_t j = static_cast<std::size_t>(start + b);
            try {
                std::rethrow_exception(errors[b]);
            } catch (const NoConvergence& e) {
                throw NoConvergence("contour node " + std::to_string(j) + ": " + e.what(),
                                    e.iterations(), e.residual());
            }
        }
        for (std::ptrdiff_t b = 0; b < count; ++b) {
            const std::size_t j = static_cast<std::size_t>(start + b);
            const cplx w = factor * c.weights[j] * std::exp(-c.nodes[j] * c.t);
            kernels::axpy(w, buf[b], std::span<cplx>(out, len));
        }
    }
}

Field expm_contour(const ResolventSolver& solver, double t, const Field& f, const Contour& c,
                   SolverStats* stats) {
    if (!(t > 0.0)) throw InvalidTime("contour exponential needs t > 0");
    if (std::abs(c.t - t) > 1e-15 * t) throw ConfigInvalid("contour was built for another t");
    if (!(f.grid == solver.op().grid())) throw GridMismatch("field does not match operator");
    const FourierField F = forward(f);
    FourierField U(f.grid, f.c);
    std::vector<SolverStats> node_stats(c.size());
    contour_sum(c, F.coefs.size(),
                [&](std::size_t j, cplx zeta, cplx* out) {
                    solver.solve_fourier(zeta, F.coefs.data(), out, &node_stats[j]);
                },
                U.coefs.data());
    if (stats) {
        for (const auto& s : node_stats) stats->merge(s);
    }
    return inverse(U);
}

Field expm_contour(const EffectiveOperator& A0, double t, const Field& f, const Contour& c) {
    if (!(t > 0.0)) throw InvalidTime("contour exponential needs t > 0");
    if (std::abs(c.t - t) > 1e-15 * t) throw ConfigInvalid("contour was built for another t");
    if (!(f.grid == A0.grid())) throw GridMismatch("field does not match operator");
    const FourierField F = forward(f);
    FourierField U(f.grid, f.c);
    contour_sum(c, F.coefs.size(),
                [&](std::size_t, cplx zeta, cplx* out) { A0.resolvent_fourier(zeta, F.coefs.data(), out); },
                U.coefs.data());
    return inverse(U);
}

Field expm_spectral_A0(const EffectiveMatrix& g0, const Symbol& sym, double t, const Field& f) {
    if (!(t >= 0.0)) throw InvalidTime("exponential needs t >= 0");
    if (t == 0.0) return f;
    const EffectiveOperator A0(f.grid, sym, g0);
    const FourierField F = forward(f);
    FourierField U(f.grid, f.c);
    A0.exp_fourier(t, F.coefs.data(), U.coefs.data());
    return inverse(U);
}

FrakC frak_c(int n_arc, int n_ray) {
    FrakC out;
    out.closed_form = 1.5 * std::numbers::e +
                      2.0 * std::numbers::sqrt2 / pi * std::exp(-1.0 / std::numbers::sqrt2);
    const Contour c = build_contour(1.0, n_arc, n_ray);
    double acc = 0.0;
    for (std::size_t j = 0; j < c.size(); ++j) acc += std::abs(std::exp(-c.eta[j])) * std::abs(c.d_eta[j]);
    out.quadrature = acc / pi;
    return out;
}

}  // namespace homlab
