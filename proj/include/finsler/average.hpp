#pragma once

#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "finsler/curvature.hpp"
#include "finsler/util.hpp"

namespace finsler {

/// Quadrature over the indicatrix I_x = {F(x, .) = 1} with the volume density
/// induced by the fundamental tensor. Nodes satisfy F = 1 exactly up to
/// roundoff (radial gauge: y = d / F(x, d) for a direction d).
struct IndicatrixQuadrature {
    Vec x;
    std::vector<SlitPoint> nodes;
    Vec weights;
    int order = 0;
    bool cone_restricted = false;
};

namespace detail {

/// F and its directional derivative along dd at the direction point (x, d).
inline std::pair<double, double> norm_and_dir_deriv(const FinslerModel& m, const Vec& x,
                                                    const Vec& d, const Vec& dd) {
    auto xs = lift<D1>(x);
    std::vector<D1> ys(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) ys[i] = D1{d[i], dd[i]};
    const D1 r = m.F(std::span<const D1>(xs), std::span<const D1>(ys));
    if (!all_finite(r)) throw EvaluationError("non-finite F at indicatrix direction");
    return {r.v, r.d};
}

/// d(y_node)/d(angle) for the radial gauge y = d/F: (d' F - d (dF.d'))/F^2.
inline Vec radial_gauge_tangent(const FinslerModel& m, const Vec& x, const Vec& d, const Vec& dd) {
    const auto [F, dF] = norm_and_dir_deriv(m, x, d, dd);
    Vec t(d.size());
    for (std::size_t i = 0; i < d.size(); ++i) t[i] = (dd[i] * F - d[i] * dF) / (F * F);
    return t;
}

} // namespace detail

/// Builds the indicatrix quadrature at base point x.
///
/// n = 2: periodic trapezoid rule over the direction angle, `order` nodes
/// (spectrally accurate for smooth closed indicatrices); cone-restricted
/// models use Gauss-Legendre on the open cone interval instead.
/// n = 3: tensor rule, Gauss-Legendre with `order` nodes in the polar angle
/// times a 2*order trapezoid in azimuth.
inline IndicatrixQuadrature build_indicatrix_quadrature(const FinslerModel& m, const Vec& x,
                                                        int order) {
    const int n = m.dim;
    if (order < 4) throw EvaluationError("indicatrix quadrature order must be at least 4");
    IndicatrixQuadrature q;
    q.x = x;
    q.order = order;

    auto push_node = [&](const Vec& d, double angular_weight, double density) {
        const double F = m.F(x, d);
        if (!(F > 0.0) || !std::isfinite(F))
            throw EvaluationError("indicatrix: F is not positive at a quadrature direction");
        SlitPoint node{x, (1.0 / F) * d};
        if (!m.domain_ok(node))
            throw StrongConvexityViolation("indicatrix node outside the convexity domain", 0.0,
                                           node.x, node.y);
        q.nodes.push_back(std::move(node));
        q.weights.push_back(angular_weight * density);
    };

    if (n == 2) {
        double lo = 0.0, hi = 2.0 * 3.14159265358979323846;
        Vec thetas, ws;
        if (m.cone) {
            // inset from the cone boundary: the fundamental tensor degenerates
            // there and the Christoffel evaluation loses all digits
            const DirectionCone c = m.cone(x);
            const double inset = 0.01 * (c.theta_hi - c.theta_lo);
            lo = c.theta_lo + inset;
            hi = c.theta_hi - inset;
            q.cone_restricted = true;
            Vec gl_x, gl_w;
            gauss_legendre(order, gl_x, gl_w);
            for (int i = 0; i < order; ++i) {
                thetas.push_back(lo + 0.5 * (gl_x[i] + 1.0) * (hi - lo));
                ws.push_back(0.5 * (hi - lo) * gl_w[i]);
            }
        } else if (!m.y_global) {
            throw ConeRequired("model '" + m.name +
                               "' is y-local; supply a direction cone for fiber integrals");
        } else {
            for (int i = 0; i < order; ++i) {
                thetas.push_back(lo + (hi - lo) * i / order);
                ws.push_back((hi - lo) / order);
            }
        }
        for (std::size_t i = 0; i < thetas.size(); ++i) {
            const double th = thetas[i];
            const Vec d = {std::cos(th), std::sin(th)};
            const Vec dd = {-std::sin(th), std::cos(th)};
            const Vec t = detail::radial_gauge_tangent(m, x, d, dd);
            const Vec yn = {d[0] / m.F(x, d), d[1] / m.F(x, d)};
            const Mat g = fundamental_matrix(m, SlitPoint{x, yn});
            const double density = std::sqrt(g.quad(t, t));
            push_node(d, ws[i], density);
        }
    } else if (n == 3) {
        if (m.cone || !m.y_global)
            throw ConeRequired("cone-restricted quadrature is implemented for surfaces only");
        Vec gl_x, gl_w;
        gauss_legendre(order, gl_x, gl_w);
        const double pi = 3.14159265358979323846;
        const int m_az = 2 * order;
        for (int a = 0; a < order; ++a) {
            const double phi = 0.5 * (gl_x[a] + 1.0) * pi;
            const double wphi = 0.5 * pi * gl_w[a];
            for (int b = 0; b < m_az; ++b) {
                const double az = 2.0 * pi * b / m_az;
                const double waz = 2.0 * pi / m_az;
                const Vec d = {std::sin(phi) * std::cos(az), std::sin(phi) * std::sin(az),
                               std::cos(phi)};
                const Vec dphi = {std::cos(phi) * std::cos(az), std::cos(phi) * std::sin(az),
                                  -std::sin(phi)};
                const Vec daz = {-std::sin(phi) * std::sin(az), std::sin(phi) * std::cos(az), 0.0};
                const Vec t1 = detail::radial_gauge_tangent(m, x, d, dphi);
                const Vec t2 = detail::radial_gauge_tangent(m, x, d, daz);
                const double F = m.F(x, d);
                const Vec yn = {d[0] / F, d[1] / F, d[2] / F};
                const Mat g = fundamental_matrix(m, SlitPoint{x, yn});
                const double h11 = g.quad(t1, t1), h12 = g.quad(t1, t2), h22 = g.quad(t2, t2);
                const double det = h11 * h22 - h12 * h12;
                push_node(d, wphi * waz, std::sqrt(std::max(det, 0.0)));
            }
        }
    } else {
        throw EvaluationError("indicatrix quadrature supports chart dimensions 2 and 3");
    }
    return q;
}

inline double indicatrix_volume(const IndicatrixQuadrature& q) {
    double v = 0.0;
    for (double w : q.weights) v += w;
    return v;
}

/// Indicatrix average of a fiber tensor: (1/vol) sum of w_i T(node_i).
/// Nodes may be evaluated in parallel; the reduction order is fixed.
template <class Fn>
auto average_tensor(const IndicatrixQuadrature& q, Fn&& fn)
    -> std::decay_t<decltype(fn(q.nodes[0]))> {
    using T = std::decay_t<decltype(fn(q.nodes[0]))>;
    const int count = static_cast<int>(q.nodes.size());
    if (count == 0) throw EvaluationError("average over an empty quadrature");
    std::vector<T> vals(count);
    std::vector<std::string> failures(count);
    parallel_for(count, [&](int i) {
        try {
            vals[i] = fn(q.nodes[i]);
        } catch (const std::exception& e) {
            failures[i] = e.what();
        }
    });
    for (int i = 0; i < count; ++i)
        if (!failures[i].empty())
            throw EvaluationError("average_tensor: node " + std::to_string(i) + ": " + failures[i]);
    T acc = q.weights[0] * vals[0];
    for (int i = 1; i < count; ++i) acc += q.weights[i] * vals[i];
    const double vol = indicatrix_volume(q);
    acc *= 1.0 / vol;
    return acc;
}

enum class ConnectionSource { Chern, Berwald };

/// <Gamma>(x): indicatrix average of the Chern (or Berwald) coefficients.
inline Ten3 averaged_connection_at(const FinslerModel& m, ConnectionSource source, const Vec& x,
                                   int order) {
    const IndicatrixQuadrature q = build_indicatrix_quadrature(m, x, order);
    if (source == ConnectionSource::Chern)
        return average_tensor(q, [&](const SlitPoint& p) { return chern_coefficients(m, p); });
    return average_tensor(q, [&](const SlitPoint& p) { return berwald_coefficients(m, p); });
}

/// The averaged connection as a y-independent, torsion-free field.
inline ConnectionField averaged_connection_field(const FinslerModel& m, ConnectionSource source,
                                                 int order) {
    ConnectionField f;
    f.dim = m.dim;
    f.source = std::string("average-") +
               (source == ConnectionSource::Chern ? "chern" : "berwald") + "(" + m.name + ")";
    f.coefficients = [m, source, order](const SlitPoint& p) {
        return averaged_connection_at(m, source, p.x, order);
    };
    f.y_independent = true;
    f.torsion_free = true;
    return f;
}

/// <g>(x): indicatrix average of the fundamental tensor; SPD by construction
/// (positive combination of SPD matrices), verified before returning.
inline Mat averaged_metric(const FinslerModel& m, const Vec& x, int order) {
    const IndicatrixQuadrature q = build_indicatrix_quadrature(m, x, order);
    Mat g = average_tensor(q, [&](const SlitPoint& p) { return fundamental_matrix(m, p); });
    const double lam = min_eigenvalue(g);
    if (!(lam > 0.0))
        throw StrongConvexityViolation("averaged metric is not positive definite", lam, x, {});
    return g;
}

/// <R>(x): indicatrix average of the hh-curvature.
inline Ten4 averaged_curvature(const FinslerModel& m, const Vec& x, int order) {
    const IndicatrixQuadrature q = build_indicatrix_quadrature(m, x, order);
    return average_tensor(q, [&](const SlitPoint& p) { return hh_curvature(m, p); });
}

/// Classical curvature tensor of a y-independent connection field,
/// R^i_jkl = d_k Gamma^i_jl - d_l Gamma^i_jk + Gamma Gamma - Gamma Gamma,
/// with Richardson central differences in x.
inline Ten4 curvature_of_connection(const ConnectionField& field, const Vec& x) {
    if (!field.y_independent)
        throw UnsupportedOperation("curvature_of_connection needs a y-independent field");
    const int n = field.dim;
    Vec yref(n, 0.0);
    yref[0] = 1.0;
    auto coeff_at = [&](const Vec& xx) { return field.coefficients(SlitPoint{xx, yref}); };

    const Ten3 G = coeff_at(x);
    const double h = 1e-5 * (1.0 + norm(x));
    Ten4 dG(n); // dG(i,j,k,l) = d Gamma^i_jk / dx^l
    for (int l = 0; l < n; ++l) {
        Vec xp = x, xm = x, xp2 = x, xm2 = x;
        xp[l] += h;
        xm[l] -= h;
        xp2[l] += 0.5 * h;
        xm2[l] -= 0.5 * h;
        const Ten3 cp = coeff_at(xp), cm = coeff_at(xm), cp2 = coeff_at(xp2), cm2 = coeff_at(xm2);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const double d1 = (cp(i, j, k) - cm(i, j, k)) / (2.0 * h);
                    const double d2 = (cp2(i, j, k) - cm2(i, j, k)) / h;
                    dG(i, j, k, l) = (4.0 * d2 - d1) / 3.0;
                }
    }
    Ten4 R(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double r = dG(i, j, l, k) - dG(i, j, k, l);
                    for (int hh = 0; hh < n; ++hh)
                        r += G(i, hh, k) * G(hh, j, l) - G(i, hh, l) * G(hh, j, k);
                    R(i, j, k, l) = r;
                }
    return R;
}

using MatrixField = std::function<Mat(const Vec&)>;

/// Interpolating family F_t = (1-t) F + t sqrt(h_ij y^i y^j).
///
/// h is a plain numeric matrix field, so the returned model (for t > 0) does
/// not support x-derivatives; fiber geometry (indicatrix, metric, norms) is
/// fully available, which is all the interpolation diagnostics need.
/// t = 0 returns the base model unchanged.
inline FinslerModel interpolated_family(const FinslerModel& m, MatrixField h, double t,
                                        int spd_check_samples = 16, std::uint64_t seed = 42) {
    if (!(t >= 0.0 && t <= 1.0))
        throw EvaluationError("interpolation parameter t must lie in [0, 1]");
    if (t == 0.0) return m;

    SampleGen gen(seed);
    for (int s = 0; s < spd_check_samples; ++s) {
        const Vec x = gen.in_box(m.chart_box);
        const Mat hx = h(x);
        const double lam = min_eigenvalue(hx);
        if (!(lam > 0.0))
            throw StrongConvexityViolation("interpolated_family: h is not SPD on the chart", lam,
                                           x, {});
    }

    FinslerModel out = m;
    out.name = m.name + "_t" + std::to_string(t);
    out.family = "interpolated";
    out.x_differentiable = false;
    const ScalarField baseF = m.F;
    const int dim = m.dim;
    out.F = ScalarField::from(dim, [baseF, h, t, dim](auto x, auto y) {
        using S = std::decay_t<decltype(y[0])>;
        Vec xv(dim);
        for (int i = 0; i < dim; ++i) xv[i] = value_of(x[i]);
        const Mat hx = h(xv);
        S quad(0.0);
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) quad = quad + hx(i, j) * (y[i] * y[j]);
        return (1.0 - t) * baseF(x, y) + t * sqrt(quad);
    });
    out.F2 = out.F.squared();
    return out;
}

} // namespace finsler
