#pragma once

#include <string>

#include "finsler/model.hpp"

namespace finsler {

/// Fundamental tensor at a slit point.
struct MetricValue {
    Mat g;
    SlitPoint point;
};

/// Cartan tensor A_ijk at a slit point.
struct CartanValue {
    Ten3 A;
    SlitPoint point;
};

/// Everything the connection layer needs at one slit point, from nested
/// Taylor passes over W = F^2: the norm, the metric, the Cartan tensor and
/// the x-derivatives of the metric. All derivatives are exact to roundoff.
struct MetricBundle {
    double F = 0.0;
    Mat g;
    Mat ginv;
    Ten3 A;    // A(i,j,k)    = (F/2) dg_ij/dy^k
    Ten3 dgdx; // dgdx(i,j,k) = dg_ij/dx^k  (filled only when requested)
};

namespace detail {

inline void spd_or_throw(const Mat& g, const SlitPoint& p, const std::string& model_name,
                         Cholesky& chol) {
    if (chol.factor(g)) return;
    const double lam = min_eigenvalue(g);
    throw StrongConvexityViolation(
        "fundamental tensor of '" + model_name + "' is not positive definite (min eigenvalue " +
            std::to_string(lam) + ")",
        lam, p.x, p.y);
}

} // namespace detail

/// Just the fundamental tensor, one nesting level cheaper than the full
/// bundle; no positivity check.
inline Mat fundamental_matrix(const FinslerModel& m, const SlitPoint& p) {
    const int n = p.dim();
    auto xs = detail::lift<D2>(p.x);
    auto ys = detail::lift<D2>(p.y);
    const auto xspan = std::span<const D2>(xs);
    const auto yspan = std::span<const D2>(ys);
    Mat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            ys[i].v.d = ys[i].v.d + 1.0;
            ys[j].d.v = ys[j].d.v + 1.0;
            const D2 r = m.F2(xspan, yspan);
            if (!all_finite(r))
                throw EvaluationError("non-finite F^2 Hessian at y-seed (" + std::to_string(i) +
                                      "," + std::to_string(j) + ")");
            ys[i].v.d = 0.0;
            ys[j].d.v = 0.0;
            g(i, j) = 0.5 * r.d.d;
            g(j, i) = g(i, j);
        }
    return g;
}

inline MetricBundle metric_bundle(const FinslerModel& m, const SlitPoint& p,
                                  bool need_dgdx = true) {
    validate(p);
    if (!m.domain_ok(p))
        throw StrongConvexityViolation(
            "point lies outside the declared convexity domain of '" + m.name + "'", 0.0, p.x, p.y);
    if (need_dgdx && !m.x_differentiable)
        throw UnsupportedOperation("model '" + m.name +
                                   "' does not support x-derivatives (numeric matrix field)");
    const int n = p.dim();
    MetricBundle out;
    out.g = Mat(n, n);
    out.A = Ten3(n);
    out.dgdx = Ten3(n);

    auto xs = detail::lift<D3>(p.x);
    auto ys = detail::lift<D3>(p.y);
    const auto xspan = std::span<const D3>(xs);
    const auto yspan = std::span<const D3>(ys);

    double w_value = 0.0;
    // W = F^2; seeds (y_i inner, y_j middle, y_k outer) give the third
    // y-derivative in .d.d.d and the metric in the .v.d.d component.
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            for (int k = 0; k < n; ++k) {
                ys[i].v.v.d = ys[i].v.v.d + 1.0;
                ys[j].v.d.v = ys[j].v.d.v + 1.0;
                ys[k].d.v.v = ys[k].d.v.v + 1.0;
                const D3 r = m.F2(xspan, yspan);
                if (!all_finite(r))
                    throw EvaluationError("non-finite F^2 derivative at y-seed (" + std::to_string(i) +
                                          "," + std::to_string(j) + "," + std::to_string(k) + ")");
                ys[i].v.v.d = 0.0;
                ys[j].v.d.v = 0.0;
                ys[k].d.v.v = 0.0;
                if (i == 0 && j == 0 && k == 0) w_value = r.v.v.v;
                if (k == 0) {
                    out.g(i, j) = 0.5 * r.v.d.d;
                    out.g(j, i) = out.g(i, j);
                }
                out.A(i, j, k) = r.d.d.d; // scaled by F/4 below
                out.A(j, i, k) = out.A(i, j, k);
            }
        }
    }
    out.F = std::sqrt(std::max(w_value, 0.0));
    out.A *= 0.25 * out.F;

    if (need_dgdx) {
        for (int i = 0; i < n; ++i) {
            for (int j = i; j < n; ++j) {
                for (int k = 0; k < n; ++k) {
                    ys[i].v.v.d = ys[i].v.v.d + 1.0;
                    ys[j].v.d.v = ys[j].v.d.v + 1.0;
                    xs[k].d.v.v = xs[k].d.v.v + 1.0;
                    const D3 r = m.F2(xspan, yspan);
                    if (!all_finite(r))
                        throw EvaluationError("non-finite F^2 derivative at x-seed " + std::to_string(k));
                    ys[i].v.v.d = 0.0;
                    ys[j].v.d.v = 0.0;
                    xs[k].d.v.v = 0.0;
                    out.dgdx(i, j, k) = 0.5 * r.d.d.d;
                    out.dgdx(j, i, k) = out.dgdx(i, j, k);
                }
            }
        }
    }

    Cholesky chol;
    detail::spd_or_throw(out.g, p, m.name, chol);
    out.ginv = chol.inverse();
    return out;
}

/// g_ij = 1/2 d^2 F^2 / dy^i dy^j, with positive definiteness verified by a
/// symmetric eigenvalue solve.
inline MetricValue fundamental_tensor(const FinslerModel& m, const SlitPoint& p) {
    const MetricBundle b = metric_bundle(m, p, /*need_dgdx=*/false);
    const double lam = min_eigenvalue(b.g);
    if (!(lam > 0.0))
        throw StrongConvexityViolation(
            "fundamental tensor of '" + m.name + "' has non-positive eigenvalue " +
                std::to_string(lam),
            lam, p.x, p.y);
    return {b.g, p};
}

/// A_ijk = (F/2) dg_ij/dy^k, via one more Taylor level instead of a
/// finite-difference pass.
inline CartanValue cartan_tensor(const FinslerModel& m, const SlitPoint& p) {
    const MetricBundle b = metric_bundle(m, p, /*need_dgdx=*/false);
    return {b.A, p};
}

} // namespace finsler
