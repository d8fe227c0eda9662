#pragma once

#include <functional>
#include <string>
#include <utility>

#include "finsler/metric.hpp"

namespace finsler {

/// Connection coefficients as a field over the slit bundle. y_independent
/// marks fields that are genuinely affine connections on the base (averaged
/// fields, Levi-Civita of a Riemannian model, Berwald structures).
struct ConnectionField {
    int dim = 0;
    std::string source;
    std::function<Ten3(const SlitPoint&)> coefficients;
    bool y_independent = false;
    bool torsion_free = true;
};

struct NonlinearConnectionValue {
    Mat N; // N(i,j) = N^i_j
    SlitPoint point;
};

/// Metric data plus the formal Christoffel symbols, nonlinear connection and
/// Chern coefficients at one slit point.
struct ChernBundle {
    MetricBundle mb;
    Ten3 gamma; // formal second-kind Christoffel symbols
    Mat N;      // nonlinear connection coefficients
    Ten3 chern; // Chern connection coefficients
};

namespace detail {

inline Ten3 gamma_from_bundle(const MetricBundle& mb) {
    const int n = mb.g.rows();
    Ten3 gamma(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                double s = 0.0;
                for (int a = 0; a < n; ++a)
                    s += mb.ginv(i, a) *
                         (mb.dgdx(a, j, k) - mb.dgdx(j, k, a) + mb.dgdx(a, k, j));
                gamma(i, j, k) = 0.5 * s;
                gamma(i, k, j) = gamma(i, j, k);
            }
    return gamma;
}

inline Mat nonlinear_from_bundle(const MetricBundle& mb, const Ten3& gamma, const Vec& y) {
    const int n = mb.g.rows();
    // c^k = gamma^k_rs y^r y^s
    Vec c(n, 0.0);
    for (int k = 0; k < n; ++k)
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s) c[k] += gamma(k, r, s) * y[r] * y[s];
    Mat N(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double v = 0.0;
            for (int k = 0; k < n; ++k) v += gamma(i, j, k) * y[k];
            double corr = 0.0;
            for (int l = 0; l < n; ++l)
                for (int k = 0; k < n; ++k) corr += mb.ginv(i, l) * mb.A(l, j, k) * c[k];
            N(i, j) = v - corr / mb.F;
        }
    return N;
}

inline Ten3 chern_from_bundle(const MetricBundle& mb, const Mat& N) {
    const int n = mb.g.rows();
    // delta g_ij / delta x^k = dg/dx - N^m_k dg/dy^m, with dg/dy = 2A/F
    Ten3 dg(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double corr = 0.0;
                for (int m = 0; m < n; ++m) corr += N(m, k) * 2.0 * mb.A(i, j, m) / mb.F;
                dg(i, j, k) = mb.dgdx(i, j, k) - corr;
            }
    Ten3 chern(n);
    for (int l = 0; l < n; ++l)
        for (int j = 0; j < n; ++j)
            for (int k = j; k < n; ++k) {
                double s = 0.0;
                for (int a = 0; a < n; ++a)
                    s += mb.ginv(l, a) * (dg(a, j, k) + dg(a, k, j) - dg(j, k, a));
                chern(l, j, k) = 0.5 * s;
                chern(l, k, j) = chern(l, j, k);
            }
    return chern;
}

} // namespace detail

inline ChernBundle chern_bundle(const FinslerModel& m, const SlitPoint& p) {
    ChernBundle b;
    b.mb = metric_bundle(m, p);
    b.gamma = detail::gamma_from_bundle(b.mb);
    b.N = detail::nonlinear_from_bundle(b.mb, b.gamma, p.y);
    b.chern = detail::chern_from_bundle(b.mb, b.N);
    return b;
}

/// Formal second-kind Christoffel symbols of the fundamental tensor.
inline Ten3 formal_christoffel(const FinslerModel& m, const SlitPoint& p) {
    const MetricBundle mb = metric_bundle(m, p);
    return detail::gamma_from_bundle(mb);
}

inline NonlinearConnectionValue nonlinear_connection(const FinslerModel& m, const SlitPoint& p) {
    const MetricBundle mb = metric_bundle(m, p);
    const Ten3 gamma = detail::gamma_from_bundle(mb);
    return {detail::nonlinear_from_bundle(mb, gamma, p.y), p};
}

/// Adapted-frame derivative of a scalar field:
/// delta f / delta x^k = df/dx^k - N^i_k df/dy^i.
inline double horizontal_derivative(const FinslerModel& m, const ScalarField& f,
                                    const SlitPoint& p, int k) {
    const NonlinearConnectionValue nc = nonlinear_connection(m, p);
    const Jet2Value j = eval_jet(f, p);
    double v = j.dx[k];
    for (int i = 0; i < p.dim(); ++i) v -= nc.N(i, k) * j.dy[i];
    return v;
}

inline Ten3 chern_coefficients(const FinslerModel& m, const SlitPoint& p) {
    return chern_bundle(m, p).chern;
}

/// Berwald connection coefficients G^i_jk = dN^i_j/dy^k, by Richardson-
/// extrapolated central differences of the nonlinear connection.
inline Ten3 berwald_coefficients(const FinslerModel& m, const SlitPoint& p) {
    const int n = p.dim();
    const double h = 1e-5 * (1.0 + norm(p.y));
    Ten3 G(n);
    for (int k = 0; k < n; ++k) {
        auto N_at = [&](double step) {
            SlitPoint q = p;
            q.y[k] += step;
            const MetricBundle mb = metric_bundle(m, q, /*need_dgdx=*/true);
            const Ten3 gamma = detail::gamma_from_bundle(mb);
            return detail::nonlinear_from_bundle(mb, gamma, q.y);
        };
        const Mat Np = N_at(h), Nm = N_at(-h);
        const Mat Np2 = N_at(0.5 * h), Nm2 = N_at(-0.5 * h);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double d1 = (Np(i, j) - Nm(i, j)) / (2.0 * h);
                const double d2 = (Np2(i, j) - Nm2(i, j)) / h;
                G(i, j, k) = (4.0 * d2 - d1) / 3.0;
            }
    }
    return G;
}

/// Cartan connection: horizontal part equals the Chern coefficients, the
/// vertical part is the Cartan tensor with its first index raised.
inline std::pair<Ten3, Ten3> cartan_connection_coefficients(const FinslerModel& m,
                                                            const SlitPoint& p) {
    const ChernBundle b = chern_bundle(m, p);
    const int n = p.dim();
    Ten3 vertical(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double s = 0.0;
                for (int l = 0; l < n; ++l) s += b.mb.ginv(k, l) * b.mb.A(l, i, j);
                vertical(k, i, j) = s;
            }
    return {b.chern, vertical};
}

struct StructureEquationReport {
    double horizontal_compatibility = 0.0; // delta g - g Gamma - g Gamma
    double torsion_symmetry = 0.0;         // Gamma^i_jk - Gamma^i_kj
    double vertical_compatibility = 0.0;   // F dg/dy - 2A

    double worst() const {
        return std::max({horizontal_compatibility, torsion_symmetry, vertical_compatibility});
    }
};

/// Residuals of the defining equations of the Chern connection at sampled
/// points. The vertical check differentiates g by finite differences, so it
/// is independent of the Taylor route that produced A.
inline StructureEquationReport verify_structure_equations(const FinslerModel& m, int samples = 20,
                                                          std::uint64_t seed = 42) {
    SampleGen gen(seed);
    StructureEquationReport rep;
    const int n = m.dim;
    for (int s = 0; s < samples; ++s) {
        const SlitPoint p = sample_point(m, gen);
        const ChernBundle b = chern_bundle(m, p);

        // dg/dy by Richardson-extrapolated central differences of the metric
        // itself; step large enough that roundoff stays below 1e-12
        Ten3 dgdy_fd(n);
        const double h = 1e-3 * (1.0 + norm(p.y));
        for (int k = 0; k < n; ++k) {
            auto g_at = [&](double step) {
                SlitPoint q = p;
                q.y[k] += step;
                return metric_bundle(m, q, false).g;
            };
            const Mat gp = g_at(h), gm = g_at(-h), gp2 = g_at(0.5 * h), gm2 = g_at(-0.5 * h);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double d1 = (gp(i, j) - gm(i, j)) / (2.0 * h);
                    const double d2 = (gp2(i, j) - gm2(i, j)) / h;
                    dgdy_fd(i, j, k) = (4.0 * d2 - d1) / 3.0;
                }
        }

        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double delta_g = b.mb.dgdx(i, j, k);
                    for (int mm = 0; mm < n; ++mm) delta_g -= b.N(mm, k) * dgdy_fd(i, j, mm);
                    double compat = delta_g;
                    for (int mm = 0; mm < n; ++mm)
                        compat -= b.mb.g(mm, j) * b.chern(mm, i, k) +
                                  b.mb.g(i, mm) * b.chern(mm, j, k);
                    rep.horizontal_compatibility =
                        std::max(rep.horizontal_compatibility, std::abs(compat));
                    rep.torsion_symmetry = std::max(
                        rep.torsion_symmetry, std::abs(b.chern(i, j, k) - b.chern(i, k, j)));
                    rep.vertical_compatibility =
                        std::max(rep.vertical_compatibility,
                                 std::abs(b.mb.F * dgdy_fd(i, j, k) - 2.0 * b.mb.A(i, j, k)));
                }
    }
    return rep;
}

/// The Chern connection of a model, packaged as a field.
inline ConnectionField chern_field(const FinslerModel& m) {
    ConnectionField f;
    f.dim = m.dim;
    f.source = "chern(" + m.name + ")";
    f.coefficients = [m](const SlitPoint& p) { return chern_coefficients(m, p); };
    f.y_independent = false;
    f.torsion_free = true;
    return f;
}

/// The Berwald connection of a model, packaged as a field.
inline ConnectionField berwald_field(const FinslerModel& m) {
    ConnectionField f;
    f.dim = m.dim;
    f.source = "berwald(" + m.name + ")";
    f.coefficients = [m](const SlitPoint& p) { return berwald_coefficients(m, p); };
    f.y_independent = false;
    f.torsion_free = true;
    return f;
}

} // namespace finsler
