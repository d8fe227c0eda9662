#pragma once

#include "finsler/connection.hpp"

namespace finsler {

/// hh- and hv-curvature of the Chern connection at a slit point.
struct CurvatureValue {
    Ten4 R; // R(i,j,k,l) = R^i_jkl
    Ten4 P; // P(i,j,k,l) = P^i_jkl
    SlitPoint point;
};

struct FlagValue {
    double K = 0.0;
    SlitPoint flag;
    Vec transverse;
};

/// Center data plus the adapted-frame derivatives of the Chern coefficients.
/// Gamma itself is exact (Taylor route); its x/y derivatives are Richardson-
/// extrapolated central differences, step 1e-5 (1 + |x|) resp. (1 + |y|).
struct CurvatureBundle {
    ChernBundle cb;
    Ten4 dGdx; // dGdx(i,j,k,l) = dGamma^i_jk / dx^l
    Ten4 dGdy; // dGdy(i,j,k,l) = dGamma^i_jk / dy^l
    Ten4 R;
    Ten4 P;
};

namespace detail {

inline Ten4 richardson_chern_derivative(const FinslerModel& m, const SlitPoint& p, bool in_x) {
    const int n = p.dim();
    const double h = 1e-5 * (1.0 + norm(in_x ? p.x : p.y));
    Ten4 d(n);
    for (int l = 0; l < n; ++l) {
        auto chern_at = [&](double step) {
            SlitPoint q = p;
            (in_x ? q.x[l] : q.y[l]) += step;
            return chern_bundle(m, q).chern;
        };
        const Ten3 cp = chern_at(h), cm = chern_at(-h);
        const Ten3 cp2 = chern_at(0.5 * h), cm2 = chern_at(-0.5 * h);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    const double d1 = (cp(i, j, k) - cm(i, j, k)) / (2.0 * h);
                    const double d2 = (cp2(i, j, k) - cm2(i, j, k)) / h;
                    d(i, j, k, l) = (4.0 * d2 - d1) / 3.0;
                }
    }
    return d;
}

} // namespace detail

inline CurvatureBundle curvature_bundle(const FinslerModel& m, const SlitPoint& p) {
    CurvatureBundle out;
    out.cb = chern_bundle(m, p);
    out.dGdx = detail::richardson_chern_derivative(m, p, /*in_x=*/true);
    out.dGdy = detail::richardson_chern_derivative(m, p, /*in_x=*/false);

    const int n = p.dim();
    const Ten3& G = out.cb.chern;
    const Mat& N = out.cb.N;

    // adapted-frame derivative of Gamma
    Ten4 dG(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double v = out.dGdx(i, j, k, l);
                    for (int h = 0; h < n; ++h) v -= N(h, l) * out.dGdy(i, j, k, h);
                    dG(i, j, k, l) = v;
                }

    out.R = Ten4(n);
    out.P = Ten4(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double r = dG(i, j, l, k) - dG(i, j, k, l);
                    for (int h = 0; h < n; ++h)
                        r += G(i, h, k) * G(h, j, l) - G(i, h, l) * G(h, j, k);
                    out.R(i, j, k, l) = r;
                    out.P(i, j, k, l) = -out.cb.mb.F * out.dGdy(i, j, k, l);
                }
    return out;
}

inline Ten4 hh_curvature(const FinslerModel& m, const SlitPoint& p) {
    return curvature_bundle(m, p).R;
}

inline Ten4 hv_curvature(const FinslerModel& m, const SlitPoint& p) {
    return curvature_bundle(m, p).P;
}

/// Flag curvature with flag pole y and transverse edge V:
/// K = V^i y^j R_ijkl y^l V^k / (g(V,V) g(y,y) - g(y,V)^2), R lowered on the
/// first index.
inline FlagValue flag_curvature(const FinslerModel& m, const SlitPoint& p, const Vec& V) {
    const CurvatureBundle b = curvature_bundle(m, p);
    const int n = p.dim();
    const Mat& g = b.cb.mb.g;

    const double gVV = g.quad(V, V);
    const double gyy = g.quad(p.y, p.y);
    const double gyV = g.quad(p.y, V);
    const double denom = gVV * gyy - gyV * gyV;
    const double scale = std::abs(gVV * gyy);
    if (!(denom > 1e-12 * scale))
        throw DegenerateFlag("flag curvature: transverse edge is parallel to the flag pole");

    // R_ijkl = g_im R^m_jkl
    double num = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    double low = 0.0;
                    for (int mm = 0; mm < n; ++mm) low += g(i, mm) * b.R(mm, j, k, l);
                    num += V[i] * p.y[j] * low * p.y[l] * V[k];
                }
    return {num / denom, p, V};
}

inline Ten3 landsberg_from_bundle(const CurvatureBundle& b, const SlitPoint& p) {
    const int n = p.dim();
    const Mat& g = b.cb.mb.g;
    const double F = b.cb.mb.F;
    // y_m = g_mj y^j
    Vec ylow(n, 0.0);
    for (int mm = 0; mm < n; ++mm)
        for (int j = 0; j < n; ++j) ylow[mm] += g(mm, j) * p.y[j];
    Ten3 Adot(n);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l) {
                double s = 0.0;
                for (int mm = 0; mm < n; ++mm) s += ylow[mm] * b.P(mm, i, k, l);
                Adot(i, k, l) = -s / F;
            }
    return Adot;
}

/// Landsberg tensor: Adot_ikl = -l^j P_jikl with l = y/F and the hv-curvature
/// lowered on its first index.
inline Ten3 landsberg_tensor(const FinslerModel& m, const SlitPoint& p) {
    const CurvatureBundle b = curvature_bundle(m, p);
    return landsberg_from_bundle(b, p);
}

} // namespace finsler
