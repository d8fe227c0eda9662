#pragma once

#include <string>
#include <vector>

#include "finsler/field.hpp"
#include "finsler/point.hpp"

namespace finsler {

/// Value and derivatives of a scalar field at a slit point: gradient and
/// Hessian in y, gradient in x, and the mixed block d^2/dx dy.
struct Jet2Value {
    double value = 0.0;
    Vec dy;   // dy[i]    = df/dy^i
    Mat dyy;  // dyy(i,j) = d^2 f / dy^i dy^j
    Vec dx;   // dx[i]    = df/dx^i
    Mat dxy;  // dxy(i,j) = d^2 f / dx^i dy^j
};

namespace detail {

template <class S>
std::vector<S> lift(const Vec& v) {
    std::vector<S> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = S(v[i]);
    return out;
}

inline void check_finite(double r, const char* what, int i, int j) {
    if (std::isfinite(r)) return;
    std::string msg = std::string("non-finite value while differentiating ") + what;
    if (i >= 0) msg += " (seed index " + std::to_string(i) + (j >= 0 ? "," + std::to_string(j) : "") + ")";
    throw EvaluationError(msg);
}

} // namespace detail

/// Evaluates f and all Jet2Value derivative blocks at p by truncated Taylor
/// (dual number) propagation, one seeded coordinate direction per pass.
inline Jet2Value eval_jet(const ScalarField& f, const SlitPoint& p) {
    validate(p);
    const int n = p.dim();
    Jet2Value out;
    out.dy.assign(n, 0.0);
    out.dx.assign(n, 0.0);
    out.dyy = Mat(n, n);
    out.dxy = Mat(n, n);

    out.value = f(p.x, p.y);
    detail::check_finite(out.value, "f", -1, -1);

    // first derivatives
    {
        auto xs = detail::lift<D1>(p.x);
        auto ys = detail::lift<D1>(p.y);
        for (int i = 0; i < n; ++i) {
            ys[i].d = 1.0;
            const D1 r = f(std::span<const D1>(xs), std::span<const D1>(ys));
            if (!all_finite(r)) detail::check_finite(std::nan(""), "df/dy", i, -1);
            out.dy[i] = r.d;
            ys[i].d = 0.0;
        }
        for (int i = 0; i < n; ++i) {
            xs[i].d = 1.0;
            const D1 r = f(std::span<const D1>(xs), std::span<const D1>(ys));
            if (!all_finite(r)) detail::check_finite(std::nan(""), "df/dx", i, -1);
            out.dx[i] = r.d;
            xs[i].d = 0.0;
        }
    }

    // second derivatives: inner level seeds the first index, outer the second
    {
        auto xs = detail::lift<D2>(p.x);
        auto ys = detail::lift<D2>(p.y);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                ys[i].v.d = 1.0;
                ys[j].d.v = ys[j].d.v + 1.0;
                const D2 r = f(std::span<const D2>(xs), std::span<const D2>(ys));
                if (!all_finite(r)) detail::check_finite(std::nan(""), "d2f/dy dy", i, j);
                out.dyy(i, j) = r.d.d;
                ys[i].v.d = 0.0;
                ys[j].d.v = 0.0;
            }
        }
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) {
                xs[i].d.v = 1.0;
                ys[j].v.d = 1.0;
                const D2 r = f(std::span<const D2>(xs), std::span<const D2>(ys));
                if (!all_finite(r)) detail::check_finite(std::nan(""), "d2f/dx dy", i, j);
                out.dxy(i, j) = r.d.d;
                xs[i].d.v = 0.0;
                ys[j].v.d = 0.0;
            }
        }
    }
    return out;
}

/// Central-difference estimate of the same derivative blocks. Test/diagnostic
/// oracle only; deliberately shares no code with eval_jet.
inline Jet2Value fd_check(const ScalarField& f, const SlitPoint& p, double h) {
    validate(p);
    if (!(h > 0.0)) throw EvaluationError("fd_check: step size must be positive");
    const int n = p.dim();

    // every stencil point must stay on the slit bundle
    for (int i = 0; i < n; ++i) {
        for (double s : {-2.0, -1.0, 1.0, 2.0}) {
            Vec yp = p.y;
            yp[i] += s * h;
            if (!(norm(yp) > 0.0))
                throw EvaluationError("fd_check: stencil leaves slit bundle at y-coordinate " +
                                      std::to_string(i));
        }
    }

    auto at = [&](const Vec& x, const Vec& y) { return f(x, y); };

    Jet2Value out;
    out.value = at(p.x, p.y);
    out.dy.assign(n, 0.0);
    out.dx.assign(n, 0.0);
    out.dyy = Mat(n, n);
    out.dxy = Mat(n, n);

    Vec x = p.x, y = p.y;
    for (int i = 0; i < n; ++i) {
        y[i] = p.y[i] + h;
        const double fp = at(x, y);
        y[i] = p.y[i] - h;
        const double fm = at(x, y);
        y[i] = p.y[i];
        out.dy[i] = (fp - fm) / (2.0 * h);
        out.dyy(i, i) = (fp - 2.0 * out.value + fm) / (h * h);
    }
    for (int i = 0; i < n; ++i) {
        x[i] = p.x[i] + h;
        const double fp = at(x, y);
        x[i] = p.x[i] - h;
        const double fm = at(x, y);
        x[i] = p.x[i];
        out.dx[i] = (fp - fm) / (2.0 * h);
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            y[i] = p.y[i] + h; y[j] = p.y[j] + h;
            const double fpp = at(x, y);
            y[j] = p.y[j] - h;
            const double fpm = at(x, y);
            y[i] = p.y[i] - h; y[j] = p.y[j] + h;
            const double fmp = at(x, y);
            y[j] = p.y[j] - h;
            const double fmm = at(x, y);
            y[i] = p.y[i]; y[j] = p.y[j];
            out.dyy(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            x[i] = p.x[i] + h; y[j] = p.y[j] + h;
            const double fpp = at(x, y);
            y[j] = p.y[j] - h;
            const double fpm = at(x, y);
            x[i] = p.x[i] - h; y[j] = p.y[j] + h;
            const double fmp = at(x, y);
            y[j] = p.y[j] - h;
            const double fmm = at(x, y);
            x[i] = p.x[i]; y[j] = p.y[j];
            out.dxy(i, j) = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
        }
    }
    return out;
}

} // namespace finsler
