#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "finsler/expression.hpp"
#include "finsler/model.hpp"

namespace finsler {

namespace detail {

inline std::vector<std::pair<double, double>> default_box(int n) {
    return std::vector<std::pair<double, double>>(static_cast<std::size_t>(n), {-1.0, 1.0});
}

/// Quadratic form from a matrix of parsed expressions: sum q_ij * y_i * y_j.
/// The entries may reference x (Riemannian metrics) or y (Numata forms).
template <class S>
S quad_form(const std::vector<std::vector<Expr>>& q, std::span<const S> x, std::span<const S> y) {
    const int n = static_cast<int>(y.size());
    S acc(0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) acc = acc + q[i][j].eval<S>(x, y) * (y[i] * y[j]);
    return acc;
}

template <class S>
S one_form(const std::vector<Expr>& b, std::span<const S> x, std::span<const S> y) {
    S acc(0.0);
    for (std::size_t i = 0; i < b.size(); ++i) acc = acc + b[i].eval<S>(x, y) * y[i];
    return acc;
}

/// Root of x1 + x2*xi - psi(xi) = 0 in the given bracket, at plain doubles:
/// bisection bracketing with Newton refinement to 1e-12 relative.
inline double solve_xi_value(double x1, double x2, const Expr& psi, double lo, double hi) {
    auto residual = [&](double xi) {
        const double pv = psi.eval<double>(std::span<const double>{}, std::span<const double>{}, &xi);
        return x1 + x2 * xi - pv;
    };
    double flo = residual(lo), fhi = residual(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) {
        // widen the bracket a few times before giving up
        double span = hi - lo;
        for (int k = 0; k < 8 && flo * fhi > 0.0; ++k) {
            lo -= span;
            hi += span;
            span = hi - lo;
            flo = residual(lo);
            fhi = residual(hi);
        }
        if (flo * fhi > 0.0)
            throw EvaluationError("berwald_rund: no root of x1 + x2*xi = psi(xi) in bracket");
    }
    double a = lo, b = hi, fa = flo;
    double xi = 0.5 * (a + b);
    for (int it = 0; it < 200; ++it) {
        const double r = residual(xi);
        if (r == 0.0) break;
        if (fa * r < 0.0) b = xi;
        else { a = xi; fa = r; }
        // Newton step, kept only if it stays inside the bracket
        const double dxi_named = xi;
        D1 xid{dxi_named, 1.0};
        const D1 pv = psi.eval<D1>(std::span<const D1>{}, std::span<const D1>{}, &xid);
        const double rp = x2 - pv.d;
        double next = xi - r / rp;
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        if (std::abs(next - xi) < 1e-12 * (1.0 + std::abs(xi))) { xi = next; break; }
        xi = next;
    }
    return xi;
}

/// Resolves xi at any dual level: solve at the value level, then run a few
/// Newton steps in full dual arithmetic so the derivative parts settle to the
/// implicit-function values.
template <class S>
S resolve_xi(const S& x1, const S& x2, const Expr& psi, double lo, double hi) {
    const double xi0 = solve_xi_value(value_of(x1), value_of(x2), psi, lo, hi);
    S xi(xi0);
    for (int it = 0; it < 4; ++it) {
        Dual<S> xid{xi, S(1.0)};
        const Dual<S> pv = psi.eval<Dual<S>>(std::span<const Dual<S>>{}, std::span<const Dual<S>>{}, &xid);
        const S r = x1 + x2 * xi - pv.v;
        const S rp = x2 - pv.d;
        xi = xi - r / rp;
    }
    return xi;
}

} // namespace detail

inline FinslerModel make_euclidean(int dim, std::string name = "euclidean") {
    FinslerModel m;
    m.name = std::move(name);
    m.family = "euclidean";
    m.dim = dim;
    m.F = ScalarField::from(dim, [](auto /*x*/, auto y) {
        using S = std::decay_t<decltype(y[0])>;
        S acc(0.0);
        for (const auto& yi : y) acc = acc + yi * yi;
        return sqrt(acc);
    });
    m.F2 = m.F.squared();
    m.chart_box = detail::default_box(dim);
    return m;
}

/// F = sqrt(g_ij(x) y^i y^j) for a user-supplied matrix of expressions.
inline FinslerModel make_riemannian(int dim, std::vector<std::vector<Expr>> g,
                                    std::string name = "riemannian") {
    FinslerModel m;
    m.name = std::move(name);
    m.family = "riemannian";
    m.dim = dim;
    auto gp = std::make_shared<std::vector<std::vector<Expr>>>(std::move(g));
    m.F = ScalarField::from(dim, [gp](auto x, auto y) { return sqrt(detail::quad_form(*gp, x, y)); });
    m.F2 = m.F.squared();
    m.chart_box = detail::default_box(dim);
    return m;
}

/// Randers structure F = alpha + beta = sqrt(a_ij y^i y^j) + b_i y^i.
/// The bound ||b||_a < 1 is the caller's responsibility to have validated
/// (model_io rejects violating inputs on a chart sample).
inline FinslerModel make_randers(int dim, std::vector<std::vector<Expr>> a, std::vector<Expr> b,
                                 std::string name = "randers") {
    FinslerModel m;
    m.name = std::move(name);
    m.family = "randers";
    m.dim = dim;
    m.randers = std::make_shared<RandersData>(RandersData{dim, a, b});
    auto ap = std::make_shared<std::vector<std::vector<Expr>>>(std::move(a));
    auto bp = std::make_shared<std::vector<Expr>>(std::move(b));
    m.F = ScalarField::from(dim, [ap, bp](auto x, auto y) {
        return sqrt(detail::quad_form(*ap, x, y)) + detail::one_form(*bp, x, y);
    });
    m.F2 = m.F.squared();
    m.chart_box = detail::default_box(dim);
    return m;
}

/// Numata-type structure F = sqrt(q_ij(y) y^i y^j) + b_i(x) y^i, where the
/// y-dependent quadratic form q (degree-0 homogeneous entries) is supplied by
/// the user; no canonical choice exists, so none is baked in.
inline FinslerModel make_numata(int dim, std::vector<std::vector<Expr>> q, std::vector<Expr> b,
                                std::string name = "numata") {
    FinslerModel m;
    m.name = std::move(name);
    m.family = "numata";
    m.dim = dim;
    auto qp = std::make_shared<std::vector<std::vector<Expr>>>(std::move(q));
    auto bp = std::make_shared<std::vector<Expr>>(std::move(b));
    m.F = ScalarField::from(dim, [qp, bp](auto x, auto y) {
        auto alpha = sqrt(detail::quad_form(*qp, x, y));
        if (bp->empty()) return alpha;
        return alpha + detail::one_form(*bp, x, y);
    });
    m.F2 = m.F.squared();
    m.chart_box = detail::default_box(dim);
    return m;
}

/// Berwald-Rund surface on R^2: F(x, y) = y2 (xi + y1/y2)^2 with xi(x) the
/// root of x1 + x2 xi = psi(xi). Strongly convex only on the sector
/// y2 > 0, y1 + xi y2 != 0; the shipped cone is the y1 + xi y2 > 0 half.
inline FinslerModel make_berwald_rund(Expr psi, double xi_lo = 0.0, double xi_hi = 8.0,
                                      std::string name = "berwald_rund") {
    FinslerModel m;
    m.name = std::move(name);
    m.family = "berwald_rund";
    m.dim = 2;
    auto psip = std::make_shared<Expr>(std::move(psi));
    m.F = ScalarField::from(2, [psip, xi_lo, xi_hi](auto x, auto y) {
        using S = std::decay_t<decltype(y[0])>;
        const S xi = detail::resolve_xi<S>(x[0], x[1], *psip, xi_lo, xi_hi);
        const S u = y[0] + xi * y[1];
        return u * u / y[1];
    });
    m.F2 = m.F.squared();
    m.chart_box = {{0.5, 1.5}, {0.2, 0.8}};
    m.y_global = false;
    m.in_domain = [psip, xi_lo, xi_hi](const SlitPoint& p) {
        if (!(p.y[1] > 0.0)) return false;
        const double xi = detail::solve_xi_value(p.x[0], p.x[1], *psip, xi_lo, xi_hi);
        const double u = p.y[0] + xi * p.y[1];
        return std::abs(u) > 1e-8 * norm(p.y);
    };
    m.cone = [psip, xi_lo, xi_hi](const Vec& x) {
        const double xi = detail::solve_xi_value(x[0], x[1], *psip, xi_lo, xi_hi);
        // u = cos(theta) + xi sin(theta) > 0 and sin(theta) > 0
        return DirectionCone{0.0, 0.5 * 3.14159265358979323846 + std::atan(xi)};
    };
    return m;
}

/// The Randers structure on S^2 x S^1 built from the product round metric and
/// the parallel one-form eps dt; coordinates (theta, phi, t) = (x0, x1, x2).
inline FinslerModel make_sphere_circle_randers(double eps,
                                               std::string name = "sphere_circle_randers") {
    FinslerModel m;
    m.name = std::move(name);
    m.family = "sphere_circle_randers";
    m.dim = 3;
    m.F = ScalarField::from(3, [eps](auto x, auto y) {
        auto s = sin(x[1]);
        return sqrt(s * s * (y[0] * y[0]) + y[1] * y[1] + y[2] * y[2]) + eps * y[2];
    });
    m.F2 = m.F.squared();
    // phi stays clear of the coordinate poles where the product metric degenerates
    m.chart_box = {{0.0, 6.2831853}, {0.4, 2.7415927}, {0.0, 6.2831853}};
    char eps_text[40];
    std::snprintf(eps_text, sizeof(eps_text), "%.17g", eps);
    m.randers = std::make_shared<RandersData>(RandersData{
        3,
        {{Expr::parse("sin(x[1])^2"), Expr::parse("0"), Expr::parse("0")},
         {Expr::parse("0"), Expr::parse("1"), Expr::parse("0")},
         {Expr::parse("0"), Expr::parse("0"), Expr::parse("1")}},
        {Expr::parse("0"), Expr::parse("0"), Expr::parse(eps_text)}});
    return m;
}

/// Slope metric F = sqrt(eta_ij y^i y^j) / c(x, y); c must be positive and
/// degree-0 homogeneous in y on the intended chart.
inline FinslerModel make_slope(int dim, std::vector<std::vector<Expr>> eta, Expr c,
                               std::string name = "slope") {
    FinslerModel m;
    m.name = std::move(name);
    m.family = "slope";
    m.dim = dim;
    auto ep = std::make_shared<std::vector<std::vector<Expr>>>(std::move(eta));
    auto cp = std::make_shared<Expr>(std::move(c));
    m.F = ScalarField::from(dim, [ep, cp](auto x, auto y) {
        using S = std::decay_t<decltype(y[0])>;
        const S speed = cp->eval<S>(x, y);
        return sqrt(detail::quad_form(*ep, x, y) / (speed * speed));
    });
    m.F2 = m.F.squared();
    m.chart_box = detail::default_box(dim);
    return m;
}

/// User-supplied norm from a single expression over x[i], y[i].
inline FinslerModel make_custom(int dim, Expr f, std::string name = "custom") {
    FinslerModel m;
    m.name = std::move(name);
    m.family = "custom";
    m.dim = dim;
    auto fp = std::make_shared<Expr>(std::move(f));
    m.F = ScalarField::from(dim, [fp](auto x, auto y) {
        using S = std::decay_t<decltype(y[0])>;
        return fp->eval<S>(x, y);
    });
    m.F2 = m.F.squared();
    m.chart_box = detail::default_box(dim);
    return m;
}

/// The round unit 2-sphere chart (theta, phi), g = diag(sin^2 phi, 1).
inline FinslerModel make_round_sphere() {
    std::vector<std::vector<Expr>> g = {
        {Expr::parse("sin(x[1])^2"), Expr::parse("0")},
        {Expr::parse("0"), Expr::parse("1")}};
    FinslerModel m = make_riemannian(2, std::move(g), "round_sphere");
    m.chart_box = {{0.0, 6.2831853}, {0.4, 2.7415927}};
    return m;
}

} // namespace finsler
