#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "finsler/average.hpp"
#include "finsler/connection.hpp"

namespace finsler {

/// Parametric curve on the base chart.
struct BasePath {
    std::function<Vec(double)> position;
    std::function<Vec(double)> velocity;
    double t0 = 0.0;
    double t1 = 1.0;
};

inline BasePath segment_path(Vec a, Vec b) {
    BasePath p;
    Vec d = b - a;
    p.position = [a, d](double t) { return a + t * d; };
    p.velocity = [d](double) { return d; };
    return p;
}

/// Closed loop of the given radius in the (i, j) coordinate plane, t in [0,1].
inline BasePath circle_path(Vec center, double radius, int i, int j) {
    BasePath p;
    p.position = [=](double t) {
        Vec x = center;
        const double a = 2.0 * 3.14159265358979323846 * t;
        x[i] += radius * std::cos(a) - radius; // starts and ends at `center`
        x[j] += radius * std::sin(a);
        return x;
    };
    p.velocity = [=](double t) {
        Vec v(center.size(), 0.0);
        const double w = 2.0 * 3.14159265358979323846;
        const double a = w * t;
        v[i] = -radius * w * std::sin(a);
        v[j] = radius * w * std::cos(a);
        return v;
    };
    return p;
}

inline BasePath reversed_path(const BasePath& p) {
    BasePath r;
    const double t0 = p.t0, t1 = p.t1;
    r.t0 = t0;
    r.t1 = t1;
    r.position = [=](double t) { return p.position(t1 + t0 - t); };
    r.velocity = [=](double t) { return -p.velocity(t1 + t0 - t); };
    return r;
}

/// Great-circle arc between two orthonormal ambient vectors on the unit
/// 2-sphere, expressed in the (theta, phi) chart; s in [0, pi/2]. The
/// azimuth is unwrapped at construction so the chart image is smooth.
inline BasePath great_circle_arc(const Vec& P, const Vec& Q) {
    auto ambient = [P, Q](double s) {
        Vec p(3);
        for (int i = 0; i < 3; ++i) p[i] = std::cos(s) * P[i] + std::sin(s) * Q[i];
        return p;
    };
    // detect atan2 branch crossings on a dense sample
    auto offsets = std::make_shared<std::vector<std::pair<double, double>>>();
    const int samples = 2048;
    double prev = 0.0;
    for (int k = 0; k <= samples; ++k) {
        const double s = 0.5 * 3.14159265358979323846 * k / samples;
        const Vec p = ambient(s);
        const double raw = std::atan2(p[1], p[0]);
        if (k > 0) {
            if (raw - prev > 3.14159265358979323846) offsets->push_back({s, -2.0 * 3.14159265358979323846});
            if (raw - prev < -3.14159265358979323846) offsets->push_back({s, 2.0 * 3.14159265358979323846});
        }
        prev = raw;
    }
    BasePath path;
    path.t0 = 0.0;
    path.t1 = 0.5 * 3.14159265358979323846;
    path.position = [ambient, offsets](double s) {
        const Vec p = ambient(s);
        double theta = std::atan2(p[1], p[0]);
        for (const auto& [sc, delta] : *offsets)
            if (s >= sc) theta += delta;
        const double phi = std::acos(std::clamp(p[2], -1.0, 1.0));
        return Vec{theta, phi};
    };
    path.velocity = [ambient, P, Q](double s) {
        const Vec p = ambient(s);
        Vec dp(3);
        for (int i = 0; i < 3; ++i) dp[i] = -std::sin(s) * P[i] + std::cos(s) * Q[i];
        const double rho2 = p[0] * p[0] + p[1] * p[1];
        const double dtheta = (p[0] * dp[1] - p[1] * dp[0]) / rho2;
        const double dphi = -dp[2] / std::sqrt(std::max(1.0 - p[2] * p[2], 1e-300));
        return Vec{dtheta, dphi};
    };
    return path;
}

// ---------------------------------------------------------------------------
// Adaptive Dormand-Prince 5(4) driver
// ---------------------------------------------------------------------------

namespace detail {

/// Integrates dy/dt = rhs(t, y) from t0, landing exactly on each requested
/// output time. on_sample is called at every output time, including t0.
template <class Rhs, class OnSample>
void dopri5(Rhs&& rhs, Vec y, double t0, std::span<const double> t_out, double tol,
            OnSample&& on_sample) {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                            a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                            b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static constexpr double e1 = 5179.0 / 57600, e3 = 7571.0 / 16695, e4 = 393.0 / 640,
                            e5 = -92097.0 / 339200, e6 = 187.0 / 2100, e7 = 1.0 / 40;

    const std::size_t n = y.size();
    double t = t0;
    on_sample(t, y);

    Vec k1 = rhs(t, y), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), tmp(n), y5(n), y4(n);
    double span_total = t_out.empty() ? 1.0 : std::abs(t_out.back() - t0);
    if (span_total == 0.0) span_total = 1.0;
    double h = 0.01 * span_total;

    for (double target : t_out) {
        if (target == t) {
            on_sample(t, y);
            continue;
        }
        const double dir = target > t ? 1.0 : -1.0;
        h = dir * std::min(std::abs(h), std::abs(target - t));
        while (dir * (target - t) > 0.0) {
            if (std::abs(h) < 1e-14 * span_total)
                throw IntegrationStalled("adaptive step size underflow at t = " + std::to_string(t),
                                         t, y);
            if (dir * (t + h - target) > 0.0) h = target - t;

            auto stage = [&](Vec& k, double c, std::initializer_list<std::pair<double, const Vec*>> terms) {
                for (std::size_t i = 0; i < n; ++i) {
                    double s = y[i];
                    for (const auto& [coef, kk] : terms) s += h * coef * (*kk)[i];
                    tmp[i] = s;
                }
                k = rhs(t + c * h, tmp);
            };
            stage(k2, c2, {{a21, &k1}});
            stage(k3, c3, {{a31, &k1}, {a32, &k2}});
            stage(k4, c4, {{a41, &k1}, {a42, &k2}, {a43, &k3}});
            stage(k5, c5, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}});
            stage(k6, 1.0, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}});
            for (std::size_t i = 0; i < n; ++i)
                y5[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i] + b6 * k6[i]);
            k7 = rhs(t + h, y5);
            // scale-invariant controller: uniform rescaling of the state
            // reproduces the step sequence bit-for-bit, so linear ODEs
            // transport scaled data exactly proportionally
            double state_norm = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                state_norm = std::max({state_norm, std::abs(y[i]), std::abs(y5[i])});
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                y4[i] = y[i] + h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] +
                                    e7 * k7[i]);
                const double sc =
                    tol * (std::max(std::abs(y[i]), std::abs(y5[i])) + 0.01 * state_norm);
                const double d = sc > 0.0 ? (y5[i] - y4[i]) / sc : 0.0;
                err += d * d;
            }
            err = std::sqrt(err / n);
            if (err <= 1.0) {
                t += h;
                y = y5;
                k1 = k7; // FSAL
            }
            const double fac = std::clamp(0.9 * std::pow(std::max(err, 1e-16), -0.2), 0.2, 5.0);
            h *= fac;
        }
        t = target;
        on_sample(t, y);
    }
}

inline std::vector<double> linspace(double a, double b, int count) {
    std::vector<double> ts(count);
    for (int i = 0; i < count; ++i) ts[i] = a + (b - a) * i / (count - 1);
    return ts;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Geodesics
// ---------------------------------------------------------------------------

struct GeodesicSolution {
    std::vector<double> ts;
    std::vector<Vec> xs;
    std::vector<Vec> vs;
    double tolerance = 0.0;
    std::string connection;

    const Vec& x_end() const { return xs.back(); }
    const Vec& v_end() const { return vs.back(); }
};

/// Solves xdd^i + Gamma^i_jk(x, xd) xd^j xd^k = 0 with an adaptive embedded
/// Dormand-Prince 5(4) pair, landing exactly on the sample times.
inline GeodesicSolution integrate_geodesic(const ConnectionField& field, const Vec& x0,
                                           const Vec& v0, double t_end, double tol,
                                           int samples = 33) {
    const int n = field.dim;
    Vec z0(2 * n);
    for (int i = 0; i < n; ++i) {
        z0[i] = x0[i];
        z0[n + i] = v0[i];
    }
    auto rhs = [&](double, const Vec& z) {
        SlitPoint p;
        p.x.assign(z.begin(), z.begin() + n);
        p.y.assign(z.begin() + n, z.end());
        const Ten3 G = field.coefficients(p);
        Vec dz(2 * n);
        for (int i = 0; i < n; ++i) {
            dz[i] = p.y[i];
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) acc += G(i, j, k) * p.y[j] * p.y[k];
            dz[n + i] = -acc;
        }
        return dz;
    };
    GeodesicSolution sol;
    sol.tolerance = tol;
    sol.connection = field.source;
    const auto ts = detail::linspace(0.0, t_end, samples);
    detail::dopri5(rhs, z0, 0.0, std::span<const double>(ts).subspan(1), tol,
                   [&](double t, const Vec& z) {
                       sol.ts.push_back(t);
                       sol.xs.emplace_back(z.begin(), z.begin() + n);
                       sol.vs.emplace_back(z.begin() + n, z.end());
                   });
    return sol;
}

// ---------------------------------------------------------------------------
// Horizontal lift and parallel transport
// ---------------------------------------------------------------------------

struct TransportState {
    double t = 0.0;
    Vec x;
    Vec u; // reference vector (horizontal-lift fiber coordinate)
    Vec W; // transported vector
    double F_u = 0.0;
    double F_W = 0.0;
};

/// Horizontal lift of a base path: du^i/dt = -N^i_j(x(t), u) xd^j(t).
inline std::vector<TransportState> horizontal_lift(const FinslerModel& m, const BasePath& path,
                                                   const Vec& u0, double tol = 1e-9,
                                                   int samples = 17) {
    auto rhs = [&](double t, const Vec& u) {
        const SlitPoint p{path.position(t), u};
        const Mat N = nonlinear_connection(m, p).N;
        const Vec xd = path.velocity(t);
        Vec du(u.size(), 0.0);
        for (std::size_t i = 0; i < u.size(); ++i)
            for (std::size_t j = 0; j < u.size(); ++j) du[i] -= N(static_cast<int>(i), static_cast<int>(j)) * xd[j];
        return du;
    };
    std::vector<TransportState> out;
    const auto ts = detail::linspace(path.t0, path.t1, samples);
    detail::dopri5(rhs, u0, path.t0, std::span<const double>(ts).subspan(1), tol,
                   [&](double t, const Vec& u) {
                       TransportState s;
                       s.t = t;
                       s.x = path.position(t);
                       s.u = u;
                       s.W = u;
                       s.F_u = m.F(s.x, u);
                       s.F_W = s.F_u;
                       out.push_back(std::move(s));
                   });
    return out;
}

/// Parallel transport of W along a base path:
/// dW^i/dt + Gamma^i_jk(x, u) W^j xd^k = 0, with u the horizontally lifted
/// reference (required for y-dependent fields, ignored otherwise).
inline std::vector<TransportState> parallel_transport(const ConnectionField& field,
                                                      const FinslerModel& m, const BasePath& path,
                                                      const Vec& W0,
                                                      const std::optional<Vec>& u0 = std::nullopt,
                                                      double tol = 1e-9, int samples = 17) {
    const int n = field.dim;
    const bool lifted = !field.y_independent;
    if (lifted && !u0)
        throw MissingReference("parallel transport under the y-dependent field '" + field.source +
                               "' needs a reference vector u0");

    Vec z0;
    if (lifted) {
        z0 = *u0;
        z0.insert(z0.end(), W0.begin(), W0.end());
    } else {
        z0 = W0;
    }

    auto rhs = [&](double t, const Vec& z) {
        const Vec x = path.position(t);
        const Vec xd = path.velocity(t);
        Vec u, W;
        if (lifted) {
            u.assign(z.begin(), z.begin() + n);
            W.assign(z.begin() + n, z.end());
        } else {
            u = xd; // unused by the field; keeps the slit-point valid
            W.assign(z.begin(), z.end());
        }
        const SlitPoint p{x, u};
        const Ten3 G = field.coefficients(p);
        Vec dz(z.size(), 0.0);
        if (lifted) {
            const Mat N = nonlinear_connection(m, p).N;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) dz[i] -= N(i, j) * xd[j];
        }
        const int off = lifted ? n : 0;
        for (int i = 0; i < n; ++i) {
            double acc = 0.0;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) acc += G(i, j, k) * W[j] * xd[k];
            dz[off + i] = -acc;
        }
        return dz;
    };

    std::vector<TransportState> out;
    const auto ts = detail::linspace(path.t0, path.t1, samples);
    detail::dopri5(rhs, z0, path.t0, std::span<const double>(ts).subspan(1), tol,
                   [&](double t, const Vec& z) {
                       TransportState s;
                       s.t = t;
                       s.x = path.position(t);
                       if (lifted) {
                           s.u.assign(z.begin(), z.begin() + n);
                           s.W.assign(z.begin() + n, z.end());
                       } else {
                           s.W.assign(z.begin(), z.end());
                           s.u = s.W;
                       }
                       s.F_u = m.F(s.x, s.u);
                       s.F_W = m.F(s.x, s.W);
                       out.push_back(std::move(s));
                   });
    return out;
}

/// Transports a batch of vectors under a y-independent field in one joint
/// integration, so the field is evaluated once per stage for all vectors.
inline std::vector<Vec> parallel_transport_many(const ConnectionField& field, const BasePath& path,
                                                const std::vector<Vec>& W0s, double tol = 1e-9) {
    if (!field.y_independent)
        throw MissingReference("batch transport is defined for y-independent fields");
    const int n = field.dim;
    const int count = static_cast<int>(W0s.size());
    Vec z0;
    z0.reserve(static_cast<std::size_t>(count) * n);
    for (const Vec& w : W0s) z0.insert(z0.end(), w.begin(), w.end());

    auto rhs = [&](double t, const Vec& z) {
        const Vec x = path.position(t);
        const Vec xd = path.velocity(t);
        const Ten3 G = field.coefficients(SlitPoint{x, xd});
        Vec dz(z.size(), 0.0);
        for (int c = 0; c < count; ++c) {
            const int off = c * n;
            for (int i = 0; i < n; ++i) {
                double acc = 0.0;
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k) acc += G(i, j, k) * z[off + j] * xd[k];
                dz[off + i] = -acc;
            }
        }
        return dz;
    };
    Vec z_end;
    const double ts[1] = {path.t1};
    detail::dopri5(rhs, z0, path.t0, std::span<const double>(ts), tol,
                   [&](double t, const Vec& z) {
                       if (t == path.t1) z_end = z;
                   });
    std::vector<Vec> out(count);
    for (int c = 0; c < count; ++c) out[c].assign(z_end.begin() + c * n, z_end.begin() + (c + 1) * n);
    return out;
}

/// Transports an indicatrix sample along the path under a y-independent
/// field and reports max |F(x_end, W_end) - 1|. Near zero means the field's
/// transport carries I_x to the indicatrix at the endpoint.
inline double indicatrix_invariance_probe(const FinslerModel& m, const ConnectionField& field,
                                          const Vec& x, const BasePath& path, int order,
                                          double tol = 1e-9) {
    const IndicatrixQuadrature q = build_indicatrix_quadrature(m, x, order);
    std::vector<Vec> nodes;
    nodes.reserve(q.nodes.size());
    for (const SlitPoint& p : q.nodes) nodes.push_back(p.y);
    const std::vector<Vec> ends = parallel_transport_many(field, path, nodes, tol);
    const Vec x_end = path.position(path.t1);
    double worst = 0.0;
    for (const Vec& w : ends) worst = std::max(worst, std::abs(m.F(x_end, w) - 1.0));
    return worst;
}

// ---------------------------------------------------------------------------
// Difference tensors and probe reports
// ---------------------------------------------------------------------------

struct DifferenceTensor {
    Ten3 B; // Gamma_1 - Gamma_2
    Ten3 S; // symmetric part in the lower pair
    Ten3 A; // antisymmetric part
};

inline DifferenceTensor difference_tensor(const ConnectionField& f1, const ConnectionField& f2,
                                          const SlitPoint& p) {
    const Ten3 g1 = f1.coefficients(p);
    const Ten3 g2 = f2.coefficients(p);
    const int n = f1.dim;
    DifferenceTensor d{Ten3(n), Ten3(n), Ten3(n)};
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                d.B(i, j, k) = g1(i, j, k) - g2(i, j, k);
            }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                d.S(i, j, k) = 0.5 * (d.B(i, j, k) + d.B(i, k, j));
                d.A(i, j, k) = 0.5 * (d.B(i, j, k) - d.B(i, k, j));
            }
    return d;
}

struct EquivalenceReport {
    double max_separation = 0.0;
    double max_symmetric_part = 0.0;
    double max_antisymmetric_part = 0.0;
    int trials = 0;
};

/// Integrates both fields from random initial data and reports the largest
/// trajectory separation, together with max |S| of the difference tensor at
/// the sampled points (the two vanish together for shared geodesics).
inline EquivalenceReport geodesic_equivalence_probe(const FinslerModel& m,
                                                    const ConnectionField& f1,
                                                    const ConnectionField& f2, int trials,
                                                    double t_end, double tol,
                                                    std::uint64_t seed = 42) {
    SampleGen gen(seed);
    EquivalenceReport rep;
    rep.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        const SlitPoint p = sample_point(m, gen);
        const GeodesicSolution s1 = integrate_geodesic(f1, p.x, p.y, t_end, tol);
        const GeodesicSolution s2 = integrate_geodesic(f2, p.x, p.y, t_end, tol);
        for (std::size_t i = 0; i < s1.ts.size(); ++i)
            rep.max_separation = std::max(rep.max_separation, norm(s1.xs[i] - s2.xs[i]));
        const DifferenceTensor d = difference_tensor(f1, f2, p);
        rep.max_symmetric_part = std::max(rep.max_symmetric_part, d.S.max_abs());
        rep.max_antisymmetric_part = std::max(rep.max_antisymmetric_part, d.A.max_abs());
    }
    return rep;
}

struct ReversibilityReport {
    double max_return_gap = 0.0;
    double max_norm_defect = 0.0;
    int trials = 0;
};

/// Runs each Chern geodesic forward, then back from the reversed endpoint
/// velocity, and reports the worst return gap |x_return - x0| together with
/// the norm-reversibility defect max |F(x,y) - F(x,-y)| / F.
inline ReversibilityReport reversibility_probe(const FinslerModel& m, int trials,
                                               double t_end = 1.0, double tol = 1e-9,
                                               std::uint64_t seed = 42) {
    if (!m.y_global)
        throw UnsupportedOperation("reversibility probe needs a y-global structure");
    SampleGen gen(seed);
    const ConnectionField chern = chern_field(m);
    ReversibilityReport rep;
    rep.trials = trials;
    for (int trial = 0; trial < trials; ++trial) {
        const SlitPoint p = sample_point(m, gen);
        const GeodesicSolution fwd = integrate_geodesic(chern, p.x, p.y, t_end, tol);
        const GeodesicSolution back =
            integrate_geodesic(chern, fwd.x_end(), -fwd.v_end(), t_end, tol);
        rep.max_return_gap = std::max(rep.max_return_gap, norm(back.x_end() - p.x));
        const double f = m.F(p.x, p.y);
        const double fr = m.F(p.x, -p.y);
        rep.max_norm_defect = std::max(rep.max_norm_defect, std::abs(f - fr) / f);
    }
    return rep;
}

} // namespace finsler
