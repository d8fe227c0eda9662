#pragma once

#include <map>
#include <string>
#include <vector>

#include "finsler/transport.hpp"

namespace finsler {

struct SampleSpec {
    int base_points = 50;
    int directions = 20;
    std::uint64_t seed = 42;
};

/// Verdict cutoffs as multiples of the residual scale; the decade between
/// them is reported as inconclusive.
struct Thresholds {
    double yes_factor = 1e-6;
    double no_factor = 1e-5;
};

struct ClassificationReport {
    std::string model;
    SampleSpec sample_spec;
    std::map<std::string, double> residuals;
    std::map<std::string, double> thresholds;
    std::map<std::string, std::string> verdicts;
    double scale = 1.0;
    bool cone_restricted = false;
    std::string note;
};

namespace detail {

inline std::string verdict_of(double residual, double yes_cut, double no_cut) {
    if (residual < yes_cut) return "yes";
    if (residual > no_cut) return "no";
    return "inconclusive";
}

inline std::string combine_verdicts(const std::string& a, const std::string& b) {
    if (a == "no" || b == "no") return "no";
    if (a == "yes" && b == "yes") return "yes";
    return "inconclusive";
}

} // namespace detail

struct RandersBerwaldResult {
    double sup_b_norm = 0.0;
    double max_covariant_derivative = 0.0;
    std::string verdict;
};

/// Checks the two Randers conditions: ||b||_a < 1 on the chart sample and
/// b_{j|k} = db_j/dx^k - b_s gamma^s_jk = 0, with the Levi-Civita symbols of
/// `a` obtained by central differences of the metric entries (a route fully
/// independent of the Taylor machinery).
inline RandersBerwaldResult randers_berwald_criterion(
    const RandersData& rd, const std::vector<std::pair<double, double>>& box, int samples = 50,
    std::uint64_t seed = 42, double parallel_tol = 1e-6) {
    const int n = rd.dim;
    SampleGen gen(seed);

    auto eval_a = [&](const Vec& x) {
        Mat a(n, n);
        const std::span<const double> xs(x);
        const std::span<const double> ys; // entries depend on x only
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) a(i, j) = rd.a[i][j].eval<double>(xs, ys);
        return a;
    };
    auto eval_b = [&](const Vec& x) {
        Vec b(n);
        const std::span<const double> xs(x);
        const std::span<const double> ys;
        for (int i = 0; i < n; ++i) b[i] = rd.b[i].eval<double>(xs, ys);
        return b;
    };

    RandersBerwaldResult out;
    for (int s = 0; s < samples; ++s) {
        const Vec x = gen.in_box(box);
        const Mat a = eval_a(x);
        Cholesky chol;
        if (!chol.factor(a)) {
            const double lam = min_eigenvalue(a);
            throw StrongConvexityViolation("randers base metric is not positive definite", lam, x, {});
        }
        const Vec b = eval_b(x);
        out.sup_b_norm = std::max(out.sup_b_norm, std::sqrt(dot(b, chol.solve(b))));

        const double h = 1e-5 * (1.0 + norm(x));
        Ten3 dadx(n);   // da_ij/dx^k
        Mat dbdx(n, n); // db_j/dx^k
        for (int k = 0; k < n; ++k) {
            Vec xp = x, xm = x;
            xp[k] += h;
            xm[k] -= h;
            const Mat ap = eval_a(xp), am = eval_a(xm);
            const Vec bp = eval_b(xp), bm = eval_b(xm);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) dadx(i, j, k) = (ap(i, j) - am(i, j)) / (2.0 * h);
                dbdx(i, k) = (bp[i] - bm[i]) / (2.0 * h);
            }
        }
        const Mat ainv = chol.inverse();
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double cov = dbdx(j, k);
                for (int ss = 0; ss < n; ++ss) {
                    double gamma_sjk = 0.0;
                    for (int u = 0; u < n; ++u)
                        gamma_sjk += 0.5 * ainv(ss, u) *
                                     (dadx(u, j, k) - dadx(j, k, u) + dadx(u, k, j));
                    cov -= b[ss] * gamma_sjk;
                }
                out.max_covariant_derivative = std::max(out.max_covariant_derivative, std::abs(cov));
            }
    }
    out.verdict = (out.sup_b_norm < 1.0 && out.max_covariant_derivative < parallel_tol)
                      ? "berwald"
                      : "not-berwald";
    return out;
}

/// Runs the characterization residuals at sampled points and fills the
/// verdict table. Berwald is certified two independent ways: max |P| and the
/// sampled y-variation of the Chern coefficients at fixed base points.
inline ClassificationReport classify(const FinslerModel& m, SampleSpec spec = {},
                                     Thresholds th = {}, int quad_order = 16) {
    ClassificationReport rep;
    rep.model = m.name;
    rep.sample_spec = spec;
    rep.cone_restricted = static_cast<bool>(m.cone);

    SampleGen gen(spec.seed);
    double cartan_norm = 0.0, hv_norm = 0.0, hh_norm = 0.0, landsberg_norm = 0.0;
    double dgamma_dy_norm = 0.0, berwald_avg_gap = 0.0;
    std::vector<double> gamma_scales;

    struct Task {
        Vec x;
        std::vector<Vec> dirs;
    };
    std::vector<Task> tasks;
    for (int bp = 0; bp < spec.base_points; ++bp) {
        Task t;
        t.x = gen.in_box(m.chart_box);
        for (int d = 0; d < spec.directions; ++d) t.dirs.push_back(sample_direction(m, t.x, gen));
        tasks.push_back(std::move(t));
    }

    for (const Task& task : tasks) {
        const int nd = static_cast<int>(task.dirs.size());
        std::vector<CurvatureBundle> bundles(nd);
        std::vector<std::string> errors(nd);
        parallel_for(nd, [&](int d) {
            try {
                bundles[d] = curvature_bundle(m, SlitPoint{task.x, task.dirs[d]});
            } catch (const std::exception& e) {
                errors[d] = e.what();
            }
        });
        for (int d = 0; d < nd; ++d)
            if (!errors[d].empty()) throw StrongConvexityViolation(errors[d], 0.0, task.x, task.dirs[d]);

        for (int d = 0; d < nd; ++d) {
            const CurvatureBundle& b = bundles[d];
            cartan_norm = std::max(cartan_norm, b.cb.mb.A.max_abs());
            hv_norm = std::max(hv_norm, b.P.max_abs());
            hh_norm = std::max(hh_norm, b.R.max_abs());
            landsberg_norm =
                std::max(landsberg_norm, landsberg_from_bundle(b, SlitPoint{task.x, task.dirs[d]}).max_abs());
            gamma_scales.push_back(b.cb.chern.max_abs());
            for (int d2 = 0; d2 < d; ++d2)
                dgamma_dy_norm =
                    std::max(dgamma_dy_norm, (b.cb.chern - bundles[d2].cb.chern).max_abs());
        }
        const Ten3 avg = averaged_connection_at(m, ConnectionSource::Chern, task.x, quad_order);
        for (int d = 0; d < nd; ++d)
            berwald_avg_gap = std::max(berwald_avg_gap, (bundles[d].cb.chern - avg).max_abs());
    }

    std::sort(gamma_scales.begin(), gamma_scales.end());
    rep.scale = gamma_scales.empty() ? 1.0 : gamma_scales[gamma_scales.size() / 2] + 1.0;
    const double yes_cut = th.yes_factor * rep.scale;
    const double no_cut = th.no_factor * rep.scale;
    rep.thresholds["yes_below"] = yes_cut;
    rep.thresholds["no_above"] = no_cut;

    rep.residuals["cartan_norm"] = cartan_norm;
    rep.residuals["hv_norm"] = hv_norm;
    rep.residuals["dGamma_dy_norm"] = dgamma_dy_norm;
    rep.residuals["hh_norm"] = hh_norm;
    rep.residuals["landsberg_norm"] = landsberg_norm;
    rep.residuals["berwald_avg_gap"] = berwald_avg_gap;
    if (m.randers) {
        const RandersBerwaldResult rb =
            randers_berwald_criterion(*m.randers, m.chart_box, spec.base_points, spec.seed);
        rep.residuals["randers_parallel_residual"] = rb.max_covariant_derivative;
    }

    std::string riemannian = detail::verdict_of(cartan_norm, yes_cut, no_cut);
    std::string berwald = detail::combine_verdicts(detail::verdict_of(hv_norm, yes_cut, no_cut),
                                                   detail::verdict_of(dgamma_dy_norm, yes_cut, no_cut));
    std::string landsberg = detail::verdict_of(landsberg_norm, yes_cut, no_cut);
    std::string loc_mink = detail::combine_verdicts(detail::verdict_of(hh_norm, yes_cut, no_cut),
                                                    detail::verdict_of(hv_norm, yes_cut, no_cut));

    // monotone chain: Riemannian => Berwald => Landsberg
    if (riemannian == "yes") berwald = "yes";
    if (berwald == "yes") landsberg = "yes";

    std::string pure_landsberg;
    if (berwald == "yes") pure_landsberg = "no";
    else if (landsberg == "yes" && berwald == "no") pure_landsberg = "yes";
    else pure_landsberg = "inconclusive";

    rep.verdicts["riemannian"] = riemannian;
    rep.verdicts["berwald"] = berwald;
    rep.verdicts["landsberg"] = landsberg;
    rep.verdicts["locally_minkowski"] = loc_mink;
    rep.verdicts["pure_landsberg_candidate"] = pure_landsberg;

    if (m.dim == 2 && berwald == "yes" && riemannian == "no" && loc_mink == "no") {
        rep.note = m.y_global
                       ? "noteworthy: a y-global Berwald surface is expected to be Riemannian or "
                         "locally Minkowski; this sample contradicts that"
                       : "y-local Berwald surface: the dimension-2 rigidity expectation "
                         "(Riemannian or locally Minkowski) applies only to y-global structures";
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Interpolated-indicatrix diagnostic
// ---------------------------------------------------------------------------

struct LandsbergDiagnostic {
    std::vector<double> ts;
    std::vector<std::vector<double>> deviations; // [loop][t]
    double max_deviation = 0.0;
    int witness_loop = -1;
    double witness_t = 0.0;
    std::string conclusion;
};

/// Interpolates the indicatrix family between F and the averaged-metric norm
/// and transports each member around the given loops under <Gamma>. An
/// invariant family is Berwald-type behaviour; a family that fails to return
/// to itself is the numerical signature a pure-Landsberg candidate must show.
inline LandsbergDiagnostic pure_landsberg_diagnostic(const FinslerModel& m,
                                                     const std::vector<BasePath>& loops,
                                                     int order = 16, int quad_order = 16,
                                                     double tol = 1e-9) {
    LandsbergDiagnostic diag;
    diag.ts = {0.0, 0.25, 0.5, 0.75, 1.0};

    MatrixField h = [m, quad_order](const Vec& x) { return averaged_metric(m, x, quad_order); };
    const ConnectionField avg = averaged_connection_field(m, ConnectionSource::Chern, quad_order);

    for (std::size_t li = 0; li < loops.size(); ++li) {
        diag.deviations.emplace_back();
        for (double t : diag.ts) {
            const FinslerModel mt = interpolated_family(m, h, t);
            const Vec x0 = loops[li].position(loops[li].t0);
            const double dev = indicatrix_invariance_probe(mt, avg, x0, loops[li], order, tol);
            diag.deviations.back().push_back(dev);
            if (dev > diag.max_deviation) {
                diag.max_deviation = dev;
                diag.witness_loop = static_cast<int>(li);
                diag.witness_t = t;
            }
        }
    }
    if (diag.max_deviation < 1e-5)
        diag.conclusion = "invariant family: not a pure-Landsberg witness";
    else if (diag.max_deviation > 1e-3)
        diag.conclusion = "family not invariant: consistent with pure-Landsberg candidacy";
    else
        diag.conclusion = "inconclusive deviation";
    return diag;
}

/// Small closed loops inside the chart box, one per coordinate plane, cycled
/// until `count` loops exist.
inline std::vector<BasePath> default_loops(const FinslerModel& m, int count, double radius_frac = 0.15,
                                           std::uint64_t seed = 42) {
    SampleGen gen(seed);
    std::vector<BasePath> loops;
    const int n = m.dim;
    int plane = 0;
    while (static_cast<int>(loops.size()) < count) {
        const int i = plane % n;
        const int j = (plane + 1) % n;
        ++plane;
        Vec c(n);
        double r = 1e9;
        for (int d = 0; d < n; ++d) {
            const auto [lo, hi] = m.chart_box[d];
            r = std::min(r, radius_frac * (hi - lo));
        }
        for (int d = 0; d < n; ++d) {
            const auto [lo, hi] = m.chart_box[d];
            c[d] = gen.uniform(lo + 1.5 * r, hi - 1.5 * r);
        }
        loops.push_back(circle_path(c, r, i, j));
    }
    return loops;
}

} // namespace finsler
