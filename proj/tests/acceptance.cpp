// Acceptance suite: one pass/fail line per criterion, exit code = #failures.
// Usage: acceptance <path-to-finslerlab-binary>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "finsler/classify.hpp"
#include "finsler/cli.hpp"

using namespace finsler;

namespace {

const double kPi = 3.14159265358979323846;
std::string g_cli_binary;
int g_failures = 0;

std::string models_dir() { return FINSLER_MODELS_DIR; }

FinslerModel load(const char* name) { return parse_model(models_dir() + "/" + name); }

struct Criterion {
    std::string detail;
    bool ok = true;

    void require(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            detail += (detail.empty() ? "" : "; ") + std::string("FAILED: ") + what;
        }
    }
    void note(const std::string& what) { detail += (detail.empty() ? "" : "; ") + what; }
};

void run_criterion(int number, const std::string& title, double budget_seconds,
                   const std::function<void(Criterion&)>& body) {
    Criterion c;
    const auto start = std::chrono::steady_clock::now();
    try {
        body(c);
    } catch (const std::exception& e) {
        c.ok = false;
        c.detail += std::string("; exception: ") + e.what();
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (elapsed > budget_seconds) {
        c.ok = false;
        c.detail += "; over runtime budget";
    }
    std::printf("[%s] criterion %d: %s (%s) [%.1f s / budget %.0f s]\n", c.ok ? "PASS" : "FAIL",
                number, title.c_str(), c.detail.c_str(), elapsed, budget_seconds);
    std::fflush(stdout);
    if (!c.ok) ++g_failures;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "<missing:" + path + ">";
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

char fmtbuf[256];
const char* fmt(const char* f, double a, double b = 0.0) {
    std::snprintf(fmtbuf, sizeof(fmtbuf), f, a, b);
    return fmtbuf;
}

// --------------------------------------------------------------------------
// criterion bodies
// --------------------------------------------------------------------------

void criterion1_axioms(Criterion& c) {
    const std::vector<FinslerModel> models = {
        load("euclidean.json"),     load("sphere.json"),       load("randers_control.json"),
        load("numata.json"),        load("berwald_rund.json"), load("randers_s2xs1.json"),
        load("slope.json")};
    double worst_hom = 0.0, worst_euler = 0.0, worst_gyy = 0.0, worst_ay = 0.0, worst_sym = 0.0;
    for (const FinslerModel& m : models) {
        const HomogeneityReport hom = check_homogeneity(m, 40, 42);
        worst_hom = std::max(worst_hom, hom.max_scaling_residual);
        worst_euler = std::max(worst_euler, hom.max_euler_residual);

        SampleGen gen(42);
        std::vector<MetricBundle> bundles;
        std::vector<SlitPoint> pts;
        double amax = 0.0;
        for (int s = 0; s < 15; ++s) {
            pts.push_back(sample_point(m, gen));
            bundles.push_back(metric_bundle(m, pts.back(), false));
            amax = std::max(amax, bundles.back().A.max_abs());
        }
        for (int s = 0; s < 15; ++s) {
            const MetricBundle& mb = bundles[s];
            const SlitPoint& p = pts[s];
            const double f2 = mb.F * mb.F;
            worst_gyy = std::max(worst_gyy, std::abs(mb.g.quad(p.y, p.y) - f2) / f2);
            for (int i = 0; i < m.dim; ++i)
                for (int j = 0; j < m.dim; ++j) {
                    double ay = 0.0;
                    for (int k = 0; k < m.dim; ++k) {
                        ay += mb.A(i, j, k) * p.y[k];
                        worst_sym = std::max({worst_sym,
                                              std::abs(mb.A(i, j, k) - mb.A(j, i, k)),
                                              std::abs(mb.A(i, j, k) - mb.A(i, k, j))});
                    }
                    // relative to the model's Cartan scale; an identically
                    // vanishing A satisfies the contraction trivially
                    if (amax > 1e-13) worst_ay = std::max(worst_ay, std::abs(ay) / amax);
                    else worst_ay = std::max(worst_ay, std::abs(ay));
                }
        }
    }
    c.require(worst_hom < 1e-9, fmt("homogeneity residual %.2e >= 1e-9", worst_hom));
    c.require(worst_euler < 1e-9, fmt("euler residual %.2e >= 1e-9", worst_euler));
    c.require(worst_gyy < 1e-8, fmt("g_ij y^i y^j vs F^2 residual %.2e >= 1e-8", worst_gyy));
    c.require(worst_ay < 1e-8, fmt("A.y residual %.2e >= 1e-8 max|A|", worst_ay));
    c.require(worst_sym < 1e-10, fmt("Cartan symmetry residual %.2e >= 1e-10", worst_sym));
    c.note(fmt("7 families; worst homogeneity %.1e, worst euler %.1e", worst_hom, worst_euler));
}

void criterion2_riemannian_reduction(Criterion& c) {
    const FinslerModel sph = load("sphere.json");
    SampleGen gen(42);

    // Gamma vs the finite-difference Levi-Civita oracle
    double worst_gamma = 0.0;
    for (int s = 0; s < 10; ++s) {
        const SlitPoint p = sample_point(sph, gen);
        const Ten3 gamma = chern_coefficients(sph, p);
        const double h = 1e-6 * (1.0 + norm(p.x));
        Ten3 dgdx(2);
        for (int k = 0; k < 2; ++k) {
            Vec xp = p.x, xm = p.x;
            xp[k] += h;
            xm[k] -= h;
            const Mat gp = fundamental_matrix(sph, SlitPoint{xp, p.y});
            const Mat gm = fundamental_matrix(sph, SlitPoint{xm, p.y});
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) dgdx(i, j, k) = (gp(i, j) - gm(i, j)) / (2.0 * h);
        }
        const Mat g = fundamental_matrix(sph, p);
        Cholesky chol;
        chol.factor(g);
        const Mat ginv = chol.inverse();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k) {
                    double lc = 0.0;
                    for (int a = 0; a < 2; ++a)
                        lc += 0.5 * ginv(i, a) * (dgdx(a, j, k) - dgdx(j, k, a) + dgdx(a, k, j));
                    worst_gamma = std::max(worst_gamma, std::abs(gamma(i, j, k) - lc));
                }
    }
    c.require(worst_gamma < 1e-7, fmt("Gamma vs Levi-Civita oracle %.2e >= 1e-7", worst_gamma));

    // 50 random flags: K = 1, with P and Adot vanishing at each flag point
    double worst_flag = 0.0, worst_p = 0.0, worst_adot = 0.0;
    for (int s = 0; s < 50; ++s) {
        const SlitPoint p = sample_point(sph, gen);
        Vec V = gen.unit_direction(2);
        const FlagValue fv = flag_curvature(sph, p, V);
        worst_flag = std::max(worst_flag, std::abs(fv.K - 1.0));
        const CurvatureBundle b = curvature_bundle(sph, p);
        worst_p = std::max(worst_p, b.P.max_abs());
        worst_adot = std::max(worst_adot, landsberg_from_bundle(b, p).max_abs());
    }
    c.require(worst_flag < 1e-5, fmt("flag curvature deviation %.2e >= 1e-5", worst_flag));
    c.require(worst_p < 1e-8, fmt("|P| %.2e >= 1e-8", worst_p));
    c.require(worst_adot < 1e-8, fmt("|Adot| %.2e >= 1e-8", worst_adot));
    c.note(fmt("K-1 max %.1e over 50 flags, |P| max %.1e", worst_flag, worst_p));
}

void criterion3_berwald_certification(Criterion& c) {
    for (double eps : {0.1, 0.3, 0.5}) {
        const FinslerModel m = make_sphere_circle_randers(eps);
        SampleGen gen(42);
        double hv = 0.0, dgy = 0.0;
        std::vector<double> scales;
        for (int bp = 0; bp < 50; ++bp) {
            const Vec x = gen.in_box(m.chart_box);
            Ten3 first;
            for (int d = 0; d < 20; ++d) {
                const Vec y = sample_direction(m, x, gen);
                const SlitPoint p{x, y};
                const CurvatureBundle b = curvature_bundle(m, p);
                hv = std::max(hv, b.P.max_abs());
                if (d == 0) {
                    first = b.cb.chern;
                    scales.push_back(first.max_abs());
                } else {
                    dgy = std::max(dgy, (b.cb.chern - first).max_abs());
                }
            }
        }
        std::sort(scales.begin(), scales.end());
        const double scale = scales[scales.size() / 2] + 1.0;
        c.require(hv < 1e-6 * scale,
                  fmt("eps case: max|P| %.2e >= 1e-6 scale", hv));
        c.require(dgy < 1e-6 * scale,
                  fmt("eps case: Gamma y-variation %.2e >= 1e-6 scale", dgy));

        const RandersBerwaldResult rb = randers_berwald_criterion(*m.randers, m.chart_box, 50, 42);
        c.require(std::abs(rb.sup_b_norm - eps) < 1e-9,
                  fmt("sup||b||_a %.12f != eps", rb.sup_b_norm));
        c.require(rb.max_covariant_derivative < 1e-8,
                  fmt("b covariant derivative %.2e >= 1e-8", rb.max_covariant_derivative));
        c.require(rb.verdict == "berwald", "randers criterion verdict != berwald");
    }
    c.note("eps in {0.1, 0.3, 0.5}: 50x20 samples each, both Berwald certificates");
}

void criterion4_averaging(Criterion& c) {
    // Riemannian input: constant integrand, exact average
    const FinslerModel sph = load("sphere.json");
    SampleGen gen(42);
    double worst_riem = 0.0;
    for (int s = 0; s < 3; ++s) {
        const Vec x = gen.in_box(sph.chart_box);
        const Ten3 avg = averaged_connection_at(sph, ConnectionSource::Chern, x, 16);
        const Ten3 lc = chern_coefficients(sph, SlitPoint{x, gen.unit_direction(2)});
        worst_riem = std::max(worst_riem, (avg - lc).max_abs());
    }
    c.require(worst_riem <= 1e-12, fmt("<Gamma> vs Levi-Civita %.2e > 1e-12", worst_riem));

    // Berwald input: <Gamma> = Gamma and <R> = curvature of <Gamma>
    const FinslerModel rs = make_sphere_circle_randers(0.3);
    const Vec xr = {0.4, 1.3, 2.0};
    const Ten3 avg_g = averaged_connection_at(rs, ConnectionSource::Chern, xr, 10);
    const Ten3 direct = chern_coefficients(rs, SlitPoint{xr, {0.3, -0.8, 0.52}});
    c.require((avg_g - direct).max_abs() < 1e-7,
              fmt("<Gamma>-Gamma %.2e >= 1e-7", (avg_g - direct).max_abs()));
    const Ten4 avg_R = averaged_curvature(rs, xr, 10);
    const Ten4 R_of = curvature_of_connection(
        averaged_connection_field(rs, ConnectionSource::Chern, 10), xr);
    c.require((avg_R - R_of).max_abs() < 1e-5,
              fmt("<R> vs R(<Gamma>) %.2e >= 1e-5", (avg_R - R_of).max_abs()));

    // indicatrix volumes
    const double v2 = indicatrix_volume(build_indicatrix_quadrature(load("euclidean.json"), {0.0, 0.0}, 16));
    const double v3 = indicatrix_volume(
        build_indicatrix_quadrature(load("euclidean3.json"), {0.0, 0.0, 0.0}, 16));
    c.require(std::abs(v2 - 2.0 * kPi) < 1e-8, fmt("vol(I) n=2 error %.2e", std::abs(v2 - 2.0 * kPi)));
    c.require(std::abs(v3 - 4.0 * kPi) < 1e-8, fmt("vol(I) n=3 error %.2e", std::abs(v3 - 4.0 * kPi)));

    // order-doubling stability at the default order
    const Ten3 g16 = averaged_connection_at(rs, ConnectionSource::Chern, xr, 16);
    const Ten3 g32 = averaged_connection_at(rs, ConnectionSource::Chern, xr, 32);
    const Mat m16 = averaged_metric(rs, xr, 16), m32 = averaged_metric(rs, xr, 32);
    c.require((g16 - g32).max_abs() < 1e-6, fmt("<Gamma> order doubling %.2e", (g16 - g32).max_abs()));
    c.require((m16 - m32).max_abs() < 1e-6, fmt("<g> order doubling %.2e", (m16 - m32).max_abs()));
    c.note(fmt("vol errors %.1e (n=2), %.1e (n=3)", std::abs(v2 - 2.0 * kPi), std::abs(v3 - 4.0 * kPi)));
}

void criterion5_transport(Criterion& c) {
    // F-drift along Chern geodesics and horizontal lifts at tol 1e-9
    double worst_geo = 0.0, worst_lift = 0.0;
    for (const char* name : {"sphere.json", "randers_s2xs1.json", "randers_control.json"}) {
        const FinslerModel m = load(name);
        const ConnectionField chern = chern_field(m);
        SampleGen gen(42);
        for (int s = 0; s < 20; ++s) {
            const SlitPoint p = sample_point(m, gen);
            const GeodesicSolution sol = integrate_geodesic(chern, p.x, p.y, 0.7, 1e-9);
            const double f0 = m.F(sol.xs[0], sol.vs[0]);
            for (std::size_t i = 0; i < sol.ts.size(); ++i)
                worst_geo = std::max(worst_geo, std::abs(m.F(sol.xs[i], sol.vs[i]) - f0));
        }
        for (int s = 0; s < 4; ++s) {
            const Vec x0 = gen.in_box(m.chart_box);
            const BasePath loop = circle_path(x0, 0.2, 0, 1);
            const Vec u0 = sample_direction(m, x0, gen);
            const auto lift = horizontal_lift(m, loop, u0, 1e-9);
            for (const TransportState& st : lift)
                worst_lift = std::max(worst_lift, std::abs(st.F_u - lift.front().F_u));
        }
    }
    c.require(worst_geo < 1e-7, fmt("geodesic F-drift %.2e >= 1e-7", worst_geo));
    c.require(worst_lift < 1e-7, fmt("lift F-drift %.2e >= 1e-7", worst_lift));

    // Berwald norm preservation for arbitrary W0
    const FinslerModel rs = make_sphere_circle_randers(0.3);
    const ConnectionField chern_rs = chern_field(rs);
    SampleGen gen(43);
    double worst_norm = 0.0;
    for (int s = 0; s < 5; ++s) {
        const Vec x0 = gen.in_box(rs.chart_box);
        const BasePath loop = circle_path(x0, 0.3, s % 3, (s + 1) % 3);
        const Vec W0 = gen.unit_direction(3);
        const Vec u0 = gen.unit_direction(3);
        const auto traj = parallel_transport(chern_rs, rs, loop, W0, u0, 1e-9);
        for (const TransportState& st : traj)
            worst_norm = std::max(worst_norm, std::abs(st.F_W - traj.front().F_W));
    }
    c.require(worst_norm < 1e-7, fmt("Berwald norm preservation %.2e >= 1e-7", worst_norm));

    // sphere triangle with three right angles: holonomy angle pi/2
    const FinslerModel sph = load("sphere.json");
    const ConnectionField lc = chern_field(sph);
    const double s23 = std::sqrt(2.0 / 3.0), s3 = 1.0 / std::sqrt(3.0);
    const double s6 = 1.0 / std::sqrt(6.0), s2 = 1.0 / std::sqrt(2.0);
    const Vec u1 = {s23, 0.0, s3}, u2 = {-s6, s2, s3}, u3 = {-s6, -s2, s3};
    const Vec W0 = {0.7, -0.4};
    Vec W = W0;
    for (const auto& [P, Q] : {std::pair{u1, u2}, {u2, u3}, {u3, u1}}) {
        const BasePath arc = great_circle_arc(P, Q);
        W = parallel_transport(lc, sph, arc, W, Vec{1.0, 0.0}, 1e-11).back().W;
    }
    const BasePath arc1 = great_circle_arc(u1, u2);
    const Mat g = fundamental_matrix(sph, SlitPoint{arc1.position(0.0), {1.0, 0.0}});
    const double ang =
        std::acos(std::clamp(g.quad(W0, W) / std::sqrt(g.quad(W0, W0) * g.quad(W, W)), -1.0, 1.0));
    c.require(std::abs(ang - kPi / 2) < 1e-5, fmt("holonomy angle error %.2e >= 1e-5", std::abs(ang - kPi / 2)));

    // loop-inverse recovery
    const ConnectionField avg = averaged_connection_field(rs, ConnectionSource::Chern, 8);
    const BasePath loop = circle_path({0.5, 1.4, 0.7}, 0.35, 1, 2);
    const Vec Wf = parallel_transport(avg, rs, loop, {0.4, -0.3, 0.8}, std::nullopt, 1e-9).back().W;
    const Vec Wb = parallel_transport(avg, rs, reversed_path(loop), Wf, std::nullopt, 1e-9).back().W;
    const double inv_gap = norm(Wb - Vec{0.4, -0.3, 0.8});
    c.require(inv_gap < 1e-8, fmt("loop-inverse recovery %.2e >= 1e-8", inv_gap));
    c.note(fmt("drift geo %.1e, holonomy err %.1e", worst_geo, std::abs(ang - kPi / 2)));
}

void criterion6_rigidity_probes(Criterion& c) {
    // Berwald model: shared geodesics between Chern and <Gamma>
    const FinslerModel rs = make_sphere_circle_randers(0.3);
    const ConnectionField chern = chern_field(rs);
    const ConnectionField avg = averaged_connection_field(rs, ConnectionSource::Chern, 8);
    const EquivalenceReport eq = geodesic_equivalence_probe(rs, chern, avg, 20, 1.0, 1e-9, 42);
    c.require(eq.max_separation < 1e-6, fmt("separation %.2e >= 1e-6", eq.max_separation));
    c.require(eq.max_symmetric_part < 1e-7, fmt("max|S| %.2e >= 1e-7", eq.max_symmetric_part));

    // indicatrix invariance across the interpolated family, 5 loops x 5 t's
    const auto loops = default_loops(rs, 5, 0.12, 42);
    const LandsbergDiagnostic diag = pure_landsberg_diagnostic(rs, loops, 8, 8, 1e-9);
    c.require(diag.max_deviation < 1e-5,
              fmt("interpolated indicatrix deviation %.2e >= 1e-5", diag.max_deviation));

    // non-parallel control: both probes blow past 1e-3 and Berwald fails
    const FinslerModel ctrl = load("randers_control.json");
    const ConnectionField chern_c = chern_field(ctrl);
    const ConnectionField avg_c = averaged_connection_field(ctrl, ConnectionSource::Chern, 8);
    const EquivalenceReport eq_c = geodesic_equivalence_probe(ctrl, chern_c, avg_c, 10, 1.0, 1e-9, 42);
    c.require(eq_c.max_separation > 1e-3,
              fmt("control separation %.2e <= 1e-3", eq_c.max_separation));

    double worst_inv = 0.0;
    for (int plane = 0; plane < 3; ++plane) {
        const BasePath loop = circle_path({0.5, 1.4, 0.7}, 0.45, plane, (plane + 1) % 3);
        worst_inv = std::max(
            worst_inv, indicatrix_invariance_probe(ctrl, avg_c, loop.position(0.0), loop, 8, 1e-9));
    }
    c.require(worst_inv > 1e-3, fmt("control indicatrix deviation %.2e <= 1e-3", worst_inv));

    const ClassificationReport rep = classify(ctrl, SampleSpec{12, 8, 42}, {}, 8);
    c.require(rep.verdicts.at("berwald") == "no", "control classifier berwald != no");
    c.note(fmt("berwald separation %.1e, control separation %.1e", eq.max_separation,
               eq_c.max_separation));
}

void criterion7_berwald_rund(Criterion& c) {
    const FinslerModel br = load("berwald_rund.json");
    SampleGen gen(42);
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        const SlitPoint p = sample_point(br, gen);
        const double xi = 0.5 * (p.x[1] + std::sqrt(p.x[1] * p.x[1] + 4.0 * p.x[0]));
        const double w = xi + p.y[0] / p.y[1];
        const double Kexp = 2.0 / (w * w * w * std::pow(2.0 * xi - p.x[1], 3.0));
        const Vec V = {-p.y[1], p.y[0]};
        const double K = flag_curvature(br, p, V).K;
        worst = std::max(worst, std::abs(K - Kexp) / std::abs(Kexp));
    }
    c.require(worst < 1e-4, fmt("flag curvature vs closed form %.2e >= 1e-4", worst));

    const ClassificationReport rep = classify(br, SampleSpec{15, 10, 42}, {}, 16);
    c.require(rep.verdicts.at("berwald") == "yes", "classifier berwald != yes");
    c.require(rep.verdicts.at("riemannian") == "no", "classifier riemannian != no");
    c.require(rep.cone_restricted, "classifier not marked cone-restricted");
    c.note(fmt("K relative error max %.1e over 20 convex points", worst));
}

void criterion8_determinism(Criterion& c) {
    if (g_cli_binary.empty()) {
        c.require(false, "no CLI binary path supplied (argv[1])");
        return;
    }
    struct Cmd {
        std::string args;
        std::string out_a, out_b;
    };
    const std::string md = models_dir();
    std::vector<Cmd> cmds = {
        {"classify --model " + md + "/randers_s2xs1.json --points 10 --samples 6 --quad-order 8 --seed 42",
         "/tmp/acc_classify_a.json", "/tmp/acc_classify_b.json"},
        {"average --model " + md + "/randers_s2xs1.json --at 0.4,1.3,2.0 --quad-order 8 --seed 42",
         "/tmp/acc_avg_a.json", "/tmp/acc_avg_b.json"},
        {"geodesic --model " + md + "/sphere.json --x0 0.3,1.2 --v0 0.8,-0.4 --t-end 2.0 --seed 42",
         "/tmp/acc_geo_a.csv", "/tmp/acc_geo_b.csv"},
    };
    for (const Cmd& cmd : cmds) {
        for (const std::string& out : {cmd.out_a, cmd.out_b}) {
            const std::string full = g_cli_binary + " " + cmd.args + " --out " + out + " >/dev/null 2>&1";
            const int rc = std::system(full.c_str());
            c.require(rc == 0, "CLI run failed: " + cmd.args);
        }
        const std::string a = slurp(cmd.out_a), b = slurp(cmd.out_b);
        c.require(!a.empty() && a == b, "outputs differ for: " + cmd.args);
    }
    c.note("3 commands x 2 runs, byte-compared");
}

} // namespace

int main(int argc, char** argv) {
    if (argc > 1) g_cli_binary = argv[1];
    std::printf("acceptance suite (models: %s)\n", models_dir().c_str());

    run_criterion(1, "axioms suite on the 7 catalog families", 30, criterion1_axioms);
    run_criterion(2, "riemannian reduction on the round 2-sphere", 60, criterion2_riemannian_reduction);
    run_criterion(3, "Berwald certification of the product Randers model", 120, criterion3_berwald_certification);
    run_criterion(4, "averaging identities", 120, criterion4_averaging);
    run_criterion(5, "transport suite", 120, criterion5_transport);
    run_criterion(6, "rigidity probes", 180, criterion6_rigidity_probes);
    run_criterion(7, "Berwald-Rund surface", 60, criterion7_berwald_rund);
    run_criterion(8, "byte-identical reruns", 60, criterion8_determinism);

    if (g_failures == 0) std::printf("all criteria passed\n");
    else std::printf("%d criteria FAILED\n", g_failures);
    return g_failures;
}
