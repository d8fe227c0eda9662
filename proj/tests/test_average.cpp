#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "finsler/average.hpp"
#include "finsler/catalog.hpp"
#include "finsler/model_io.hpp"

using namespace finsler;

namespace {

const double kPi = 3.14159265358979323846;

FinslerModel load(const char* name) {
    return parse_model(std::string(FINSLER_MODELS_DIR) + "/" + name);
}

/// Adaptive arclength of the ellipse g_ij y^i y^j = 1 in the metric g, by
/// recursive trapezoid refinement of |y'(theta)|_g over the angle.
double ellipse_arclength_oracle(const Mat& g) {
    auto integrand = [&](double th) {
        const Vec d = {std::cos(th), std::sin(th)};
        const double F = std::sqrt(g.quad(d, d));
        const Vec dd = {-std::sin(th), std::cos(th)};
        const double dF = g.quad(d, dd) / F;
        Vec t(2);
        for (int i = 0; i < 2; ++i) t[i] = (dd[i] * F - d[i] * dF) / (F * F);
        return std::sqrt(g.quad(t, t));
    };
    double prev = 0.0;
    for (int level = 6; level <= 22; ++level) {
        const int n = 1 << level;
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += integrand(2.0 * kPi * i / n);
        acc *= 2.0 * kPi / n;
        if (level > 6 && std::abs(acc - prev) < 1e-12) return acc;
        prev = acc;
    }
    return prev;
}

} // namespace

TEST_CASE("indicatrix volumes") {
    const FinslerModel eu2 = make_euclidean(2);
    const IndicatrixQuadrature q2 = build_indicatrix_quadrature(eu2, {0.0, 0.0}, 16);
    CHECK(std::abs(indicatrix_volume(q2) - 2.0 * kPi) < 1e-10);

    const FinslerModel eu3 = make_euclidean(3);
    const IndicatrixQuadrature q3 = build_indicatrix_quadrature(eu3, {0.0, 0.0, 0.0}, 16);
    CHECK(std::abs(indicatrix_volume(q3) - 4.0 * kPi) < 1e-8);

    // anisotropic constant metric: rule vs adaptive arclength oracle
    std::vector<std::vector<Expr>> gm = {{Expr::parse("4"), Expr::parse("0")},
                                         {Expr::parse("0"), Expr::parse("1")}};
    const FinslerModel aniso = make_riemannian(2, std::move(gm), "aniso");
    const IndicatrixQuadrature qa = build_indicatrix_quadrature(aniso, {0.0, 0.0}, 64);
    Mat g(2, 2);
    g(0, 0) = 4.0;
    g(1, 1) = 1.0;
    CHECK(std::abs(indicatrix_volume(qa) - ellipse_arclength_oracle(g)) < 1e-8);
}

TEST_CASE("every node sits on the indicatrix") {
    for (const char* name : {"randers_s2xs1.json", "slope.json", "numata.json"}) {
        CAPTURE(name);
        const FinslerModel m = load(name);
        SampleGen gen(3);
        const Vec x = gen.in_box(m.chart_box);
        const IndicatrixQuadrature q = build_indicatrix_quadrature(m, x, 12);
        for (const SlitPoint& node : q.nodes)
            CHECK(std::abs(m.F(node.x, node.y) - 1.0) < 1e-10);
        for (double w : q.weights) CHECK(w > 0.0);
    }
}

TEST_CASE("average_tensor basics") {
    const FinslerModel eu = make_euclidean(2);
    const IndicatrixQuadrature q = build_indicatrix_quadrature(eu, {0.0, 0.0}, 32);

    Mat c(2, 2);
    c(0, 0) = 1.5;
    c(0, 1) = c(1, 0) = -0.25;
    c(1, 1) = 3.0;
    const Mat avg_const = average_tensor(q, [&](const SlitPoint&) { return c; });
    CHECK((avg_const - c).max_abs() < 1e-14);

    // odd integrand on a symmetric indicatrix
    const Vec avg_odd = average_tensor(q, [](const SlitPoint& p) { return p.y; });
    CHECK(max_abs(avg_odd) < 1e-9);

    // evaluation failures carry the node index
    CHECK_THROWS_WITH_AS(
        average_tensor(q, [](const SlitPoint&) -> double { throw EvaluationError("boom"); }),
        doctest::Contains("node 0"), EvaluationError);
}

TEST_CASE("averaged connection") {
    // Riemannian input: constant integrand, quadrature is exact
    const FinslerModel sph = make_round_sphere();
    const Vec xs = {1.1, 0.9};
    const Ten3 avg = averaged_connection_at(sph, ConnectionSource::Chern, xs, 16);
    const Ten3 direct = chern_coefficients(sph, SlitPoint{xs, {0.6, 0.8}});
    CHECK((avg - direct).max_abs() < 1e-12);

    // Berwald input: <Gamma> = Gamma
    const FinslerModel rs = make_sphere_circle_randers(0.3);
    const Vec xr = {0.4, 1.3, 2.0};
    const Ten3 avg_r = averaged_connection_at(rs, ConnectionSource::Chern, xr, 10);
    const Ten3 direct_r = chern_coefficients(rs, SlitPoint{xr, {0.3, -0.8, 0.52}});
    CHECK((avg_r - direct_r).max_abs() < 1e-7);

    // torsion freeness of the average, and y-independence of the field
    const ConnectionField f = averaged_connection_field(rs, ConnectionSource::Chern, 10);
    CHECK(f.y_independent);
    const Ten3 c1 = f.coefficients(SlitPoint{xr, {1.0, 0.0, 0.0}});
    const Ten3 c2 = f.coefficients(SlitPoint{xr, {0.0, -0.4, 1.0}});
    CHECK((c1 - c2).max_abs() == 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) CHECK(c1(i, j, k) == doctest::Approx(c1(i, k, j)));

    // non-parallel Randers: the average differs from the pointwise field
    const FinslerModel ctrl = load("randers_control.json");
    const Vec xc = {0.4, 1.3, 2.0};
    const Ten3 avg_c = averaged_connection_at(ctrl, ConnectionSource::Chern, xc, 10);
    SampleGen gen(7);
    double gap = 0.0;
    for (int s = 0; s < 5; ++s) {
        const Vec y = sample_direction(ctrl, xc, gen);
        gap = std::max(gap, (chern_coefficients(ctrl, SlitPoint{xc, y}) - avg_c).max_abs());
    }
    CHECK(gap > 1e-4);
}

TEST_CASE("averaged metric") {
    const FinslerModel eu = make_euclidean(2);
    CHECK((averaged_metric(eu, {0.0, 0.0}, 16) - Mat::identity(2)).max_abs() < 1e-12);

    const FinslerModel sph = make_round_sphere();
    const Vec xs = {0.7, 1.2};
    const Mat g = fundamental_matrix(sph, SlitPoint{xs, {1.0, 0.0}});
    CHECK((averaged_metric(sph, xs, 16) - g).max_abs() < 1e-12);

    // stability of the y-dependent case under order doubling
    const FinslerModel rs = make_sphere_circle_randers(0.3);
    const Vec xr = {0.4, 1.3, 2.0};
    const Mat a1 = averaged_metric(rs, xr, 10);
    const Mat a2 = averaged_metric(rs, xr, 20);
    CHECK((a1 - a2).max_abs() < 1e-7);
    CHECK(min_eigenvalue(a1) > 0.0);
}

TEST_CASE("averaged curvature and the curvature of the average") {
    const FinslerModel eu = make_euclidean(2);
    CHECK(averaged_curvature(eu, {0.0, 0.0}, 12).max_abs() < 1e-9);

    const FinslerModel sph = make_round_sphere();
    const Vec xs = {0.7, 1.2};
    const Ten4 avgR = averaged_curvature(sph, xs, 12);
    const Ten4 direct = hh_curvature(sph, SlitPoint{xs, {0.6, 0.8}});
    CHECK((avgR - direct).max_abs() < 1e-9);

    // Berwald case: <R> equals the classical curvature tensor of <Gamma>
    const FinslerModel rs = make_sphere_circle_randers(0.3);
    const Vec xr = {0.4, 1.3, 2.0};
    const Ten4 abg = averaged_curvature(rs, xr, 10);
    const ConnectionField f = averaged_connection_field(rs, ConnectionSource::Chern, 10);
    const Ten4 rof = curvature_of_connection(f, xr);
    CHECK((abg - rof).max_abs() < 1e-5);
}

TEST_CASE("order-doubling stability of the averages") {
    const FinslerModel rs = make_sphere_circle_randers(0.3);
    const Vec x = {0.4, 1.3, 2.0};
    const Ten3 g1 = averaged_connection_at(rs, ConnectionSource::Chern, x, 16);
    const Ten3 g2 = averaged_connection_at(rs, ConnectionSource::Chern, x, 32);
    CHECK((g1 - g2).max_abs() < 1e-6);

    const Ten4 r1 = averaged_curvature(rs, x, 12);
    const Ten4 r2 = averaged_curvature(rs, x, 24);
    CHECK((r1 - r2).max_abs() < 1e-6);

    // surface models with y-dependent metrics: the trapezoid rule needs ~32
    // modes for these Randers-type norms before doubling settles under 1e-6
    for (const char* name : {"slope.json", "numata.json"}) {
        CAPTURE(name);
        const FinslerModel m = load(name);
        SampleGen gen(11);
        const Vec xs = gen.in_box(m.chart_box);
        const Ten3 a1 = averaged_connection_at(m, ConnectionSource::Chern, xs, 32);
        const Ten3 a2 = averaged_connection_at(m, ConnectionSource::Chern, xs, 64);
        CHECK((a1 - a2).max_abs() < 1e-6);
        const Mat b1 = averaged_metric(m, xs, 32);
        const Mat b2 = averaged_metric(m, xs, 64);
        CHECK((b1 - b2).max_abs() < 1e-6);
    }
}

TEST_CASE("interpolated family") {
    const FinslerModel eu = make_euclidean(2);
    MatrixField id = [](const Vec&) { return Mat::identity(2); };

    // t = 0 is the identity; t = 0.5 with h = I is a fixed point; t = 1 is h
    const FinslerModel f0 = interpolated_family(eu, id, 0.0);
    CHECK(f0.F(Vec{0.0, 0.0}, Vec{3.0, 4.0}) == doctest::Approx(5.0));
    const FinslerModel fhalf = interpolated_family(eu, id, 0.5);
    CHECK(fhalf.F(Vec{0.1, 0.2}, Vec{3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-14));
    MatrixField h4 = [](const Vec&) {
        Mat m(2, 2);
        m(0, 0) = 4.0;
        m(1, 1) = 1.0;
        return m;
    };
    const FinslerModel f1 = interpolated_family(eu, h4, 1.0);
    CHECK(f1.F(Vec{0.0, 0.0}, Vec{1.0, 0.0}) == doctest::Approx(2.0));

    // the interpolated indicatrix is computable (ellipse of aspect 2: the
    // trapezoid rule needs ~64 modes for 1e-9 here)
    const IndicatrixQuadrature q = build_indicatrix_quadrature(f1, {0.0, 0.0}, 64);
    CHECK(std::abs(indicatrix_volume(q) - 2.0 * kPi) < 1e-9);

    // non-SPD h rejected; x-derivatives rejected for t > 0
    MatrixField bad = [](const Vec&) {
        Mat m(2, 2);
        m(0, 0) = 1.0;
        m(1, 1) = -1.0;
        return m;
    };
    CHECK_THROWS_AS(interpolated_family(eu, bad, 0.5), StrongConvexityViolation);
    CHECK_THROWS_AS(interpolated_family(eu, id, 1.5), EvaluationError);
    const FinslerModel froze = interpolated_family(load("sphere.json"), id, 0.5);
    CHECK_THROWS_AS(chern_coefficients(froze, SlitPoint{{1.0, 1.0}, {1.0, 0.0}}),
                    UnsupportedOperation);
}

TEST_CASE("cone-restricted quadrature") {
    const FinslerModel br = load("berwald_rund.json");
    const Vec x = {1.0, 0.5};
    const IndicatrixQuadrature q = build_indicatrix_quadrature(br, x, 24);
    CHECK(q.cone_restricted);
    for (const SlitPoint& node : q.nodes) {
        CHECK(node.y[1] > 0.0);
        CHECK(std::abs(br.F(node.x, node.y) - 1.0) < 1e-10);
    }
    // Berwald structure: the cone average still reproduces Gamma
    SampleGen gen(5);
    const Ten3 avg = averaged_connection_at(br, ConnectionSource::Chern, x, 24);
    const Ten3 direct = chern_coefficients(br, SlitPoint{x, sample_direction(br, x, gen)});
    CHECK((avg - direct).max_abs() < 1e-6);

    // fiber-global quadrature on a y-local model without a cone is refused
    FinslerModel stripped = br;
    stripped.cone = nullptr;
    CHECK_THROWS_AS(build_indicatrix_quadrature(stripped, x, 16), ConeRequired);
}
