#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "finsler/expression.hpp"
#include "finsler/field.hpp"
#include "finsler/jet.hpp"
#include "finsler/point.hpp"
#include "finsler/sampling.hpp"

namespace finsler {

/// Riemannian metric plus one-form, as expression fields over x. Carried by
/// Randers-type models so the classifier can run the parallel-form test.
struct RandersData {
    int dim = 0;
    std::vector<std::vector<Expr>> a;
    std::vector<Expr> b;
};

/// Angular sector of tangent directions in the (y[0], y[1]) plane; used by
/// y-local surface models whose strong convexity holds only on a cone.
struct DirectionCone {
    double theta_lo;
    double theta_hi;
};

/// A Finsler structure on a single coordinate chart. F is the norm itself;
/// F2 its square (the field every tensor is derived from). Models are
/// immutable after construction and freely shareable.
struct FinslerModel {
    std::string name;
    std::string family;
    int dim = 0;
    ScalarField F;
    ScalarField F2;

    /// Predicate marking where strong convexity is claimed (beyond y != 0).
    std::function<bool(const SlitPoint&)> in_domain;

    /// For y-local models: the sector of usable directions at a base point.
    std::function<DirectionCone(const Vec&)> cone;

    /// Default sampling box for the chart, one (lo, hi) pair per coordinate.
    std::vector<std::pair<double, double>> chart_box;

    bool x_differentiable = true;
    bool y_global = true;

    std::shared_ptr<RandersData> randers; // set for Randers-type families

    bool domain_ok(const SlitPoint& p) const { return !in_domain || in_domain(p); }
};

/// Draws a unit direction usable at base point x, rejecting directions
/// outside the convexity domain (cone-aware, with an angular safety margin
/// that keeps samples clear of the degenerate boundary).
inline Vec sample_direction(const FinslerModel& m, const Vec& x, SampleGen& gen,
                            double cone_margin = 0.1) {
    for (int attempt = 0; attempt < 4096; ++attempt) {
        Vec y;
        if (m.cone) {
            const DirectionCone c = m.cone(x);
            const double span = c.theta_hi - c.theta_lo;
            const double theta = gen.uniform(c.theta_lo + cone_margin * span,
                                             c.theta_hi - cone_margin * span);
            y = {std::cos(theta), std::sin(theta)};
        } else {
            y = gen.unit_direction(m.dim);
        }
        if (m.domain_ok(SlitPoint{x, y})) return y;
    }
    throw EvaluationError("sample_direction: no usable direction in the convexity domain of '" +
                          m.name + "'");
}

/// Draws a slit point from the model's chart box with a usable direction.
inline SlitPoint sample_point(const FinslerModel& m, SampleGen& gen, double cone_margin = 0.1) {
    SlitPoint p;
    p.x = gen.in_box(m.chart_box);
    p.y = sample_direction(m, p.x, gen, cone_margin);
    return p;
}

struct HomogeneityReport {
    double max_scaling_residual = 0.0;
    double max_euler_residual = 0.0;

    double worst() const { return std::max(max_scaling_residual, max_euler_residual); }
};

/// Checks positive 1-homogeneity two ways: directly under y -> lambda y for
/// lambda in {0.5, 2, 7.3}, and through the Euler identity y . dF/dy = F.
inline HomogeneityReport check_homogeneity(const FinslerModel& m, int samples = 50,
                                           std::uint64_t seed = 42) {
    SampleGen gen(seed);
    HomogeneityReport rep;
    for (int s = 0; s < samples; ++s) {
        const SlitPoint p = sample_point(m, gen);
        const double f = m.F(p.x, p.y);
        if (!(f > 0.0)) continue;
        for (double lambda : {0.5, 2.0, 7.3}) {
            const double fs = m.F(p.x, lambda * p.y);
            rep.max_scaling_residual =
                std::max(rep.max_scaling_residual, std::abs(fs - lambda * f) / (lambda * f));
        }
        const Jet2Value j = eval_jet(m.F, p);
        rep.max_euler_residual =
            std::max(rep.max_euler_residual, std::abs(dot(p.y, j.dy) - f) / f);
    }
    return rep;
}

} // namespace finsler
