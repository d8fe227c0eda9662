#pragma once

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "finsler/catalog.hpp"
#include "finsler/metric.hpp"

namespace finsler {

using nlohmann::json;

namespace detail {

inline std::vector<std::vector<Expr>> parse_matrix(const json& j, const std::string& key, int dim,
                                                   std::vector<std::string>& errors) {
    std::vector<std::vector<Expr>> out;
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
        errors.push_back("params." + key + " must be a " + std::to_string(dim) + "x" +
                         std::to_string(dim) + " array of expression strings");
        return out;
    }
    for (int i = 0; i < dim; ++i) {
        if (!j[i].is_array() || static_cast<int>(j[i].size()) != dim) {
            errors.push_back("params." + key + "[" + std::to_string(i) + "] must have " +
                             std::to_string(dim) + " entries");
            return out;
        }
        std::vector<Expr> row;
        for (int k = 0; k < dim; ++k) {
            if (!j[i][k].is_string()) {
                errors.push_back("params." + key + "[" + std::to_string(i) + "][" +
                                 std::to_string(k) + "] must be an expression string");
                return out;
            }
            try {
                Expr e = Expr::parse(j[i][k].get<std::string>());
                if (e.max_index() >= dim)
                    errors.push_back("params." + key + "[" + std::to_string(i) + "][" +
                                     std::to_string(k) + "] references coordinate index " +
                                     std::to_string(e.max_index()) + " >= dim");
                row.push_back(std::move(e));
            } catch (const ParseError& pe) {
                errors.push_back("params." + key + "[" + std::to_string(i) + "][" +
                                 std::to_string(k) + "]: " + pe.what());
                return out;
            }
        }
        out.push_back(std::move(row));
    }
    return out;
}

inline std::vector<Expr> parse_vector(const json& j, const std::string& key, int dim,
                                      std::vector<std::string>& errors) {
    std::vector<Expr> out;
    if (!j.is_array() || static_cast<int>(j.size()) != dim) {
        errors.push_back("params." + key + " must be an array of " + std::to_string(dim) +
                         " expression strings");
        return out;
    }
    for (int i = 0; i < dim; ++i) {
        if (!j[i].is_string()) {
            errors.push_back("params." + key + "[" + std::to_string(i) +
                             "] must be an expression string");
            return out;
        }
        try {
            Expr e = Expr::parse(j[i].get<std::string>());
            if (e.max_index() >= dim)
                errors.push_back("params." + key + "[" + std::to_string(i) +
                                 "] references coordinate index beyond dim");
            out.push_back(std::move(e));
        } catch (const ParseError& pe) {
            errors.push_back("params." + key + "[" + std::to_string(i) + "]: " + pe.what());
            return out;
        }
    }
    return out;
}

[[noreturn]] inline void reject(const std::vector<std::string>& errors) {
    std::string msg = "model file invalid:";
    for (const auto& e : errors) msg += "\n  - " + e;
    throw ParseError(msg, 0);
}

} // namespace detail

/// Builds a catalog model from a family name and JSON parameter object.
inline FinslerModel make_catalog_model(const std::string& family, const json& params, int dim,
                                       const std::string& name) {
    std::vector<std::string> errors;
    FinslerModel m;
    if (family == "euclidean") {
        m = make_euclidean(dim, name);
    } else if (family == "riemannian") {
        if (!params.contains("g")) detail::reject({"riemannian family needs params.g"});
        auto g = detail::parse_matrix(params["g"], "g", dim, errors);
        if (!errors.empty()) detail::reject(errors);
        m = make_riemannian(dim, std::move(g), name);
    } else if (family == "randers") {
        if (!params.contains("a") || !params.contains("b"))
            detail::reject({"randers family needs params.a and params.b"});
        auto a = detail::parse_matrix(params["a"], "a", dim, errors);
        auto b = detail::parse_vector(params["b"], "b", dim, errors);
        if (!errors.empty()) detail::reject(errors);
        m = make_randers(dim, std::move(a), std::move(b), name);
    } else if (family == "numata") {
        if (!params.contains("q")) detail::reject({"numata family needs params.q"});
        auto q = detail::parse_matrix(params["q"], "q", dim, errors);
        std::vector<Expr> b;
        if (params.contains("b")) b = detail::parse_vector(params["b"], "b", dim, errors);
        if (!errors.empty()) detail::reject(errors);
        m = make_numata(dim, std::move(q), std::move(b), name);
    } else if (family == "berwald_rund") {
        if (dim != 2) detail::reject({"berwald_rund is a surface family (dim must be 2)"});
        std::string psi_text = params.value("psi", "xi^2");
        double lo = 0.0, hi = 8.0;
        if (params.contains("xi_bracket")) {
            lo = params["xi_bracket"][0].get<double>();
            hi = params["xi_bracket"][1].get<double>();
        }
        try {
            m = make_berwald_rund(Expr::parse(psi_text, "xi"), lo, hi, name);
        } catch (const ParseError& pe) {
            detail::reject({std::string("params.psi: ") + pe.what()});
        }
    } else if (family == "sphere_circle_randers") {
        if (!params.contains("epsilon"))
            detail::reject({"sphere_circle_randers needs params.epsilon"});
        const double eps = params["epsilon"].get<double>();
        if (!(std::abs(eps) < 1.0))
            detail::reject({"sphere_circle_randers requires |epsilon| < 1"});
        m = make_sphere_circle_randers(eps, name);
    } else if (family == "slope") {
        if (!params.contains("eta") || !params.contains("c"))
            detail::reject({"slope family needs params.eta and params.c"});
        auto eta = detail::parse_matrix(params["eta"], "eta", dim, errors);
        if (!params["c"].is_string()) errors.push_back("params.c must be an expression string");
        if (!errors.empty()) detail::reject(errors);
        try {
            m = make_slope(dim, std::move(eta), Expr::parse(params["c"].get<std::string>()), name);
        } catch (const ParseError& pe) {
            detail::reject({std::string("params.c: ") + pe.what()});
        }
    } else if (family == "custom") {
        if (!params.contains("F")) detail::reject({"custom family needs params.F"});
        try {
            Expr f = Expr::parse(params["F"].get<std::string>());
            if (f.max_index() >= dim)
                detail::reject({"params.F references coordinate index beyond dim"});
            m = make_custom(dim, std::move(f), name);
        } catch (const ParseError& pe) {
            detail::reject({std::string("params.F: ") + pe.what()});
        }
    } else {
        detail::reject({"unknown family '" + family + "'"});
    }
    return m;
}

/// Validates the Randers bound ||b||_a < 1 on a chart sample; called for the
/// families that carry a one-form.
inline void validate_randers_bound(const FinslerModel& m, int samples = 200,
                                   std::uint64_t seed = 42) {
    if (!m.randers) return;
    SampleGen gen(seed);
    const int n = m.randers->dim;
    double sup = 0.0;
    Vec worst_x;
    for (int s = 0; s < samples; ++s) {
        const Vec x = gen.in_box(m.chart_box);
        Mat a(n, n);
        Vec b(n);
        const std::span<const double> xs(x);
        const std::span<const double> ys;
        for (int i = 0; i < n; ++i) {
            b[i] = m.randers->b[i].eval<double>(xs, ys);
            for (int j = 0; j < n; ++j) a(i, j) = m.randers->a[i][j].eval<double>(xs, ys);
        }
        Cholesky chol;
        if (!chol.factor(a))
            throw StrongConvexityViolation("randers base metric not positive definite",
                                           min_eigenvalue(a), x, {});
        const double nb = std::sqrt(dot(b, chol.solve(b)));
        if (nb > sup) {
            sup = nb;
            worst_x = x;
        }
    }
    if (sup >= 1.0) {
        std::ostringstream os;
        os << "randers one-form violates ||b||_a < 1 (found " << sup << " on the chart sample)";
        throw ParseError(os.str(), 0);
    }
}

/// Spot-checks positivity and strong convexity on sampled slit points.
inline void convexity_spot_check(const FinslerModel& m, int samples = 20, std::uint64_t seed = 42) {
    SampleGen gen(seed);
    for (int s = 0; s < samples; ++s) {
        const SlitPoint p = sample_point(m, gen);
        if (!(m.F(p.x, p.y) > 0.0))
            throw StrongConvexityViolation("F is not positive on the chart sample", 0.0, p.x, p.y);
        const Mat g = fundamental_matrix(m, p);
        const double lam = min_eigenvalue(g);
        if (!(lam > 0.0))
            throw StrongConvexityViolation("strong convexity fails on the chart sample", lam, p.x,
                                           p.y);
    }
}

/// Parses and validates a model-definition JSON document.
inline FinslerModel parse_model_json(const json& doc) {
    std::vector<std::string> errors;
    if (!doc.is_object()) detail::reject({"model document must be a JSON object"});
    if (!doc.contains("family") || !doc["family"].is_string())
        errors.push_back("missing string field 'family'");
    int dim = 0;
    const std::string family = doc.value("family", "");
    if (family == "sphere_circle_randers") dim = 3;
    else if (family == "berwald_rund") dim = 2;
    if (doc.contains("dim")) {
        if (!doc["dim"].is_number_integer()) errors.push_back("'dim' must be an integer");
        else dim = doc["dim"].get<int>();
    }
    if (dim < 2 && errors.empty()) errors.push_back("'dim' must be at least 2");
    if (!errors.empty()) detail::reject(errors);

    const std::string name = doc.value("name", family);
    const json params = doc.value("params", json::object());
    FinslerModel m = make_catalog_model(family, params, dim, name);

    if (doc.contains("chart_box")) {
        const json& cb = doc["chart_box"];
        if (!cb.is_array() || static_cast<int>(cb.size()) != dim)
            detail::reject({"'chart_box' must be an array of dim [lo, hi] pairs"});
        m.chart_box.clear();
        for (const auto& pair : cb) {
            if (!pair.is_array() || pair.size() != 2)
                detail::reject({"'chart_box' entries must be [lo, hi] pairs"});
            const double lo = pair[0].get<double>(), hi = pair[1].get<double>();
            if (!(lo < hi)) detail::reject({"'chart_box' entries must satisfy lo < hi"});
            m.chart_box.push_back({lo, hi});
        }
    }

    validate_randers_bound(m);
    convexity_spot_check(m);
    return m;
}

/// Loads a model file from disk. Parse errors carry location context.
inline FinslerModel parse_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open model file '" + path + "'", 0);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("model file '" + path + "': " + e.what(), e.byte);
    }
    return parse_model_json(doc);
}

// ---------------------------------------------------------------------------
// Tensor serialization helpers
// ---------------------------------------------------------------------------

inline json to_json(const Vec& v) { return json(v); }

inline json to_json(const Mat& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline json to_json(const Ten3& t) {
    json out = json::array();
    for (int i = 0; i < t.dim(); ++i) {
        json mi = json::array();
        for (int j = 0; j < t.dim(); ++j) {
            json row = json::array();
            for (int k = 0; k < t.dim(); ++k) row.push_back(t(i, j, k));
            mi.push_back(std::move(row));
        }
        out.push_back(std::move(mi));
    }
    return out;
}

inline json to_json(const Ten4& t) {
    json out = json::array();
    for (int i = 0; i < t.dim(); ++i) {
        json mi = json::array();
        for (int j = 0; j < t.dim(); ++j) {
            json mj = json::array();
            for (int k = 0; k < t.dim(); ++k) {
                json row = json::array();
                for (int l = 0; l < t.dim(); ++l) row.push_back(t(i, j, k, l));
                mj.push_back(std::move(row));
            }
            mi.push_back(std::move(mj));
        }
        out.push_back(std::move(mi));
    }
    return out;
}

} // namespace finsler
