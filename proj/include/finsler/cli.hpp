#pragma once

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "finsler/classify.hpp"
#include "finsler/model_io.hpp"

namespace finsler {

/// Batch-run configuration; one command per invocation, everything seeded
/// and deterministic so identical configs produce byte-identical artifacts.
struct RunConfig {
    std::string command; // classify | tensors | average | geodesic | transport |
                         // probe-indicatrix | compare
    std::string model_path;
    std::string output_path;
    std::uint64_t seed = 42;
    int quad_order = 16;
    double tol = 1e-9;
    int points = 50;     // base points
    int samples = 20;    // directions per base point
    double t_end = 1.0;
    int trials = 20;

    // command-specific data
    std::vector<Vec> at_points;          // tensors/average: explicit x;y or x
    Vec x0, v0, x1, w0, u0;              // geodesic / transport endpoints
    std::string field_a = "chern";       // transport / compare fields
    std::string field_b = "average-chern";
    std::string path_kind = "segment";   // transport/probe path: segment | circle
    Vec loop_center;
    double loop_radius = 0.25;
    int loop_plane_i = 0;
    int loop_plane_j = 1;
    bool landsberg_probe = false;        // classify: run the interpolation diagnostic
    int csv_samples = 65;
};

namespace detail {

inline ConnectionField field_from_name(const FinslerModel& m, const std::string& name,
                                       int quad_order) {
    if (name == "chern") return chern_field(m);
    if (name == "berwald") return berwald_field(m);
    if (name == "average-chern")
        return averaged_connection_field(m, ConnectionSource::Chern, quad_order);
    if (name == "average-berwald")
        return averaged_connection_field(m, ConnectionSource::Berwald, quad_order);
    throw ParseError("unknown connection field '" + name +
                         "' (expected chern, berwald, average-chern or average-berwald)",
                     0);
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FinslerError("cannot open output file '" + path + "'");
    out << text;
}

inline void write_json(const std::string& path, const json& doc) {
    write_text(path, doc.dump(2) + "\n");
}

inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline json run_metadata(const RunConfig& cfg, const FinslerModel& m) {
    json meta;
    meta["model"] = m.name;
    meta["family"] = m.family;
    meta["dim"] = m.dim;
    meta["seed"] = cfg.seed;
    meta["quad_order"] = cfg.quad_order;
    meta["conventions"] = {
        {"hh_curvature", "R^i_jkl = dGamma^i_jl/dx^k - dGamma^i_jk/dx^l "
                         "+ Gamma^i_hk Gamma^h_jl - Gamma^i_hl Gamma^h_jk (adapted frame)"},
        {"flag_lowering", "first index, R_ijkl = g_im R^m_jkl; round-sphere oracle gives +1"}};
    return meta;
}

inline json classification_to_json(const ClassificationReport& rep) {
    json j;
    j["model"] = rep.model;
    j["sample_spec"] = {{"base_points", rep.sample_spec.base_points},
                        {"directions", rep.sample_spec.directions},
                        {"seed", rep.sample_spec.seed}};
    j["residuals"] = rep.residuals;
    j["thresholds"] = rep.thresholds;
    j["verdicts"] = rep.verdicts;
    j["scale"] = rep.scale;
    j["cone_restricted"] = rep.cone_restricted;
    if (!rep.note.empty()) j["note"] = rep.note;
    return j;
}

inline void cmd_classify(const RunConfig& cfg, const FinslerModel& m) {
    ClassificationReport rep =
        classify(m, SampleSpec{cfg.points, cfg.samples, cfg.seed}, Thresholds{}, cfg.quad_order);
    json out = classification_to_json(rep);
    out["meta"] = run_metadata(cfg, m);
    if (cfg.landsberg_probe) {
        const auto loops = default_loops(m, 5, 0.15, cfg.seed);
        const LandsbergDiagnostic diag =
            pure_landsberg_diagnostic(m, loops, cfg.quad_order, cfg.quad_order, cfg.tol);
        json d;
        d["ts"] = diag.ts;
        d["deviations"] = diag.deviations;
        d["max_deviation"] = diag.max_deviation;
        d["witness_loop"] = diag.witness_loop;
        d["witness_t"] = diag.witness_t;
        d["conclusion"] = diag.conclusion;
        out["pure_landsberg_diagnostic"] = d;
    }
    write_json(cfg.output_path, out);
}

inline void cmd_tensors(const RunConfig& cfg, const FinslerModel& m) {
    SampleGen gen(cfg.seed);
    std::vector<SlitPoint> pts;
    for (const Vec& xy : cfg.at_points) {
        if (static_cast<int>(xy.size()) != 2 * m.dim)
            throw ParseError("tensors: --at expects " + std::to_string(2 * m.dim) +
                                 " numbers (x then y)",
                             0);
        pts.push_back(SlitPoint{Vec(xy.begin(), xy.begin() + m.dim),
                                Vec(xy.begin() + m.dim, xy.end())});
    }
    while (static_cast<int>(pts.size()) < (cfg.at_points.empty() ? cfg.points : 0))
        pts.push_back(sample_point(m, gen));

    json arr = json::array();
    for (const SlitPoint& p : pts) {
        const CurvatureBundle b = curvature_bundle(m, p);
        json e;
        e["x"] = p.x;
        e["y"] = p.y;
        e["F"] = b.cb.mb.F;
        e["g"] = to_json(b.cb.mb.g);
        e["A"] = to_json(b.cb.mb.A);
        e["gamma"] = to_json(b.cb.gamma);
        e["N"] = to_json(b.cb.N);
        e["Gamma"] = to_json(b.cb.chern);
        e["G"] = to_json(berwald_coefficients(m, p));
        e["R"] = to_json(b.R);
        e["P"] = to_json(b.P);
        e["Adot"] = to_json(landsberg_from_bundle(b, p));
        arr.push_back(std::move(e));
    }
    json out;
    out["meta"] = run_metadata(cfg, m);
    out["points"] = arr;
    write_json(cfg.output_path, out);
}

inline void cmd_average(const RunConfig& cfg, const FinslerModel& m) {
    SampleGen gen(cfg.seed);
    std::vector<Vec> xs = cfg.at_points;
    for (auto& x : xs)
        if (static_cast<int>(x.size()) != m.dim)
            throw ParseError("average: --at expects " + std::to_string(m.dim) + " numbers", 0);
    while (static_cast<int>(xs.size()) < (cfg.at_points.empty() ? std::min(cfg.points, 8) : 0))
        xs.push_back(gen.in_box(m.chart_box));

    const ConnectionField avg_field =
        averaged_connection_field(m, ConnectionSource::Chern, cfg.quad_order);
    json arr = json::array();
    for (const Vec& x : xs) {
        const IndicatrixQuadrature q = build_indicatrix_quadrature(m, x, cfg.quad_order);
        json e;
        e["x"] = x;
        e["vol"] = indicatrix_volume(q);
        e["cone_restricted"] = q.cone_restricted;
        e["avg_Gamma"] = to_json(averaged_connection_at(m, ConnectionSource::Chern, x, cfg.quad_order));
        e["avg_g"] = to_json(averaged_metric(m, x, cfg.quad_order));
        const Ten4 avgR = averaged_curvature(m, x, cfg.quad_order);
        e["avg_R"] = to_json(avgR);
        const Ten4 Rof = curvature_of_connection(avg_field, x);
        e["avg_R_vs_curvature_of_avg_gap"] = (avgR - Rof).max_abs();
        arr.push_back(std::move(e));
    }
    json out;
    out["meta"] = run_metadata(cfg, m);
    out["base_points"] = arr;
    write_json(cfg.output_path, out);
}

inline void cmd_geodesic(const RunConfig& cfg, const FinslerModel& m) {
    if (static_cast<int>(cfg.x0.size()) != m.dim || static_cast<int>(cfg.v0.size()) != m.dim)
        throw ParseError("geodesic: --x0 and --v0 must each have dim entries", 0);
    const ConnectionField field = field_from_name(m, cfg.field_a, cfg.quad_order);
    const GeodesicSolution sol =
        integrate_geodesic(field, cfg.x0, cfg.v0, cfg.t_end, cfg.tol, cfg.csv_samples);
    std::string csv = "t";
    for (int i = 0; i < m.dim; ++i) csv += ",x" + std::to_string(i);
    for (int i = 0; i < m.dim; ++i) csv += ",u" + std::to_string(i);
    for (int i = 0; i < m.dim; ++i) csv += ",W" + std::to_string(i);
    csv += ",F\n";
    for (std::size_t s = 0; s < sol.ts.size(); ++s) {
        csv += csv_number(sol.ts[s]);
        for (double v : sol.xs[s]) csv += "," + csv_number(v);
        for (double v : sol.vs[s]) csv += "," + csv_number(v);
        for (double v : sol.vs[s]) csv += "," + csv_number(v);
        csv += "," + csv_number(m.F(sol.xs[s], sol.vs[s])) + "\n";
    }
    write_text(cfg.output_path, csv);
}

inline BasePath path_from_config(const RunConfig& cfg, const FinslerModel& m) {
    if (cfg.path_kind == "segment") {
        if (static_cast<int>(cfg.x0.size()) != m.dim || static_cast<int>(cfg.x1.size()) != m.dim)
            throw ParseError("transport: segment path needs --x0 and --x1", 0);
        return segment_path(cfg.x0, cfg.x1);
    }
    if (cfg.path_kind == "circle") {
        Vec c = cfg.loop_center.empty() ? cfg.x0 : cfg.loop_center;
        if (static_cast<int>(c.size()) != m.dim)
            throw ParseError("transport: circle path needs --x0 or --loop-center", 0);
        return circle_path(c, cfg.loop_radius, cfg.loop_plane_i, cfg.loop_plane_j);
    }
    throw ParseError("unknown path kind '" + cfg.path_kind + "' (segment | circle)", 0);
}

inline void cmd_transport(const RunConfig& cfg, const FinslerModel& m) {
    if (static_cast<int>(cfg.w0.size()) != m.dim)
        throw ParseError("transport: --w0 must have dim entries", 0);
    const ConnectionField field = field_from_name(m, cfg.field_a, cfg.quad_order);
    const BasePath path = path_from_config(cfg, m);
    std::optional<Vec> u0;
    if (!cfg.u0.empty()) u0 = cfg.u0;
    const auto traj = parallel_transport(field, m, path, cfg.w0, u0, cfg.tol, cfg.csv_samples);
    std::string csv = "t";
    for (int i = 0; i < m.dim; ++i) csv += ",x" + std::to_string(i);
    for (int i = 0; i < m.dim; ++i) csv += ",u" + std::to_string(i);
    for (int i = 0; i < m.dim; ++i) csv += ",W" + std::to_string(i);
    csv += ",F\n";
    for (const TransportState& s : traj) {
        csv += csv_number(s.t);
        for (double v : s.x) csv += "," + csv_number(v);
        for (double v : s.u) csv += "," + csv_number(v);
        for (double v : s.W) csv += "," + csv_number(v);
        csv += "," + csv_number(s.F_W) + "\n";
    }
    write_text(cfg.output_path, csv);
}

inline void cmd_probe_indicatrix(const RunConfig& cfg, const FinslerModel& m) {
    const ConnectionField field = field_from_name(m, cfg.field_b, cfg.quad_order);
    if (!field.y_independent)
        throw ParseError("probe-indicatrix needs a y-independent field (average-*)", 0);
    const BasePath path = path_from_config(cfg, m);
    const Vec x0 = path.position(path.t0);
    const double dev = indicatrix_invariance_probe(m, field, x0, path, cfg.quad_order, cfg.tol);
    json out;
    out["meta"] = run_metadata(cfg, m);
    out["field"] = field.source;
    out["x"] = x0;
    out["max_deviation"] = dev;
    write_json(cfg.output_path, out);
}

inline void cmd_compare(const RunConfig& cfg, const FinslerModel& m) {
    const ConnectionField f1 = field_from_name(m, cfg.field_a, cfg.quad_order);
    const ConnectionField f2 = field_from_name(m, cfg.field_b, cfg.quad_order);

    SampleGen gen(cfg.seed);
    double maxB = 0.0, maxS = 0.0, maxA = 0.0;
    const int npts = std::min(cfg.points, 20);
    for (int s = 0; s < npts; ++s) {
        const SlitPoint p = sample_point(m, gen);
        const DifferenceTensor d = difference_tensor(f1, f2, p);
        maxB = std::max(maxB, d.B.max_abs());
        maxS = std::max(maxS, d.S.max_abs());
        maxA = std::max(maxA, d.A.max_abs());
    }
    const EquivalenceReport eq =
        geodesic_equivalence_probe(m, f1, f2, cfg.trials, cfg.t_end, cfg.tol, cfg.seed);
    json out;
    out["meta"] = run_metadata(cfg, m);
    out["field_a"] = f1.source;
    out["field_b"] = f2.source;
    out["difference_tensor"] = {{"max_B", maxB}, {"max_S", maxS}, {"max_A", maxA}};
    out["geodesic_equivalence"] = {{"trials", eq.trials},
                                   {"max_separation", eq.max_separation},
                                   {"max_symmetric_part", eq.max_symmetric_part},
                                   {"max_antisymmetric_part", eq.max_antisymmetric_part}};
    write_json(cfg.output_path, out);
}

} // namespace detail

/// Loads the model, runs the homogeneity gate, and dispatches the command.
/// Returns the process exit status.
inline int run(const RunConfig& cfg) {
    if (!(cfg.tol > 0.0) || cfg.quad_order < 4 || cfg.points < 1 || cfg.samples < 1 ||
        cfg.trials < 1)
        throw ParseError("numeric run parameters must be positive (tol, quad-order >= 4, "
                         "points, samples, trials)",
                         0);
    const FinslerModel m = parse_model(cfg.model_path);

    const HomogeneityReport hom = check_homogeneity(m, 50, cfg.seed);
    if (!(hom.worst() < 1e-6))
        throw EvaluationError("model '" + m.name +
                              "' fails the homogeneity gate: max residual " +
                              std::to_string(hom.worst()));

    if (cfg.command == "classify") detail::cmd_classify(cfg, m);
    else if (cfg.command == "tensors") detail::cmd_tensors(cfg, m);
    else if (cfg.command == "average") detail::cmd_average(cfg, m);
    else if (cfg.command == "geodesic") detail::cmd_geodesic(cfg, m);
    else if (cfg.command == "transport") detail::cmd_transport(cfg, m);
    else if (cfg.command == "probe-indicatrix") detail::cmd_probe_indicatrix(cfg, m);
    else if (cfg.command == "compare") detail::cmd_compare(cfg, m);
    else throw ParseError("unknown command '" + cfg.command + "'", 0);
    return 0;
}

} // namespace finsler
