// finslerlab: batch front end for the Finsler geometry laboratory.
// Loads a model file, runs one computation command, writes JSON/CSV artifacts.

#include <CLI11.hpp>

#include "finsler/cli.hpp"

namespace {

finsler::Vec parse_csv_numbers(const std::string& text) {
    finsler::Vec out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t used = 0;
        out.push_back(std::stod(text.substr(pos), &used));
        pos += used;
        if (pos < text.size() && (text[pos] == ',' || text[pos] == ';')) ++pos;
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"finslerlab: tensors, connections, curvatures, indicatrix averages, "
                 "geodesics and structure classification for Finsler models"};
    app.require_subcommand(1);

    finsler::RunConfig cfg;
    std::vector<std::string> at_texts;
    std::string x0_text, v0_text, x1_text, w0_text, u0_text, center_text;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--model", cfg.model_path, "model definition JSON file")->required();
        cmd->add_option("--out", cfg.output_path, "output artifact path")->required();
        cmd->add_option("--seed", cfg.seed, "sample seed (default 42)");
        cmd->add_option("--quad-order", cfg.quad_order, "indicatrix quadrature order");
        cmd->add_option("--tol", cfg.tol, "integrator tolerance");
        cmd->add_option("--samples", cfg.samples, "directions per base point");
        cmd->add_option("--points", cfg.points, "number of base points");
        cmd->add_option("--t-end", cfg.t_end, "integration horizon");
    };

    CLI::App* classify = app.add_subcommand("classify", "residuals and structure verdicts");
    add_common(classify);
    classify->add_flag("--probe-landsberg", cfg.landsberg_probe,
                       "also run the interpolated-indicatrix diagnostic");

    CLI::App* tensors = app.add_subcommand("tensors", "tensor dump at sampled or given points");
    add_common(tensors);
    tensors->add_option("--at", at_texts,
                        "slit point as 'x0,..,xn-1;y0,..,yn-1' (repeatable)");

    CLI::App* average = app.add_subcommand("average", "indicatrix-averaged connection/metric/curvature");
    add_common(average);
    average->add_option("--at", at_texts, "base point as 'x0,..,xn-1' (repeatable)");

    CLI::App* geodesic = app.add_subcommand("geodesic", "integrate a geodesic, write CSV");
    add_common(geodesic);
    geodesic->add_option("--x0", x0_text, "initial position")->required();
    geodesic->add_option("--v0", v0_text, "initial velocity")->required();
    geodesic->add_option("--field", cfg.field_a, "chern | berwald | average-chern | average-berwald");
    geodesic->add_option("--csv-samples", cfg.csv_samples, "rows in the trajectory file");

    CLI::App* transport = app.add_subcommand("transport", "parallel transport along a path, write CSV");
    add_common(transport);
    transport->add_option("--w0", w0_text, "vector to transport")->required();
    transport->add_option("--u0", u0_text, "reference vector (y-dependent fields)");
    transport->add_option("--field", cfg.field_a, "connection field");
    transport->add_option("--path", cfg.path_kind, "segment | circle");
    transport->add_option("--x0", x0_text, "segment start / circle base point");
    transport->add_option("--x1", x1_text, "segment end");
    transport->add_option("--loop-center", center_text, "circle center");
    transport->add_option("--loop-radius", cfg.loop_radius, "circle radius");
    transport->add_option("--loop-plane-i", cfg.loop_plane_i, "circle plane, first axis");
    transport->add_option("--loop-plane-j", cfg.loop_plane_j, "circle plane, second axis");
    transport->add_option("--csv-samples", cfg.csv_samples, "rows in the trajectory file");

    CLI::App* probe = app.add_subcommand("probe-indicatrix",
                                         "transport an indicatrix sample around a loop");
    add_common(probe);
    probe->add_option("--field", cfg.field_b, "y-independent field (average-*)");
    probe->add_option("--path", cfg.path_kind, "segment | circle");
    probe->add_option("--x0", x0_text, "loop base point");
    probe->add_option("--x1", x1_text, "segment end");
    probe->add_option("--loop-center", center_text, "circle center");
    probe->add_option("--loop-radius", cfg.loop_radius, "circle radius");
    probe->add_option("--loop-plane-i", cfg.loop_plane_i, "circle plane, first axis");
    probe->add_option("--loop-plane-j", cfg.loop_plane_j, "circle plane, second axis");

    CLI::App* compare = app.add_subcommand("compare", "difference tensor and shared-geodesics probe");
    add_common(compare);
    compare->add_option("--field-a", cfg.field_a, "first connection field");
    compare->add_option("--field-b", cfg.field_b, "second connection field");
    compare->add_option("--trials", cfg.trials, "geodesic trials");

    CLI11_PARSE(app, argc, argv);

    try {
        cfg.command = app.get_subcommands().front()->get_name();
        for (const std::string& t : at_texts) cfg.at_points.push_back(parse_csv_numbers(t));
        if (!x0_text.empty()) cfg.x0 = parse_csv_numbers(x0_text);
        if (!v0_text.empty()) cfg.v0 = parse_csv_numbers(v0_text);
        if (!x1_text.empty()) cfg.x1 = parse_csv_numbers(x1_text);
        if (!w0_text.empty()) cfg.w0 = parse_csv_numbers(w0_text);
        if (!u0_text.empty()) cfg.u0 = parse_csv_numbers(u0_text);
        if (!center_text.empty()) cfg.loop_center = parse_csv_numbers(center_text);
        return finsler::run(cfg);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
