#include "otrack/diffgeo.hpp"
#include "otrack/eikonal.hpp"
#include "otrack/io.hpp"
#include "otrack/lifting.hpp"
#include "otrack/phantoms.hpp"
#include "otrack/pipeline.hpp"
#include "otrack/vesselness.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

using namespace otrack;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kOther = 1, kConfig = 2, kUnreachable = 3, kNumerical = 4 };

struct Overrides {
    std::string config, image, output;
    std::optional<int> ntheta;
    std::optional<double> xi, zeta, epsilon, lambda_dd;
    std::optional<std::string> metric;
};

void add_common(CLI::App* app, Overrides& o) {
    app->add_option("-c,--config", o.config, "JSON tracking configuration");
    app->add_option("-i,--image", o.image, "input image (PNG or PGM)");
    app->add_option("-o,--output", o.output, "output directory");
    app->add_option("--ntheta", o.ntheta, "number of orientations");
    app->add_option("--xi", o.xi);
    app->add_option("--zeta", o.zeta);
    app->add_option("--epsilon", o.epsilon);
    app->add_option("--lambda-dd", o.lambda_dd, "data-driven weight");
    app->add_option("--metric", o.metric, "left_invariant, data_driven or mixed");
}

TrackingConfig resolve(const Overrides& o) {
    TrackingConfig c = o.config.empty() ? TrackingConfig{} : load_config(o.config);
    if (!o.image.empty()) c.image = o.image;
    if (!o.output.empty()) c.output_dir = o.output;
    if (o.ntheta) c.ntheta = *o.ntheta;
    if (o.xi) c.model.xi = *o.xi;
    if (o.zeta) c.model.zeta = *o.zeta;
    if (o.epsilon) c.model.epsilon = *o.epsilon;
    if (o.lambda_dd) c.model.lambda_dd = *o.lambda_dd;
    if (o.metric) {
        nlohmann::json j = {{"metric", *o.metric}};
        c.metric = config_from_json(j.dump()).metric;
    }
    require(!c.image.empty(), ErrorKind::Config, "no input image given");
    fs::create_directories(c.output_dir);
    return c;
}

ConfigPoint parse_point(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            v.push_back(std::stod(tok));
        } catch (const std::exception&) {
            fail(ErrorKind::Config, "bad point '" + s + "'");
        }
    }
    require(v.size() == 2 || v.size() == 3, ErrorKind::Config, "points are x,y or x,y,theta");
    ConfigPoint p{v[0], v[1]};
    if (v.size() == 3) p.theta = v[2];
    return p;
}

std::string out_path(const TrackingConfig& c, const std::string& name) { return (fs::path(c.output_dir) / name).string(); }

// Projection over theta: maximum of |f| (or minimum of f when `min` is set).
Image2D project(const LiftedField& f, bool min) {
    Image2D out(f.grid.nx, f.grid.ny, min ? kInf : 0.0);
    for (int k = 0; k < f.grid.ntheta; ++k)
        for (int j = 0; j < f.grid.ny; ++j)
            for (int i = 0; i < f.grid.nx; ++i)
                out(i, j) = min ? std::min(out(i, j), f(i, j, k)) : std::max(out(i, j), std::abs(f(i, j, k)));
    if (!min) {
        double m = 0;
        for (double v : out.values) m = std::max(m, v);
        if (m > 0)
            for (double& v : out.values) v /= m;
    }
    return out;
}

std::vector<Marker> markers(const TrackingConfig& c) {
    std::vector<Marker> out;
    for (const auto& p : c.seeds) out.push_back({p.x, p.y, kSeedColor});
    for (const auto& p : c.bifurcations) out.push_back({p.x, p.y, kBifurcationColor});
    for (const auto& p : c.tips) out.push_back({p.x, p.y, kTipColor});
    return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_lift(const Overrides& o) {
    const TrackingConfig c = resolve(o);
    const Image2D img = load_image(c.image);
    const LiftedField U = orientation_score(img, build_cake_bank(c.ntheta, c.kernel_size, c.cake));
    save_field(U, out_path(c, "score.otf"));
    save_image(project(U, false), out_path(c, "score_max.png"));
    std::cout << "score " << U.grid.nx << "x" << U.grid.ny << "x" << U.grid.ntheta << " -> " << out_path(c, "score.otf")
              << "\n";
    return kOk;
}

int run_cost(const Overrides& o, const std::string& which) {
    const TrackingConfig c = resolve(o);
    require(which == "thin" || which == "thick", ErrorKind::Config, "--run is thin or thick");
    const CostConfig& cc = which == "thin" ? c.cost_thin : c.cost_thick;
    const Image2D img = load_image(c.image);
    const LiftedField U = orientation_score(img, build_cake_bank(c.ntheta, c.kernel_size, c.cake));
    LiftedField C;
    switch (cc.kind) {
        case CostConfig::Kind::Vesselness: C = vesselness_multiscale_cost(U, cc.vessel); break;
        case CostConfig::Kind::Score: C = score_cost(U, cc.score_contrast); break;
        case CostConfig::Kind::Uniform: C = LiftedField(U.grid, 1.0); break;
    }
    save_field(C, out_path(c, "cost_" + which + ".otf"));
    save_image(project(C, true), out_path(c, "cost_" + which + "_min.png"));
    std::cout << "cost -> " << out_path(c, "cost_" + which + ".otf") << "\n";
    return kOk;
}

int run_solve(const Overrides& o, const std::string& source) {
    const TrackingConfig c = resolve(o);
    const Image2D img = load_image(c.image);
    const auto t0 = std::chrono::steady_clock::now();
    const PreparedModel m = prepare_model(img, c, c.cost_thin);
    const double prep = seconds_since(t0);
    std::vector<PointM2> src;
    if (!source.empty())
        src = point_candidates(parse_point(source), m.V);
    else
        for (const auto& p : c.seeds)
            for (const PointM2& q : point_candidates(p, m.V)) src.push_back(q);
    require(!src.empty(), ErrorKind::Config, "no source: pass --source or list seeds in the configuration");
    const auto t1 = std::chrono::steady_clock::now();
    const DistanceMap dm = sweep(m, src);
    const double march = seconds_since(t1);
    std::size_t checked = 0;
    const double res = scheme_residual(m.stencils, dm, &checked);
    save_field(dm.W, out_path(c, "distance.otf"));
    LiftedField Wf = dm.W;
    double wmax = 0;
    for (double v : Wf.values)
        if (std::isfinite(v)) wmax = std::max(wmax, v);
    for (double& v : Wf.values) v = std::isfinite(v) && wmax > 0 ? v / wmax : 1.0;
    save_image(project(Wf, true), out_path(c, "distance_min.png"));
    std::cout << "accepted " << dm.accepted << " of " << dm.W.grid.size() << ", prepare " << prep << " s, march "
              << march << " s, max residual " << res << " over " << checked << " voxels\n";
    return kOk;
}

int run_track(const Overrides& o, const std::string& start, const std::string& end) {
    const TrackingConfig c = resolve(o);
    const Image2D img = load_image(c.image);
    const auto t0 = std::chrono::steady_clock::now();
    const ConfigPoint a = parse_point(start), b = parse_point(end);
    const Geodesic g = track_single(img, c, a, b);
    save_geodesic_csv(g, out_path(c, "geodesic.csv"));
    save_overlay(img, {spatial_projection(g)}, {{a.x, a.y, kTipColor}, {b.x, b.y, kSeedColor}},
                 out_path(c, "track.png"));
    std::cout << "length " << g.length << ", " << g.points.size() << " samples, " << seconds_since(t0) << " s -> "
              << out_path(c, "geodesic.csv") << "\n";
    return kOk;
}

int run_tree(const Overrides& o, bool per_tree) {
    const TrackingConfig c = resolve(o);
    const Image2D img = load_image(c.image);
    c.validate(img.nx, img.ny);
    TreeResult r;
    if (per_tree)
        r = track_per_tree(prepare_model(img, c, c.cost_thin), c);
    else
        r = track_tree_two_runs(img, c);
    if (!c.ground_truth.empty()) {
        const std::vector<Geodesic> ok = successful(r);
        if (!ok.empty()) r.mistake_ratio = mistake_ratio(ok, load_image(c.ground_truth));
    }
    nlohmann::json summary = {{"fmm_sweeps", r.fmm_sweeps}, {"paths", nlohmann::json::array()}};
    std::vector<Polyline> lines;
    int failures = 0;
    for (std::size_t n = 0; n < r.paths.size(); ++n) {
        const TrackedPath& p = r.paths[n];
        nlohmann::json e = {{"run", p.run}, {"endpoint", p.endpoint}, {"ok", p.ok}};
        if (p.ok) {
            const std::string file = p.run + "_" + std::to_string(p.endpoint) + ".csv";
            save_geodesic_csv(p.geodesic, out_path(c, file));
            lines.push_back(spatial_projection(p.geodesic));
            e["file"] = file;
            e["length"] = p.geodesic.length;
        } else {
            e["error"] = p.error;
            ++failures;
        }
        summary["paths"].push_back(e);
    }
    if (r.mistake_ratio) summary["mistake_ratio"] = *r.mistake_ratio;
    std::ofstream(out_path(c, "tree.json")) << summary.dump(2) << "\n";
    save_overlay(img, lines, markers(c), out_path(c, "tree.png"));
    std::cout << r.paths.size() - failures << " of " << r.paths.size() << " paths, " << r.fmm_sweeps << " sweeps";
    if (r.mistake_ratio) std::cout << ", E = " << *r.mistake_ratio;
    std::cout << "\n";
    return failures ? kNumerical : kOk;
}

int run_eval(const std::string& mask_path, const std::vector<std::string>& files, int dilate) {
    require(!files.empty(), ErrorKind::Config, "no geodesic files");
    const Image2D mask = load_image(mask_path);
    std::vector<Geodesic> gs;
    nlohmann::json out = {{"per_track", nlohmann::json::array()}};
    for (const std::string& f : files) {
        gs.push_back(load_geodesic_csv(f));
        out["per_track"].push_back({{"file", f}, {"mistake_ratio", mistake_ratio({gs.back()}, mask, dilate)}});
    }
    out["mistake_ratio"] = mistake_ratio(gs, mask, dilate);
    std::cout << out.dump(2) << "\n";
    return kOk;
}

int run_figure(const std::string& image, const std::vector<std::string>& files, const std::string& config,
               const std::string& out) {
    const Image2D img = load_image(image);
    std::vector<Polyline> lines;
    for (const std::string& f : files) lines.push_back(spatial_projection(load_geodesic_csv(f)));
    std::vector<Marker> mk;
    if (!config.empty()) mk = markers(load_config(config));
    save_overlay(img, lines, mk, out);
    std::cout << "figure -> " << out << "\n";
    return kOk;
}

int run_phantom(const std::string& kind, int n, const std::string& dir) {
    fs::create_directories(dir);
    Phantom p = kind == "tube"     ? straight_tube(n, n, {0.15 * n, 0.3 * n}, {0.85 * n, 0.7 * n})
                : kind == "s-curve" ? s_curve(n)
                : kind == "y-tree"  ? y_tree(n)
                                    : (fail(ErrorKind::Config, "phantom is tube, s-curve or y-tree"), Phantom{});
    save_image(p.image, (fs::path(dir) / "image.png").string(), 16);
    save_image(p.mask, (fs::path(dir) / "mask.png").string());
    TrackingConfig c;
    c.image = "image.png";
    c.ground_truth = "mask.png";
    for (const auto& q : p.seeds) c.seeds.push_back({q.x, q.y});
    for (const auto& q : p.tips) c.tips.push_back({q.x, q.y, std::nullopt, p.seeds.empty() ? -1 : 0});
    for (const auto& q : p.bifurcations) c.bifurcations.push_back({q.x, q.y});
    std::ofstream((fs::path(dir) / "config.json").string()) << config_to_json(c) << "\n";
    std::cout << "phantom " << kind << " -> " << dir << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Geodesic vessel tracking on orientation scores"};
    app.require_subcommand(1);

    Overrides lift_o, cost_o, solve_o, track_o, tree_o;
    auto* lift = app.add_subcommand("lift", "orientation score of an image");
    add_common(lift, lift_o);

    std::string cost_run = "thin";
    auto* cost = app.add_subcommand("cost", "tracking cost on the lifted domain");
    add_common(cost, cost_o);
    cost->add_option("--run", cost_run, "thin or thick cost settings");

    std::string source;
    auto* solve = app.add_subcommand("solve", "distance map from a source (or the configured seeds)");
    add_common(solve, solve_o);
    solve->add_option("--source", source, "x,y[,theta]");

    std::string start, end;
    auto* track = app.add_subcommand("track", "single geodesic from --start back to --end");
    add_common(track, track_o);
    track->add_option("--start", start, "x,y[,theta]")->required();
    track->add_option("--end", end, "x,y[,theta]")->required();

    bool per_tree = false;
    auto* tree = app.add_subcommand("tree", "vascular tree tracking (two runs, or one run per seed)");
    add_common(tree, tree_o);
    tree->add_flag("--per-tree", per_tree, "one sweep per seed over its labeled tips");

    std::string mask;
    std::vector<std::string> files;
    int dilate = 1;
    auto* eval = app.add_subcommand("eval", "mistake ratio of geodesic CSVs against a vessel mask");
    eval->add_option("--mask", mask)->required();
    eval->add_option("--dilate", dilate, "mask dilation in pixels");
    eval->add_option("geodesics", files)->required();

    std::string fig_image, fig_config, fig_out = "figure.png";
    std::vector<std::string> fig_files;
    auto* figure = app.add_subcommand("figure", "overlay geodesics on an image");
    figure->add_option("--image", fig_image)->required();
    figure->add_option("--config", fig_config, "configuration whose points are drawn as markers");
    figure->add_option("--out", fig_out);
    figure->add_option("geodesics", fig_files);

    std::string ph_kind = "y-tree", ph_dir = "phantom";
    int ph_n = 128;
    auto* phantom = app.add_subcommand("phantom", "write a synthetic phantom with mask and configuration");
    phantom->add_option("kind", ph_kind, "tube, s-curve or y-tree");
    phantom->add_option("--size", ph_n);
    phantom->add_option("-o,--output", ph_dir);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    try {
        if (*lift) return run_lift(lift_o);
        if (*cost) return run_cost(cost_o, cost_run);
        if (*solve) return run_solve(solve_o, source);
        if (*track) return run_track(track_o, start, end);
        if (*tree) return run_tree(tree_o, per_tree);
        if (*eval) return run_eval(mask, files, dilate);
        if (*figure) return run_figure(fig_image, fig_files, fig_config, fig_out);
        if (*phantom) return run_phantom(ph_kind, ph_n, ph_dir);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.kind()) {
            case ErrorKind::Config:
            case ErrorKind::IO: return kConfig;
            case ErrorKind::Unreachable: return kUnreachable;
            case ErrorKind::Numerical:
            case ErrorKind::Domain: return kNumerical;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOther;
    }
    return kOther;
}
