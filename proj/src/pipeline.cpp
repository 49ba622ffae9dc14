#include "otrack/pipeline.hpp"

#include "otrack/diffgeo.hpp"
#include "otrack/io.hpp"
#include "otrack/phantoms.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace otrack {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) fail(ErrorKind::Config, "unknown key '" + it.key() + "' in " + where);
    }
}

MetricModel parse_metric(const std::string& s) {
    if (s == "left_invariant") return MetricModel::LeftInvariant;
    if (s == "data_driven") return MetricModel::DataDriven;
    if (s == "mixed") return MetricModel::Mixed;
    fail(ErrorKind::Config, "unknown metric model '" + s + "'");
}

const char* metric_name(MetricModel m) {
    switch (m) {
        case MetricModel::LeftInvariant: return "left_invariant";
        case MetricModel::DataDriven: return "data_driven";
        case MetricModel::Mixed: return "mixed";
    }
    return "";
}

const char* cost_name(CostConfig::Kind k) {
    switch (k) {
        case CostConfig::Kind::Vesselness: return "vesselness";
        case CostConfig::Kind::Score: return "score";
        case CostConfig::Kind::Uniform: return "uniform";
    }
    return "";
}

CostConfig parse_cost(const json& j, CostConfig c, const std::string& where) {
    check_keys(j, {"kind", "scales", "beta", "sigma1", "sigma2_factor", "erosion_scale", "lambda_c", "p_c",
                   "bright_vessels", "score_contrast"},
               where);
    const std::string kind = j.value("kind", std::string(cost_name(c.kind)));
    if (kind == "vesselness")
        c.kind = CostConfig::Kind::Vesselness;
    else if (kind == "score")
        c.kind = CostConfig::Kind::Score;
    else if (kind == "uniform")
        c.kind = CostConfig::Kind::Uniform;
    else
        fail(ErrorKind::Config, "unknown cost kind '" + kind + "'");
    VesselnessParams& v = c.vessel;
    v.scales = j.value("scales", v.scales);
    v.beta = j.value("beta", v.beta);
    v.sigma1 = j.value("sigma1", v.sigma1);
    v.sigma2_factor = j.value("sigma2_factor", v.sigma2_factor);
    v.erosion_scale = j.value("erosion_scale", v.erosion_scale);
    v.lambda_c = j.value("lambda_c", v.lambda_c);
    v.p_c = j.value("p_c", v.p_c);
    v.bright_vessels = j.value("bright_vessels", v.bright_vessels);
    c.score_contrast = j.value("score_contrast", c.score_contrast);
    return c;
}

json cost_json(const CostConfig& c) {
    const VesselnessParams& v = c.vessel;
    return {{"kind", cost_name(c.kind)}, {"scales", v.scales},       {"beta", v.beta},
            {"sigma1", v.sigma1},        {"sigma2_factor", v.sigma2_factor}, {"erosion_scale", v.erosion_scale},
            {"lambda_c", v.lambda_c},    {"p_c", v.p_c},             {"bright_vessels", v.bright_vessels},
            {"score_contrast", c.score_contrast}};
}

std::vector<ConfigPoint> parse_points(const json& j, const std::string& where) {
    std::vector<ConfigPoint> out;
    require(j.is_array(), ErrorKind::Config, where + " must be an array");
    for (const json& e : j) {
        ConfigPoint p;
        if (e.is_array()) {
            require(e.size() == 2 || e.size() == 3, ErrorKind::Config, where + " entries need 2 or 3 numbers");
            p.x = e[0].get<double>();
            p.y = e[1].get<double>();
            if (e.size() == 3) p.theta = e[2].get<double>();
        } else {
            check_keys(e, {"x", "y", "theta", "seed"}, where);
            p.x = e.at("x").get<double>();
            p.y = e.at("y").get<double>();
            if (e.contains("theta")) p.theta = e["theta"].get<double>();
            p.group = e.value("seed", -1);
        }
        out.push_back(p);
    }
    return out;
}

json points_json(const std::vector<ConfigPoint>& pts) {
    json a = json::array();
    for (const ConfigPoint& p : pts) {
        json e = {{"x", p.x}, {"y", p.y}};
        if (p.theta) e["theta"] = *p.theta;
        if (p.group >= 0) e["seed"] = p.group;
        a.push_back(e);
    }
    return a;
}

bool use_mixed(const TrackingConfig& cfg) {
    return cfg.metric == MetricModel::Mixed || (cfg.metric == MetricModel::DataDriven && !cfg.crossings.empty());
}

void build_metric(PreparedModel& m, const TrackingConfig& cfg) {
    const ModelParams& p = cfg.model;
    MetricFieldSym G_LI = base_metric(m.C, p);
    CovectorField w_LI = base_forward_covector(m.C, p);
    if (cfg.metric == MetricModel::LeftInvariant || p.lambda_dd == 0) {
        m.G = std::move(G_LI);
        m.w = std::move(w_LI);
        if (cfg.gauge_route) m.gauge = diagonalize(m.G);
    } else {
        const double ss = cfg.sigma_s_ext.value_or(cfg.cost_thin.vessel.scales.front());
        const HessianField H = hessian_field(m.U, p.xi, ss, cfg.sigma_a_ext);
        MetricFieldSym G_DD = data_driven_metric(G_LI, H, p);
        GaugeFrameField gauge = diagonalize(G_DD);
        CovectorField w_DD = gauge_forward_covector(gauge, p);
        if (use_mixed(cfg) && !cfg.crossings.empty()) {
            const Image2D kappa =
                crossing_weight(m.U.grid.nx, m.U.grid.ny, cfg.crossings, cfg.crossing_a, cfg.crossing_sigma);
            m.G = mixed_metric(G_LI, G_DD, kappa);
            m.w = mixed_covector(w_LI, w_DD, kappa);
            if (cfg.gauge_route) m.gauge = diagonalize(m.G);
        } else {
            m.G = std::move(G_DD);
            m.w = std::move(w_DD);
            if (cfg.gauge_route) m.gauge = std::move(gauge);
        }
    }
    m.dual = dual_coefficients(m.G, m.w);
    m.stencils = build_stencils(m.dual, cfg.stencil_relax);
}

std::size_t nearest_voxel(const GridM2& g, const PointM2& p) {
    const Vec3 q = g.to_index(p);
    const int i = std::clamp(int(std::lround(q[0])), 0, g.nx - 1);
    const int j = std::clamp(int(std::lround(q[1])), 0, g.ny - 1);
    return g.index(i, j, g.wrap_k(int(std::lround(q[2]))));
}

bool same_point(const ConfigPoint& a, const ConfigPoint& b) {
    if (std::abs(a.x - b.x) > 1e-9 || std::abs(a.y - b.y) > 1e-9) return false;
    if (a.theta.has_value() != b.theta.has_value()) return false;
    return !a.theta || std::abs(wrap_angle(*a.theta) - wrap_angle(*b.theta)) < 1e-9;
}

}  // namespace

TrackingConfig::TrackingConfig() { cost_thick.vessel.scales = {1.0, 2.0}; }

void TrackingConfig::validate(int nx, int ny) const {
    model.validate();
    require(ntheta >= 4 && ntheta % 2 == 0, ErrorKind::Config, "ntheta must be even and >= 4");
    require(kernel_size >= 3 && kernel_size % 2 == 1, ErrorKind::Config, "kernel_size must be odd and >= 3");
    require(stencil_relax > 0 && stencil_relax <= 1, ErrorKind::Config, "stencil_relax must lie in (0, 1]");
    require(crossing_a >= 0 && crossing_sigma >= 0, ErrorKind::Config, "crossing parameters must be nonnegative");
    otrack::validate(cost_thin.vessel);
    otrack::validate(cost_thick.vessel);
    auto inside = [&](const std::vector<ConfigPoint>& pts, const char* what) {
        for (const ConfigPoint& p : pts)
            require(p.x >= 0 && p.y >= 0 && p.x <= nx - 1 && p.y <= ny - 1, ErrorKind::Config,
                    std::string(what) + " point (" + std::to_string(p.x) + ", " + std::to_string(p.y) +
                        ") lies outside the image");
    };
    inside(seeds, "seed");
    inside(tips, "tip");
    inside(bifurcations, "bifurcation");
}

TrackingConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, std::string("invalid JSON: ") + e.what());
    }
    require(j.is_object(), ErrorKind::Config, "configuration must be a JSON object");
    TrackingConfig c;
    try {
        check_keys(j, {"image", "ground_truth", "output_dir", "ntheta", "lifting", "model", "metric", "crossings",
                       "crossing_a", "crossing_sigma", "cost_thin", "cost_thick", "hessian", "stencil_relax",
                       "backtrack", "seeds", "tips", "bifurcations"},
                   "configuration");
        c.image = j.value("image", c.image);
        c.ground_truth = j.value("ground_truth", c.ground_truth);
        c.output_dir = j.value("output_dir", c.output_dir);
        c.ntheta = j.value("ntheta", c.ntheta);
        if (j.contains("lifting")) {
            const json& l = j["lifting"];
            check_keys(l, {"kernel_size", "rho_max", "rho_flat", "spline_order"}, "lifting");
            c.kernel_size = l.value("kernel_size", c.kernel_size);
            c.cake.rho_max = l.value("rho_max", c.cake.rho_max);
            c.cake.rho_flat = l.value("rho_flat", c.cake.rho_flat);
            c.cake.spline_order = l.value("spline_order", c.cake.spline_order);
        }
        if (j.contains("model")) {
            const json& m = j["model"];
            check_keys(m, {"xi", "zeta", "epsilon", "lambda_dd", "g33"}, "model");
            c.model.xi = m.value("xi", c.model.xi);
            c.model.zeta = m.value("zeta", c.model.zeta);
            c.model.epsilon = m.value("epsilon", c.model.epsilon);
            c.model.lambda_dd = m.value("lambda_dd", c.model.lambda_dd);
            c.model.g33 = m.value("g33", c.model.g33);
        }
        if (j.contains("metric")) c.metric = parse_metric(j["metric"].get<std::string>());
        if (j.contains("crossings"))
            for (const ConfigPoint& p : parse_points(j["crossings"], "crossings")) c.crossings.push_back({p.x, p.y});
        c.crossing_a = j.value("crossing_a", c.crossing_a);
        c.crossing_sigma = j.value("crossing_sigma", c.crossing_sigma);
        if (j.contains("cost_thin")) c.cost_thin = parse_cost(j["cost_thin"], c.cost_thin, "cost_thin");
        if (j.contains("cost_thick")) c.cost_thick = parse_cost(j["cost_thick"], c.cost_thick, "cost_thick");
        if (j.contains("hessian")) {
            const json& h = j["hessian"];
            check_keys(h, {"sigma_s_ext", "sigma_a_ext"}, "hessian");
            if (h.contains("sigma_s_ext") && !h["sigma_s_ext"].is_null()) c.sigma_s_ext = h["sigma_s_ext"].get<double>();
            c.sigma_a_ext = h.value("sigma_a_ext", c.sigma_a_ext);
        }
        c.stencil_relax = j.value("stencil_relax", c.stencil_relax);
        if (j.contains("backtrack")) {
            const json& b = j["backtrack"];
            check_keys(b, {"step", "snap_radius", "max_steps", "gauge_route"}, "backtrack");
            c.backtrack.step = b.value("step", c.backtrack.step);
            c.backtrack.snap_radius = b.value("snap_radius", c.backtrack.snap_radius);
            c.backtrack.max_steps = b.value("max_steps", c.backtrack.max_steps);
            c.gauge_route = b.value("gauge_route", c.gauge_route);
        }
        if (j.contains("seeds")) c.seeds = parse_points(j["seeds"], "seeds");
        if (j.contains("tips")) c.tips = parse_points(j["tips"], "tips");
        if (j.contains("bifurcations")) c.bifurcations = parse_points(j["bifurcations"], "bifurcations");
    } catch (const json::exception& e) {
        fail(ErrorKind::Config, std::string("bad configuration value: ") + e.what());
    }
    require(c.backtrack.step > 0 && c.backtrack.snap_radius > 0, ErrorKind::Config,
            "backtracking step and snap radius must be positive");
    return c;
}

TrackingConfig load_config(const std::string& path) {
    std::ifstream in(path);
    require(bool(in), ErrorKind::Config, "cannot open configuration " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    TrackingConfig c = config_from_json(ss.str());
    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    auto resolve = [&](std::string& p) {
        if (!p.empty() && std::filesystem::path(p).is_relative()) p = (base / p).lexically_normal().string();
    };
    resolve(c.image);
    resolve(c.ground_truth);
    resolve(c.output_dir);
    return c;
}

std::string config_to_json(const TrackingConfig& c) {
    json crossings = json::array();
    for (const auto& x : c.crossings) crossings.push_back({x[0], x[1]});
    json j = {
        {"image", c.image},
        {"ground_truth", c.ground_truth},
        {"output_dir", c.output_dir},
        {"ntheta", c.ntheta},
        {"lifting",
         {{"kernel_size", c.kernel_size},
          {"rho_max", c.cake.rho_max},
          {"rho_flat", c.cake.rho_flat},
          {"spline_order", c.cake.spline_order}}},
        {"model",
         {{"xi", c.model.xi},
          {"zeta", c.model.zeta},
          {"epsilon", c.model.epsilon},
          {"lambda_dd", c.model.lambda_dd},
          {"g33", c.model.g33}}},
        {"metric", metric_name(c.metric)},
        {"crossings", crossings},
        {"crossing_a", c.crossing_a},
        {"crossing_sigma", c.crossing_sigma},
        {"cost_thin", cost_json(c.cost_thin)},
        {"cost_thick", cost_json(c.cost_thick)},
        {"hessian",
         {{"sigma_s_ext", c.sigma_s_ext ? json(*c.sigma_s_ext) : json(nullptr)}, {"sigma_a_ext", c.sigma_a_ext}}},
        {"stencil_relax", c.stencil_relax},
        {"backtrack",
         {{"step", c.backtrack.step},
          {"snap_radius", c.backtrack.snap_radius},
          {"max_steps", c.backtrack.max_steps},
          {"gauge_route", c.gauge_route}}},
        {"seeds", points_json(c.seeds)},
        {"tips", points_json(c.tips)},
        {"bifurcations", points_json(c.bifurcations)},
    };
    return j.dump(2);
}

PreparedModel prepare_model(const Image2D& img, const TrackingConfig& cfg, const CostConfig& cost) {
    cfg.validate(img.nx, img.ny);
    PreparedModel m;
    m.U = orientation_score(img, build_cake_bank(cfg.ntheta, cfg.kernel_size, cfg.cake));
    m.V = multiscale_vesselness(m.U, cost.vessel);
    switch (cost.kind) {
        case CostConfig::Kind::Vesselness: m.C = vesselness_cost(m.V, cost.vessel); break;
        case CostConfig::Kind::Score: m.C = score_cost(m.U, cost.score_contrast); break;
        case CostConfig::Kind::Uniform: m.C = LiftedField(m.U.grid, 1.0); break;
    }
    build_metric(m, cfg);
    return m;
}

PreparedModel prepare_model(const LiftedField& U, const LiftedField& C, const TrackingConfig& cfg) {
    require(U.grid.same_shape(C.grid), ErrorKind::Config, "score and cost grids differ");
    PreparedModel m;
    m.U = U;
    m.V = multiscale_vesselness(U, cfg.cost_thin.vessel);
    m.C = C;
    build_metric(m, cfg);
    return m;
}

std::vector<PointM2> point_candidates(const ConfigPoint& p, const LiftedField& V) {
    if (p.theta) return {{p.x, p.y, wrap_angle(*p.theta)}};
    const int i = std::clamp(int(std::lround(p.x)), 0, V.grid.nx - 1);
    const int j = std::clamp(int(std::lround(p.y)), 0, V.grid.ny - 1);
    const double th = argmax_orientation(V, i, j);
    return {{p.x, p.y, th}, {p.x, p.y, wrap_angle(th + kPi)}};
}

DistanceMap sweep(const PreparedModel& m, const std::vector<PointM2>& sources, const std::vector<PointM2>& stop_near) {
    const GridM2& g = m.stencils.grid;
    SourceSet ss;
    for (const PointM2& p : sources) ss.add(g, p);
    MarchOptions opt;
    for (const PointM2& p : stop_near) {
        auto [i, j, k] = g.coords(nearest_voxel(g, p));
        for (int dk = -1; dk <= 1; ++dk)
            for (int dj = -1; dj <= 1; ++dj)
                for (int di = -1; di <= 1; ++di) {
                    const int a = i + di, b = j + dj;
                    if (a >= 0 && b >= 0 && a < g.nx && b < g.ny) opt.stop_at.push_back(g.index(a, b, g.wrap_k(k + dk)));
                }
    }
    return fast_march(ss, m.stencils, opt);
}

Geodesic backtrack_best(const PreparedModel& m, const DistanceMap& dm, const std::vector<PointM2>& starts,
                        const TrackingConfig& cfg) {
    require(!starts.empty(), ErrorKind::Config, "no start point");
    const GridM2& g = dm.W.grid;
    const PointM2* best = &starts.front();
    double wbest = kInf;
    for (const PointM2& p : starts) {
        const double w = distance_value(dm, g.to_index(p));
        if (w < wbest) {
            wbest = w;
            best = &p;
        }
    }
    if (!std::isfinite(wbest)) fail(ErrorKind::Unreachable, "start point was not reached by the front");
    BacktrackOptions opt = cfg.backtrack;
    if (m.gauge) opt.gauge = &*m.gauge;
    if (cfg.gauge_route) {
        require(m.gauge.has_value(), ErrorKind::Config, "gauge route requested without a gauge frame");
        return backtrack_gauge(*best, dm, *m.gauge, cfg.model.epsilon < 1, opt);
    }
    return backtrack_flow(*best, dm, m.stencils, opt);
}

Geodesic track_single(const PreparedModel& m, const TrackingConfig& cfg, const ConfigPoint& start,
                      const ConfigPoint& end) {
    if (same_point(start, end)) {
        Geodesic g;
        g.t = {0.0};
        g.points = {Vec3(start.x, start.y, start.theta.value_or(argmax_orientation(m.V, int(std::lround(start.x)),
                                                                                   int(std::lround(start.y)))))};
        return g;
    }
    const auto sources = point_candidates(end, m.V);
    const auto starts = point_candidates(start, m.V);
    const DistanceMap dm = sweep(m, sources, starts);
    return backtrack_best(m, dm, starts, cfg);
}

Geodesic track_single(const Image2D& img, const TrackingConfig& cfg, const ConfigPoint& start, const ConfigPoint& end) {
    cfg.validate(img.nx, img.ny);
    for (const ConfigPoint* p : {&start, &end})
        require(p->x >= 0 && p->y >= 0 && p->x <= img.nx - 1 && p->y <= img.ny - 1, ErrorKind::Config,
                "track endpoint outside the image");
    return track_single(prepare_model(img, cfg, cfg.cost_thin), cfg, start, end);
}

namespace {

void backtrack_all(const PreparedModel& m, const DistanceMap& dm, const std::vector<ConfigPoint>& pts,
                   const std::vector<int>& which, const std::string& run, const TrackingConfig& cfg, TreeResult& out) {
    for (int idx : which) {
        TrackedPath tp;
        tp.run = run;
        tp.endpoint = idx;
        try {
            tp.geodesic = backtrack_best(m, dm, point_candidates(pts[idx], m.V), cfg);
            tp.ok = true;
        } catch (const Error& e) {
            tp.error = e.what();
        }
        out.paths.push_back(std::move(tp));
    }
}

std::vector<PointM2> all_candidates(const std::vector<ConfigPoint>& pts, const LiftedField& V) {
    std::vector<PointM2> out;
    for (const ConfigPoint& p : pts)
        for (const PointM2& c : point_candidates(p, V)) out.push_back(c);
    return out;
}

std::vector<int> iota_n(std::size_t n) {
    std::vector<int> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = int(i);
    return v;
}

}  // namespace

TreeResult track_tree_two_runs(const PreparedModel& thin, const PreparedModel& thick, const TrackingConfig& cfg) {
    require(!cfg.seeds.empty(), ErrorKind::Config, "tree tracking needs at least one seed");
    TreeResult out;
    if (!cfg.tips.empty()) {
        std::vector<ConfigPoint> src = cfg.bifurcations;
        src.insert(src.end(), cfg.seeds.begin(), cfg.seeds.end());
        const DistanceMap dm = sweep(thin, all_candidates(src, thin.V), all_candidates(cfg.tips, thin.V));
        ++out.fmm_sweeps;
        backtrack_all(thin, dm, cfg.tips, iota_n(cfg.tips.size()), "run1", cfg, out);
    }
    if (!cfg.bifurcations.empty()) {
        const DistanceMap dm =
            sweep(thick, all_candidates(cfg.seeds, thick.V), all_candidates(cfg.bifurcations, thick.V));
        ++out.fmm_sweeps;
        backtrack_all(thick, dm, cfg.bifurcations, iota_n(cfg.bifurcations.size()), "run2", cfg, out);
    }
    return out;
}

TreeResult track_tree_two_runs(const Image2D& img, const TrackingConfig& cfg) {
    const PreparedModel thin = prepare_model(img, cfg, cfg.cost_thin);
    if (cfg.bifurcations.empty()) return track_tree_two_runs(thin, thin, cfg);
    return track_tree_two_runs(thin, prepare_model(img, cfg, cfg.cost_thick), cfg);
}

TreeResult track_per_tree(const PreparedModel& m, const TrackingConfig& cfg) {
    require(!cfg.seeds.empty(), ErrorKind::Config, "per-tree tracking needs at least one seed");
    std::vector<std::vector<int>> groups(cfg.seeds.size());
    for (std::size_t t = 0; t < cfg.tips.size(); ++t) {
        const int s = cfg.tips[t].group;
        require(s >= 0 && s < int(cfg.seeds.size()), ErrorKind::Config,
                "tip " + std::to_string(t) + " is not labeled with a valid seed");
        groups[s].push_back(int(t));
    }
    TreeResult out;
    for (std::size_t s = 0; s < groups.size(); ++s) {
        if (groups[s].empty()) continue;
        std::vector<PointM2> stops;
        for (int t : groups[s])
            for (const PointM2& c : point_candidates(cfg.tips[t], m.V)) stops.push_back(c);
        const DistanceMap dm = sweep(m, point_candidates(cfg.seeds[s], m.V), stops);
        ++out.fmm_sweeps;
        backtrack_all(m, dm, cfg.tips, groups[s], "tree", cfg, out);
    }
    return out;
}

double mistake_ratio(const std::vector<Geodesic>& geodesics, const Image2D& mask, int dilate) {
    std::set<std::pair<int, int>> px;
    for (const Geodesic& g : geodesics)
        for (const auto& p : rasterize_polyline(spatial_projection(g))) px.insert({p[0], p[1]});
    require(!px.empty(), ErrorKind::Config, "mistake ratio of an empty geodesic set");
    std::size_t out = 0;
    for (const auto& [i, j] : px) {
        bool inside = false;
        for (int dj = -dilate; dj <= dilate && !inside; ++dj)
            for (int di = -dilate; di <= dilate && !inside; ++di) {
                const int a = i + di, b = j + dj;
                inside = a >= 0 && b >= 0 && a < mask.nx && b < mask.ny && mask(a, b) > 0.5;
            }
        out += !inside;
    }
    return double(out) / double(px.size());
}

double mistake_ratio(const TreeResult& r, const Image2D& mask, int dilate) {
    return mistake_ratio(successful(r), mask, dilate);
}

double centerline_coverage(const std::vector<Geodesic>& geodesics, const std::vector<Polyline>& centerlines,
                           double radius) {
    std::set<std::pair<int, int>> px;
    for (const Polyline& c : centerlines)
        for (const auto& p : rasterize_polyline(c)) px.insert({p[0], p[1]});
    require(!px.empty(), ErrorKind::Config, "empty centerline set");
    std::vector<Polyline> paths;
    for (const Geodesic& g : geodesics) paths.push_back(spatial_projection(g));
    std::size_t covered = 0;
    for (const auto& [i, j] : px) {
        bool hit = false;
        for (const Polyline& p : paths)
            if (!p.empty() && distance_to_polyline(p, i, j) <= radius) {
                hit = true;
                break;
            }
        covered += hit;
    }
    return double(covered) / double(px.size());
}

std::vector<Geodesic> successful(const TreeResult& r) {
    std::vector<Geodesic> out;
    for (const TrackedPath& p : r.paths)
        if (p.ok) out.push_back(p.geodesic);
    return out;
}

}  // namespace otrack
