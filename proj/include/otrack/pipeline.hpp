#pragma once

#include "otrack/curve.hpp"
#include "otrack/eikonal.hpp"
#include "otrack/geodesic.hpp"
#include "otrack/lifting.hpp"
#include "otrack/metric.hpp"
#include "otrack/vesselness.hpp"

#include <optional>
#include <string>
#include <vector>

namespace otrack {

enum class MetricModel { LeftInvariant, DataDriven, Mixed };

struct CostConfig {
    enum class Kind { Vesselness, Score, Uniform } kind = Kind::Vesselness;
    VesselnessParams vessel;
    double score_contrast = 200;   // c in 1 / (1 + c |U|^2)
};

struct ConfigPoint {
    double x = 0, y = 0;
    std::optional<double> theta;
    int group = -1;                // seed index for per-tree tracking
};

struct TrackingConfig {
    std::string image;
    std::string ground_truth;      // optional vessel mask
    std::string output_dir = ".";
    int ntheta = 16;
    int kernel_size = 15;
    CakeParams cake;
    ModelParams model;
    MetricModel metric = MetricModel::DataDriven;
    std::vector<std::array<double, 2>> crossings;
    double crossing_a = 5;
    double crossing_sigma = 2;
    CostConfig cost_thin, cost_thick;
    std::optional<double> sigma_s_ext;   // defaults to the first vesselness scale
    double sigma_a_ext = 0;
    double stencil_relax = 0.1;
    bool gauge_route = false;
    BacktrackOptions backtrack;
    std::vector<ConfigPoint> seeds, tips, bifurcations;

    TrackingConfig();
    void validate(int nx, int ny) const;
};

TrackingConfig load_config(const std::string& path);
TrackingConfig config_from_json(const std::string& text);
std::string config_to_json(const TrackingConfig& c);

// Every field derived from the image for one cost setting.
struct PreparedModel {
    LiftedField U;              // orientation score
    LiftedField V;              // normalized multi-scale vesselness, used for orientation inference
    LiftedField C;              // cost
    MetricFieldSym G;
    CovectorField w;
    DualMetricField dual;
    StencilField stencils;
    std::optional<GaugeFrameField> gauge;
};

PreparedModel prepare_model(const Image2D& img, const TrackingConfig& cfg, const CostConfig& cost);
PreparedModel prepare_model(const LiftedField& U, const LiftedField& C, const TrackingConfig& cfg);

// Candidate orientations of a point: the given theta, or the vesselness argmax and its reversal.
std::vector<PointM2> point_candidates(const ConfigPoint& p, const LiftedField& V);

struct TrackedPath {
    Geodesic geodesic;
    std::string run;            // "single", "run1", "run2", "tree"
    int endpoint = -1;          // index of the backtracked point in its list
    bool ok = false;
    std::string error;
};

struct TreeResult {
    std::vector<TrackedPath> paths;
    int fmm_sweeps = 0;
    std::optional<double> mistake_ratio;
};

// One FMM sweep from `sources`; when `stop_near` is given the march stops once the 3x3x3 voxel
// neighborhoods of those points are accepted.
DistanceMap sweep(const PreparedModel& m, const std::vector<PointM2>& sources,
                  const std::vector<PointM2>& stop_near = {});

// Backtrack from the start candidate with the smallest W.
Geodesic backtrack_best(const PreparedModel& m, const DistanceMap& dm, const std::vector<PointM2>& starts,
                        const TrackingConfig& cfg);

Geodesic track_single(const Image2D& img, const TrackingConfig& cfg, const ConfigPoint& start, const ConfigPoint& end);
Geodesic track_single(const PreparedModel& m, const TrackingConfig& cfg, const ConfigPoint& start,
                      const ConfigPoint& end);

TreeResult track_tree_two_runs(const Image2D& img, const TrackingConfig& cfg);
TreeResult track_tree_two_runs(const PreparedModel& thin, const PreparedModel& thick, const TrackingConfig& cfg);
TreeResult track_per_tree(const PreparedModel& m, const TrackingConfig& cfg);

// Fraction of rasterized geodesic pixels outside the mask dilated by `dilate` pixels (Chebyshev).
double mistake_ratio(const std::vector<Geodesic>& geodesics, const Image2D& mask, int dilate = 1);
double mistake_ratio(const TreeResult& r, const Image2D& mask, int dilate = 1);

// Fraction of centerline pixels lying within `radius` of some geodesic's spatial projection.
double centerline_coverage(const std::vector<Geodesic>& geodesics, const std::vector<Polyline>& centerlines,
                           double radius);

std::vector<Geodesic> successful(const TreeResult& r);

}  // namespace otrack
