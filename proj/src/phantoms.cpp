#include "otrack/phantoms.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace otrack {

namespace {

Polyline sample_curve(int n, auto f) {
    Polyline out;
    for (int s = 0; s <= n; ++s) out.push_back(f(double(s) / n));
    return out;
}

double heading(const Polyline& l, bool at_end) {
    const auto& a = at_end ? l[l.size() - 2] : l[0];
    const auto& b = at_end ? l.back() : l[1];
    return wrap_angle(std::atan2(b[1] - a[1], b[0] - a[0]));
}

}  // namespace

double distance_to_polyline(const Polyline& line, double x, double y) {
    double best = kInf;
    for (std::size_t s = 0; s + 1 < line.size(); ++s) {
        const double ax = line[s][0], ay = line[s][1];
        const double dx = line[s + 1][0] - ax, dy = line[s + 1][1] - ay;
        const double L2 = dx * dx + dy * dy;
        const double t = L2 > 0 ? std::clamp(((x - ax) * dx + (y - ay) * dy) / L2, 0.0, 1.0) : 0.0;
        best = std::min(best, std::hypot(x - ax - t * dx, y - ay - t * dy));
    }
    if (line.size() == 1) best = std::hypot(x - line[0][0], y - line[0][1]);
    return best;
}

Phantom render_tubes(int nx, int ny, const std::vector<Polyline>& lines, const std::vector<double>& radii,
                     double contrast) {
    require(lines.size() == radii.size(), ErrorKind::Config, "one radius per centerline");
    Phantom p;
    p.image = Image2D(nx, ny, 1.0);
    p.mask = Image2D(nx, ny, 0.0);
    p.centerlines = lines;
    p.radii = radii;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            double depth = 0;
            for (std::size_t l = 0; l < lines.size(); ++l) {
                const double d = distance_to_polyline(lines[l], i, j);
                const double s = 0.5 * radii[l];
                depth = std::max(depth, std::exp(-0.5 * d * d / (s * s)));
                if (d <= radii[l]) p.mask(i, j) = 1.0;
            }
            p.image(i, j) = 1.0 - contrast * depth;
        }
    return p;
}

Phantom straight_tube(int nx, int ny, std::array<double, 2> a, std::array<double, 2> b, double radius) {
    Phantom p = render_tubes(nx, ny, {{a, b}}, {radius});
    const double th = wrap_angle(std::atan2(b[1] - a[1], b[0] - a[0]));
    p.seeds.push_back({a[0], a[1], th});
    p.tips.push_back({b[0], b[1], th});
    return p;
}

Phantom s_curve(int n, double radius) {
    const double m = 0.15 * n, A = 0.22 * n;
    Polyline c = sample_curve(400, [&](double t) -> std::array<double, 2> {
        return {0.5 * n + A * std::sin(kTwoPi * t), m + t * (n - 1 - 2 * m)};
    });
    Phantom p = render_tubes(n, n, {c}, {radius});
    p.seeds.push_back({c.front()[0], c.front()[1], heading(c, false)});
    p.tips.push_back({c.back()[0], c.back()[1], heading(c, true)});
    return p;
}

Phantom y_tree(int n, double trunk_radius, double branch_radius) {
    const double cx = 0.5 * n, y0 = 0.1 * n, yb = 0.45 * n, yt = 0.9 * n;
    Polyline trunk = sample_curve(100, [&](double t) -> std::array<double, 2> { return {cx, y0 + t * (yb - y0)}; });
    auto branch = [&](double side) {
        return sample_curve(200, [&](double t) -> std::array<double, 2> {
            return {cx + side * 0.3 * n * std::sin(0.5 * kPi * t) * t, yb + t * (yt - yb)};
        });
    };
    Polyline left = branch(-1), right = branch(1);
    Phantom p = render_tubes(n, n, {trunk, left, right}, {trunk_radius, branch_radius, branch_radius});
    p.seeds.push_back({cx, y0, heading(trunk, false)});
    p.bifurcations.push_back({cx, yb, heading(trunk, true)});
    p.tips.push_back({left.back()[0], left.back()[1], heading(left, true)});
    p.tips.push_back({right.back()[0], right.back()[1], heading(right, true)});
    return p;
}

Image2D rotate90(const Image2D& img) {
    Image2D out(img.ny, img.nx);
    for (int j = 0; j < img.ny; ++j)
        for (int i = 0; i < img.nx; ++i) out(img.ny - 1 - j, i) = img(i, j);
    return out;
}

PointM2 rotate90(const PointM2& p, int ny) { return {ny - 1 - p.y, p.x, wrap_angle(p.theta + 0.5 * kPi)}; }

void add_noise(Image2D& img, double sigma, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> nd(0.0, sigma);
    for (double& v : img.values) v += nd(rng);
}

}  // namespace otrack
