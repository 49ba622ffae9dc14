#include "otrack/curve.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

namespace otrack {

std::vector<std::array<double, 2>> spatial_projection(const Geodesic& g) {
    std::vector<std::array<double, 2>> out;
    out.reserve(g.points.size());
    for (const Vec3& p : g.points) out.push_back({p[0], p[1]});
    return out;
}

namespace {

std::vector<Eigen::Vector2d> densify(const Geodesic& g) {
    std::vector<Eigen::Vector2d> out;
    for (std::size_t n = 0; n < g.points.size(); ++n) {
        Eigen::Vector2d b = g.points[n].head<2>();
        if (n > 0) {
            Eigen::Vector2d a = g.points[n - 1].head<2>();
            int m = std::max(1, int(std::ceil((b - a).norm() / 0.1)));
            for (int s = 1; s < m; ++s) out.push_back(a + (b - a) * (double(s) / m));
        }
        out.push_back(b);
    }
    return out;
}

double directed(const std::vector<Eigen::Vector2d>& a, const std::vector<Eigen::Vector2d>& b) {
    double worst = 0;
    for (const auto& p : a) {
        double best = kInf;
        for (const auto& q : b) best = std::min(best, (p - q).squaredNorm());
        worst = std::max(worst, best);
    }
    return std::sqrt(worst);
}

}  // namespace

double hausdorff_spatial(const Geodesic& a, const Geodesic& b) {
    require(!a.points.empty() && !b.points.empty(), ErrorKind::Domain, "empty curve");
    auto da = densify(a), db = densify(b);
    return std::max(directed(da, db), directed(db, da));
}

void save_geodesic_csv(const Geodesic& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::IO, "cannot open " + path);
    const bool mom = g.momentum.size() == g.points.size() && !g.points.empty();
    out << "t,x,y,theta" << (mom ? ",lambda1,lambda2,lambda3" : "") << "\n";
    out << std::setprecision(10);
    for (std::size_t n = 0; n < g.points.size(); ++n) {
        out << g.t[n] << "," << g.points[n][0] << "," << g.points[n][1] << "," << g.points[n][2];
        if (mom) out << "," << g.momentum[n][0] << "," << g.momentum[n][1] << "," << g.momentum[n][2];
        out << "\n";
    }
    if (!out) fail(ErrorKind::IO, "failed writing " + path);
}

Geodesic load_geodesic_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorKind::IO, "cannot open " + path);
    std::string line;
    std::getline(in, line);
    if (line.rfind("t,x,y,theta", 0) != 0) fail(ErrorKind::IO, "not a geodesic CSV: " + path);
    const bool mom = line.find("lambda1") != std::string::npos;
    Geodesic g;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::vector<double> v;
        std::string cell;
        while (std::getline(ls, cell, ',')) v.push_back(std::stod(cell));
        if (v.size() < (mom ? 7u : 4u)) fail(ErrorKind::IO, "malformed geodesic CSV row: " + path);
        g.t.push_back(v[0]);
        g.points.emplace_back(v[1], v[2], v[3]);
        if (mom) g.momentum.emplace_back(v[4], v[5], v[6]);
    }
    return g;
}

}  // namespace otrack
