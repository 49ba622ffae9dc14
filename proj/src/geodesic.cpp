#include "otrack/geodesic.hpp"

#include <sstream>

namespace otrack {

namespace {

// Grid-unit central differences of W at a voxel, one-sided where a neighbor is missing or infinite.
Vec3 voxel_gradient(const DistanceMap& dm, std::size_t v) {
    const GridM2& g = dm.W.grid;
    auto [i, j, k] = g.coords(v);
    const double w0 = dm.W.values[v];
    Vec3 out;
    for (int a = 0; a < 3; ++a) {
        auto value = [&](int s) {
            int c[3] = {i, j, k};
            c[a] += s;
            if (c[0] < 0 || c[1] < 0 || c[0] >= g.nx || c[1] >= g.ny) return kInf;
            if (g.periodic)
                c[2] = g.wrap_k(c[2]);
            else if (c[2] < 0 || c[2] >= g.ntheta)
                return kInf;
            return dm.W.values[g.index(c[0], c[1], c[2])];
        };
        const double p = value(1), m = value(-1);
        const bool fp = std::isfinite(p), fm = std::isfinite(m);
        out[a] = fp && fm ? 0.5 * (p - m) : fp ? p - w0 : fm ? w0 - m : 0.0;
    }
    return out;
}

// Periodic-aware offset from voxel s to the point q, in grid units.
Vec3 offset_to(const GridM2& g, std::size_t s, const Vec3& q) {
    auto [i, j, k] = g.coords(s);
    Vec3 d(q[0] - i, q[1] - j, q[2] - k);
    if (g.periodic) d[2] -= g.ntheta * std::round(d[2] / g.ntheta);
    return d;
}

struct DualSample {
    Mat3 D;
    Vec3 eta;
    double C;
};

// Trilinear weights plus the rotations needed to interpolate tensors in left-invariant components, so
// that left-invariant fields are reproduced exactly between orientation samples. Flat lattices use the
// fixed components.
struct LeftInvariantWeights {
    Trilinear t;
    std::array<Mat3, 8> B;
    Mat3 Bq;
};

LeftInvariantWeights li_weights(const GridM2& g, const Vec3& q) {
    LeftInvariantWeights w{trilinear(g, q), {}, Mat3::Identity()};
    for (int n = 0; n < 8; ++n)
        w.B[n] = g.periodic ? left_invariant_rotation(g.theta(g.coords(w.t.idx[n])[2])) : Mat3::Identity();
    if (g.periodic) w.Bq = left_invariant_rotation(q[2] * g.htheta());
    return w;
}

Mat3 li_interpolate(const LeftInvariantWeights& w, const std::vector<Mat3>& f) {
    Mat3 m = Mat3::Zero();
    for (int n = 0; n < 8; ++n)
        if (w.t.w[n] != 0.0) m += w.t.w[n] * (w.B[n] * f[w.t.idx[n]] * w.B[n].transpose());
    return w.Bq.transpose() * m * w.Bq;
}

Vec3 li_interpolate(const LeftInvariantWeights& w, const std::vector<Vec3>& f) {
    Vec3 v = Vec3::Zero();
    for (int n = 0; n < 8; ++n)
        if (w.t.w[n] != 0.0) v += w.t.w[n] * (w.B[n] * f[w.t.idx[n]]);
    return w.Bq.transpose() * v;
}

DualSample sample_dual(const DualMetricField& f, const Vec3& q) {
    const LeftInvariantWeights w = li_weights(f.grid, q);
    DualSample s{li_interpolate(w, f.D), li_interpolate(w, f.eta), 0.0};
    for (int n = 0; n < 8; ++n) s.C += w.t.w[n] * f.C[w.t.idx[n]];
    return s;
}

std::string describe(const GridM2& g, const Vec3& q) {
    PointM2 p = g.from_index(q);
    std::ostringstream os;
    os << "(" << p.x << ", " << p.y << ", " << p.theta << ")";
    return os.str();
}

template <class Velocity>
Geodesic descend(const PointM2& p, const DistanceMap& dm, Velocity velocity, const BacktrackOptions& opt) {
    const GridM2& g = dm.W.grid;
    require(!dm.sources.empty(), ErrorKind::Domain, "distance map has no sources");
    Vec3 q = g.to_index(p);
    const double W0 = distance_value(dm, q);
    if (!std::isfinite(W0)) fail(ErrorKind::Unreachable, "start point " + describe(g, q) + " was not reached");
    for (std::size_t s : dm.sources)
        if (offset_to(g, s, q).norm() < 1e-9) fail(ErrorKind::Domain, "start point is a source");

    std::vector<Vec3> qs{q};
    std::vector<double> ss{0.0};
    double s = 0, best = W0;
    int stagnant = 0;
    std::size_t since_best = 0;
    for (std::size_t step = 0;; ++step) {
        double near = kInf;
        std::size_t src = 0;
        for (std::size_t sv : dm.sources) {
            const double d = offset_to(g, sv, q).norm();
            if (d < near) {
                near = d;
                src = sv;
            }
        }
        if (near <= opt.snap_radius) {
            const Vec3 target = q - offset_to(g, src, q);
            s += std::max(near, 1e-12);
            qs.push_back(target);
            ss.push_back(s);
            break;
        }
        if (step >= opt.max_steps) fail(ErrorKind::Numerical, "backtracking exceeded the step limit at " + describe(g, q));
        Vec3 qn;
        double ds;
        try {
            const Vec3 k1 = velocity(q);
            const double n1 = k1.norm();
            if (!(n1 > 0) || !std::isfinite(n1))
                fail(ErrorKind::Numerical, "vanishing descent direction at " + describe(g, q));
            ds = opt.step / n1;
            const Vec3 k2 = velocity(Vec3(q + 0.5 * ds * k1));
            qn = q + ds * k2;
            trilinear(g, qn);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Domain) throw;
            fail(ErrorKind::Numerical, "backtracking left the domain near " + describe(g, q));
        }
        const double moved = (qn - q).norm();
        stagnant = moved < 1e-6 ? stagnant + 1 : 0;
        if (stagnant >= 10) fail(ErrorKind::Numerical, "backtracking stagnated at " + describe(g, q));
        const double wn = distance_value(dm, qn);
        if (wn < best) {
            best = wn;
            since_best = 0;
        } else if (++since_best > 50) {
            fail(ErrorKind::Numerical, "backtracking stalled at " + describe(g, q) + " (likely a Maxwell point)");
        }
        q = qn;
        s += ds;
        qs.push_back(q);
        ss.push_back(s);
    }

    Geodesic geo;
    geo.length = W0;
    const double h = g.htheta();
    for (std::size_t n = 0; n < qs.size(); ++n) {
        geo.t.push_back(ss[n] / ss.back());
        geo.points.emplace_back(g.x0 + qs[n][0], g.y0 + qs[n][1], qs[n][2] * h);
    }
    if (opt.gauge) {
        for (std::size_t n = 0; n < qs.size(); ++n) {
            if (n + 1 == qs.size() && n > 0) {
                geo.momentum.push_back(geo.momentum.back());
                continue;
            }
            const FrameSample fs = sample_frame(*opt.gauge, qs[n]);
            const Vec3 dw = covector_to_phys(distance_gradient(dm, qs[n]), h);
            geo.momentum.emplace_back(dw.dot(fs.A[0]), dw.dot(fs.A[1]), dw.dot(fs.A[2]));
        }
    }
    return geo;
}

}  // namespace

Vec3 distance_gradient(const DistanceMap& dm, const Vec3& q) {
    Trilinear t = trilinear(dm.W.grid, q);
    Vec3 g = Vec3::Zero();
    double wsum = 0;
    for (int n = 0; n < 8; ++n) {
        if (t.w[n] == 0.0 || !std::isfinite(dm.W.values[t.idx[n]])) continue;
        g += t.w[n] * voxel_gradient(dm, t.idx[n]);
        wsum += t.w[n];
    }
    return wsum > 0 ? Vec3(g / wsum) : Vec3::Zero();
}

double distance_value(const DistanceMap& dm, const Vec3& q) {
    Trilinear t = trilinear(dm.W.grid, q);
    double v = 0, wsum = 0;
    for (int n = 0; n < 8; ++n) {
        if (t.w[n] == 0.0 || !std::isfinite(dm.W.values[t.idx[n]])) continue;
        v += t.w[n] * dm.W.values[t.idx[n]];
        wsum += t.w[n];
    }
    return wsum > 0 ? v / wsum : kInf;
}

Vec3 gauge_momentum(const DistanceMap& dm, const GaugeFrameField& gauge, const PointM2& p) {
    const Vec3 q = gauge.grid.to_index(p);
    const FrameSample fs = sample_frame(gauge, q);
    const Vec3 dw = covector_to_phys(distance_gradient(dm, q), gauge.grid.htheta());
    return {dw.dot(fs.A[0]), dw.dot(fs.A[1]), dw.dot(fs.A[2])};
}

Geodesic backtrack(const PointM2& p, const DistanceMap& dm, const DualMetricField& dual, const BacktrackOptions& opt) {
    require(dual.grid.same_shape(dm.W.grid), ErrorKind::Config, "distance map and dual field grids differ");
    auto velocity = [&](const Vec3& q) -> Vec3 {
        const DualSample d = sample_dual(dual, q);
        const Vec3 ph = distance_gradient(dm, q);
        const double pos = std::max(0.0, d.eta.dot(ph));
        const double Fs = std::sqrt(std::max(0.0, ph.dot(d.D * ph)) + pos * pos) / d.C;
        if (!(Fs > 0)) return Vec3::Zero();
        return -(d.D * ph + pos * d.eta) / (d.C * d.C * Fs);
    };
    return descend(p, dm, velocity, opt);
}

Vec3 upwind_flow(const StencilField& st, const DistanceMap& dm, std::size_t v) {
    const GridM2& g = st.grid;
    if (dm.state[v] != VoxelState::Accepted) return Vec3::Zero();
    const double w0 = dm.W.values[v];
    auto [i, j, k] = g.coords(v);
    auto value = [&](const std::array<std::int16_t, 3>& o, int sign, Vec3& d) {
        const int a = i + sign * o[0], b = j + sign * o[1];
        int c = k + sign * o[2];
        if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) return kInf;
        if (g.periodic)
            c = g.wrap_k(c);
        else if (c < 0 || c >= g.ntheta)
            return kInf;
        const std::size_t n = g.index(a, b, c);
        if (dm.state[n] != VoxelState::Accepted) return kInf;
        d = Vec3(sign * o[0], sign * o[1], sign * o[2]);
        return dm.W.values[n];
    };
    const Stencil& s = st.stencils[v];
    Vec3 flow = Vec3::Zero();
    for (int e = 0; e < s.nsym; ++e) {
        Vec3 dp, dm_;
        const double vp = value(s.sym[e].offset, 1, dp), vm = value(s.sym[e].offset, -1, dm_);
        const double vmin = std::min(vp, vm);
        if (vmin < w0) flow += s.sym[e].weight * (w0 - vmin) * (vp <= vm ? dp : dm_);
    }
    for (int f = 0; f < s.nfwd; ++f) {
        Vec3 d;
        const double vf = value(s.fwd[f].offset, -1, d);
        if (vf < w0) flow += s.fwd[f].weight * (w0 - vf) * d;
    }
    return flow;
}

Geodesic backtrack_flow(const PointM2& p, const DistanceMap& dm, const StencilField& st, const BacktrackOptions& opt) {
    require(st.grid.same_shape(dm.W.grid), ErrorKind::Config, "distance map and stencil grids differ");
    auto velocity = [&](const Vec3& q) -> Vec3 {
        const LeftInvariantWeights lw = li_weights(st.grid, q);
        Vec3 v = Vec3::Zero();
        for (int n = 0; n < 8; ++n) {
            if (lw.t.w[n] == 0.0) continue;
            const Vec3 f = upwind_flow(st, dm, lw.t.idx[n]);
            const double nf = f.norm();
            if (nf > 0) v += (lw.t.w[n] / nf) * (lw.B[n] * f);
        }
        return lw.Bq.transpose() * v;
    };
    return descend(p, dm, velocity, opt);
}

Geodesic backtrack_gauge(const PointM2& p, const DistanceMap& dm, const GaugeFrameField& gauge, bool forward_only,
                         const BacktrackOptions& opt) {
    require(gauge.grid.same_shape(dm.W.grid), ErrorKind::Config, "distance map and frame grids differ");
    const double h = gauge.grid.htheta();
    auto velocity = [&](const Vec3& q) -> Vec3 {
        const FrameSample fs = sample_frame(gauge, q);
        const Vec3 dw = covector_to_phys(distance_gradient(dm, q), h);
        Vec3 v = Vec3::Zero();
        double Fs2 = 0;
        for (int k = 0; k < 3; ++k) {
            double lam = dw.dot(fs.A[k]);
            if (k == 0 && forward_only) lam = std::max(0.0, lam);
            v -= (lam / fs.alpha[k]) * fs.A[k];
            Fs2 += lam * lam / fs.alpha[k];
        }
        if (!(Fs2 > 0)) return Vec3::Zero();
        v /= std::sqrt(Fs2);
        return {v[0], v[1], v[2] / h};
    };
    return descend(p, dm, velocity, opt);
}

ShootResult shoot_hamiltonian(const PointM2& p0, const Vec3& lambda0, const GaugeFrameField& gauge,
                              const StructureFunctions& sf, double T, double dt, bool include_metric_gradient,
                              bool normalize) {
    require(T > 0 && dt > 0, ErrorKind::Config, "T and dt must be positive");
    const GridM2& g = gauge.grid;
    const double h = g.htheta();
    using State = Eigen::Matrix<double, 6, 1>;
    auto hamiltonian = [&](const State& x) {
        const FrameSample fs = sample_frame(gauge, g.to_index({x[0], x[1], x[2]}));
        double H = 0;
        for (int i = 0; i < 3; ++i) H += 0.5 * x[3 + i] * x[3 + i] / fs.alpha[i];
        return H;
    };
    auto rhs = [&](const State& x) {
        const Vec3 q = g.to_index({x[0], x[1], x[2]});
        const FrameSample fs = sample_frame(gauge, q);
        const auto c = sample_structure(sf, q);
        const Vec3 lam = x.tail<3>();
        Vec3 up;
        for (int j = 0; j < 3; ++j) up[j] = lam[j] / fs.alpha[j];
        State d;
        d.head<3>() = up[0] * fs.A[0] + up[1] * fs.A[1] + up[2] * fs.A[2];
        Vec3 ld = Vec3::Zero();
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                for (int k = 0; k < 3; ++k) ld[i] += c[StructureFunctions::slot(j, i, k)] * lam[k] * up[j];
        if (include_metric_gradient) {
            const TrilinearGradient tg = trilinear_gradient(g, q);
            std::array<Vec3, 3> grad;  // physical gradient of alpha_j
            for (int j = 0; j < 3; ++j) {
                Vec3 gj = Vec3::Zero();
                for (int n = 0; n < 8; ++n) gj += gauge.alpha[tg.idx[n]][j] * tg.dw[n];
                grad[j] = Vec3(gj[0], gj[1], gj[2] / h);
            }
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j)
                    ld[i] += 0.5 * lam[j] * lam[j] * fs.A[i].dot(grad[j]) / (fs.alpha[j] * fs.alpha[j]);
        }
        d.tail<3>() = ld;
        return d;
    };
    State x;
    x << p0.x, p0.y, p0.theta, lambda0;
    if (normalize) {
        const double H0 = hamiltonian(x);
        require(H0 > 0, ErrorKind::Config, "initial momentum is zero");
        x.tail<3>() /= std::sqrt(2 * H0);
    }
    ShootResult out;
    const int steps = std::max(1, int(std::lround(T / dt)));
    const double tau = T / steps;
    auto record = [&](double t) {
        out.curve.t.push_back(t / T);
        out.curve.points.emplace_back(x[0], x[1], x[2]);
        out.curve.momentum.emplace_back(x[3], x[4], x[5]);
        out.hamiltonian.push_back(hamiltonian(x));
    };
    record(0);
    for (int s = 0; s < steps; ++s) {
        try {
            const State k1 = rhs(x);
            const State k2 = rhs(State(x + 0.5 * tau * k1));
            const State k3 = rhs(State(x + 0.5 * tau * k2));
            const State k4 = rhs(State(x + tau * k3));
            const State xn = x + (tau / 6) * (k1 + 2 * k2 + 2 * k3 + k4);
            trilinear(g, g.to_index({xn[0], xn[1], xn[2]}));
            x = xn;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::Domain) throw;
            out.curve.truncated = true;
            break;
        }
        record((s + 1) * tau);
    }
    out.curve.length = out.curve.t.back() * T;
    return out;
}

double finsler_length(const Geodesic& geo, const MetricFieldSym& G, const CovectorField& w, bool travel_reversed) {
    const GridM2& g = G.grid;
    double L = 0;
    for (std::size_t n = 0; n + 1 < geo.points.size(); ++n) {
        const Vec3 qa = g.to_index({geo.points[n][0], geo.points[n][1], geo.points[n][2]});
        const Vec3 qb = g.to_index({geo.points[n + 1][0], geo.points[n + 1][1], geo.points[n + 1][2]});
        const Vec3 d = travel_reversed ? Vec3(qa - qb) : Vec3(qb - qa);
        const LeftInvariantWeights lw = li_weights(g, 0.5 * (qa + qb));
        L += finsler_norm(li_interpolate(lw, G.G), li_interpolate(lw, w.w), d);
    }
    return L;
}

}  // namespace otrack
