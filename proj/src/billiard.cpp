#include "omap/billiard.hpp"

#include <cmath>
#include <memory>
#include <numbers>

namespace omap {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Disk {
    Vec2 center;
    double radius;
};

struct DiskSet {
    std::vector<Disk> disks;

    Vec2 boundary_point(int j, double s) const {
        const double th = s / disks[j].radius;
        return disks[j].center + disks[j].radius * Vec2(std::cos(th), std::sin(th));
    }
    Vec2 normal(int j, double s) const {
        const double th = s / disks[j].radius;
        return Vec2(std::cos(th), std::sin(th));
    }
    Vec2 tangent(int j, double s) const {
        const double th = s / disks[j].radius;
        return Vec2(-std::sin(th), std::cos(th));
    }
    double arclength_of(int j, const Vec2& x) const {
        Vec2 d = x - disks[j].center;
        double th = std::atan2(d[1], d[0]);
        if (th < 0) th += kTwoPi;
        return disks[j].radius * th;
    }
};

struct Flight {
    int hit = -1;       // disk reached first (-1: escapes to infinity)
    double ell = 0.0;   // chord length
    Vec2 point;         // arrival point
};

Flight trace(const DiskSet& g, const Vec2& from, const Vec2& dir, int skip) {
    Flight f;
    double best = std::numeric_limits<double>::infinity();
    for (int m = 0; m < static_cast<int>(g.disks.size()); ++m) {
        if (m == skip) continue;
        Vec2 w = from - g.disks[m].center;
        const double b = dir.dot(w);
        const double q = w.squaredNorm() - g.disks[m].radius * g.disks[m].radius;
        const double disc = b * b - q;
        if (disc <= 0.0) continue;
        const double t = -b - std::sqrt(disc);
        if (t > 1e-12 && t < best) {
            best = t;
            f.hit = m;
            f.ell = t;
            f.point = from + t * dir;
        }
    }
    return f;
}

Vec2 outgoing_dir(const DiskSet& g, int j, double s, double eta) {
    const double c = std::sqrt(std::max(0.0, 1.0 - eta * eta));
    return eta * g.tangent(j, s) + c * g.normal(j, s);
}

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b) {
    Vec2 ab = b - a;
    double t = ab.squaredNorm() > 0 ? (p - a).dot(ab) / ab.squaredNorm() : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

}  // namespace

OpenMapSystem three_disk_system(const std::vector<Vec2>& centers,
                                const std::vector<double>& radii) {
    if (centers.size() != radii.size() || centers.size() < 2)
        throw std::invalid_argument("three_disk_system: need matching centers and radii");
    const int J = static_cast<int>(centers.size());
    auto geom = std::make_shared<DiskSet>();
    for (int j = 0; j < J; ++j) geom->disks.push_back({centers[j], radii[j]});

    for (int i = 0; i < J; ++i)
        for (int j = i + 1; j < J; ++j)
            if ((centers[i] - centers[j]).norm() <= radii[i] + radii[j])
                throw std::invalid_argument("three_disk_system: disks " + std::to_string(i) +
                                            " and " + std::to_string(j) + " overlap");

    // Non-eclipse: disk k must stay clear of the convex hull of disks i, j.
    double clearance = std::numeric_limits<double>::infinity();
    for (int k = 0; k < J; ++k)
        for (int i = 0; i < J; ++i)
            for (int j = i + 1; j < J; ++j) {
                if (k == i || k == j) continue;
                const double d = point_segment_distance(centers[k], centers[i], centers[j]) -
                                 radii[k] - std::max(radii[i], radii[j]);
                clearance = std::min(clearance, d);
                if (d <= 0.0)
                    throw std::invalid_argument(
                        "three_disk_system: eclipse condition violated, disk " + std::to_string(k) +
                        " meets the convex hull of disks " + std::to_string(i) + " and " +
                        std::to_string(j));
            }

    OpenMapSystem sys;
    sys.name = "disks";
    if (std::isfinite(clearance)) sys.notes["eclipse_clearance"] = std::to_string(clearance);
    for (int j = 0; j < J; ++j) {
        sys.blocks.push_back(Rect{0.0, kTwoPi * radii[j], -1.0, 1.0});
        sys.x_period.push_back(kTwoPi * radii[j]);
    }

    for (int i = 0; i < J; ++i) {
        for (int j = 0; j < J; ++j) {
            if (i == j) continue;
            MapPiece piece;
            piece.from_block = j;
            piece.to_block = i;
            piece.bounds = sys.blocks[j];
            piece.in_domain = [geom, i, j](const PhasePoint& p) {
                if (p.block != j || std::abs(p.xi) >= 1.0 - 1e-12) return false;
                Flight f = trace(*geom, geom->boundary_point(j, p.x),
                                 outgoing_dir(*geom, j, p.x, p.xi), j);
                return f.hit == i;
            };
            piece.forward = [geom, i, j](const PhasePoint& p) {
                Vec2 v = outgoing_dir(*geom, j, p.x, p.xi);
                Flight f = trace(*geom, geom->boundary_point(j, p.x), v, j);
                const double s1 = geom->arclength_of(i, f.point);
                // reflection keeps the tangential component
                const double eta1 = v.dot(geom->tangent(i, s1));
                return PhasePoint{s1, eta1, i};
            };
            piece.inverse = [geom, i, j](const PhasePoint& p) {
                // reconstruct the incoming ray at the arrival point, trace it back
                Vec2 n1 = geom->normal(i, p.x);
                Vec2 vout = outgoing_dir(*geom, i, p.x, p.xi);
                Vec2 vin = vout - 2.0 * vout.dot(n1) * n1;
                Flight f = trace(*geom, geom->boundary_point(i, p.x), -vin, i);
                if (f.hit != j) return PhasePoint{0.0, 0.0, -1};
                const double s0 = geom->arclength_of(j, f.point);
                const double eta0 = vin.dot(geom->tangent(j, s0));
                return PhasePoint{s0, eta0, j};
            };
            piece.differential = [geom, i, j](const PhasePoint& p) {
                const double aj = geom->disks[j].radius;
                const double ai = geom->disks[i].radius;
                const double c = std::sqrt(std::max(1e-300, 1.0 - p.xi * p.xi));
                Vec2 v = outgoing_dir(*geom, j, p.x, p.xi);
                Flight f = trace(*geom, geom->boundary_point(j, p.x), v, j);
                const double s1 = geom->arclength_of(i, f.point);
                const double c1 = -v.dot(geom->normal(i, s1));
                const double ell = f.ell;
                // beam transfer: boundary -> ray, free flight, ray -> boundary
                // with reflection; exactly area-preserving in (s, eta)
                const double ds_ds = -(c + ell / aj) / c1;
                const double ds_de = -ell / (c * c1);
                Mat2 d;
                d(0, 0) = ds_ds;
                d(0, 1) = ds_de;
                d(1, 0) = -c1 / aj + (c1 / ai) * ds_ds;
                d(1, 1) = -c1 / c + (c1 / ai) * ds_de;
                return d;
            };
            sys.pieces.push_back(std::move(piece));
        }
    }
    // Grid survivors cannot reach useful depths for a dispersing billiard;
    // calibrate the expansion bracket on short periodic orbits instead.
    std::vector<PhasePoint> per = periodic_trapped_points(centers, radii, 6);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const PhasePoint& p : per) {
        const double j1 = unstable_jacobian(sys, p, 1, 12);
        lo = std::min(lo, j1);
        hi = std::max(hi, j1);
    }
    if (hi > 0.0) {
        sys.lambda0 = std::log(lo) - 0.05;
        sys.lambda1 = std::log(hi) + 0.05;
    }
    finalize_system(sys, 2, 64);
    for (int c = 0; c < sys.alphabet_size(); ++c)
        for (const PhasePoint& p : per)
            if (sys.cell_contains(c, p)) {
                sys.partition[c].center = p;
                break;
            }
    return sys;
}

OpenMapSystem three_disk_system(double side, double radius) {
    const double h = side * std::sqrt(3.0) / 2.0;
    std::vector<Vec2> centers{Vec2(0.0, 0.0), Vec2(side, 0.0), Vec2(0.5 * side, h)};
    return three_disk_system(centers, {radius, radius, radius});
}

PhasePoint facing_point(const std::vector<Vec2>& centers, const std::vector<double>& radii,
                        int from, int to) {
    Vec2 d = centers[to] - centers[from];
    double th = std::atan2(d[1], d[0]);
    if (th < 0) th += kTwoPi;
    return PhasePoint{radii[from] * th, 0.0, from};
}

std::vector<PhasePoint> periodic_orbit(const std::vector<Vec2>& centers,
                                       const std::vector<double>& radii,
                                       const std::vector<int>& itinerary) {
    const int n = static_cast<int>(itinerary.size());
    if (n < 2) throw std::invalid_argument("periodic_orbit: need at least 2 bounces");
    for (int k = 0; k < n; ++k)
        if (itinerary[k] == itinerary[(k + 1) % n])
            throw std::invalid_argument("periodic_orbit: consecutive bounces on the same disk");

    // Total chord length as a function of the boundary angles; its critical
    // point satisfies the reflection law. Coordinate-wise Newton sweeps with
    // the analytic gradient g_k = a_k t_k . (u_{k-1} - u_k).
    std::vector<double> theta(n);
    for (int k = 0; k < n; ++k) {
        Vec2 d = centers[itinerary[(k + 1) % n]] - centers[itinerary[k]];
        theta[k] = std::atan2(d[1], d[0]);
    }
    auto pos = [&](int k, double th) {
        return Vec2(centers[itinerary[k]] + radii[itinerary[k]] * Vec2(std::cos(th), std::sin(th)));
    };
    auto grad_k = [&](int k, double th) {
        Vec2 xk = pos(k, th);
        Vec2 prev = pos((k + n - 1) % n, theta[(k + n - 1) % n]);
        Vec2 next = pos((k + 1) % n, theta[(k + 1) % n]);
        Vec2 u_prev = (xk - prev).normalized();
        Vec2 u_next = (next - xk).normalized();
        Vec2 t(-std::sin(th), std::cos(th));
        return radii[itinerary[k]] * t.dot(u_prev - u_next);
    };
    for (int sweep = 0; sweep < 400; ++sweep) {
        double moved = 0.0;
        for (int k = 0; k < n; ++k) {
            const double h0 = 1e-7;
            const double g = grad_k(k, theta[k]);
            const double hh = (grad_k(k, theta[k] + h0) - grad_k(k, theta[k] - h0)) / (2 * h0);
            double stepv = (hh > 1e-12) ? g / hh : 0.5 * g;
            stepv = std::clamp(stepv, -0.2, 0.2);
            theta[k] -= stepv;
            moved = std::max(moved, std::abs(stepv));
        }
        if (moved < 1e-15) break;
    }
    std::vector<PhasePoint> out(n);
    for (int k = 0; k < n; ++k) {
        int dk = itinerary[k];
        double th = theta[k] - kTwoPi * std::floor(theta[k] / kTwoPi);
        Vec2 xk = pos(k, theta[k]);
        Vec2 to = pos((k + 1) % n, theta[(k + 1) % n]);
        Vec2 u = (to - xk).normalized();
        Vec2 t(-std::sin(th), std::cos(th));
        out[k] = PhasePoint{radii[dk] * th, u.dot(t), dk};
    }
    return out;
}

std::vector<PhasePoint> periodic_trapped_points(const std::vector<Vec2>& centers,
                                                const std::vector<double>& radii, int max_period) {
    const int J = static_cast<int>(centers.size());
    std::vector<PhasePoint> out;
    for (int n = 2; n <= max_period; ++n) {
        // cyclically admissible disk sequences, one representative per
        // rotation class (lexicographically smallest)
        std::vector<int> itin(n);
        std::function<void(int)> dfs = [&](int k) {
            if (k == n) {
                if (itin[n - 1] == itin[0]) return;
                for (int r = 1; r < n; ++r) {
                    bool smaller = false, equal = true;
                    for (int i = 0; i < n && equal; ++i) {
                        int a = itin[(i + r) % n], b = itin[i];
                        if (a != b) {
                            smaller = a < b;
                            equal = false;
                        }
                    }
                    if (smaller) return;  // not the canonical rotation
                }
                auto orbit = periodic_orbit(centers, radii, itin);
                out.insert(out.end(), orbit.begin(), orbit.end());
                return;
            }
            for (int d = 0; d < J; ++d) {
                if (k > 0 && d == itin[k - 1]) continue;
                itin[k] = d;
                dfs(k + 1);
            }
        };
        dfs(0);
    }
    return out;
}

}  // namespace omap
