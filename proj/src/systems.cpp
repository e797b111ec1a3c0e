#include "omap/systems.hpp"

#include <algorithm>
#include <cmath>

namespace omap {

OpenMapSystem linear_model_system(double half_width_x, double half_width_xi) {
    if (half_width_x <= 0 || half_width_xi <= 0)
        throw std::invalid_argument("linear_model_system: half-widths must be positive");
    OpenMapSystem sys;
    sys.name = "linear_model";
    sys.blocks = {Rect{-half_width_x, half_width_x, -2 * half_width_xi, 2 * half_width_xi}};
    sys.x_period = {0.0};

    Rect dom{-half_width_x, half_width_x, -half_width_xi, half_width_xi};
    MapPiece piece;
    piece.from_block = 0;
    piece.to_block = 0;
    piece.bounds = dom;
    piece.in_domain = [dom](const PhasePoint& p) { return p.block == 0 && dom.contains(p); };
    piece.forward = [](const PhasePoint& p) { return PhasePoint{0.5 * p.x, 2.0 * p.xi, 0}; };
    piece.inverse = [](const PhasePoint& p) { return PhasePoint{2.0 * p.x, 0.5 * p.xi, 0}; };
    piece.differential = [](const PhasePoint&) {
        Mat2 d;
        d << 0.5, 0.0, 0.0, 2.0;
        return d;
    };
    sys.pieces.push_back(std::move(piece));

    sys.lambda0 = sys.lambda1 = std::log(2.0);
    sys.axis_rects = true;
    sys.unstable_dir_exact = [](const PhasePoint&) { return Vec2(0.0, 1.0); };
    sys.stable_dir_exact = [](const PhasePoint&) { return Vec2(1.0, 0.0); };
    finalize_system(sys);
    // The only trapped point is the origin.
    sys.partition[0].center = PhasePoint{0.0, 0.0, 0};
    return sys;
}

namespace {

OpenMapSystem baker_like_system(int base, const std::vector<int>& kept, double bump) {
    if (base < 2) throw std::invalid_argument("open_baker_system: base must be >= 2");
    if (kept.empty()) throw std::invalid_argument("open_baker_system: kept branches must be non-empty");
    for (int a : kept)
        if (a < 0 || a >= base) throw std::invalid_argument("open_baker_system: branch out of range");

    OpenMapSystem sys;
    sys.name = bump == 0.0 ? "open_baker" : "perturbed_baker";
    sys.blocks = {Rect{0.0, 1.0, 0.0, 1.0}};
    sys.x_period = {1.0};
    const double L = base;

    // Smooth bump profile on (0,1), vanishing with all low-order derivatives
    // at the ends; g' drives the shear.
    auto gprime = [](double t) {
        if (t <= 0.0 || t >= 1.0) return 0.0;
        double s = t * (1.0 - t);
        return std::exp(-1.0 / s) * (1.0 - 2.0 * t) / (s * s);
    };
    auto gsecond = [gprime](double t) {
        const double dt = 1e-6;
        return (gprime(t + dt) - gprime(t - dt)) / (2 * dt);
    };

    for (int a : kept) {
        Rect dom{a / L, (a + 1) / L, 0.0, 1.0};
        MapPiece piece;
        piece.from_block = 0;
        piece.to_block = 0;
        piece.bounds = dom;
        piece.in_domain = [dom](const PhasePoint& p) { return p.block == 0 && dom.contains(p); };
        if (bump == 0.0) {
            piece.forward = [L, a](const PhasePoint& p) {
                return PhasePoint{L * p.x - a, (p.xi + a) / L, 0};
            };
            piece.inverse = [L, a](const PhasePoint& p) {
                return PhasePoint{(p.x + a) / L, L * p.xi - a, 0};
            };
            piece.differential = [L](const PhasePoint&) {
                Mat2 d;
                d << L, 0.0, 0.0, 1.0 / L;
                return d;
            };
        } else {
            // S2 o B_a o S1 with shears supported inside the branch cell.
            auto s1 = [bump, gprime, L, a](const PhasePoint& p) {
                return PhasePoint{p.x, p.xi + bump * gprime(L * p.x - a), 0};
            };
            auto s1_inv = [bump, gprime, L, a](const PhasePoint& p) {
                return PhasePoint{p.x, p.xi - bump * gprime(L * p.x - a), 0};
            };
            auto s2 = [bump, gprime](const PhasePoint& p) {
                return PhasePoint{p.x + bump * gprime(p.xi), p.xi, 0};
            };
            auto s2_inv = [bump, gprime](const PhasePoint& p) {
                return PhasePoint{p.x - bump * gprime(p.xi), p.xi, 0};
            };
            piece.forward = [=](const PhasePoint& p) {
                PhasePoint q = s1(p);
                q = PhasePoint{L * q.x - a, (q.xi + a) / L, 0};
                return s2(q);
            };
            piece.inverse = [=](const PhasePoint& p) {
                PhasePoint q = s2_inv(p);
                q = PhasePoint{(q.x + a) / L, L * q.xi - a, 0};
                return s1_inv(q);
            };
            piece.differential = [=](const PhasePoint& p) {
                Mat2 d1 = Mat2::Identity();
                d1(1, 0) = bump * gsecond(L * p.x - a) * L;
                Mat2 db;
                db << L, 0.0, 0.0, 1.0 / L;
                PhasePoint q = s1(p);
                q = PhasePoint{L * q.x - a, (q.xi + a) / L, 0};
                Mat2 d2 = Mat2::Identity();
                d2(0, 1) = bump * gsecond(q.xi);
                return Mat2(d2 * db * d1);
            };
        }
        sys.pieces.push_back(std::move(piece));
    }

    if (static_cast<int>(kept.size()) == base) {
        sys.fractal_ok = false;
        sys.notes["warning"] = "closed system: no hole, pressure of the unstable Jacobian is >= 0";
    }
    if (bump == 0.0) {
        sys.lambda0 = sys.lambda1 = std::log(L);
        sys.axis_rects = true;
        sys.unstable_dir_exact = [](const PhasePoint&) { return Vec2(1.0, 0.0); };
        sys.stable_dir_exact = [](const PhasePoint&) { return Vec2(0.0, 1.0); };
    }
    finalize_system(sys);
    if (bump == 0.0) {
        // Branch fixed points (a/(L-1), a/(L-1)) are exactly trapped.
        for (size_t k = 0; k < kept.size(); ++k) {
            double s = kept[k] / (L - 1.0);
            sys.partition[k].center = PhasePoint{s, s, 0};
        }
    }
    return sys;
}

}  // namespace

OpenMapSystem open_baker_system(int base, const std::vector<int>& kept) {
    return baker_like_system(base, kept, 0.0);
}

OpenMapSystem perturbed_baker_system(int base, const std::vector<int>& kept, double bump) {
    return baker_like_system(base, kept, bump);
}

std::vector<PhasePoint> baker_periodic_points(int base, const std::vector<int>& kept,
                                              int max_period) {
    std::vector<PhasePoint> out;
    const double L = base;
    std::vector<int> w;
    std::function<void()> emit = [&]() {
        const int n = static_cast<int>(w.size());
        const double denom = std::pow(L, n) - 1.0;
        double fwd = 0.0, rev = 0.0;
        for (int i = 0; i < n; ++i) {
            fwd = fwd * L + w[i];
            rev = rev * L + w[n - 1 - i];
        }
        out.push_back(PhasePoint{fwd / denom, rev / denom, 0});
    };
    std::function<void(int, int)> dfs = [&](int depth, int target) {
        if (depth == target) {
            emit();
            return;
        }
        for (int a : kept) {
            w.push_back(a);
            dfs(depth + 1, target);
            w.pop_back();
        }
    };
    for (int n = 1; n <= max_period; ++n) dfs(0, n);
    return out;
}

OpenMapSystem linear_chart_system(const Mat2& m, double half_width) {
    if (std::abs(m.determinant() - 1.0) > 1e-12)
        throw std::invalid_argument("linear_chart_system: matrix must have determinant 1");
    if (std::abs(m.trace()) <= 2.0)
        throw std::invalid_argument("linear_chart_system: matrix must be hyperbolic (|trace| > 2)");
    OpenMapSystem sys;
    sys.name = "linear_chart";
    Rect box{-half_width, half_width, -half_width, half_width};
    sys.blocks = {box};
    sys.x_period = {0.0};
    Mat2 minv = m.inverse();

    MapPiece piece;
    piece.from_block = 0;
    piece.to_block = 0;
    piece.bounds = box;
    piece.in_domain = [box, m](const PhasePoint& p) {
        if (p.block != 0 || !box.contains(p)) return false;
        Vec2 q = m * p.coords();
        return box.contains(q[0], q[1]);
    };
    piece.forward = [m](const PhasePoint& p) {
        Vec2 q = m * p.coords();
        return PhasePoint{q[0], q[1], 0};
    };
    piece.inverse = [minv](const PhasePoint& p) {
        Vec2 q = minv * p.coords();
        return PhasePoint{q[0], q[1], 0};
    };
    piece.differential = [m](const PhasePoint&) { return m; };
    sys.pieces.push_back(std::move(piece));

    // Eigen directions are exact.
    Eigen::EigenSolver<Mat2> es(m);
    Vec2 vu, vs;
    double l0 = std::abs(es.eigenvalues()(0).real());
    double l1 = std::abs(es.eigenvalues()(1).real());
    int iu = l0 > l1 ? 0 : 1;
    vu = es.eigenvectors().col(iu).real().normalized();
    vs = es.eigenvectors().col(1 - iu).real().normalized();
    sys.unstable_dir_exact = [vu](const PhasePoint&) { return vu; };
    sys.stable_dir_exact = [vs](const PhasePoint&) { return vs; };
    double lam = std::max(l0, l1);
    sys.lambda0 = sys.lambda1 = std::log(lam);
    finalize_system(sys);
    sys.partition[0].center = PhasePoint{0.0, 0.0, 0};
    return sys;
}

}  // namespace omap
