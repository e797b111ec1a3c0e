#include "omap/open_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace omap {

bool OpenMapSystem::cell_contains(int cell, const PhasePoint& p) const {
    const PartitionCell& c = partition[cell];
    const MapPiece& piece = pieces[c.piece];
    if (p.block != piece.from_block) return false;
    if (!c.rect.contains(p)) return false;
    return piece.in_domain(p);
}

double distance(const OpenMapSystem& sys, const PhasePoint& a, const PhasePoint& b) {
    if (a.block != b.block) return std::numeric_limits<double>::infinity();
    double dx = std::abs(a.x - b.x);
    double per = sys.x_period_of(a.block);
    if (per > 0.0) dx = std::min(dx, per - dx);
    return std::max(dx, std::abs(a.xi - b.xi));
}

std::optional<std::pair<int, PhasePoint>> step(const OpenMapSystem& sys, const PhasePoint& p) {
    if (!p.finite()) throw std::invalid_argument("step: non-finite point");
    int hit = -1;
    for (int i = 0; i < static_cast<int>(sys.pieces.size()); ++i) {
        const MapPiece& piece = sys.pieces[i];
        if (piece.from_block != p.block) continue;
        if (!piece.in_domain(p)) continue;
        if (hit >= 0)
            throw std::runtime_error("step: point lies in two piece domains (pieces " +
                                     std::to_string(hit) + " and " + std::to_string(i) +
                                     "), domains must be disjoint");
        hit = i;
    }
    if (hit < 0) return std::nullopt;
    return std::make_pair(hit, sys.pieces[hit].forward(p));
}

std::optional<std::pair<int, PhasePoint>> step_back(const OpenMapSystem& sys, const PhasePoint& p) {
    if (!p.finite()) throw std::invalid_argument("step_back: non-finite point");
    int hit = -1;
    PhasePoint pre;
    for (int i = 0; i < static_cast<int>(sys.pieces.size()); ++i) {
        const MapPiece& piece = sys.pieces[i];
        if (piece.to_block != p.block) continue;
        PhasePoint q = piece.inverse(p);
        if (q.block != piece.from_block || !piece.in_domain(q)) continue;
        if (hit >= 0)
            throw std::runtime_error("step_back: point lies in two piece images (pieces " +
                                     std::to_string(hit) + " and " + std::to_string(i) + ")");
        hit = i;
        pre = q;
    }
    if (hit < 0) return std::nullopt;
    return std::make_pair(hit, pre);
}

PhasePoint iterate(const OpenMapSystem& sys, PhasePoint p, int n) {
    const int steps = std::abs(n);
    for (int k = 0; k < steps; ++k) {
        auto next = (n > 0) ? step(sys, p) : step_back(sys, p);
        if (!next)
            throw std::runtime_error("orbit escaped at step " + std::to_string(n > 0 ? k : -k));
        p = next->second;
    }
    return p;
}

std::vector<PhasePoint> forward_orbit(const OpenMapSystem& sys, PhasePoint p, int n) {
    std::vector<PhasePoint> orb{p};
    for (int k = 0; k < n; ++k) {
        auto next = step(sys, p);
        if (!next) break;
        p = next->second;
        orb.push_back(p);
    }
    return orb;
}

std::vector<PhasePoint> backward_orbit(const OpenMapSystem& sys, PhasePoint p, int n) {
    std::vector<PhasePoint> orb{p};
    for (int k = 0; k < n; ++k) {
        auto next = step_back(sys, p);
        if (!next) break;
        p = next->second;
        orb.push_back(p);
    }
    return orb;
}

Mat2 differential_at(const OpenMapSystem& sys, const PhasePoint& p) {
    for (const MapPiece& piece : sys.pieces)
        if (piece.from_block == p.block && piece.in_domain(p)) return piece.differential(p);
    throw std::runtime_error("differential_at: point lies in the hole");
}

namespace {

bool survives(const OpenMapSystem& sys, const PhasePoint& p, int depth) {
    PhasePoint q = p;
    for (int k = 0; k < depth; ++k) {
        auto next = step(sys, q);
        if (!next) return false;
        q = next->second;
    }
    q = p;
    for (int k = 0; k < depth; ++k) {
        auto prev = step_back(sys, q);
        if (!prev) return false;
        q = prev->second;
    }
    return true;
}

}  // namespace

std::vector<PhasePoint> trapped_set_sample(const OpenMapSystem& sys, int depth, int nx, int nxi) {
    if (depth < 0) throw std::invalid_argument("trapped_set_sample: depth must be >= 0");
    std::vector<PhasePoint> out;
    for (int b = 0; b < static_cast<int>(sys.blocks.size()); ++b) {
        const Rect& r = sys.blocks[b];
        const double dx = r.width() / nx;
        const double dxi = r.height() / nxi;
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < nxi; ++j) {
                PhasePoint p{r.x_min + (i + 0.5) * dx, r.xi_min + (j + 0.5) * dxi, b};
                if (survives(sys, p, depth)) out.push_back(p);
            }
        }
    }
    return out;
}

std::vector<PhasePoint> trapped_sample_refined(const OpenMapSystem& sys, int depth, int nx0,
                                               int nxi0, int levels) {
    struct Cell {
        double x, xi, wx, wxi;
        int block;
    };
    std::vector<Cell> cells;
    for (int b = 0; b < static_cast<int>(sys.blocks.size()); ++b) {
        const Rect& r = sys.blocks[b];
        const double dx = r.width() / nx0, dxi = r.height() / nxi0;
        for (int i = 0; i < nx0; ++i)
            for (int j = 0; j < nxi0; ++j)
                cells.push_back({r.x_min + (i + 0.5) * dx, r.xi_min + (j + 0.5) * dxi, dx, dxi, b});
    }
    // Shallow depths first so coarse cells are not discarded prematurely.
    for (int lvl = 0; lvl <= levels; ++lvl) {
        const int d = std::max(2, depth - 2 * (levels - lvl));
        std::vector<Cell> keep;
        for (const Cell& c : cells) {
            bool alive = false;
            // probe the cell center and its quarter offsets
            for (int oi = -1; oi <= 1 && !alive; ++oi)
                for (int oj = -1; oj <= 1 && !alive; ++oj) {
                    PhasePoint p{c.x + 0.25 * oi * c.wx, c.xi + 0.25 * oj * c.wxi, c.block};
                    alive = survives(sys, p, d);
                }
            if (alive) keep.push_back(c);
        }
        if (lvl == levels) {
            cells.swap(keep);
            break;
        }
        std::vector<Cell> next;
        next.reserve(4 * keep.size());
        for (const Cell& c : keep) {
            const double wx = 0.5 * c.wx, wxi = 0.5 * c.wxi;
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j)
                    next.push_back({c.x + (i - 0.5) * wx, c.xi + (j - 0.5) * wxi, wx, wxi, c.block});
        }
        cells.swap(next);
    }
    std::vector<PhasePoint> out;
    out.reserve(cells.size());
    for (const Cell& c : cells) {
        PhasePoint p{c.x, c.xi, c.block};
        if (survives(sys, p, depth)) out.push_back(p);
    }
    return out;
}

Vec2 unstable_direction(const OpenMapSystem& sys, const PhasePoint& p, int depth) {
    if (sys.unstable_dir_exact) return sys.unstable_dir_exact(p).normalized();
    std::vector<PhasePoint> back = backward_orbit(sys, p, depth);
    if (back.size() < 2)
        throw std::runtime_error("unstable_direction: no backward orbit available at this point");
    Vec2 v(1.0, 1.0);
    v.normalize();
    for (int k = static_cast<int>(back.size()) - 1; k >= 1; --k) {
        v = differential_at(sys, back[k]) * v;
        v.normalize();
    }
    return v;
}

Vec2 stable_direction(const OpenMapSystem& sys, const PhasePoint& p, int depth) {
    if (sys.stable_dir_exact) return sys.stable_dir_exact(p).normalized();
    std::vector<PhasePoint> fwd = forward_orbit(sys, p, depth);
    if (fwd.size() < 2)
        throw std::runtime_error("stable_direction: no forward orbit available at this point");
    Vec2 v(1.0, 1.0);
    v.normalize();
    for (int k = static_cast<int>(fwd.size()) - 2; k >= 0; --k) {
        v = differential_at(sys, fwd[k]).inverse() * v;
        v.normalize();
    }
    return v;
}

namespace {

// Transport v along the orbit, multiplying norm growth factors.
double transported_growth(const OpenMapSystem& sys, const PhasePoint& p, Vec2 v, int n,
                          bool forward) {
    double log_j = 0.0;
    PhasePoint q = p;
    for (int k = 0; k < n; ++k) {
        if (forward) {
            auto next = step(sys, q);
            if (!next) throw std::runtime_error("escaped at step " + std::to_string(k));
            v = sys.pieces[next->first].differential(q) * v;
            q = next->second;
        } else {
            auto prev = step_back(sys, q);
            if (!prev) throw std::runtime_error("escaped at step " + std::to_string(-k - 1));
            q = prev->second;
            v = sys.pieces[prev->first].differential(q).inverse() * v;
        }
        log_j += std::log(v.norm());
        v.normalize();
    }
    return log_j;
}

}  // namespace

double unstable_jacobian(const OpenMapSystem& sys, const PhasePoint& p, int n, int dir_depth) {
    if (n == 0) return 1.0;
    Vec2 v = unstable_direction(sys, p, dir_depth);
    return std::exp(transported_growth(sys, p, v, std::abs(n), n > 0));
}

double stable_jacobian(const OpenMapSystem& sys, const PhasePoint& p, int n, int dir_depth) {
    if (n == 0) return 1.0;
    Vec2 v = stable_direction(sys, p, dir_depth);
    return std::exp(transported_growth(sys, p, v, std::abs(n), n > 0));
}

OpenMapSystem inverse_system(const OpenMapSystem& sys) {
    OpenMapSystem inv = sys;
    inv.name = sys.name + "_inverse";
    inv.pieces.clear();
    for (const MapPiece& piece : sys.pieces) {
        MapPiece q;
        q.from_block = piece.to_block;
        q.to_block = piece.from_block;
        // Domain of the inverse piece = image of the forward piece.
        q.bounds = sys.blocks[piece.to_block];
        q.in_domain = [piece](const PhasePoint& p) {
            if (p.block != piece.to_block) return false;
            PhasePoint pre = piece.inverse(p);
            return pre.block == piece.from_block && piece.in_domain(pre);
        };
        q.forward = piece.inverse;
        q.inverse = piece.forward;
        q.differential = [piece](const PhasePoint& p) {
            Mat2 d = piece.differential(piece.inverse(p));
            return Mat2(d.inverse());
        };
        inv.pieces.push_back(std::move(q));
    }
    inv.unstable_dir_exact = sys.stable_dir_exact;
    inv.stable_dir_exact = sys.unstable_dir_exact;
    inv.partition.clear();
    inv.transitions.clear();
    return inv;
}

void finalize_system(OpenMapSystem& sys, int probe_depth, int probe_res) {
    // Partition defaults to one cell per piece, the cell being the piece domain.
    if (sys.partition.empty()) {
        for (int i = 0; i < static_cast<int>(sys.pieces.size()); ++i) {
            PartitionCell c;
            c.piece = i;
            c.rect = sys.pieces[i].bounds;
            c.center = PhasePoint{c.rect.center_x(), c.rect.center_xi(), sys.pieces[i].from_block};
            sys.partition.push_back(c);
        }
    }
    double min_half = std::numeric_limits<double>::infinity();
    for (const PartitionCell& c : sys.partition)
        min_half = std::min(min_half, 0.5 * std::min(c.rect.width(), c.rect.height()));
    sys.eps0 = 0.5 * min_half;

    std::vector<PhasePoint> probe = trapped_set_sample(sys, probe_depth, probe_res, probe_res);
    if (probe.empty()) probe = trapped_set_sample(sys, std::max(1, probe_depth / 2), probe_res, probe_res);

    // Move cell centers onto trapped samples where possible.
    for (PartitionCell& c : sys.partition) {
        double best = std::numeric_limits<double>::infinity();
        for (const PhasePoint& p : probe) {
            int idx = static_cast<int>(&c - sys.partition.data());
            if (!sys.cell_contains(idx, p)) continue;
            double d = distance(sys, p, c.center);
            if (d < best) {
                best = d;
                c.center = p;
            }
        }
    }

    // Letter transitions, probed on a sub-grid of each cell.
    const int q_count = sys.alphabet_size();
    sys.transitions.assign(q_count, std::vector<bool>(q_count, false));
    const int probe_n = 24;
    for (int a = 0; a < q_count; ++a) {
        const PartitionCell& cell = sys.partition[a];
        const Rect& r = cell.rect;
        for (int i = 0; i < probe_n; ++i) {
            for (int j = 0; j < probe_n; ++j) {
                PhasePoint p{r.x_min + (i + 0.5) * r.width() / probe_n,
                             r.xi_min + (j + 0.5) * r.height() / probe_n,
                             sys.pieces[cell.piece].from_block};
                if (!sys.cell_contains(a, p)) continue;
                auto next = step(sys, p);
                if (!next) continue;
                for (int b = 0; b < q_count; ++b)
                    if (sys.cell_contains(b, next->second)) sys.transitions[a][b] = true;
            }
        }
    }

    // Expansion bracket from trapped samples if not set analytically.
    if (sys.lambda0 == 0.0 && sys.lambda1 == 0.0 && !probe.empty()) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const PhasePoint& p : probe) {
            try {
                double j1 = unstable_jacobian(sys, p, 1, probe_depth);
                lo = std::min(lo, j1);
                hi = std::max(hi, j1);
            } catch (const std::runtime_error&) {
                continue;
            }
        }
        if (hi > 0.0) {
            sys.lambda0 = std::log(lo) - 0.02;
            sys.lambda1 = std::log(hi) + 0.02;
        }
    }
}

void write_survivors_csv(const std::string& path, const OpenMapSystem& sys,
                         const std::vector<PhasePoint>& pts, int depth,
                         const std::string& extra_col_name, const std::string& extra_col_value) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    const bool multi = sys.blocks.size() > 1;
    out << "x,xi,depth";
    if (multi) out << ",block";
    if (!extra_col_name.empty()) out << "," << extra_col_name;
    out << "\n";
    char buf[128];
    for (const PhasePoint& p : pts) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%d", p.x, p.xi, depth);
        out << buf;
        if (multi) out << "," << p.block;
        if (!extra_col_name.empty()) out << "," << extra_col_value;
        out << "\n";
    }
}

}  // namespace omap
