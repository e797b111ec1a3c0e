#pragma once
// Open hyperbolic maps: finite families of invertible map pieces acting on
// rectangular phase-space blocks, with holes where no piece is defined.

#include <Eigen/Dense>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace omap {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// A point (x, xi) of phase space, tagged with the block it lives in.
/// For billiard systems x is boundary arclength and xi = sin of the
/// reflection angle.
struct PhasePoint {
    double x = 0.0;
    double xi = 0.0;
    int block = 0;

    Vec2 coords() const { return Vec2(x, xi); }
    bool finite() const { return std::isfinite(x) && std::isfinite(xi); }
};

/// Half-open axis-aligned rectangle [x_min,x_max) x [xi_min,xi_max).
struct Rect {
    double x_min = 0.0, x_max = 0.0;
    double xi_min = 0.0, xi_max = 0.0;

    bool contains(double x, double xi) const {
        return x >= x_min && x < x_max && xi >= xi_min && xi < xi_max;
    }
    bool contains(const PhasePoint& p) const { return contains(p.x, p.xi); }
    double width() const { return x_max - x_min; }
    double height() const { return xi_max - xi_min; }
    double center_x() const { return 0.5 * (x_min + x_max); }
    double center_xi() const { return 0.5 * (xi_min + xi_max); }
};

/// One invertible piece F_ij of the open map, defined on a sub-domain of the
/// source block. `bounds` is a bounding box only; `in_domain` is the exact
/// membership test (for billiards the domain is not a rectangle).
struct MapPiece {
    int from_block = 0;
    int to_block = 0;
    Rect bounds;
    std::function<bool(const PhasePoint&)> in_domain;
    std::function<PhasePoint(const PhasePoint&)> forward;
    std::function<PhasePoint(const PhasePoint&)> inverse;
    std::function<Mat2(const PhasePoint&)> differential;
};

/// Element of the macroscopic partition covering the trapped set. Each cell
/// lies inside the domain of exactly one map piece, so a symbolic word fixes
/// the sequence of pieces an orbit takes.
struct PartitionCell {
    PhasePoint center;   // representative (approximately) trapped point
    Rect rect;           // bounding rectangle of the cell
    int piece = 0;       // index of the piece whose domain contains the cell
};

struct OpenMapSystem {
    std::string name;
    std::vector<Rect> blocks;
    std::vector<MapPiece> pieces;
    std::vector<PartitionCell> partition;

    /// Per-step unstable expansion bracket measured on trapped samples:
    /// exp(lambda0) <= J_1^u <= exp(lambda1).
    double lambda0 = 0.0;
    double lambda1 = 0.0;

    /// Partition radius scale (half the smallest cell half-width).
    double eps0 = 0.0;

    /// False when the system has no hole, i.e. the pressure of the unstable
    /// Jacobian vanishes and there is no classical decay.
    bool fractal_ok = true;

    /// Pieces map axis-aligned rectangles to axis-aligned rectangles with
    /// monotone coordinate maps (baker, linear model). Enables exact
    /// rectangle propagation of word neighborhoods.
    bool axis_rects = false;

    /// Per-block period of the x coordinate (0 = not periodic). Billiard
    /// arclength wraps around each disk boundary.
    std::vector<double> x_period;

    /// Exact unstable/stable directions where available (piecewise-linear
    /// systems); empty otherwise.
    std::function<Vec2(const PhasePoint&)> unstable_dir_exact;
    std::function<Vec2(const PhasePoint&)> stable_dir_exact;

    std::map<std::string, std::string> notes;

    /// Admissible letter transitions q -> q' of the partition.
    std::vector<std::vector<bool>> transitions;

    int alphabet_size() const { return static_cast<int>(partition.size()); }
    double x_period_of(int block) const {
        return x_period.empty() ? 0.0 : x_period[block];
    }
    bool cell_contains(int cell, const PhasePoint& p) const;
};

/// Sup-metric distance; infinite across distinct blocks, wraps periodic x.
double distance(const OpenMapSystem& sys, const PhasePoint& a, const PhasePoint& b);

/// One forward step. Returns the piece index and image if p lies in exactly
/// one piece domain, absent if it lies in the hole. Overlapping domains are a
/// configuration error.
std::optional<std::pair<int, PhasePoint>> step(const OpenMapSystem& sys, const PhasePoint& p);

/// One backward step (p must lie in at most one piece image).
std::optional<std::pair<int, PhasePoint>> step_back(const OpenMapSystem& sys, const PhasePoint& p);

/// n-th forward (n >= 0) or backward (n < 0) iterate. Throws if the orbit
/// escapes, naming the step.
PhasePoint iterate(const OpenMapSystem& sys, PhasePoint p, int n);

/// Forward orbit p, F(p), ..., F^n(p); stops early at escape.
std::vector<PhasePoint> forward_orbit(const OpenMapSystem& sys, PhasePoint p, int n);
std::vector<PhasePoint> backward_orbit(const OpenMapSystem& sys, PhasePoint p, int n);

/// Differential of F at p (p must lie in a piece domain).
Mat2 differential_at(const OpenMapSystem& sys, const PhasePoint& p);

/// Grid points surviving `depth` forward and backward steps: a finite-depth
/// approximation of the trapped set, decreasing in depth. `nx`, `nxi` grid
/// points per block.
std::vector<PhasePoint> trapped_set_sample(const OpenMapSystem& sys, int depth, int nx, int nxi);

/// Survivor sampling with iterative refinement: starts from a coarse grid and
/// subdivides surviving cells `levels` times. Concentrates samples on the
/// trapped set much faster than a flat grid.
std::vector<PhasePoint> trapped_sample_refined(const OpenMapSystem& sys, int depth, int nx0,
                                               int nxi0, int levels);

/// Unit vector spanning the unstable direction at p, from finite-depth power
/// iteration of the differential along the backward orbit (or the system's
/// exact field when present).
Vec2 unstable_direction(const OpenMapSystem& sys, const PhasePoint& p, int depth = 16);
Vec2 stable_direction(const OpenMapSystem& sys, const PhasePoint& p, int depth = 16);

/// Unstable Jacobian J_n^u(p): expansion factor of dF^n along the unstable
/// direction. For n < 0 this is a contraction factor <= 1. Throws
/// "escaped at step k" if the orbit leaves the piece domains.
double unstable_jacobian(const OpenMapSystem& sys, const PhasePoint& p, int n, int dir_depth = 16);

/// Stable Jacobian J_n^s(p) (contraction for n > 0, expansion for n < 0).
double stable_jacobian(const OpenMapSystem& sys, const PhasePoint& p, int n, int dir_depth = 16);

/// The open map with the roles of F and F^{-1} exchanged.
OpenMapSystem inverse_system(const OpenMapSystem& sys);

/// Fills system invariants derived from the pieces: partition transitions,
/// eps0, measured (lambda0, lambda1) when not set analytically.
void finalize_system(OpenMapSystem& sys, int probe_depth = 6, int probe_res = 96);

/// CSV export of survivor samples: header "x,xi,depth" (plus "block" for
/// multi-block systems).
void write_survivors_csv(const std::string& path, const OpenMapSystem& sys,
                         const std::vector<PhasePoint>& pts, int depth,
                         const std::string& extra_col_name = "",
                         const std::string& extra_col_value = "");

}  // namespace omap
