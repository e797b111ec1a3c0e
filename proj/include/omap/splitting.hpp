#pragma once
// Extension of the unstable/stable splitting to a neighborhood of the
// trapped set: the graph transform on slope fields and its derivative-level
// fiber map, solved to their fixed points on a grid chart.

#include "omap/open_map.hpp"

namespace omap::splitting {

/// Node grid over a block rectangle, endpoints included, with bilinear
/// interpolation. Spacing defaults to 1/256 of the chart.
struct GridChart {
    Rect box;
    int nx = 257, ny = 257;
    int block = 0;

    double dx() const { return box.width() / (nx - 1); }
    double dy() const { return box.height() / (ny - 1); }
    double x(int i) const { return box.x_min + i * dx(); }
    double y(int j) const { return box.xi_min + j * dy(); }
    int index(int i, int j) const { return j * nx + i; }
    int size() const { return nx * ny; }
    PhasePoint point(int i, int j) const { return PhasePoint{x(i), y(j), block}; }
};

struct ScalarField {
    GridChart chart;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const GridChart& c) : chart(c), v(c.size(), 0.0) {}
    double& at(int i, int j) { return v[chart.index(i, j)]; }
    double at(int i, int j) const { return v[chart.index(i, j)]; }
    /// bilinear; zero outside the chart
    double interp(double x, double y) const;
    double sup_norm() const;
};

struct VectorField {
    GridChart chart;
    std::vector<Vec2> v;

    VectorField() = default;
    explicit VectorField(const GridChart& c) : chart(c), v(c.size(), Vec2::Zero()) {}
    Vec2& at(int i, int j) { return v[chart.index(i, j)]; }
    const Vec2& at(int i, int j) const { return v[chart.index(i, j)]; }
    Vec2 interp(double x, double y) const;
    double sup_norm() const;
};

/// Central-difference gradient (one-sided at the chart edges).
VectorField gradient(const ScalarField& f);

/// Unit frame fields v_u, v_s with the coefficients of dF in those frames:
/// dF(v_u) = a v_u(F.) + c v_s(F.), dF(v_s) = b v_u(F.) + d v_s(F.).
struct FrameField {
    GridChart chart;
    VectorField v_u, v_s;
    ScalarField a, b, c, d;
    std::vector<bool> coeff_valid;  // node lies in a piece domain

    double eta = 0.0;           // measured bunching: max(sup|b|, sup|c|)/2
    bool eta_ok = false;        // a valid eta > 0 exists for the 3-window bounds
    double kappa_direct = 1.0;  // sup over nodes, |lambda|<=1 of |d_lambda t|
    double kappa_eta = 1.0;     // closed-form bound from eta
    double nu = 1.0;            // sup max(1/|a|, |d|)
};

/// Smooth bump: 1 for t <= r0, exp(1 - 1/(1-u^2)) with u=(t-r0)/(r1-r0) on
/// (r0, r1), 0 beyond.
double bump_profile(double t, double r0, double r1);

/// Frames from finite-depth power iteration at the trapped samples, extended
/// to the grid by nearest-sample value and a little smoothing. The eta and
/// kappa statistics are measured over nodes within `stat_radius` of the
/// samples (the working neighborhood).
FrameField make_frames(const OpenMapSystem& sys, const GridChart& chart,
                       const std::vector<PhasePoint>& trapped, int power_depth = 12,
                       int smooth_passes = 2, double stat_radius = 0.25);

/// Frames with constant directions (analytic axes or eigenbases).
FrameField constant_frames(const OpenMapSystem& sys, const GridChart& chart, const Vec2& vu,
                           const Vec2& vs, double stat_radius = 0.25);

/// Cutoff 1 on T(eps0), 0 outside T(2 eps0), built from the sample distance
/// with the explicit bump profile; additionally tapered where the map or its
/// inverse is undefined so the transform never reads outside the domain.
ScalarField make_cutoff(const OpenMapSystem& sys, const GridChart& chart,
                        const std::vector<PhasePoint>& trapped, double eps0);

/// Slope field lambda with its cutoff; the direction is v_u + lambda v_s.
struct SlopeField {
    ScalarField lambda;
    ScalarField cutoff;
};

/// One application of the graph transform:
/// (T lambda)(p') = chi(p') t(F^{-1}(p'), lambda(F^{-1}(p'))),
/// t(p, l) = (l d(p) + c(p)) / (a(p) + l b(p)).
/// Nodes of supp chi without a preimage are set to zero and counted.
ScalarField graph_transform_step(const ScalarField& lam, const SlopeField& shape,
                                 const FrameField& frames, const OpenMapSystem& sys,
                                 bool enforce_eta = true, int* masked_nodes = nullptr);

struct ConvergenceReport {
    int iterations = 0;
    std::vector<double> factors;
    double final_residual = 0.0;
    double kappa_theory = 0.0;
    int masked_nodes = 0;
};

struct SlopeSolve {
    SlopeField field;
    ConvergenceReport report;
};

/// Fixed point of T from lambda = 0. Fails when the frames violate the
/// eta-bunching bounds (unless enforce_eta is off) or when three consecutive
/// iterations fail to contract.
SlopeSolve solve_unstable_slope(const FrameField& frames, const OpenMapSystem& sys,
                                const ScalarField& cutoff, double tol = 1e-12, int max_iter = 200,
                                bool enforce_eta = true);

/// Derivative-level fiber map G_lambda acting on covector fields alpha:
/// G a(p') = chi(p')[d_p t + (d_lambda t) a(p)] o (dF_p)^{-1} + t dchi(p').
VectorField fiber_derivative_step(const VectorField& alpha, const ScalarField& lam,
                                  const SlopeField& shape, const FrameField& frames,
                                  const OpenMapSystem& sys);

struct CovectorSolve {
    VectorField alpha;
    ConvergenceReport report;
};

CovectorSolve solve_derivative_field(const FrameField& frames, const OpenMapSystem& sys,
                                     const SlopeField& slope, double tol = 1e-12,
                                     int max_iter = 400);

/// Maximal angle error of invariance: the direction v_u + lambda v_s at p is
/// pushed by dF and compared against the direction at F(p); measured over
/// nodes where the cutoff is 1 at both ends.
double invariance_angle_error(const SlopeField& slope, const FrameField& frames,
                              const OpenMapSystem& sys);

/// Sup distance between G_lambda(D lambda) and D(T lambda) over nodes whose
/// differencing stencils stay in the chi = 1 region (the identity holds
/// everywhere; away from the cutoff seam it is measurable at O(grid^2)).
double fiber_identity_defect(const ScalarField& lam, const SlopeField& shape,
                             const FrameField& frames, const OpenMapSystem& sys);

/// Canonical-chart slope of the solved direction at the node nearest p.
double canonical_slope_at(const SlopeField& slope, const FrameField& frames, const PhasePoint& p);

}  // namespace omap::splitting
