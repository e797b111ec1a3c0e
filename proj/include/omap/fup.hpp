#pragma once
// Fractal uncertainty measurements: norms of Fourier transforms restricted
// to porous sets, decay-exponent fits, the scale gate, and the projection of
// word-neighborhood clouds onto position/momentum sets.

#include "omap/quantize.hpp"
#include "omap/word.hpp"

namespace omap::fup {

using quant::GridSpec;

/// Sorted, merged union of closed intervals.
struct IntervalUnion {
    std::vector<std::pair<double, double>> parts;

    void add(double lo, double hi);
    void normalize();
    IntervalUnion fattened(double c) const;
    bool contains(double t) const;
    double total_length() const;
    bool empty() const { return parts.empty(); }
};

/// Indices of the torus grid Z_n covered by the union (positions k/n,
/// wrapped into [0,1)).
std::vector<int> realize_on_torus(const IntervalUnion& u, int n);

/// Base-L Cantor iterate in Z_{L^k}: indices whose k base-L digits all lie
/// in the alphabet.
std::vector<int> cantor_indices(int base, const std::vector<int>& digits, int k);

/// Indices within `cells` grid cells of the set (periodic).
std::vector<int> fatten_indices(const std::vector<int>& idx, int n, int cells);

/// ||1_minus F_h 1_plus||: top singular value of the restricted Fourier
/// block (rows minus, columns plus). Only the block is formed. Empty -> 0.
double fup_norm(const GridSpec& grid, const std::vector<int>& minus,
                const std::vector<int>& plus);

/// min(1, sqrt(|minus| |plus| / n)): the L^inf - L^1 volume bound.
double trivial_volume_bound(const GridSpec& grid, std::size_t n_minus, std::size_t n_plus);

struct FupExperiment {
    std::vector<double> h_values;  // h (interval) or 1/N (torus), decreasing
    std::vector<double> norms;
    std::vector<double> bounds;
    std::vector<std::pair<std::size_t, std::size_t>> sizes;
};

struct FupFit {
    double beta = 0.0;  // slope of log norm vs log h
    double band = 0.0;  // two standard errors of the slope
    int used_scales = 0;
};

/// Least-squares decay exponent, discarding the two coarsest scales.
/// Requires at least 4 scales in the experiment.
FupFit fit_fup_exponent(const FupExperiment& e);

struct ScaleGate {
    bool accepted = false;
    double gamma = 0.0;
    std::string rejection;
};

/// gamma = min(g0p, 1－g1m) - max(g1p, 1－g0m) when
/// g1p + g1m < 1 < g0p + g0m and 0 <= g1 < g0 <= 1 on both sides.
ScaleGate scale_gate(double g0_plus, double g0_minus, double g1_plus, double g1_minus);

struct OmegaSets {
    IntervalUnion omega_minus;  // position projection, fattened by h^delta0
    IntervalUnion omega_plus;   // momentum projection, fattened by h^tau
    double max_leaf_distance = 0.0;
    double max_plus_width = 0.0;  // widest raw momentum cylinder
};

/// Projects the cloud's word neighborhoods in the identity chart of an
/// axis-rectangle system: V_q^- onto position, V_q^+ onto momentum. The
/// words must share their final letter and all V_q^+ must lie within
/// closeness_C * h^frak_b of one unstable leaf; violations name the pair.
OmegaSets build_omega_sets(const WordTable& table, const std::vector<SymbolicWord>& cloud,
                           double h, double frak_b, double tau, double delta0,
                           double closeness_C = 4.0);

/// Exact axis-rectangle propagation of V_q^- (sign minus) or V_q^+ (plus).
Rect word_rectangle(const OpenMapSystem& sys, const SymbolicWord& word, WordSign sign);

}  // namespace omap::fup
