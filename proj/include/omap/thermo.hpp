#pragma once
// Thermodynamic formalism on word sums: topological pressure, the Bowen
// dimension root, box counting, porosity certificates and the exponent
// bookkeeping used by the quantum estimates.

#include <functional>

#include "omap/word.hpp"

namespace omap::thermo {

struct PressureEntry {
    double s = 0.0;
    std::vector<std::pair<int, double>> estimates;  // (n, (1/n) log c_n(s))
    double extrapolated = 0.0;                      // from the two largest n
    double aitken = 0.0;                            // Aitken delta-squared
};

/// Caches the word Jacobians once so the pressure can be evaluated at many s.
class PressureCalculator {
  public:
    PressureCalculator(const WordTable& table, int n_max, std::size_t budget = 2'000'000);
    PressureEntry at(double s) const;
    int n_max() const { return n_max_; }
    /// number of admissible words with nonempty neighborhood per length
    const std::vector<std::size_t>& word_counts() const { return counts_; }

  private:
    int n_max_;
    std::vector<std::vector<double>> log_j_;  // per length n-1: log J_q^- list
    std::vector<std::size_t> counts_;
};

PressureEntry pressure(const WordTable& table, double s, int n_max,
                       std::size_t budget = 2'000'000);

struct DimensionReport {
    double delta = 0.0;
    double constant_C = 0.0;
    double epsilon0 = 0.0;
    std::string method;  // box_count | pressure_root | porosity_bound
};

struct BowenResult {
    double s0 = 0.0;
    bool boundary_case = false;  // P(0) <= 0: root pinned at s = 0
    DimensionReport report;
};

/// Root of the extrapolated pressure. Checks P(0) > 0 > P(1) first; throws
/// "no gap regime" when P(1) >= 0. The trapped set dimension is 2 * s0.
BowenResult bowen_root(const PressureCalculator& pc, double tol);

/// gamma_cl = -P(1); positive exactly when the system is open.
double classical_decay_rate(const PressureCalculator& pc);

/// Forward-survivor fraction decay rate fitted over m = 1..m_max by least
/// squares on log(fraction). Uniform sample of the blocks, fixed seed.
double survivor_decay_rate(const OpenMapSystem& sys, int m_max, int n_points, uint64_t seed);

/// Upper box dimension of a 1D point set over half-open covers at the given
/// geometric scales (eps_max, eps_max/base, ... >= eps_min). Needs at least 4
/// usable scales. C is the smallest constant with N(eps) <= C eps^{-delta}
/// over the sampled range.
DimensionReport box_dimension(const std::vector<double>& points, double eps_min, double eps_max,
                              double base = 2.0);

/// Raw counts for inspection/export.
std::vector<std::pair<double, std::size_t>> box_counts(const std::vector<double>& points,
                                                       double eps_min, double eps_max,
                                                       double base = 2.0);

struct GapWitness {
    double i_lo = 0.0, i_hi = 0.0;  // interval I
    double j_lo = 0.0, j_hi = 0.0;  // gap J inside I, |J| = nu |I|
};

struct PorosityCertificate {
    double nu = 0.0;
    double alpha0 = 0.0, alpha1 = 0.0;
    double checked_resolution = 0.0;
    std::vector<GapWitness> witness_gaps;
};

struct PorosityResult {
    bool certified = false;
    PorosityCertificate certificate;
    double fail_lo = 0.0, fail_hi = 0.0;  // first interval without a gap
};

/// Scans intervals I at geometric scales in [alpha0, alpha1] (left endpoints
/// spaced nu|I|/4) for a set-free gap of length nu|I|, on a membership sample
/// of the given resolution. Certificate on success; on failure the witness is
/// the first gap-free interval met, scanning scales from the largest down.
PorosityResult check_porosity(const std::function<bool(double)>& member, double lo, double hi,
                              double nu, double alpha0, double alpha1, double resolution);

/// Explicit porosity constant for a set with N(eps) <= C eps^{-delta} for all
/// eps <= eps0: nu = 1/(3T), T = floor(max((6 eps0)^{-1}, (6^delta C)^{1/(1-delta)})) + 1.
double porosity_from_dimension(double C, double delta, double eps0);

struct DimensionFromPorosity {
    double C = 0.0;
    double delta = 0.0;
    int L = 0;
    int k0 = 0;
};

/// Explicit covering bound for a nu-porous set on scales 0..alpha1 inside
/// [-M, M]: delta = log(L-1)/log L with L = ceil(2/nu), and the matching C.
DimensionFromPorosity dimension_from_porosity(double nu, double alpha1, double M);

struct NumerologyProfile {
    double beta = 0.0;
    double frak_b = 0.0;   // 1/(1+beta)
    double delta0 = 0.0;   // (1-frak_b)/2
    double tau = 0.0;      // 1 - (lambda0/lambda1)(1-frak_b)/4
    double delta2 = 0.0;   // delta0 * lambda0/lambda1
    double lambda0 = 0.0, lambda1 = 0.0;

    int n0(double h) const;  // ceil((delta0/lambda1) |log h|)
    int n1(double h) const;  // ceil(|log h| / lambda0)

    bool check_b_plus_delta0() const { return frak_b + delta0 < 1.0; }
    bool check_tau_window() const { return frak_b < tau && tau < 1.0; }
    bool check_gate() const { return delta0 * lambda0 / lambda1 + tau > 1.0; }
    bool all_checks() const {
        return check_b_plus_delta0() && check_tau_window() && check_gate();
    }
};

NumerologyProfile numerology(double lambda0, double lambda1, double beta);

/// 1D parameters t of the points base + t * e_u(base) (|t| <= t_span) whose
/// forward orbit survives n_survive steps: a transversal Cantor section of
/// the forward-trapped set, used for box counting of the unstable trace.
std::vector<double> unstable_transversal_survivors(const OpenMapSystem& sys,
                                                   const PhasePoint& base, double t_span,
                                                   int n_survive, int grid_n);

}  // namespace omap::thermo
