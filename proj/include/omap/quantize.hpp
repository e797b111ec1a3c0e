#pragma once
// Finite-dimensional quantizations: the discrete h-Fourier transform, the
// scaling quantum map and its opened version Op(chi) U, open quantum bakers,
// projectors and spectral diagnostics.

#include <functional>
#include <string>

#include "omap/linalg.hpp"

namespace omap::quant {

using la::CMatrix;
using la::CVector;

struct GridSpec {
    enum class Kind { interval, torus };
    Kind kind = Kind::torus;
    int n = 0;
    double half_width = 0.0;     // position half-width X
    double xi_half_width = 0.0;  // momentum half-width; X * Xi = pi n h / 2
    double h = 0.0;              // semiclassical parameter (torus: h_eff = 1/n)

    /// Interval grid with the xi-grid equal to the x-grid and the matrix of
    /// the h-Fourier transform exactly unitary: spacing sqrt(2 pi h / n),
    /// which ties h = 2 X^2 / (pi n).
    static GridSpec interval_selfdual(double half_width, int n);
    /// Same, solving the box size from (h, n): X = sqrt(pi n h / 2).
    static GridSpec interval_for_h(double h, int n);
    /// Unequal boxes: the unitarity constraint fixes Xi = pi n h / (2 X).
    /// Vectors carry the half-density normalization, so the Fourier matrix
    /// stays exactly unitary.
    static GridSpec interval_anisotropic(double h, int n, double half_width);
    static GridSpec torus(int n);

    double dx() const;
    double x(int k) const;
    double dxi() const;
    double xi(int j) const;
};

struct DenseOperator {
    CMatrix m;
    GridSpec grid;
    std::string label;
    bool boundary_warning = false;  // symbol support touched the grid edge
};

/// Discrete h-Fourier transform: interval grids give
/// (1/sqrt(n)) exp(-i x_k xi_j / h) (exactly unitary by the self-dual
/// spacing), torus grids the DFT n^{-1/2} exp(-2 pi i j k / n).
/// Throws with the measured defect if the grid combination is not unitary.
DenseOperator semiclassical_fourier(const GridSpec& grid);

/// v(x) -> sqrt(2) v(2x) with linear interpolation, zero past the box.
DenseOperator scaling_operator(const GridSpec& grid);

/// Left quantization of a phase-space symbol on the grid:
/// K[j,k] = (1/n) sum_m chi(x_j, xi_m) exp(i (x_j - x_k) xi_m / h).
DenseOperator quantize_left(const std::function<double(double, double)>& symbol,
                            const GridSpec& grid);

/// Radial bump equal to 1 on |rho| <= inner and 0 outside |rho| >= outer.
std::function<double(double, double)> radial_bump_symbol(double inner, double outer);

struct ModelMap {
    DenseOperator op;        // M = Op(chi) U
    GridSpec grid;
    double chi_inner = 0.0;  // chi == 1 on B(0, chi_inner)
    double chi_outer = 0.0;  // supp chi inside B(0, chi_outer), clipped to the box
};

/// The opened scaling map at semiclassical parameter h on an n-point
/// self-dual grid. The cutoff is the radial bump with inner radius 1/2 and
/// outer radius min(1, 0.9 X); the box must leave room for the inner radius.
ModelMap model_open_map(double h, int n, double inner = 0.5, double outer = 1.0);

/// Open quantum baker on Z_n, n = base * m: F_n^{-1} blockdiag(F_m per kept
/// branch, zero blocks elsewhere). Empty kept set gives the zero operator.
DenseOperator open_baker_operator(int n, int base, const std::vector<int>& kept);

enum class Side { position, momentum };

/// Indicator projector of a set of grid indices, in position or momentum.
DenseOperator projector(const GridSpec& grid, const std::vector<int>& indices, Side side);

/// Grid indices with |x_k| <= radius (interval) or dist(k/n, 0) <= radius
/// (torus).
std::vector<int> indices_within(const GridSpec& grid, double radius);

struct SpectralReport {
    double spectral_radius = 0.0;
    std::vector<std::complex<double>> top_eigenvalues;
    std::vector<std::pair<int, double>> power_norms;  // (n, ||A^n||)
    double top_singular = 0.0;
};

/// Dense eigenvalues plus power norms ||A^n|| computed on explicitly formed
/// powers; meant for moderate dimensions.
SpectralReport spectral_report(const DenseOperator& a, int n_max, int top_k = 16);

/// ||A* A - I||, the operator-norm unitarity defect.
double unitarity_defect(const CMatrix& a);

/// Simple binary container: u64 n, u64 kind, f64 h, then row-major complex
/// entries as little-endian f64 pairs.
void write_operator(const std::string& path, const DenseOperator& op);
DenseOperator read_operator(const std::string& path);

}  // namespace omap::quant
