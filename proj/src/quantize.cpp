#include "omap/quantize.hpp"
#include <cstring>

#include <cmath>
#include <complex>
#include <fstream>
#include <numbers>

namespace omap::quant {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
using namespace std::complex_literals;

}  // namespace

GridSpec GridSpec::interval_selfdual(double half_width, int n) {
    if (n < 2) throw std::invalid_argument("GridSpec: n must be >= 2");
    GridSpec g;
    g.kind = Kind::interval;
    g.n = n;
    g.half_width = half_width;
    g.xi_half_width = half_width;
    g.h = 2.0 * half_width * half_width / (std::numbers::pi * n);
    return g;
}

GridSpec GridSpec::interval_for_h(double h, int n) {
    if (n < 2) throw std::invalid_argument("GridSpec: n must be >= 2");
    GridSpec g;
    g.kind = Kind::interval;
    g.n = n;
    g.h = h;
    g.half_width = std::sqrt(std::numbers::pi * n * h / 2.0);
    g.xi_half_width = g.half_width;
    return g;
}

GridSpec GridSpec::interval_anisotropic(double h, int n, double half_width) {
    if (n < 2) throw std::invalid_argument("GridSpec: n must be >= 2");
    GridSpec g;
    g.kind = Kind::interval;
    g.n = n;
    g.h = h;
    g.half_width = half_width;
    g.xi_half_width = std::numbers::pi * n * h / (2.0 * half_width);
    return g;
}

GridSpec GridSpec::torus(int n) {
    if (n < 2) throw std::invalid_argument("GridSpec: n must be >= 2");
    GridSpec g;
    g.kind = Kind::torus;
    g.n = n;
    g.half_width = 0.5;
    g.xi_half_width = 0.5;
    g.h = 1.0 / n;
    return g;
}

double GridSpec::dx() const {
    return kind == Kind::interval ? 2.0 * half_width / n : 1.0 / n;
}

double GridSpec::x(int k) const {
    return kind == Kind::interval ? (k - n / 2) * dx() : k * dx();
}

double GridSpec::dxi() const {
    return kind == Kind::interval ? 2.0 * xi_half_width / n : 1.0 / n;
}

double GridSpec::xi(int j) const {
    return kind == Kind::interval ? (j - n / 2) * dxi() : j * dxi();
}

DenseOperator semiclassical_fourier(const GridSpec& grid) {
    DenseOperator out;
    out.grid = grid;
    out.label = "fourier";
    const int n = grid.n;
    out.m.resize(n, n);
    if (grid.kind == GridSpec::Kind::torus) {
        const double s = 1.0 / std::sqrt(static_cast<double>(n));
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                out.m(j, k) = s * std::exp(-1.0i * (kTwoPi * j * k / n));
        return out;
    }
    // interval: entries sqrt(dx dxi / (2 pi h)) exp(-i x_k xi_j / h) in the
    // half-density normalization; unitary exactly when dx dxi = 2 pi h / n
    const double pref = std::sqrt(grid.dx() * grid.dxi() / (kTwoPi * grid.h));
    if (std::abs(pref - 1.0 / std::sqrt(static_cast<double>(n))) > 1e-12 * pref) {
        throw std::runtime_error(
            "semiclassical_fourier: grid spacings violate dx*dxi = 2*pi*h/n, defect of order " +
            std::to_string(std::abs(pref * std::sqrt(static_cast<double>(n)) - 1.0)));
    }
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            out.m(j, k) = pref * std::exp(-1.0i * (grid.x(k) * grid.xi(j) / grid.h));
    return out;
}

DenseOperator scaling_operator(const GridSpec& grid) {
    if (grid.kind != GridSpec::Kind::interval)
        throw std::invalid_argument("scaling_operator: interval grids only");
    DenseOperator out;
    out.grid = grid;
    out.label = "scaling";
    const int n = grid.n;
    out.m = CMatrix::Zero(n, n);
    const double s = std::sqrt(2.0);
    for (int k = 0; k < n; ++k) {
        // sample position 2 x_k in grid units
        const double pos = 2.0 * (k - n / 2) + n / 2.0;
        const int m0 = static_cast<int>(std::floor(pos));
        const double r = pos - m0;
        if (m0 >= 0 && m0 < n) out.m(k, m0) += s * (1.0 - r);
        if (m0 + 1 >= 0 && m0 + 1 < n && r > 0.0) out.m(k, m0 + 1) += s * r;
    }
    return out;
}

DenseOperator quantize_left(const std::function<double(double, double)>& symbol,
                            const GridSpec& grid) {
    if (grid.kind != GridSpec::Kind::interval)
        throw std::invalid_argument("quantize_left: interval grids only");
    const int n = grid.n;
    CMatrix g(n, n), ht(n, n);
    double edge = 0.0;
    for (int j = 0; j < n; ++j) {
        for (int m = 0; m < n; ++m) {
            const double chi = symbol(grid.x(j), grid.xi(m));
            g(j, m) = (chi / n) * std::exp(1.0i * (grid.x(j) * grid.xi(m) / grid.h));
            if (j == 0 || j == n - 1 || m == 0 || m == n - 1)
                edge = std::max(edge, std::abs(chi));
        }
    }
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
            ht(m, k) = std::exp(-1.0i * (grid.x(k) * grid.xi(m) / grid.h));
    DenseOperator out;
    out.grid = grid;
    out.label = "op_left";
    out.m = g * ht;
    out.boundary_warning = edge > 1e-12;
    return out;
}

std::function<double(double, double)> radial_bump_symbol(double inner, double outer) {
    return [inner, outer](double x, double xi) {
        const double r = std::hypot(x, xi);
        if (r <= inner) return 1.0;
        if (r >= outer) return 0.0;
        const double u = (r - inner) / (outer - inner);
        return std::exp(1.0 - 1.0 / (1.0 - u * u));
    };
}

ModelMap model_open_map(double h, int n, double inner, double outer) {
    ModelMap mm;
    // Momentum content of supp chi doubles under the scaling map; keeping the
    // outer radius below 2*Xi/3 makes the wrapped frequencies land outside
    // supp chi again, so the finite grid cannot re-inject escaped content.
    // Any outer radius in (inner, 1] stays within the intended cutoff class.
    // When the self-dual box is too small for that, trade position room for
    // momentum room: X = r, Xi = 3r/2 with r^2 = pi n h / 3.
    const double x_selfdual = std::sqrt(std::numbers::pi * n * h / 2.0);
    if ((2.0 / 3.0) * x_selfdual * 0.995 > inner + 0.01) {
        mm.grid = GridSpec::interval_for_h(h, n);
    } else {
        const double r = std::sqrt(std::numbers::pi * n * h / 3.0);
        mm.grid = GridSpec::interval_anisotropic(h, n, r);
    }
    mm.chi_inner = inner;
    const double alias_free =
        std::min((2.0 / 3.0) * mm.grid.xi_half_width, mm.grid.half_width) * 0.995;
    mm.chi_outer = std::min(outer, alias_free);
    if (mm.chi_outer <= inner + 0.008)
        throw std::invalid_argument(
            "model_open_map: box too small for the cutoff, increase n (half-widths " +
            std::to_string(mm.grid.half_width) + ", " +
            std::to_string(mm.grid.xi_half_width) + ")");
    DenseOperator u = scaling_operator(mm.grid);
    DenseOperator k = quantize_left(radial_bump_symbol(mm.chi_inner, mm.chi_outer), mm.grid);
    mm.op.grid = mm.grid;
    mm.op.label = "model_open_map h=" + std::to_string(h) + " n=" + std::to_string(n);
    mm.op.m = k.m * u.m;
    return mm;
}

DenseOperator open_baker_operator(int n, int base, const std::vector<int>& kept) {
    if (n % base != 0) throw std::invalid_argument("open_baker_operator: n must be divisible by base");
    const int m = n / base;
    for (int a : kept)
        if (a < 0 || a >= base) throw std::invalid_argument("open_baker_operator: branch out of range");
    DenseOperator fn = semiclassical_fourier(GridSpec::torus(n));
    DenseOperator fm = semiclassical_fourier(GridSpec::torus(m));
    CMatrix d = CMatrix::Zero(n, n);
    for (int a : kept) d.block(a * m, a * m, m, m) = fm.m;
    DenseOperator out;
    out.grid = fn.grid;
    out.label = "open_baker n=" + std::to_string(n);
    out.m = fn.m.adjoint() * d;
    return out;
}

std::vector<int> indices_within(const GridSpec& grid, double radius) {
    std::vector<int> idx;
    for (int k = 0; k < grid.n; ++k) {
        double d;
        if (grid.kind == GridSpec::Kind::interval) {
            d = std::abs(grid.x(k));
        } else {
            const double t = grid.x(k);
            d = std::min(t, 1.0 - t);
        }
        if (d <= radius) idx.push_back(k);
    }
    return idx;
}

DenseOperator projector(const GridSpec& grid, const std::vector<int>& indices, Side side) {
    DenseOperator out;
    out.grid = grid;
    const int n = grid.n;
    CMatrix d = CMatrix::Zero(n, n);
    for (int k : indices) d(k, k) = 1.0;
    if (side == Side::position) {
        out.label = "projector_x";
        out.m = std::move(d);
        return out;
    }
    DenseOperator f = semiclassical_fourier(grid);
    out.label = "projector_xi";
    out.m = f.m.adjoint() * d * f.m;
    return out;
}

SpectralReport spectral_report(const DenseOperator& a, int n_max, int top_k) {
    if (a.m.rows() != a.m.cols()) throw std::invalid_argument("spectral_report: square matrices only");
    if (n_max < 1) throw std::invalid_argument("spectral_report: n_max must be >= 1");
    SpectralReport rep;
    auto ev = la::eigenvalues(a.m);
    std::sort(ev.begin(), ev.end(),
              [](const std::complex<double>& x, const std::complex<double>& y) {
                  return std::abs(x) > std::abs(y);
              });
    rep.spectral_radius = ev.empty() ? 0.0 : std::abs(ev.front());
    rep.top_eigenvalues.assign(ev.begin(), ev.begin() + std::min<std::size_t>(top_k, ev.size()));
    CMatrix power = a.m;
    for (int n = 1; n <= n_max; ++n) {
        if (n > 1) power = power * a.m;
        rep.power_norms.emplace_back(n, la::operator_norm(power));
    }
    rep.top_singular = rep.power_norms.front().second;
    return rep;
}

double unitarity_defect(const CMatrix& a) {
    CMatrix d = a.adjoint() * a;
    d -= CMatrix::Identity(a.cols(), a.cols());
    return la::operator_norm(d);
}

namespace {

void put_u64(std::ofstream& out, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::ifstream& in) {
    unsigned char b[8];
    in.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

void put_f64(std::ofstream& out, double v) {
    std::uint64_t u;
    std::memcpy(&u, &v, 8);
    put_u64(out, u);
}

double get_f64(std::ifstream& in) {
    std::uint64_t u = get_u64(in);
    double v;
    std::memcpy(&v, &u, 8);
    return v;
}

}  // namespace

void write_operator(const std::string& path, const DenseOperator& op) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_operator: cannot open " + path);
    put_u64(out, static_cast<std::uint64_t>(op.grid.n));
    put_u64(out, op.grid.kind == GridSpec::Kind::interval ? 0 : 1);
    put_f64(out, op.grid.h);
    for (int j = 0; j < op.m.rows(); ++j)
        for (int k = 0; k < op.m.cols(); ++k) {
            put_f64(out, op.m(j, k).real());
            put_f64(out, op.m(j, k).imag());
        }
}

DenseOperator read_operator(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_operator: cannot open " + path);
    const std::uint64_t n = get_u64(in);
    const std::uint64_t kind = get_u64(in);
    const double h = get_f64(in);
    DenseOperator op;
    op.grid = kind == 0 ? GridSpec::interval_for_h(h, static_cast<int>(n))
                        : GridSpec::torus(static_cast<int>(n));
    op.m.resize(n, n);
    for (std::uint64_t j = 0; j < n; ++j)
        for (std::uint64_t k = 0; k < n; ++k) {
            const double re = get_f64(in);
            const double im = get_f64(in);
            op.m(j, k) = std::complex<double>(re, im);
        }
    if (!in) throw std::runtime_error("read_operator: truncated file " + path);
    return op;
}

}  // namespace omap::quant
