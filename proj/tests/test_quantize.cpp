#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "omap/quantize.hpp"

using namespace omap;
using namespace omap::quant;

namespace {

CVector coherent_state(const GridSpec& g, double x0, double xi0) {
    CVector v(g.n);
    for (int k = 0; k < g.n; ++k) {
        const double x = g.x(k);
        v[k] = std::polar(std::exp(-(x - x0) * (x - x0) / (2.0 * g.h)), x * xi0 / g.h);
    }
    v /= v.norm();
    return v;
}

}  // namespace

TEST_CASE("torus Fourier: delta goes to the constant column") {
    DenseOperator f = semiclassical_fourier(GridSpec::torus(4));
    CVector delta = CVector::Zero(4);
    delta[0] = 1.0;
    CVector img = f.m * delta;
    for (int j = 0; j < 4; ++j) CHECK(std::abs(img[j] - 0.5) < 1e-14);
}

TEST_CASE("Fourier unitarity across sizes") {
    for (int n : {4, 64, 256, 1024}) {
        DenseOperator f = semiclassical_fourier(GridSpec::torus(n));
        CHECK(unitarity_defect(f.m) <= 1e-12);
        DenseOperator fi = semiclassical_fourier(GridSpec::interval_selfdual(2.0, n));
        CHECK(unitarity_defect(fi.m) <= 1e-12);
    }
}

TEST_CASE("Fourier fixes the standard Gaussian") {
    GridSpec g = GridSpec::interval_for_h(std::pow(2.0, -8), 512);
    DenseOperator f = semiclassical_fourier(g);
    CVector v(g.n);
    for (int k = 0; k < g.n; ++k) v[k] = std::exp(-g.x(k) * g.x(k) / (2.0 * g.h));
    CVector w = f.m * v;
    CHECK((w - v).norm() / v.norm() <= 1e-6);
}

TEST_CASE("scaling operator: change of variables and isometry on inner support") {
    GridSpec g = GridSpec::interval_selfdual(2.0, 512);
    DenseOperator u = scaling_operator(g);

    // indicator of the inner half-box maps to sqrt(2) times the quarter box
    CVector ind(g.n);
    for (int k = 0; k < g.n; ++k) ind[k] = std::abs(g.x(k)) <= g.half_width / 2 ? 1.0 : 0.0;
    CVector img = u.m * ind;
    int mismatches = 0;
    for (int k = 0; k < g.n; ++k) {
        const double expect = std::abs(g.x(k)) <= g.half_width / 4 ? std::sqrt(2.0) : 0.0;
        if (std::abs(img[k].real() - expect) > 1e-12) ++mismatches;
    }
    CHECK(mismatches <= 4);  // one cell at each support edge

    // Gaussian well inside the inner half-box: norms agree to 1e-8
    CVector v(g.n);
    const double sigma = g.half_width / 10;
    for (int k = 0; k < g.n; ++k) v[k] = std::exp(-g.x(k) * g.x(k) / (2 * sigma * sigma));
    CHECK(std::abs((u.m * v).norm() / v.norm() - 1.0) <= 1e-8);

    // U o U scales by 4 with overall factor 2 on inner-quarter support
    CVector vq(g.n);
    const double sq = g.half_width / 24;
    for (int k = 0; k < g.n; ++k) vq[k] = std::exp(-g.x(k) * g.x(k) / (2 * sq * sq));
    CVector uu = u.m * (u.m * vq);
    double worst = 0.0;
    for (int k = 0; k < g.n; ++k) {
        const double y = 4.0 * g.x(k);
        const double oracle =
            std::abs(y) <= g.half_width ? 2.0 * std::exp(-y * y / (2 * sq * sq)) : 0.0;
        worst = std::max(worst, std::abs(uu[k].real() - oracle));
    }
    CHECK(worst <= 1e-6);
}

TEST_CASE("left quantization: identity and multiplication operators") {
    GridSpec g = GridSpec::interval_for_h(std::pow(2.0, -6), 256);
    DenseOperator one = quantize_left([](double, double) { return 1.0; }, g);
    CHECK((one.m - CMatrix::Identity(g.n, g.n)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(one.boundary_warning);  // constant symbol touches the grid edge

    auto profile = [](double x) { return std::exp(-4.0 * x * x); };
    DenseOperator mult = quantize_left([&](double x, double) { return profile(x); }, g);
    double off = 0.0, diag = 0.0;
    for (int j = 0; j < g.n; ++j)
        for (int k = 0; k < g.n; ++k) {
            if (j == k)
                diag = std::max(diag, std::abs(mult.m(j, k) - profile(g.x(j))));
            else
                off = std::max(off, std::abs(mult.m(j, k)));
        }
    CHECK(diag <= 1e-10);
    CHECK(off <= 1e-10);
}

TEST_CASE("left quantization: norm excess shrinks like sqrt(h)") {
    auto chi = radial_bump_symbol(0.5, 1.0);
    double c_ref = 0.0;
    for (int e : {6, 7, 8, 9}) {
        const double h = std::pow(2.0, -e);
        GridSpec g = GridSpec::interval_for_h(h, 1 << (e + 1));
        REQUIRE(g.half_width > 1.1);
        DenseOperator op = quantize_left(chi, g);
        const double excess = std::max(0.0, la::operator_norm(op.m) - 1.0);
        const double c = excess / std::sqrt(h);
        if (e == 6) c_ref = c;
        CHECK(c <= 3.0 * c_ref + 1e-9);
    }
}

TEST_CASE("model open map: wavepackets through the cutoff") {
    const double h = std::pow(2.0, -10);
    ModelMap mm = model_open_map(h, 2048);
    CHECK(mm.chi_outer == doctest::Approx(1.0));  // box large enough at this n

    // a packet at the trapped point keeps its norm up to O(sqrt(h))
    CVector g0 = coherent_state(mm.grid, 0.0, 0.0);
    const double kept = (mm.op.m * g0).norm();
    CHECK(std::abs(kept - 1.0) <= 3.0 * std::sqrt(h));

    // a packet whose image leaves supp chi is annihilated
    CVector far = coherent_state(mm.grid, 0.0, 0.7);
    CHECK((mm.op.m * far).norm() <= 1e-6);
}

TEST_CASE("model open map: long power decays and bounds the spectral radius") {
    const double h = std::pow(2.0, -8);
    ModelMap mm = model_open_map(h, 512);
    const int n_log = static_cast<int>(std::ceil(0.75 * 8.0));
    const int power = 2 * n_log + 1;
    const double norm_pow = la::power_norm(mm.op.m, power);
    CHECK(norm_pow < 0.8);

    const double rho = la::spectral_radius(mm.op.m);
    CHECK(rho <= std::pow(norm_pow, 1.0 / power) + 1e-10);
    CHECK(rho < 0.95);
}

TEST_CASE("open quantum baker: unitary when closed, contracting when open") {
    DenseOperator closed = open_baker_operator(27, 3, {0, 1, 2});
    CHECK(unitarity_defect(closed.m) <= 1e-10);

    DenseOperator zero = open_baker_operator(27, 3, {});
    CHECK(zero.m.cwiseAbs().maxCoeff() == 0.0);

    DenseOperator open = open_baker_operator(27, 3, {0, 2});
    CHECK(la::operator_norm(open.m) <= 1.0 + 1e-10);
    const double rho = la::spectral_radius(open.m);
    CHECK(rho < 1.0);
    CHECK(rho > 0.1);
}

TEST_CASE("spectral report: unitary and nilpotent references") {
    DenseOperator f = semiclassical_fourier(GridSpec::torus(64));
    SpectralReport rep = spectral_report(f, 6);
    CHECK(std::abs(rep.spectral_radius - 1.0) <= 1e-10);
    for (const auto& [n, norm] : rep.power_norms) CHECK(std::abs(norm - 1.0) <= 1e-10);

    DenseOperator nil;
    nil.grid = GridSpec::torus(2);
    nil.m = CMatrix::Zero(2, 2);
    nil.m(0, 1) = 1.0;
    SpectralReport nrep = spectral_report(nil, 3);
    CHECK(nrep.spectral_radius <= 1e-12);
    CHECK(nrep.top_singular == doctest::Approx(1.0));

    // submultiplicativity of the power norms
    for (std::size_t i = 0; i + 1 < rep.power_norms.size(); ++i)
        for (std::size_t j = 0; i + j + 2 <= rep.power_norms.size(); ++j) {
            const auto& [m1, a1] = rep.power_norms[i];
            const auto& [m2, a2] = rep.power_norms[j];
            if (m1 + m2 > static_cast<int>(rep.power_norms.size())) continue;
            CHECK(rep.power_norms[m1 + m2 - 1].second <= a1 * a2 + 1e-10);
        }
}

TEST_CASE("uncertainty box projectors reproduce the quarter-power volume bound") {
    for (int e : {8, 10, 12}) {
        const double h = std::pow(2.0, -e);
        GridSpec g = GridSpec::interval_for_h(h, 1024);
        const double half = std::pow(h, 0.75);
        auto idx = indices_within(g, half);
        REQUIRE(idx.size() >= 3);
        DenseOperator px = projector(g, idx, Side::position);
        DenseOperator pxi = projector(g, idx, Side::momentum);
        const double norm = la::operator_norm(CMatrix(pxi.m * px.m));
        const double oracle = 2.0 * std::pow(h, 0.25) / std::sqrt(2.0 * std::numbers::pi);
        CHECK(norm == doctest::Approx(oracle).epsilon(0.25));
    }
}

TEST_CASE("perturbation robustness of the long-power norm") {
    const double h = std::pow(2.0, -10);
    ModelMap mm = model_open_map(h, 1024);
    const int power = 21;
    std::mt19937_64 rng(20240811);
    std::normal_distribution<double> gauss(0.0, 1.0);
    CMatrix r(mm.grid.n, mm.grid.n);
    for (int j = 0; j < mm.grid.n; ++j)
        for (int k = 0; k < mm.grid.n; ++k) r(j, k) = std::complex<double>(gauss(rng), gauss(rng));
    r *= std::pow(h, 0.6) / la::operator_norm(r);

    const double base = std::pow(la::power_norm(mm.op.m, power), 1.0 / power);
    CMatrix sum = mm.op.m + r;
    std::vector<const CMatrix*> chain(power, &sum);
    const double pert = std::pow(la::chain_operator_norm(chain), 1.0 / power);
    CHECK(std::abs(pert - base) <= 2.0 * std::pow(h, 0.3));
}

TEST_CASE("binary operator container round trip") {
    DenseOperator b = open_baker_operator(9, 3, {0, 2});
    write_operator("op_roundtrip.bin", b);
    DenseOperator r = read_operator("op_roundtrip.bin");
    CHECK(r.grid.n == b.grid.n);
    CHECK(r.grid.h == doctest::Approx(b.grid.h));
    CHECK((r.m - b.m).cwiseAbs().maxCoeff() == 0.0);
}
