#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "omap/billiard.hpp"
#include "omap/systems.hpp"
#include "omap/thermo.hpp"

using namespace omap;
using namespace omap::thermo;

namespace {

const double kLog2 = std::log(2.0);
const double kLog3 = std::log(3.0);

WordTable baker_table(int max_len) {
    static OpenMapSystem sys = open_baker_system(3, {0, 2});
    return WordTable(sys, max_len, max_len + 2, baker_periodic_points(3, {0, 2}, max_len + 2));
}

std::vector<Vec2> equilateral_centers(double side) {
    return {Vec2(0.0, 0.0), Vec2(side, 0.0), Vec2(0.5 * side, side * std::sqrt(3.0) / 2.0)};
}

// closed Cantor middle-third membership by digit walk
bool in_cantor(double x, int depth = 40) {
    if (x < 0.0 || x > 1.0) return false;
    for (int k = 0; k < depth; ++k) {
        x *= 3.0;
        const int digit = static_cast<int>(std::floor(x));
        if (digit == 1) return false;
        x -= digit;
        if (x <= 0.0) return true;
    }
    return true;
}

std::vector<double> cantor_midpoints(int depth) {
    std::vector<double> xs{0.0};
    for (int k = 0; k < depth; ++k) {
        std::vector<double> next;
        next.reserve(2 * xs.size());
        for (double x : xs) {
            next.push_back(x);
            next.push_back(x + 2.0 / std::pow(3.0, k + 1));
        }
        xs.swap(next);
    }
    const double half = 0.5 * std::pow(3.0, -depth);
    for (double& x : xs) x += half;
    return xs;
}

}  // namespace

TEST_CASE("pressure: open baker closed form at every n") {
    WordTable table = baker_table(10);
    PressureCalculator pc(table, 10);
    for (double s : {0.0, 0.3, 0.6309297535714574, 1.0, 1.7}) {
        PressureEntry e = pc.at(s);
        const double exact = kLog2 - s * kLog3;
        for (const auto& [n, est] : e.estimates) CHECK(est == doctest::Approx(exact).epsilon(1e-9));
        CHECK(e.extrapolated == doctest::Approx(exact).epsilon(1e-9));
    }
}

TEST_CASE("pressure: s = 0 recovers the entropy of the transition matrix") {
    auto centers = equilateral_centers(6.0);
    std::vector<double> radii{1.0, 1.0, 1.0};
    OpenMapSystem sys = three_disk_system(centers, radii);
    WordTable table(sys, 8, 10, periodic_trapped_points(centers, radii, 10));
    PressureCalculator pc(table, 8);

    // oracle: spectral radius of the 0/1 transition matrix by power iteration
    const int q = sys.alphabet_size();
    std::vector<double> v(q, 1.0);
    double rho = 0.0;
    for (int it = 0; it < 200; ++it) {
        std::vector<double> w(q, 0.0);
        for (int a = 0; a < q; ++a)
            for (int b = 0; b < q; ++b)
                if (sys.transitions[a][b]) w[b] += v[a];
        rho = 0.0;
        for (double x : w) rho = std::max(rho, x);
        for (double& x : w) x /= rho;
        v.swap(w);
    }
    CHECK(pc.at(0.0).extrapolated == doctest::Approx(std::log(rho)).epsilon(1e-6));
    CHECK(std::log(rho) == doctest::Approx(kLog2).epsilon(1e-9));
}

TEST_CASE("pressure: closed baker has vanishing pressure at s = 1") {
    OpenMapSystem sys = open_baker_system(3, {0, 1, 2});
    CHECK_FALSE(sys.fractal_ok);
    WordTable table(sys, 6, 8, baker_periodic_points(3, {0, 1, 2}, 8));
    PressureCalculator pc(table, 6);
    CHECK(pc.at(1.0).extrapolated == doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("pressure: monotone decreasing in s") {
    WordTable table = baker_table(8);
    PressureCalculator pc(table, 8);
    double prev = std::numeric_limits<double>::infinity();
    for (double s = 0.0; s <= 2.0; s += 0.1) {
        const double p = pc.at(s).extrapolated;
        CHECK(p < prev);
        prev = p;
    }
}

TEST_CASE("pressure: enumeration budget reports the largest feasible length") {
    WordTable table = baker_table(10);
    try {
        PressureCalculator pc(table, 10, 100);
        FAIL("expected budget error");
    } catch (const BudgetExceededError& e) {
        CHECK(e.largest_feasible_n == 6);  // 2^6 = 64 <= 100 < 2^7
    }
}

TEST_CASE("bowen root: open baker dimension") {
    WordTable table = baker_table(12);
    PressureCalculator pc(table, 12);
    BowenResult br = bowen_root(pc, 1e-9);
    CHECK(br.s0 == doctest::Approx(kLog2 / kLog3).epsilon(1e-7));
    CHECK_FALSE(br.boundary_case);
    CHECK(br.report.method == "pressure_root");
}

TEST_CASE("bowen root: two disks, single orbit, boundary case") {
    std::vector<Vec2> centers{Vec2(0.0, 0.0), Vec2(6.0, 0.0)};
    std::vector<double> radii{1.0, 1.0};
    OpenMapSystem sys = three_disk_system(centers, radii);
    WordTable table(sys, 8, 10, periodic_trapped_points(centers, radii, 10));
    PressureCalculator pc(table, 8);
    // P(s) = -s log Lambda < 0 for s > 0; the root is pinned at 0
    CHECK(pc.at(0.5).extrapolated < 0.0);
    BowenResult br = bowen_root(pc, 1e-9);
    CHECK(br.s0 == 0.0);
    CHECK(br.boundary_case);
}

TEST_CASE("bowen root: closed system refuses with no gap regime") {
    OpenMapSystem sys = open_baker_system(3, {0, 1, 2});
    WordTable table(sys, 6, 8, baker_periodic_points(3, {0, 1, 2}, 8));
    PressureCalculator pc(table, 6);
    CHECK_THROWS_WITH_AS((void)bowen_root(pc, 1e-9), doctest::Contains("no gap regime"),
                         std::runtime_error);
}

TEST_CASE("classical decay rate: open baker and Monte Carlo check") {
    WordTable table = baker_table(10);
    PressureCalculator pc(table, 10);
    const double gamma = classical_decay_rate(pc);
    CHECK(gamma == doctest::Approx(kLog3 - kLog2).epsilon(1e-9));

    OpenMapSystem sys = open_baker_system(3, {0, 2});
    const double mc = survivor_decay_rate(sys, 10, 200000, 20240811);
    CHECK(std::abs(mc - gamma) / gamma < 0.10);

    OpenMapSystem closed = open_baker_system(3, {0, 1, 2});
    WordTable ctable(closed, 6, 8, baker_periodic_points(3, {0, 1, 2}, 8));
    CHECK(classical_decay_rate(PressureCalculator(ctable, 6)) ==
          doctest::Approx(0.0).epsilon(1e-10));
}

TEST_CASE("box dimension: mid-third Cantor is exact on triadic scales") {
    auto pts = cantor_midpoints(10);
    auto counts = box_counts(pts, std::pow(3.0, -8), 1.0 / 3.0, 3.0);
    REQUIRE(counts.size() == 8);
    for (std::size_t k = 0; k < counts.size(); ++k)
        CHECK(counts[k].second == static_cast<std::size_t>(1) << (k + 1));
    DimensionReport rep = box_dimension(pts, std::pow(3.0, -8), 1.0 / 3.0, 3.0);
    CHECK(rep.delta == doctest::Approx(kLog2 / kLog3).epsilon(1e-9));
    CHECK(rep.constant_C == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("box dimension: a single interval has slope one") {
    std::vector<double> pts;
    for (int i = 0; i < 20000; ++i) pts.push_back(i / 20000.0);
    DimensionReport rep = box_dimension(pts, 1.0 / 512, 0.25, 2.0);
    CHECK(std::abs(rep.delta - 1.0) <= 0.02);
}

TEST_CASE("box dimension: needs at least 4 scales") {
    std::vector<double> pts{0.1, 0.2};
    CHECK_THROWS_WITH_AS((void)box_dimension(pts, 0.2, 0.5, 2.0), doctest::Contains("4 usable"),
                         std::runtime_error);
}

TEST_CASE("porosity: mid-third Cantor certified at nu = 1/3") {
    const double a0 = std::pow(3.0, -8);
    PorosityResult res = check_porosity([](double t) { return in_cantor(t); }, 0.0, 1.0, 1.0 / 3,
                                        a0, 1.0, a0 / 31.0);
    CHECK(res.certified);
    CHECK(!res.certificate.witness_gaps.empty());
    for (const GapWitness& w : res.certificate.witness_gaps) {
        CHECK(w.j_lo >= w.i_lo - 1e-12);
        CHECK(w.j_hi <= w.i_hi + 1e-12);
        CHECK(w.j_hi - w.j_lo == doctest::Approx((w.i_hi - w.i_lo) / 3.0));
    }
}

TEST_CASE("porosity: the full interval is refuted with the unit interval witness") {
    PorosityResult res = check_porosity([](double t) { return t >= 0.0 && t <= 1.0; }, 0.0, 1.0,
                                        0.1, 0.01, 1.0, 1e-4);
    CHECK_FALSE(res.certified);
    CHECK(res.fail_lo == doctest::Approx(0.0));
    CHECK(res.fail_hi == doctest::Approx(1.0));
}

TEST_CASE("porosity: fattened Cantor stays porous at a third of the constant") {
    // fattening by alpha2 <= (nu/3) alpha1 keeps nu/3-porosity on scales
    // 3 alpha2 / nu to alpha1
    const double nu = 1.0 / 3, alpha1 = 1.0, alpha2 = nu * alpha1 / 3.0;
    auto member = [alpha2](double t) {
        if (t < -alpha2 || t > 1.0 + alpha2) return false;
        // distance to the Cantor set below alpha2, probed on a fine lattice
        for (double u = t - alpha2; u <= t + alpha2 + 1e-12; u += alpha2 / 64)
            if (in_cantor(u)) return true;
        return false;
    };
    PorosityResult res =
        check_porosity(member, -0.2, 1.2, nu / 3.0, 0.97 * alpha1, alpha1, 1e-3);
    CHECK(res.certified);
}

TEST_CASE("porosity from dimension: explicit constants") {
    const double delta = kLog2 / kLog3;
    // T = floor(max(1, 6^(delta/(1-delta)))) + 1 = 22, nu = 1/66
    const double t_oracle = std::floor(std::max(1.0, std::pow(6.0, delta / (1.0 - delta)))) + 1;
    CHECK(t_oracle == 22.0);
    CHECK(porosity_from_dimension(1.0, delta, 1.0 / 6) == doctest::Approx(1.0 / 66).epsilon(1e-12));

    CHECK(porosity_from_dimension(1.0, 1e-12, 1.0 / 6) == doctest::Approx(1.0 / 6).epsilon(1e-9));

    // soundness: the returned nu certifies the Cantor set itself
    const double nu = porosity_from_dimension(1.0, delta, 1.0 / 6);
    const double a0 = std::pow(3.0, -6);
    PorosityResult res =
        check_porosity([](double t) { return in_cantor(t); }, 0.0, 1.0, nu, a0, 1.0, nu * a0 / 10);
    CHECK(res.certified);
}

TEST_CASE("dimension from porosity: explicit constants and soundness") {
    DimensionFromPorosity d = dimension_from_porosity(1.0 / 3, 1.0, 1.0);
    CHECK(d.L == 6);
    CHECK(d.delta == doctest::Approx(std::log(5.0) / std::log(6.0)).epsilon(1e-12));

    // upper-bounds the measured box dimension of the Cantor set
    DimensionReport rep = box_dimension(cantor_midpoints(10), std::pow(3.0, -8), 1.0 / 3, 3.0);
    CHECK(d.delta >= rep.delta);

    DimensionFromPorosity edge = dimension_from_porosity(1.0, 1.0, 1.0);
    CHECK(edge.L == 2);
    CHECK(edge.delta == doctest::Approx(0.0));
}

TEST_CASE("numerology: worked examples") {
    NumerologyProfile p = numerology(kLog2, kLog2, 1.0);
    CHECK(p.frak_b == doctest::Approx(0.5));
    CHECK(p.delta0 == doctest::Approx(0.25));
    CHECK(p.tau == doctest::Approx(7.0 / 8));
    CHECK(p.delta0 + p.tau == doctest::Approx(9.0 / 8));
    CHECK(p.all_checks());

    NumerologyProfile q = numerology(0.5, 1.0, 1.0);
    CHECK(q.tau == doctest::Approx(15.0 / 16));
    CHECK(q.delta2 == doctest::Approx(1.0 / 8));
    CHECK(q.delta2 + q.tau == doctest::Approx(17.0 / 16));

    NumerologyProfile r = numerology(kLog2, kLog2, 1.0);
    CHECK(r.n1(std::pow(2.0, -10)) == 10);
}

TEST_CASE("numerology: constraints hold over a parameter sweep") {
    int failures = 0, tested = 0;
    for (int i = 1; i <= 10; ++i) {
        for (int j = i; j <= 10; ++j) {
            for (int b = 1; b <= 10; ++b) {
                NumerologyProfile p = numerology(0.2 * i, 0.2 * j, 0.3 * b);
                ++tested;
                if (!p.all_checks()) ++failures;
            }
        }
    }
    CHECK(tested >= 500);
    CHECK(failures == 0);
}

TEST_CASE("unstable transversal survivors: baker trace is the Cantor set") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    PhasePoint base{0.0, 0.0, 0};
    auto ts = unstable_transversal_survivors(sys, base, 0.5, 7, 400000);
    REQUIRE(ts.size() > 100);
    DimensionReport rep = box_dimension(ts, std::pow(3.0, -6), 1.0 / 9, 3.0);
    CHECK(std::abs(rep.delta - kLog2 / kLog3) < 0.05);
}

TEST_CASE("three disks: pressure root in a sane range and decreasing pressure") {
    auto centers = equilateral_centers(6.0);
    std::vector<double> radii{1.0, 1.0, 1.0};
    OpenMapSystem sys = three_disk_system(centers, radii);
    WordTable table(sys, 8, 10, periodic_trapped_points(centers, radii, 10));
    PressureCalculator pc(table, 8);
    CHECK(pc.at(0.0).extrapolated > 0.0);
    CHECK(pc.at(1.0).extrapolated < 0.0);
    BowenResult br = bowen_root(pc, 1e-6);
    CHECK(br.s0 > 0.05);
    CHECK(br.s0 < 0.95);
}
