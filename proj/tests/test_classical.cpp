#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "omap/billiard.hpp"
#include "omap/open_map.hpp"
#include "omap/systems.hpp"
#include "omap/word.hpp"

using namespace omap;

namespace {

std::vector<Vec2> equilateral_centers(double side) {
    return {Vec2(0.0, 0.0), Vec2(side, 0.0), Vec2(0.5 * side, side * std::sqrt(3.0) / 2.0)};
}

}  // namespace

TEST_CASE("linear model: single step") {
    OpenMapSystem sys = linear_model_system();
    auto img = step(sys, PhasePoint{0.4, 0.2, 0});
    REQUIRE(img.has_value());
    CHECK(img->second.x == doctest::Approx(0.2).epsilon(1e-14));
    CHECK(img->second.xi == doctest::Approx(0.4).epsilon(1e-14));

    // outside the piece domain box: the hole
    CHECK_FALSE(step(sys, PhasePoint{0.4, 0.8, 0}).has_value());
    CHECK_FALSE(step(sys, PhasePoint{1.5, 0.0, 0}).has_value());
}

TEST_CASE("open baker: hole on the removed branch") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    // oracle: branch membership, middle third [1/3, 2/3) was removed
    PhasePoint p{0.5, 0.1, 0};
    CHECK((p.x >= 1.0 / 3 && p.x < 2.0 / 3));
    CHECK_FALSE(step(sys, p).has_value());
    CHECK(step(sys, PhasePoint{0.2, 0.1, 0}).has_value());
    CHECK(step(sys, PhasePoint{0.9, 0.1, 0}).has_value());
}

TEST_CASE("overlapping piece domains are a configuration error") {
    OpenMapSystem sys = linear_model_system();
    MapPiece dup = sys.pieces[0];
    sys.pieces.push_back(dup);
    CHECK_THROWS_AS((void)step(sys, PhasePoint{0.1, 0.1, 0}), std::runtime_error);
}

TEST_CASE("trapped set sample: open baker depth 1 gives the kept-thirds grid") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    const int n = 90;  // multiple of 3, cell centers never on third boundaries
    auto pts = trapped_set_sample(sys, 1, n, n);
    // oracle: explicit branch preimages; survivors are exactly
    // {kept third in x} x {kept third in xi}
    auto third = [](double t) { return static_cast<int>(std::floor(3.0 * t)); };
    for (const auto& p : pts) {
        const int tx = third(p.x), txi = third(p.xi);
        CHECK((tx == 0 || tx == 2));
        CHECK((txi == 0 || txi == 2));
    }
    CHECK(pts.size() == static_cast<size_t>(n * n * 4 / 9));
}

TEST_CASE("trapped set sample: linear model shrinks onto the fixed point") {
    OpenMapSystem sys = linear_model_system();
    // the origin is trapped for all time
    CHECK_NOTHROW((void)iterate(sys, PhasePoint{0.0, 0.0, 0}, 25));
    CHECK_NOTHROW((void)iterate(sys, PhasePoint{0.0, 0.0, 0}, -25));
    auto pts = trapped_set_sample(sys, 8, 512, 512);
    REQUIRE(!pts.empty());
    for (const auto& p : pts) {
        CHECK(std::abs(p.x) <= std::pow(2.0, -8) + 1e-12);
        CHECK(std::abs(p.xi) <= std::pow(2.0, -8) + 1e-12);
    }
}

TEST_CASE("trapped set sample: no pieces, empty set") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    sys.pieces.clear();
    CHECK(trapped_set_sample(sys, 1, 30, 30).empty());
}

TEST_CASE("unstable Jacobian: linear model fixed point") {
    OpenMapSystem sys = linear_model_system();
    PhasePoint origin{0.0, 0.0, 0};
    CHECK(unstable_jacobian(sys, origin, 3) == doctest::Approx(8.0).epsilon(1e-12));
    CHECK(unstable_jacobian(sys, origin, 0) == doctest::Approx(1.0));
    // backward iterates contract along the unstable direction
    CHECK(unstable_jacobian(sys, origin, -3) == doctest::Approx(0.125).epsilon(1e-12));
}

TEST_CASE("unstable Jacobian: three disks, period-2 orbit vs finite differences") {
    auto centers = equilateral_centers(6.0);
    std::vector<double> radii{1.0, 1.0, 1.0};
    OpenMapSystem sys = three_disk_system(centers, radii);
    PhasePoint p = facing_point(centers, radii, 0, 1);

    // the period-2 point must be 2-periodic
    PhasePoint p2 = iterate(sys, p, 2);
    CHECK(distance(sys, p, p2) < 1e-9);

    // closed form: per-bounce expansion 1 + l/a + sqrt((1 + l/a)^2 - 1), l = 4
    const double kappa = 5.0 + 2.0 * std::sqrt(6.0);
    CHECK(unstable_jacobian(sys, p, 1, 24) == doctest::Approx(kappa).epsilon(1e-9));

    // oracle: central finite differences of the composed map along E_u
    Vec2 vu = unstable_direction(sys, p, 24);
    const double h = 1e-6;
    auto f2 = [&](const PhasePoint& q) { return iterate(sys, q, 2); };
    PhasePoint pp{p.x + h * vu[0], p.xi + h * vu[1], p.block};
    PhasePoint pm{p.x - h * vu[0], p.xi - h * vu[1], p.block};
    PhasePoint fp = f2(pp), fm = f2(pm);
    double dx = fp.x - fm.x;
    const double per = sys.x_period_of(fp.block);
    if (dx > 0.5 * per) dx -= per;
    if (dx < -0.5 * per) dx += per;
    Vec2 diff(dx / (2 * h), (fp.xi - fm.xi) / (2 * h));
    const double j_fd = diff.norm();
    const double j2 = unstable_jacobian(sys, p, 2, 24);
    CHECK(std::abs(j2 - j_fd) / j_fd < 1e-6);
}

TEST_CASE("unstable Jacobian: escape is reported with the step") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    // a point in the kept branch whose image falls in the hole
    PhasePoint p{0.15, 0.1, 0};  // 3x = 0.45: middle third
    CHECK_THROWS_WITH_AS((void)unstable_jacobian(sys, p, 3), "escaped at step 1",
                         std::runtime_error);
}

TEST_CASE("word neighborhoods: length one is cell membership") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    PhasePoint p{0.1, 0.5, 0};
    CHECK(word_neighborhood_contains(sys, {0}, WordSign::minus, p));
    CHECK_FALSE(word_neighborhood_contains(sys, {1}, WordSign::minus, p));
}

TEST_CASE("word neighborhoods: baker cylinders in base 3") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    // letters: 0 -> branch 0, 1 -> branch 2. Word (0,1): x in [2/9, 3/9)
    for (double x : {0.01, 0.1, 0.21, 0.23, 0.3, 0.32, 0.4, 0.7, 0.95}) {
        PhasePoint p{x, 0.1, 0};
        const bool expect = (x >= 2.0 / 9 && x < 3.0 / 9);
        CHECK(word_neighborhood_contains(sys, {0, 1}, WordSign::minus, p) == expect);
    }
    // plus-words prescribe the backward itinerary: F^n(V^-) = V^+
    PhasePoint q{0.25, 0.1, 0};
    REQUIRE(word_neighborhood_contains(sys, {0, 1}, WordSign::minus, q));
    PhasePoint fq = iterate(sys, q, 2);
    CHECK(word_neighborhood_contains(sys, {0, 1}, WordSign::plus, fq));
}

TEST_CASE("word neighborhoods: forbidden transition on disks is empty") {
    OpenMapSystem sys = three_disk_system(6.0, 1.0);
    // find the two pieces leaving block 0
    int p01 = -1, p02 = -1;
    for (int i = 0; i < static_cast<int>(sys.pieces.size()); ++i) {
        if (sys.pieces[i].from_block != 0) continue;
        (sys.pieces[i].to_block == 1 ? p01 : p02) = i;
    }
    REQUIRE(p01 >= 0);
    REQUIRE(p02 >= 0);
    // both letters live on block 0, but the first maps to block 1
    CHECK_FALSE(sys.transitions[p01][p02]);
    const Rect blk = sys.blocks[0];
    for (int i = 0; i < 40; ++i) {
        PhasePoint p{blk.x_min + (i + 0.5) * blk.width() / 40, 0.3, 0};
        CHECK_FALSE(word_neighborhood_contains(sys, {p01, p02}, WordSign::minus, p));
    }
}

TEST_CASE("word neighborhoods: fixed point stays in the repeated letter") {
    OpenMapSystem sys = linear_model_system();
    CHECK(word_neighborhood_contains(sys, {0, 0, 0, 0}, WordSign::minus, PhasePoint{0, 0, 0}));
}

TEST_CASE("local word Jacobian: open baker words are exactly powers of 3") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    WordTable table(sys, 6, 8, baker_periodic_points(3, {0, 2}, 8));
    for (int n : {1, 2, 4, 6}) {
        for (const SymbolicWord& w : table.admissible_words(n)) {
            JacobianPair jp = table.local_word_jacobian(w);
            CHECK(jp.j_minus == doctest::Approx(std::pow(3.0, n)).epsilon(1e-9));
            CHECK(jp.j_plus == doctest::Approx(std::pow(3.0, n)).epsilon(1e-9));
            CHECK_FALSE(jp.shadowed);
        }
    }
}

TEST_CASE("local word Jacobian: linear model repeated letter") {
    OpenMapSystem sys = linear_model_system();
    WordTable table = WordTable::build(sys, 6, 129, 129, 3);
    for (int n : {1, 3, 6}) {
        SymbolicWord w(n, 0);
        JacobianPair jp = table.local_word_jacobian(w);
        CHECK(jp.j_minus == doctest::Approx(std::pow(2.0, n)).epsilon(1e-9));
    }
}

TEST_CASE("local word Jacobian: empty refined neighborhood") {
    OpenMapSystem sys = three_disk_system(6.0, 1.0);
    WordTable table = WordTable::build(sys, 4, 48, 48, 2);
    int p01 = -1, p02 = -1;
    for (int i = 0; i < static_cast<int>(sys.pieces.size()); ++i) {
        if (sys.pieces[i].from_block != 0) continue;
        (sys.pieces[i].to_block == 1 ? p01 : p02) = i;
    }
    CHECK_THROWS_AS((void)table.local_word_jacobian(SymbolicWord{p01, p02}),
                    EmptyNeighborhoodError);
}

TEST_CASE("local word Jacobian: near multiplicativity on three-disk words") {
    auto centers = equilateral_centers(6.0);
    std::vector<double> radii{1.0, 1.0, 1.0};
    OpenMapSystem sys = three_disk_system(centers, radii);
    WordTable table(sys, 8, 10, periodic_trapped_points(centers, radii, 10));
    auto words = table.admissible_words(8);
    REQUIRE(!words.empty());
    int checked = 0;
    for (size_t wi = 0; wi < words.size(); wi += 7) {
        const SymbolicWord& w = words[wi];
        for (int cut : {2, 4, 6}) {
            SymbolicWord w1(w.begin(), w.begin() + cut), w2(w.begin() + cut, w.end());
            double ratio;
            try {
                ratio = table.local_word_jacobian(w).j_minus /
                        (table.local_word_jacobian(w1).j_minus *
                         table.local_word_jacobian(w2).j_minus);
            } catch (const EmptyNeighborhoodError&) {
                continue;
            }
            CHECK(ratio >= 0.1);
            CHECK(ratio <= 10.0);
            ++checked;
        }
        // the two-sided Jacobians stay comparable and inside the
        // hyperbolicity bracket with a common constant
        try {
            JacobianPair jp = table.local_word_jacobian(w);
            const double n = static_cast<double>(w.size());
            const double ratio_pm = jp.j_minus / jp.j_plus;
            CHECK(ratio_pm >= 0.1);
            CHECK(ratio_pm <= 10.0);
            CHECK(jp.j_minus >= std::exp(sys.lambda0 * n) / 10.0);
            CHECK(jp.j_minus <= std::exp(sys.lambda1 * n) * 10.0);
        } catch (const EmptyNeighborhoodError&) {
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("three disks: eclipse condition") {
    // oracle: the third center sits at height side * sqrt(3)/2 above the
    // opposite side; clearance = height - 2 * radius
    CHECK(6.0 * std::sqrt(3.0) / 2.0 - 2.0 > 0.0);
    CHECK_NOTHROW((void)three_disk_system(6.0, 1.0));

    CHECK(2.2 * std::sqrt(3.0) / 2.0 - 2.0 < 0.0);
    CHECK_THROWS_WITH_AS((void)three_disk_system(2.2, 1.0),
                         doctest::Contains("eclipse condition violated"), std::invalid_argument);

    CHECK_THROWS_WITH_AS((void)three_disk_system(1.5, 1.0), doctest::Contains("overlap"),
                         std::invalid_argument);
}

TEST_CASE("three disks: the period-2 orbit sits at eta = 0 facing points") {
    auto centers = equilateral_centers(6.0);
    std::vector<double> radii{1.0, 1.0, 1.0};
    OpenMapSystem sys = three_disk_system(centers, radii);
    PhasePoint a = facing_point(centers, radii, 0, 1);
    auto img = step(sys, a);
    REQUIRE(img.has_value());
    CHECK(img->second.block == 1);
    CHECK(std::abs(img->second.xi) < 1e-12);
    PhasePoint b = facing_point(centers, radii, 1, 0);
    CHECK(distance(sys, img->second, b) < 1e-9);
}

TEST_CASE("periodic orbits satisfy the map") {
    auto centers = equilateral_centers(6.0);
    std::vector<double> radii{1.0, 1.0, 1.0};
    OpenMapSystem sys = three_disk_system(centers, radii);
    for (const std::vector<int>& itin :
         {std::vector<int>{0, 1}, std::vector<int>{0, 1, 2}, std::vector<int>{0, 2, 1, 2}}) {
        auto orbit = periodic_orbit(centers, radii, itin);
        REQUIRE(orbit.size() == itin.size());
        for (size_t k = 0; k < orbit.size(); ++k) {
            auto img = step(sys, orbit[k]);
            REQUIRE(img.has_value());
            CHECK(distance(sys, img->second, orbit[(k + 1) % orbit.size()]) < 1e-8);
        }
    }
}

TEST_CASE("constructors: flags and differentials") {
    OpenMapSystem closed = open_baker_system(3, {0, 1, 2});
    CHECK_FALSE(closed.fractal_ok);
    CHECK(closed.notes.count("warning") == 1);

    OpenMapSystem baker = open_baker_system(3, {0, 2});
    CHECK(baker.fractal_ok);
    Mat2 d = differential_at(baker, PhasePoint{0.1, 0.5, 0});
    CHECK(d(0, 0) == doctest::Approx(3.0));
    CHECK(d(1, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(d(0, 1) == doctest::Approx(0.0));

    OpenMapSystem lin = linear_model_system();
    Mat2 dl = differential_at(lin, PhasePoint{0.1, 0.1, 0});
    CHECK(dl(0, 0) == doctest::Approx(0.5));
    CHECK(dl(1, 1) == doctest::Approx(2.0));

    CHECK_THROWS_AS((void)open_baker_system(1, {0}), std::invalid_argument);
    CHECK_THROWS_AS((void)open_baker_system(3, {}), std::invalid_argument);
}

TEST_CASE("property: symplecticity and inverse consistency on random domain points") {
    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<OpenMapSystem> systems;
    systems.push_back(linear_model_system());
    systems.push_back(open_baker_system(3, {0, 2}));
    systems.push_back(perturbed_baker_system(3, {0, 2}, 0.02));
    systems.push_back(three_disk_system(6.0, 1.0));
    for (const OpenMapSystem& sys : systems) {
        for (const MapPiece& piece : sys.pieces) {
            int tested = 0;
            for (int trial = 0; trial < 20000 && tested < 1000; ++trial) {
                PhasePoint p{piece.bounds.x_min + uni(rng) * piece.bounds.width(),
                             piece.bounds.xi_min + uni(rng) * piece.bounds.height(),
                             piece.from_block};
                if (!piece.in_domain(p)) continue;
                ++tested;
                CHECK(std::abs(piece.differential(p).determinant() - 1.0) <= 1e-8);
                PhasePoint back = piece.inverse(piece.forward(p));
                CHECK(distance(sys, back, p) <= 1e-10);
            }
            CHECK(tested == 1000);
        }
    }
}

TEST_CASE("property: hyperbolicity bracket on trapped samples") {
    auto centers = equilateral_centers(6.0);
    std::vector<double> radii{1.0, 1.0, 1.0};
    std::vector<std::pair<OpenMapSystem, std::vector<PhasePoint>>> cases;
    cases.emplace_back(open_baker_system(3, {0, 2}), baker_periodic_points(3, {0, 2}, 8));
    cases.emplace_back(three_disk_system(centers, radii),
                       periodic_trapped_points(centers, radii, 8));
    for (const auto& [sys, pts] : cases) {
        REQUIRE(pts.size() > 10);
        size_t stride = std::max<size_t>(1, pts.size() / 50);
        for (size_t i = 0; i < pts.size(); i += stride) {
            for (int n = 1; n <= 10; ++n) {
                double j;
                try {
                    j = unstable_jacobian(sys, pts[i], n, 12);
                } catch (const std::runtime_error&) {
                    break;
                }
                CHECK(j >= std::exp(sys.lambda0 * n) * 0.999);
                CHECK(j <= std::exp(sys.lambda1 * n) * 1.001);
            }
        }
    }
}

TEST_CASE("property: orbit contraction along stable pairs") {
    // for the baker and linear systems the stable manifolds are exact lines;
    // a single constant C must work for all tested n
    struct Case {
        OpenMapSystem sys;
        PhasePoint base;
        Vec2 stable;
        double contraction;
    };
    std::vector<Case> cases;
    cases.push_back({open_baker_system(3, {0, 2}), PhasePoint{0.0, 0.0, 0}, Vec2(0, 1), 1.0 / 3});
    cases.push_back({linear_model_system(), PhasePoint{0.0, 0.0, 0}, Vec2(1, 0), 0.5});
    for (const Case& c : cases) {
        double fitted_C = 0.0;
        const double d0 = 1e-3;
        PhasePoint p = c.base;
        PhasePoint q{p.x + d0 * c.stable[0], p.xi + d0 * c.stable[1], p.block};
        PhasePoint fp = p, fq = q;
        for (int n = 1; n <= 12; ++n) {
            fp = iterate(c.sys, fp, 1);
            fq = iterate(c.sys, fq, 1);
            const double js = std::pow(c.contraction, n);
            fitted_C = std::max(fitted_C, distance(c.sys, fp, fq) / (js * d0));
        }
        CHECK(fitted_C <= 1.0 + 1e-9);
    }
}

TEST_CASE("property: Jacobian comparability for orbit pairs staying close") {
    auto centers = equilateral_centers(6.0);
    std::vector<double> radii{1.0, 1.0, 1.0};
    OpenMapSystem sys = three_disk_system(centers, radii);
    auto pts = periodic_trapped_points(centers, radii, 10);
    REQUIRE(pts.size() > 30);
    const double eps1 = 0.05;
    const double C = 10.0;
    int pairs = 0;
    for (size_t i = 0; i < pts.size() && pairs < 60; i += 3) {
        for (size_t j = i + 1; j < pts.size() && pairs < 60; ++j) {
            if (distance(sys, pts[i], pts[j]) > eps1 / 2) continue;
            // require closeness along the whole tested orbit
            bool close = true;
            PhasePoint a = pts[i], b = pts[j];
            for (int k = 0; k < 8 && close; ++k) {
                auto na = step(sys, a), nb = step(sys, b);
                if (!na || !nb) {
                    close = false;
                    break;
                }
                a = na->second;
                b = nb->second;
                close = distance(sys, a, b) <= eps1;
            }
            if (!close) continue;
            ++pairs;
            for (int n = 2; n <= 8; n += 2) {
                double ratio = unstable_jacobian(sys, pts[i], n, 10) /
                               unstable_jacobian(sys, pts[j], n, 10);
                CHECK(ratio >= 1.0 / C);
                CHECK(ratio <= C);
            }
        }
    }
    CHECK(pairs > 10);
}

TEST_CASE("inverse system swaps the dynamics") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    OpenMapSystem inv = inverse_system(sys);
    finalize_system(inv);
    PhasePoint p{0.2, 0.1, 0};
    PhasePoint fwd = iterate(sys, p, 1);
    PhasePoint back = iterate(inv, fwd, 1);
    CHECK(distance(sys, back, p) < 1e-12);
}

TEST_CASE("survivor CSV export") {
    OpenMapSystem sys = open_baker_system(3, {0, 2});
    auto pts = trapped_set_sample(sys, 2, 12, 12);
    const std::string path = "survivors_test.csv";
    write_survivors_csv(path, sys, pts, 2);
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string header;
    std::getline(in, header);
    CHECK(header == "x,xi,depth");
    size_t rows = 0;
    for (std::string line; std::getline(in, line);) ++rows;
    CHECK(rows == pts.size());
}
