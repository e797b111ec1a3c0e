#include "omap/fup.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace omap::fup {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
using namespace std::complex_literals;
}  // namespace

void IntervalUnion::add(double lo, double hi) {
    if (hi < lo) std::swap(lo, hi);
    parts.emplace_back(lo, hi);
}

void IntervalUnion::normalize() {
    if (parts.empty()) return;
    std::sort(parts.begin(), parts.end());
    std::vector<std::pair<double, double>> merged{parts.front()};
    for (std::size_t i = 1; i < parts.size(); ++i) {
        if (parts[i].first <= merged.back().second + 1e-15)
            merged.back().second = std::max(merged.back().second, parts[i].second);
        else
            merged.push_back(parts[i]);
    }
    parts.swap(merged);
}

IntervalUnion IntervalUnion::fattened(double c) const {
    IntervalUnion out;
    for (const auto& [lo, hi] : parts) out.add(lo - c, hi + c);
    out.normalize();
    return out;
}

bool IntervalUnion::contains(double t) const {
    for (const auto& [lo, hi] : parts)
        if (t >= lo && t <= hi) return true;
    return false;
}

double IntervalUnion::total_length() const {
    double s = 0.0;
    for (const auto& [lo, hi] : parts) s += hi - lo;
    return s;
}

std::vector<int> realize_on_torus(const IntervalUnion& u, int n) {
    std::vector<bool> hit(n, false);
    for (const auto& [lo, hi] : u.parts) {
        const long long k0 = static_cast<long long>(std::floor(lo * n));
        const long long k1 = static_cast<long long>(std::ceil(hi * n));
        for (long long k = k0; k <= k1; ++k) {
            const double cell_lo = static_cast<double>(k) / n;
            const double cell_hi = static_cast<double>(k + 1) / n;
            if (cell_hi < lo || cell_lo > hi) continue;
            hit[((k % n) + n) % n] = true;
        }
    }
    std::vector<int> idx;
    for (int k = 0; k < n; ++k)
        if (hit[k]) idx.push_back(k);
    return idx;
}

std::vector<int> cantor_indices(int base, const std::vector<int>& digits, int k) {
    std::vector<bool> keep(base, false);
    for (int d : digits) {
        if (d < 0 || d >= base) throw std::invalid_argument("cantor_indices: digit out of range");
        keep[d] = true;
    }
    long long n = 1;
    for (int i = 0; i < k; ++i) n *= base;
    std::vector<int> idx;
    for (long long j = 0; j < n; ++j) {
        long long t = j;
        bool ok = true;
        for (int i = 0; i < k && ok; ++i) {
            ok = keep[t % base];
            t /= base;
        }
        if (ok) idx.push_back(static_cast<int>(j));
    }
    return idx;
}

std::vector<int> fatten_indices(const std::vector<int>& idx, int n, int cells) {
    std::vector<bool> hit(n, false);
    for (int k : idx)
        for (int o = -cells; o <= cells; ++o) hit[((k + o) % n + n) % n] = true;
    std::vector<int> out;
    for (int k = 0; k < n; ++k)
        if (hit[k]) out.push_back(k);
    return out;
}

double fup_norm(const GridSpec& grid, const std::vector<int>& minus,
                const std::vector<int>& plus) {
    if (minus.empty() || plus.empty()) return 0.0;
    la::CMatrix block(minus.size(), plus.size());
    const double pref = 1.0 / std::sqrt(static_cast<double>(grid.n));
    if (grid.kind == GridSpec::Kind::torus) {
        for (std::size_t r = 0; r < minus.size(); ++r)
            for (std::size_t c = 0; c < plus.size(); ++c)
                block(r, c) = pref * std::exp(-1.0i * (kTwoPi * static_cast<double>(minus[r]) *
                                                       static_cast<double>(plus[c]) / grid.n));
    } else {
        for (std::size_t r = 0; r < minus.size(); ++r)
            for (std::size_t c = 0; c < plus.size(); ++c)
                block(r, c) =
                    pref * std::exp(-1.0i * (grid.x(plus[c]) * grid.xi(minus[r]) / grid.h));
    }
    if (block.rows() * block.cols() <= 1 << 20) {
        auto sv = la::singular_values(block);
        return sv.empty() ? 0.0 : sv.front();
    }
    return la::operator_norm(block);
}

double trivial_volume_bound(const GridSpec& grid, std::size_t n_minus, std::size_t n_plus) {
    return std::min(1.0, std::sqrt(static_cast<double>(n_minus) * static_cast<double>(n_plus) /
                                   static_cast<double>(grid.n)));
}

FupFit fit_fup_exponent(const FupExperiment& e) {
    if (e.h_values.size() < 4)
        throw std::invalid_argument("fit_fup_exponent: need at least 4 scales");
    if (e.h_values.size() != e.norms.size())
        throw std::invalid_argument("fit_fup_exponent: mismatched experiment columns");
    // scales come coarsest first; the first two are the transient regime
    std::vector<double> x, y;
    for (std::size_t i = 2; i < e.h_values.size(); ++i) {
        if (e.norms[i] <= 0.0) continue;
        x.push_back(std::log(e.h_values[i]));
        y.push_back(std::log(e.norms[i]));
    }
    if (x.size() < 2) throw std::invalid_argument("fit_fup_exponent: not enough usable scales");
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    FupFit fit;
    fit.beta = (n * sxy - sx * sy) / denom;
    fit.used_scales = static_cast<int>(x.size());
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double pred = fit.beta * x[i] + (sy - fit.beta * sx) / n;
        ss_res += (y[i] - pred) * (y[i] - pred);
    }
    if (x.size() > 2) {
        const double var = ss_res / (n - 2) / (sxx - sx * sx / n);
        fit.band = 2.0 * std::sqrt(std::max(0.0, var));
    }
    return fit;
}

ScaleGate scale_gate(double g0_plus, double g0_minus, double g1_plus, double g1_minus) {
    ScaleGate out;
    auto reject = [&out](const std::string& why) {
        out.accepted = false;
        out.rejection = why;
        return out;
    };
    if (!(0.0 <= g1_plus && g1_plus < g0_plus && g0_plus <= 1.0))
        return reject("need 0 <= gamma1+ < gamma0+ <= 1");
    if (!(0.0 <= g1_minus && g1_minus < g0_minus && g0_minus <= 1.0))
        return reject("need 0 <= gamma1- < gamma0- <= 1");
    if (!(g1_plus + g1_minus < 1.0))
        return reject("upper condition violated: gamma1+ + gamma1- >= 1");
    if (!(g0_plus + g0_minus > 1.0))
        return reject("lower condition violated: gamma0+ + gamma0- <= 1");
    out.accepted = true;
    out.gamma = std::min(g0_plus, 1.0 - g1_minus) - std::max(g1_plus, 1.0 - g0_minus);
    return out;
}

Rect word_rectangle(const OpenMapSystem& sys, const SymbolicWord& word, WordSign sign) {
    if (!sys.axis_rects)
        throw std::invalid_argument("word_rectangle: system pieces are not axis rectangles");
    const int n = static_cast<int>(word.size());
    auto map_rect = [&sys](const Rect& r, int piece, bool forward) {
        const MapPiece& pc = sys.pieces[piece];
        PhasePoint lo{r.x_min, r.xi_min, forward ? pc.from_block : pc.to_block};
        PhasePoint hi{r.x_max, r.xi_max, lo.block};
        PhasePoint a = forward ? pc.forward(lo) : pc.inverse(lo);
        PhasePoint b = forward ? pc.forward(hi) : pc.inverse(hi);
        return Rect{std::min(a.x, b.x), std::max(a.x, b.x), std::min(a.xi, b.xi),
                    std::max(a.xi, b.xi)};
    };
    auto intersect = [](const Rect& a, const Rect& b) {
        return Rect{std::max(a.x_min, b.x_min), std::min(a.x_max, b.x_max),
                    std::max(a.xi_min, b.xi_min), std::min(a.xi_max, b.xi_max)};
    };
    // V^- = cell(q_0) cap F^{-1}(cell(q_1) cap F^{-1}(...))
    Rect acc = sys.partition[word[n - 1]].rect;
    for (int k = n - 2; k >= 0; --k) {
        acc = map_rect(acc, sys.partition[word[k]].piece, /*forward=*/false);
        acc = intersect(acc, sys.partition[word[k]].rect);
        if (acc.width() <= 0 || acc.height() <= 0)
            throw EmptyNeighborhoodError("empty refined neighborhood");
    }
    if (sign == WordSign::minus) return acc;
    for (int k = 0; k < n; ++k) acc = map_rect(acc, sys.partition[word[k]].piece, /*forward=*/true);
    return acc;
}

OmegaSets build_omega_sets(const WordTable& table, const std::vector<SymbolicWord>& cloud,
                           double h, double frak_b, double tau, double delta0,
                           double closeness_C) {
    OmegaSets out;
    if (cloud.empty()) return out;
    const OpenMapSystem& sys = table.system();
    const int last = cloud.front().back();
    for (const SymbolicWord& w : cloud) {
        if (w.empty() || w.back() != last)
            throw std::invalid_argument("build_omega_sets: cloud words must share the last letter");
    }
    // unstable leaf through a trapped witness of the first word: for the
    // identity chart the leaf is the horizontal line through its image
    JacobianPair jp0 = table.local_word_jacobian(cloud.front());
    PhasePoint w0 = jp0.witness;
    const int n0 = static_cast<int>(cloud.front().size());
    const double leaf_xi = iterate(sys, w0, n0).xi;

    for (const SymbolicWord& w : cloud) {
        Rect vminus = word_rectangle(sys, w, WordSign::minus);
        Rect vplus = word_rectangle(sys, w, WordSign::plus);
        const double dist =
            std::max(std::abs(vplus.xi_min - leaf_xi), std::abs(vplus.xi_max - leaf_xi));
        out.max_leaf_distance = std::max(out.max_leaf_distance, dist);
        if (dist > closeness_C * std::pow(h, frak_b)) {
            std::string first, offender;
            for (int q : cloud.front()) first += std::to_string(q);
            for (int q : w) offender += std::to_string(q);
            throw std::runtime_error("build_omega_sets: cloud condition violated by words " +
                                     first + " and " + offender + " (leaf distance " +
                                     std::to_string(dist) + ")");
        }
        out.max_plus_width = std::max(out.max_plus_width, vplus.height());
        out.omega_minus.add(vminus.x_min, vminus.x_max);
        out.omega_plus.add(vplus.xi_min, vplus.xi_max);
    }
    out.omega_minus.normalize();
    out.omega_plus.normalize();
    out.omega_minus = out.omega_minus.fattened(std::pow(h, delta0));
    out.omega_plus = out.omega_plus.fattened(std::pow(h, tau));
    return out;
}

}  // namespace omap::fup
