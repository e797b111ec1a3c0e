#include "omap/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace omap::thermo {

namespace {

// stable log-sum-exp of -s * log_j over a word class
double log_c_n(const std::vector<double>& log_j, double s) {
    if (log_j.empty()) return -std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    for (double lj : log_j) mx = std::max(mx, -s * lj);
    double acc = 0.0;
    for (double lj : log_j) acc += std::exp(-s * lj - mx);
    return mx + std::log(acc);
}

std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double denom = n * sxx - sx * sx;
    const double slope = (n * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / n;
    return {slope, intercept};
}

}  // namespace

PressureCalculator::PressureCalculator(const WordTable& table, int n_max, std::size_t budget)
    : n_max_(n_max) {
    if (n_max < 1 || n_max > table.max_len())
        throw std::invalid_argument("PressureCalculator: n_max out of table range");
    log_j_.resize(n_max);
    counts_.assign(n_max, 0);
    for (int n = 1; n <= n_max; ++n) {
        for (const SymbolicWord& w : table.admissible_words(n, budget)) {
            try {
                const JacobianPair jp = table.local_word_jacobian(w);
                log_j_[n - 1].push_back(std::log(jp.j_minus));
            } catch (const EmptyNeighborhoodError&) {
                continue;  // negligible word
            }
        }
        counts_[n - 1] = log_j_[n - 1].size();
    }
}

PressureEntry PressureCalculator::at(double s) const {
    PressureEntry e;
    e.s = s;
    for (int n = 1; n <= n_max_; ++n)
        e.estimates.emplace_back(n, log_c_n(log_j_[n - 1], s) / n);
    // limit estimate from the two largest n: exact for x_n = P + b/n
    const auto [n1, x1] = e.estimates[e.estimates.size() - 2];
    const auto [n2, x2] = e.estimates[e.estimates.size() - 1];
    e.extrapolated = e.estimates.size() >= 2 ? (n2 * x2 - n1 * x1) / (n2 - n1) : x2;
    e.aitken = e.extrapolated;
    if (e.estimates.size() >= 3) {
        const double a = e.estimates[e.estimates.size() - 3].second;
        const double b = x1, c = x2;
        const double den = c - 2 * b + a;
        if (std::abs(den) > 1e-300) e.aitken = c - (c - b) * (c - b) / den;
    }
    return e;
}

PressureEntry pressure(const WordTable& table, double s, int n_max, std::size_t budget) {
    return PressureCalculator(table, n_max, budget).at(s);
}

BowenResult bowen_root(const PressureCalculator& pc, double tol) {
    BowenResult out;
    const double p1 = pc.at(1.0).extrapolated;
    if (p1 >= 0.0)
        throw std::runtime_error("bowen_root: no gap regime, P(1) = " + std::to_string(p1) +
                                 " is not negative");
    const double p0 = pc.at(0.0).extrapolated;
    out.report.method = "pressure_root";
    out.report.epsilon0 = 0.0;
    if (p0 <= tol) {
        out.s0 = 0.0;
        out.boundary_case = true;
        out.report.delta = 0.0;
        return out;
    }
    double a = 0.0, b = 1.0;
    while (b - a > tol) {
        const double mid = 0.5 * (a + b);
        (pc.at(mid).extrapolated > 0.0 ? a : b) = mid;
    }
    out.s0 = 0.5 * (a + b);
    out.report.delta = out.s0;
    return out;
}

double classical_decay_rate(const PressureCalculator& pc) { return -pc.at(1.0).extrapolated; }

double survivor_decay_rate(const OpenMapSystem& sys, int m_max, int n_points, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<PhasePoint> pts;
    pts.reserve(n_points);
    for (int b = 0; b < static_cast<int>(sys.blocks.size()); ++b) {
        const Rect& r = sys.blocks[b];
        const int per_block = n_points / static_cast<int>(sys.blocks.size());
        for (int i = 0; i < per_block; ++i)
            pts.push_back(
                PhasePoint{r.x_min + uni(rng) * r.width(), r.xi_min + uni(rng) * r.height(), b});
    }
    std::vector<double> ms, logf;
    std::vector<PhasePoint> alive = pts;
    for (int m = 1; m <= m_max; ++m) {
        std::vector<PhasePoint> next;
        next.reserve(alive.size());
        for (const PhasePoint& p : alive) {
            auto img = step(sys, p);
            if (img) next.push_back(img->second);
        }
        alive.swap(next);
        if (alive.empty()) break;
        ms.push_back(m);
        logf.push_back(std::log(static_cast<double>(alive.size()) / pts.size()));
    }
    if (ms.size() < 2) throw std::runtime_error("survivor_decay_rate: everything escaped at once");
    return -fit_line(ms, logf).first;
}

std::vector<std::pair<double, std::size_t>> box_counts(const std::vector<double>& points,
                                                       double eps_min, double eps_max,
                                                       double base) {
    if (points.empty()) throw std::invalid_argument("box_counts: empty point set");
    if (!(eps_min < eps_max)) throw std::invalid_argument("box_counts: need eps_min < eps_max");
    std::vector<std::pair<double, std::size_t>> out;
    std::vector<long long> bins;
    for (double eps = eps_max; eps >= eps_min * (1.0 - 1e-12); eps /= base) {
        bins.clear();
        bins.reserve(points.size());
        for (double x : points) bins.push_back(static_cast<long long>(std::floor(x / eps)));
        std::sort(bins.begin(), bins.end());
        bins.erase(std::unique(bins.begin(), bins.end()), bins.end());
        out.emplace_back(eps, bins.size());
    }
    return out;
}

DimensionReport box_dimension(const std::vector<double>& points, double eps_min, double eps_max,
                              double base) {
    auto counts = box_counts(points, eps_min, eps_max, base);
    if (counts.size() < 4)
        throw std::runtime_error("box_dimension: fewer than 4 usable scales between eps_min and eps_max");
    std::vector<double> x, y;
    for (const auto& [eps, n] : counts) {
        x.push_back(-std::log(eps));
        y.push_back(std::log(static_cast<double>(n)));
    }
    const auto [slope, intercept] = fit_line(x, y);
    DimensionReport rep;
    rep.method = "box_count";
    rep.delta = slope;
    rep.epsilon0 = eps_max;
    // smallest C with N(eps) <= C eps^{-delta} over the sampled range
    double c = std::exp(intercept);
    for (const auto& [eps, n] : counts)
        c = std::max(c, static_cast<double>(n) * std::pow(eps, slope));
    rep.constant_C = c;
    return rep;
}

PorosityResult check_porosity(const std::function<bool(double)>& member, double lo, double hi,
                              double nu, double alpha0, double alpha1, double resolution) {
    if (!(alpha0 < alpha1)) throw std::invalid_argument("check_porosity: need alpha0 < alpha1");
    if (!(nu > 0.0 && nu < 1.0)) throw std::invalid_argument("check_porosity: nu must be in (0,1)");
    if (resolution > nu * alpha0 / 10.0)
        throw std::invalid_argument("check_porosity: resolution must be <= nu*alpha0/10");

    // occupied sample positions, sorted
    std::vector<double> occ;
    const long long n_samp = static_cast<long long>(std::ceil((hi - lo) / resolution));
    for (long long i = 0; i < n_samp; ++i) {
        const double t = lo + (i + 0.5) * resolution;
        if (member(t)) occ.push_back(t);
    }

    PorosityResult res;
    res.certificate.nu = nu;
    res.certificate.alpha0 = alpha0;
    res.certificate.alpha1 = alpha1;
    res.certificate.checked_resolution = resolution;

    // largest set-free gap inside [u, v], measured on the occupancy sample
    auto max_gap = [&](double u, double v, double* gap_lo) {
        auto it = std::lower_bound(occ.begin(), occ.end(), u);
        double prev = u, best = 0.0, best_lo = u;
        while (it != occ.end() && *it <= v) {
            if (*it - prev > best) {
                best = *it - prev;
                best_lo = prev;
            }
            prev = *it;
            ++it;
        }
        if (v - prev > best) {
            best = v - prev;
            best_lo = prev;
        }
        if (gap_lo) *gap_lo = best_lo;
        return best;
    };

    bool witness_this_scale = false;
    for (double len = alpha1; len >= alpha0 * (1.0 - 1e-12); len /= std::sqrt(2.0)) {
        witness_this_scale = false;
        const double step = nu * len / 4.0;
        for (double u = lo; u + len <= hi + 1e-15; u += step) {
            double gap_lo = 0.0;
            const double g = max_gap(u, u + len, &gap_lo);
            if (g + 1e-15 < nu * len) {
                res.certified = false;
                res.fail_lo = u;
                res.fail_hi = u + len;
                return res;
            }
            if (!witness_this_scale && res.certificate.witness_gaps.size() < 64) {
                res.certificate.witness_gaps.push_back(
                    GapWitness{u, u + len, gap_lo, gap_lo + nu * len});
                witness_this_scale = true;
            }
        }
    }
    res.certified = true;
    return res;
}

double porosity_from_dimension(double C, double delta, double eps0) {
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("porosity_from_dimension: delta must be in (0,1)");
    if (!(C > 0.0 && eps0 > 0.0))
        throw std::invalid_argument("porosity_from_dimension: C and eps0 must be positive");
    const double t = std::max(1.0 / (6.0 * eps0),
                              std::pow(std::pow(6.0, delta) * C, 1.0 / (1.0 - delta)));
    const double T = std::floor(t) + 1.0;
    return 1.0 / (3.0 * T);
}

DimensionFromPorosity dimension_from_porosity(double nu, double alpha1, double M) {
    if (!(nu > 0.0 && nu <= 1.0))
        throw std::invalid_argument("dimension_from_porosity: nu must be in (0,1]");
    if (!(alpha1 > 0.0 && M > 0.0))
        throw std::invalid_argument("dimension_from_porosity: alpha1 and M must be positive");
    DimensionFromPorosity out;
    out.L = static_cast<int>(std::ceil(2.0 / nu));
    out.k0 = static_cast<int>(std::ceil(-std::log(alpha1) / std::log(static_cast<double>(out.L))));
    out.delta = std::log(static_cast<double>(out.L - 1)) / std::log(static_cast<double>(out.L));
    const double ratio = static_cast<double>(out.L) / (out.L - 1);
    out.C = 4.0 * M * std::pow(ratio, out.k0) *
            std::pow(static_cast<double>(out.L - 1),
                     1.0 - std::log(2.0) / std::log(static_cast<double>(out.L)));
    return out;
}

int NumerologyProfile::n0(double h) const {
    return static_cast<int>(std::ceil((delta0 / lambda1) * std::abs(std::log(h))));
}

int NumerologyProfile::n1(double h) const {
    return static_cast<int>(std::ceil(std::abs(std::log(h)) / lambda0));
}

NumerologyProfile numerology(double lambda0, double lambda1, double beta) {
    if (!(lambda0 > 0.0 && lambda0 <= lambda1))
        throw std::invalid_argument("numerology: need 0 < lambda0 <= lambda1");
    if (!(beta > 0.0)) throw std::invalid_argument("numerology: beta must be positive");
    NumerologyProfile p;
    p.beta = beta;
    p.lambda0 = lambda0;
    p.lambda1 = lambda1;
    p.frak_b = 1.0 / (1.0 + beta);
    p.delta0 = 0.5 * (1.0 - p.frak_b);
    p.tau = 1.0 - (lambda0 / lambda1) * (1.0 - p.frak_b) / 4.0;
    p.delta2 = p.delta0 * lambda0 / lambda1;
    if (!p.all_checks())
        throw std::runtime_error("numerology: exponent constraints violated");
    return p;
}

std::vector<double> unstable_transversal_survivors(const OpenMapSystem& sys,
                                                   const PhasePoint& base, double t_span,
                                                   int n_survive, int grid_n) {
    const Vec2 vu = unstable_direction(sys, base, 16);
    std::vector<double> out;
    for (int i = 0; i < grid_n; ++i) {
        const double t = -t_span + (i + 0.5) * (2.0 * t_span / grid_n);
        PhasePoint p{base.x + t * vu[0], base.xi + t * vu[1], base.block};
        bool alive = true;
        for (int k = 0; k < n_survive && alive; ++k) {
            auto next = step(sys, p);
            if (!next)
                alive = false;
            else
                p = next->second;
        }
        if (alive) out.push_back(t);
    }
    return out;
}

}  // namespace omap::thermo
