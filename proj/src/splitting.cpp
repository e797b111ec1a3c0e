#include "omap/splitting.hpp"

#include <algorithm>
#include <cmath>

namespace omap::splitting {

namespace {

// clamped cell lookup for bilinear interpolation
bool locate(const GridChart& c, double x, double y, int* i0, int* j0, double* fx, double* fy) {
    const double u = (x - c.box.x_min) / c.dx();
    const double v = (y - c.box.xi_min) / c.dy();
    if (u < -0.5 || v < -0.5 || u > c.nx - 0.5 || v > c.ny - 0.5) return false;
    double iu = std::clamp(u, 0.0, static_cast<double>(c.nx - 1) - 1e-12);
    double jv = std::clamp(v, 0.0, static_cast<double>(c.ny - 1) - 1e-12);
    *i0 = static_cast<int>(iu);
    *j0 = static_cast<int>(jv);
    *fx = iu - *i0;
    *fy = jv - *j0;
    return true;
}

}  // namespace

double ScalarField::interp(double x, double y) const {
    int i, j;
    double fx, fy;
    if (!locate(chart, x, y, &i, &j, &fx, &fy)) return 0.0;
    const double v00 = at(i, j), v10 = at(i + 1, j), v01 = at(i, j + 1), v11 = at(i + 1, j + 1);
    return (1 - fx) * (1 - fy) * v00 + fx * (1 - fy) * v10 + (1 - fx) * fy * v01 + fx * fy * v11;
}

double ScalarField::sup_norm() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

Vec2 VectorField::interp(double x, double y) const {
    int i, j;
    double fx, fy;
    if (!locate(chart, x, y, &i, &j, &fx, &fy)) return Vec2::Zero();
    return (1 - fx) * (1 - fy) * at(i, j) + fx * (1 - fy) * at(i + 1, j) +
           (1 - fx) * fy * at(i, j + 1) + fx * fy * at(i + 1, j + 1);
}

double VectorField::sup_norm() const {
    double m = 0.0;
    for (const Vec2& x : v) m = std::max(m, x.norm());
    return m;
}

VectorField gradient(const ScalarField& f) {
    const GridChart& c = f.chart;
    VectorField g(c);
    for (int j = 0; j < c.ny; ++j) {
        for (int i = 0; i < c.nx; ++i) {
            const int il = std::max(0, i - 1), ir = std::min(c.nx - 1, i + 1);
            const int jl = std::max(0, j - 1), jr = std::min(c.ny - 1, j + 1);
            g.at(i, j)[0] = (f.at(ir, j) - f.at(il, j)) / ((ir - il) * c.dx());
            g.at(i, j)[1] = (f.at(i, jr) - f.at(i, jl)) / ((jr - jl) * c.dy());
        }
    }
    return g;
}

double bump_profile(double t, double r0, double r1) {
    if (t <= r0) return 1.0;
    if (t >= r1) return 0.0;
    const double u = (t - r0) / (r1 - r0);
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

namespace {

// two-pass chamfer transform in the sup metric; returns per-node nearest
// seed index (or -1) and the distance
void chamfer(const GridChart& c, const std::vector<int>& seeds_at_node, std::vector<int>* owner,
             std::vector<double>* dist) {
    const double dx = c.dx(), dy = c.dy(), dd = std::max(dx, dy);
    owner->assign(c.size(), -1);
    dist->assign(c.size(), std::numeric_limits<double>::infinity());
    for (int n = 0; n < c.size(); ++n)
        if (seeds_at_node[n] >= 0) {
            (*owner)[n] = seeds_at_node[n];
            (*dist)[n] = 0.0;
        }
    auto relax = [&](int n, int m, double w) {
        if ((*dist)[m] + w < (*dist)[n]) {
            (*dist)[n] = (*dist)[m] + w;
            (*owner)[n] = (*owner)[m];
        }
    };
    for (int j = 0; j < c.ny; ++j)
        for (int i = 0; i < c.nx; ++i) {
            const int n = c.index(i, j);
            if (i > 0) relax(n, c.index(i - 1, j), dx);
            if (j > 0) relax(n, c.index(i, j - 1), dy);
            if (i > 0 && j > 0) relax(n, c.index(i - 1, j - 1), dd);
            if (i + 1 < c.nx && j > 0) relax(n, c.index(i + 1, j - 1), dd);
        }
    for (int j = c.ny - 1; j >= 0; --j)
        for (int i = c.nx - 1; i >= 0; --i) {
            const int n = c.index(i, j);
            if (i + 1 < c.nx) relax(n, c.index(i + 1, j), dx);
            if (j + 1 < c.ny) relax(n, c.index(i, j + 1), dy);
            if (i + 1 < c.nx && j + 1 < c.ny) relax(n, c.index(i + 1, j + 1), dd);
            if (i > 0 && j + 1 < c.ny) relax(n, c.index(i - 1, j + 1), dd);
        }
}

std::vector<int> rasterize_samples(const GridChart& c, const std::vector<PhasePoint>& pts) {
    std::vector<int> seeds(c.size(), -1);
    for (std::size_t s = 0; s < pts.size(); ++s) {
        if (pts[s].block != c.block) continue;
        const int i = static_cast<int>(std::lround((pts[s].x - c.box.x_min) / c.dx()));
        const int j = static_cast<int>(std::lround((pts[s].xi - c.box.xi_min) / c.dy()));
        if (i < 0 || i >= c.nx || j < 0 || j >= c.ny) continue;
        seeds[c.index(i, j)] = static_cast<int>(s);
    }
    return seeds;
}

void smooth_directions(VectorField& f, int passes) {
    const GridChart& c = f.chart;
    for (int p = 0; p < passes; ++p) {
        VectorField next = f;
        for (int j = 0; j < c.ny; ++j)
            for (int i = 0; i < c.nx; ++i) {
                Vec2 ref = f.at(i, j);
                Vec2 acc = Vec2::Zero();
                for (int oj = -1; oj <= 1; ++oj)
                    for (int oi = -1; oi <= 1; ++oi) {
                        const int ii = std::clamp(i + oi, 0, c.nx - 1);
                        const int jj = std::clamp(j + oj, 0, c.ny - 1);
                        Vec2 w = f.at(ii, jj);
                        if (w.dot(ref) < 0) w = -w;
                        acc += w;
                    }
                if (acc.norm() > 1e-12) next.at(i, j) = acc.normalized();
            }
        f = next;
    }
}

// coefficients of dF at p in the interpolated frames; false if p is in the
// hole or the frames degenerate
bool coefficients_at(const OpenMapSystem& sys, const FrameField& fr, const PhasePoint& p,
                     double* a, double* b, double* c, double* d) {
    auto img = step(sys, p);
    if (!img) return false;
    const Mat2 df = sys.pieces[img->first].differential(p);
    Vec2 vu = fr.v_u.interp(p.x, p.xi);
    Vec2 vs = fr.v_s.interp(p.x, p.xi);
    Vec2 wu = fr.v_u.interp(img->second.x, img->second.xi);
    Vec2 ws = fr.v_s.interp(img->second.x, img->second.xi);
    if (vu.norm() < 1e-9 || vs.norm() < 1e-9 || wu.norm() < 1e-9 || ws.norm() < 1e-9) return false;
    vu.normalize();
    vs.normalize();
    wu.normalize();
    ws.normalize();
    Mat2 m;
    m.col(0) = wu;
    m.col(1) = ws;
    if (std::abs(m.determinant()) < 1e-6) return false;
    const Mat2 minv = m.inverse();
    Vec2 ac = minv * (df * vu);
    Vec2 bd = minv * (df * vs);
    *a = ac[0];
    *c = ac[1];
    *b = bd[0];
    *d = bd[1];
    return true;
}

void fill_coefficients_and_stats(FrameField& fr, const OpenMapSystem& sys,
                                 const std::vector<PhasePoint>& trapped, double stat_radius) {
    const GridChart& c = fr.chart;
    fr.a = ScalarField(c);
    fr.b = ScalarField(c);
    fr.c = ScalarField(c);
    fr.d = ScalarField(c);
    fr.coeff_valid.assign(c.size(), false);

    std::vector<int> owner;
    std::vector<double> dist;
    chamfer(c, rasterize_samples(c, trapped), &owner, &dist);

    double sup_bc = 0.0, sup_d = 0.0, inf_a = std::numeric_limits<double>::infinity();
    double kappa = 0.0, nu = 0.0;
    bool any_stat = false;
    for (int j = 0; j < c.ny; ++j) {
        for (int i = 0; i < c.nx; ++i) {
            const int n = c.index(i, j);
            double a, b, cc, d;
            if (!coefficients_at(sys, fr, c.point(i, j), &a, &b, &cc, &d)) continue;
            fr.a.v[n] = a;
            fr.b.v[n] = b;
            fr.c.v[n] = cc;
            fr.d.v[n] = d;
            fr.coeff_valid[n] = true;
            if (dist[n] > stat_radius) continue;
            any_stat = true;
            sup_bc = std::max({sup_bc, std::abs(b), std::abs(cc)});
            sup_d = std::max(sup_d, std::abs(d));
            inf_a = std::min(inf_a, std::abs(a));
            nu = std::max({nu, 1.0 / std::abs(a), std::abs(d)});
            for (int li = -20; li <= 20; ++li) {
                const double l = li / 20.0;
                const double den = a + l * b;
                if (std::abs(den) < 1e-9) {
                    kappa = std::max(kappa, 1e9);
                    continue;
                }
                kappa = std::max(kappa,
                                 std::abs(d / den) + std::abs(b * (l * d + cc) / (den * den)));
            }
        }
    }
    fr.eta = sup_bc / 2.0;
    fr.kappa_direct = any_stat ? kappa : 1.0;
    fr.nu = any_stat ? nu : 1.0;
    fr.eta_ok = any_stat && sup_d < 1.0 && inf_a > 1.0 &&
                fr.eta <= std::min((1.0 - sup_d) / 3.0, (inf_a - 1.0) / 3.0) + 1e-12;
    const double e = std::max(fr.eta, 0.0);
    fr.kappa_eta = fr.eta_ok
                       ? (1.0 - 3.0 * e) / (1.0 + e) +
                             2.0 * e * (1.0 - e) / ((1.0 + e) * (1.0 + e))
                       : 1.0;
}

}  // namespace

FrameField make_frames(const OpenMapSystem& sys, const GridChart& chart,
                       const std::vector<PhasePoint>& trapped, int power_depth, int smooth_passes,
                       double stat_radius) {
    if (trapped.empty()) throw std::invalid_argument("make_frames: no trapped samples");
    FrameField fr;
    fr.chart = chart;
    fr.v_u = VectorField(chart);
    fr.v_s = VectorField(chart);

    std::vector<Vec2> su(trapped.size()), ss(trapped.size());
    for (std::size_t k = 0; k < trapped.size(); ++k) {
        su[k] = unstable_direction(sys, trapped[k], power_depth);
        ss[k] = stable_direction(sys, trapped[k], power_depth);
        if (k > 0 && su[k].dot(su[0]) < 0) su[k] = -su[k];
        if (k > 0 && ss[k].dot(ss[0]) < 0) ss[k] = -ss[k];
    }
    std::vector<int> owner;
    std::vector<double> dist;
    chamfer(chart, rasterize_samples(chart, trapped), &owner, &dist);
    for (int n = 0; n < chart.size(); ++n) {
        const int o = owner[n] >= 0 ? owner[n] : 0;
        fr.v_u.v[n] = su[o];
        fr.v_s.v[n] = ss[o];
    }
    smooth_directions(fr.v_u, smooth_passes);
    smooth_directions(fr.v_s, smooth_passes);
    fill_coefficients_and_stats(fr, sys, trapped, stat_radius);
    return fr;
}

FrameField constant_frames(const OpenMapSystem& sys, const GridChart& chart, const Vec2& vu,
                           const Vec2& vs, double stat_radius) {
    FrameField fr;
    fr.chart = chart;
    fr.v_u = VectorField(chart);
    fr.v_s = VectorField(chart);
    for (int n = 0; n < chart.size(); ++n) {
        fr.v_u.v[n] = vu.normalized();
        fr.v_s.v[n] = vs.normalized();
    }
    std::vector<PhasePoint> origin{PhasePoint{0.5 * (chart.box.x_min + chart.box.x_max),
                                              0.5 * (chart.box.xi_min + chart.box.xi_max),
                                              chart.block}};
    fill_coefficients_and_stats(fr, sys, origin, stat_radius);
    return fr;
}

ScalarField make_cutoff(const OpenMapSystem& sys, const GridChart& chart,
                        const std::vector<PhasePoint>& trapped, double eps0) {
    ScalarField chi(chart);
    std::vector<int> owner;
    std::vector<double> dist;
    chamfer(chart, rasterize_samples(chart, trapped), &owner, &dist);

    // taper to zero where the map or its inverse is undefined
    std::vector<int> invalid(chart.size(), -1);
    for (int j = 0; j < chart.ny; ++j)
        for (int i = 0; i < chart.nx; ++i) {
            const PhasePoint p = chart.point(i, j);
            bool ok = true;
            try {
                ok = step(sys, p).has_value() && step_back(sys, p).has_value();
            } catch (const std::runtime_error&) {
                ok = false;
            }
            if (!ok) invalid[chart.index(i, j)] = 0;
        }
    std::vector<int> eowner;
    std::vector<double> edist;
    chamfer(chart, invalid, &eowner, &edist);
    const double edge1 = 4.0 * std::max(chart.dx(), chart.dy());
    for (int n = 0; n < chart.size(); ++n) {
        const double taper =
            edist[n] >= edge1 ? 1.0 : bump_profile(edge1 - edist[n], 0.0, edge1);
        chi.v[n] = bump_profile(dist[n], eps0, 2.0 * eps0) * taper;
    }
    return chi;
}

ScalarField graph_transform_step(const ScalarField& lam, const SlopeField& shape,
                                 const FrameField& frames, const OpenMapSystem& sys,
                                 bool enforce_eta, int* masked_nodes) {
    if (enforce_eta && !frames.eta_ok)
        throw std::runtime_error("graph_transform_step: eta-bunching violated by the frame field");
    const GridChart& c = lam.chart;
    ScalarField out(c);
    int masked = 0;
    for (int j = 0; j < c.ny; ++j) {
        for (int i = 0; i < c.nx; ++i) {
            const double chi = shape.cutoff.at(i, j);
            if (chi == 0.0) continue;
            const PhasePoint pp = c.point(i, j);
            auto pre = step_back(sys, pp);
            if (!pre) {
                ++masked;
                continue;
            }
            const PhasePoint p = pre->second;
            double a, b, cc, d;
            if (!coefficients_at(sys, frames, p, &a, &b, &cc, &d)) {
                ++masked;
                continue;
            }
            const double l = lam.interp(p.x, p.xi);
            out.at(i, j) = chi * (l * d + cc) / (a + l * b);
        }
    }
    if (masked_nodes) *masked_nodes = masked;
    return out;
}

SlopeSolve solve_unstable_slope(const FrameField& frames, const OpenMapSystem& sys,
                                const ScalarField& cutoff, double tol, int max_iter,
                                bool enforce_eta) {
    SlopeSolve out;
    out.field.cutoff = cutoff;
    out.field.lambda = ScalarField(frames.chart);
    out.report.kappa_theory = frames.kappa_direct;
    double prev_diff = -1.0;
    int non_contracting = 0;
    for (int it = 1; it <= max_iter; ++it) {
        int masked = 0;
        ScalarField next =
            graph_transform_step(out.field.lambda, out.field, frames, sys, enforce_eta, &masked);
        out.report.masked_nodes = masked;
        double diff = 0.0;
        for (int n = 0; n < frames.chart.size(); ++n)
            diff = std::max(diff, std::abs(next.v[n] - out.field.lambda.v[n]));
        out.field.lambda = std::move(next);
        out.report.iterations = it;
        out.report.final_residual = diff;
        if (prev_diff > 0.0 && diff > 0.0) {
            const double f = diff / prev_diff;
            out.report.factors.push_back(f);
            non_contracting = f >= 1.0 ? non_contracting + 1 : 0;
            if (non_contracting >= 3)
                throw std::runtime_error(
                    "solve_unstable_slope: no contraction for 3 iterations, last factor " +
                    std::to_string(f) + " at iteration " + std::to_string(it));
        }
        if (diff <= tol) break;
        prev_diff = diff;
    }
    return out;
}

VectorField fiber_derivative_step(const VectorField& alpha, const ScalarField& lam,
                                  const SlopeField& shape, const FrameField& frames,
                                  const OpenMapSystem& sys) {
    const GridChart& c = alpha.chart;
    VectorField out(c);
    const VectorField gchi = gradient(shape.cutoff);
    // the t-coefficients are differentiated by local differencing of the same
    // evaluations the transform itself uses, which respects piece boundaries
    const double h = 0.5 * std::min(c.dx(), c.dy());
    auto coeffs = [&](const PhasePoint& q, double* v) {
        return coefficients_at(sys, frames, q, v, v + 1, v + 2, v + 3);
    };
    for (int j = 0; j < c.ny; ++j) {
        for (int i = 0; i < c.nx; ++i) {
            const double chi = shape.cutoff.at(i, j);
            if (chi == 0.0) continue;
            const PhasePoint pp = c.point(i, j);
            auto pre = step_back(sys, pp);
            if (!pre) continue;
            const PhasePoint p = pre->second;
            double v0[4];
            if (!coeffs(p, v0)) continue;
            Vec2 grad_c[4];  // gradients of a, b, c, d at p
            bool ok = true;
            for (int axis = 0; axis < 2 && ok; ++axis) {
                PhasePoint qp = p, qm = p;
                (axis == 0 ? qp.x : qp.xi) += h;
                (axis == 0 ? qm.x : qm.xi) -= h;
                double vp[4], vm[4];
                const bool has_p = coeffs(qp, vp);
                const bool has_m = coeffs(qm, vm);
                if (has_p && has_m) {
                    for (int k = 0; k < 4; ++k) grad_c[k][axis] = (vp[k] - vm[k]) / (2 * h);
                } else if (has_p) {
                    for (int k = 0; k < 4; ++k) grad_c[k][axis] = (vp[k] - v0[k]) / h;
                } else if (has_m) {
                    for (int k = 0; k < 4; ++k) grad_c[k][axis] = (v0[k] - vm[k]) / h;
                } else {
                    ok = false;
                }
            }
            if (!ok) continue;
            const double a = v0[0], b = v0[1], cc = v0[2], d = v0[3];
            const double l = lam.interp(p.x, p.xi);
            const double den = a + l * b;
            const double t = (l * d + cc) / den;
            const double dt_dl = d / den - b * (l * d + cc) / (den * den);
            const Vec2 grad_t = (l * grad_c[3] + grad_c[2]) / den -
                                (l * d + cc) / (den * den) * (grad_c[0] + l * grad_c[1]);
            const Vec2 w = grad_t + dt_dl * alpha.interp(p.x, p.xi);
            const Mat2 df = differential_at(sys, p);
            out.at(i, j) = chi * (df.inverse().transpose() * w) + t * gchi.at(i, j);
        }
    }
    return out;
}

CovectorSolve solve_derivative_field(const FrameField& frames, const OpenMapSystem& sys,
                                     const SlopeField& slope, double tol, int max_iter) {
    CovectorSolve out;
    out.alpha = VectorField(frames.chart);
    out.report.kappa_theory = frames.nu;
    double prev_diff = -1.0;
    int non_contracting = 0;
    for (int it = 1; it <= max_iter; ++it) {
        VectorField next = fiber_derivative_step(out.alpha, slope.lambda, slope, frames, sys);
        double diff = 0.0;
        for (int n = 0; n < frames.chart.size(); ++n)
            diff = std::max(diff, (next.v[n] - out.alpha.v[n]).norm());
        out.alpha = std::move(next);
        out.report.iterations = it;
        out.report.final_residual = diff;
        if (prev_diff > 0.0 && diff > 0.0) {
            const double f = diff / prev_diff;
            out.report.factors.push_back(f);
            non_contracting = f >= 1.0 ? non_contracting + 1 : 0;
            if (non_contracting >= 3)
                throw std::runtime_error("solve_derivative_field: no contraction for 3 iterations");
        }
        if (diff <= tol) break;
        prev_diff = diff;
    }
    return out;
}

double invariance_angle_error(const SlopeField& slope, const FrameField& frames,
                              const OpenMapSystem& sys) {
    const GridChart& c = frames.chart;
    double worst = 0.0;
    for (int j = 0; j < c.ny; ++j) {
        for (int i = 0; i < c.nx; ++i) {
            if (slope.cutoff.at(i, j) < 1.0 - 1e-9) continue;
            const PhasePoint p = c.point(i, j);
            auto img = step(sys, p);
            if (!img) continue;
            const PhasePoint q = img->second;
            if (slope.cutoff.interp(q.x, q.xi) < 1.0 - 1e-9) continue;
            const Vec2 w = frames.v_u.interp(p.x, p.xi).normalized() +
                           slope.lambda.at(i, j) * frames.v_s.interp(p.x, p.xi).normalized();
            const Vec2 pushed = differential_at(sys, p) * w;
            const Vec2 wq = frames.v_u.interp(q.x, q.xi).normalized() +
                            slope.lambda.interp(q.x, q.xi) * frames.v_s.interp(q.x, q.xi).normalized();
            const double cross = std::abs(pushed[0] * wq[1] - pushed[1] * wq[0]);
            worst = std::max(worst, std::asin(std::min(1.0, cross / (pushed.norm() * wq.norm()))));
        }
    }
    return worst;
}

double fiber_identity_defect(const ScalarField& lam, const SlopeField& shape,
                             const FrameField& frames, const OpenMapSystem& sys) {
    const GridChart& c = lam.chart;
    const VectorField dl = gradient(lam);
    ScalarField tl = graph_transform_step(lam, shape, frames, sys, false);
    const VectorField dtl = gradient(tl);
    const VectorField g = fiber_derivative_step(dl, lam, shape, frames, sys);
    double worst = 0.0;
    for (int j = 1; j + 1 < c.ny; ++j) {
        for (int i = 1; i + 1 < c.nx; ++i) {
            bool flat = true;
            for (int oj = -1; oj <= 1 && flat; ++oj)
                for (int oi = -1; oi <= 1 && flat; ++oi)
                    flat = shape.cutoff.at(i + oi, j + oj) >= 1.0 - 1e-12;
            if (!flat) continue;
            worst = std::max(worst, (g.at(i, j) - dtl.at(i, j)).norm());
        }
    }
    return worst;
}

double canonical_slope_at(const SlopeField& slope, const FrameField& frames, const PhasePoint& p) {
    const GridChart& c = frames.chart;
    const int i = static_cast<int>(std::lround((p.x - c.box.x_min) / c.dx()));
    const int j = static_cast<int>(std::lround((p.xi - c.box.xi_min) / c.dy()));
    const Vec2 w =
        frames.v_u.at(i, j).normalized() + slope.lambda.at(i, j) * frames.v_s.at(i, j).normalized();
    return w[1] / w[0];
}

}  // namespace omap::splitting
