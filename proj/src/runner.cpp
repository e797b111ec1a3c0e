#include "omap/runner.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <json.hpp>

#include "omap/billiard.hpp"
#include "omap/fup.hpp"
#include "omap/quantize.hpp"
#include "omap/splitting.hpp"
#include "omap/systems.hpp"
#include "omap/thermo.hpp"

namespace omap::cli {

namespace {

using json = nlohmann::json;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        if (!out_) throw std::runtime_error("cannot open " + path);
        for (std::size_t i = 0; i < header.size(); ++i)
            out_ << header[i] << (i + 1 < header.size() ? "," : "\n");
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i)
            out_ << cells[i] << (i + 1 < cells.size() ? "," : "\n");
    }

  private:
    std::ofstream out_;
};

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double lap() {
        auto t1 = std::chrono::steady_clock::now();
        double s = std::chrono::duration<double>(t1 - t0).count();
        t0 = t1;
        return s;
    }
};

struct BuiltSystem {
    OpenMapSystem sys;
    std::vector<Vec2> centers;  // disks only
    std::vector<double> radii;
    std::string kind;
};

BuiltSystem build_system(const Config& cfg) {
    BuiltSystem out;
    out.kind = cfg.get("system", "kind");
    if (out.kind == "linear") {
        out.sys = linear_model_system(cfg.get_double("system", "half_width_x", 1.0),
                                      cfg.get_double("system", "half_width_xi", 0.5));
    } else if (out.kind == "baker") {
        auto kept = cfg.get_int_list("system", "kept");
        out.sys = open_baker_system(cfg.get_int("system", "base", 3), kept);
    } else if (out.kind == "perturbed_baker") {
        auto kept = cfg.get_int_list("system", "kept");
        out.sys = perturbed_baker_system(cfg.get_int("system", "base", 3), kept,
                                         cfg.get_double("system", "bump", 0.005));
    } else if (out.kind == "disks") {
        const double side = cfg.get_double("system", "side", 6.0);
        const double radius = cfg.get_double("system", "radius", 1.0);
        const double height = side * std::sqrt(3.0) / 2.0;
        out.centers = {Vec2(0, 0), Vec2(side, 0), Vec2(side / 2, height)};
        out.radii = {radius, radius, radius};
        out.sys = three_disk_system(out.centers, out.radii);
    } else if (out.kind == "chart") {
        auto entries = cfg.get_list("system", "matrix");
        if (entries.size() != 4) throw ConfigError("system.matrix: need 4 entries");
        Mat2 m;
        m << entries[0], entries[1], entries[2], entries[3];
        out.sys = linear_chart_system(m, cfg.get_double("system", "half_width", 1.0));
    } else {
        throw ConfigError("system.kind: unknown system '" + out.kind + "'");
    }
    return out;
}

WordTable build_word_table(const Config& cfg, const BuiltSystem& bs, int max_len) {
    const int depth = max_len + 2;
    std::vector<PhasePoint> seeds;
    if (bs.kind == "baker") {
        seeds = baker_periodic_points(cfg.get_int("system", "base", 3),
                                      cfg.get_int_list("system", "kept"), depth);
    } else if (bs.kind == "disks") {
        seeds = periodic_trapped_points(bs.centers, bs.radii, depth);
    } else {
        seeds = trapped_sample_refined(bs.sys, depth, 127, 127, 3);
    }
    return WordTable(bs.sys, max_len, depth, std::move(seeds));
}

std::vector<PhasePoint> trapped_for_chart(const Config& cfg, const BuiltSystem& bs) {
    if (bs.kind == "baker")
        return baker_periodic_points(cfg.get_int("system", "base", 3),
                                     cfg.get_int_list("system", "kept"), 8);
    if (bs.kind == "linear" || bs.kind == "chart") return {PhasePoint{0.0, 0.0, 0}};
    if (bs.kind == "perturbed_baker")
        return trapped_set_sample(bs.sys, cfg.get_int("system", "depth", 5), 127, 127);
    throw ConfigError("splitting: system must live on a single chart block");
}

/// ordered parallel map over [0, n)
template <typename F>
void parallel_for(int n, int workers, F&& body) {
    if (workers <= 1 || n <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int count = std::min(workers, n);
    for (int w = 0; w < count; ++w)
        pool.emplace_back([&]() {
            for (int i = next++; i < n; i = next++) body(i);
        });
    for (auto& t : pool) t.join();
}

void write_manifest(const RunManifest& man, const std::string& out_dir) {
    json j;
    j["config_hash"] = man.config_hash;
    j["version"] = man.version;
    j["seed"] = man.seed;
    json stages = json::array();
    for (const auto& [name, sec] : man.stage_seconds) stages.push_back({{name, sec}});
    j["stage_seconds"] = stages;
    j["outputs"] = man.outputs;
    std::ofstream out(out_dir + "/manifest.json");
    out << j.dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// experiments

void exp_numerology(const Config& cfg, const RunOptions& opt, const std::string& hash,
                    RunManifest& man) {
    const double l0 = cfg.get_double("numerology", "lambda0", std::log(2.0));
    const double l1 = cfg.get_double("numerology", "lambda1", l0);
    const double beta = cfg.get_double("numerology", "beta", 1.0);
    thermo::NumerologyProfile p = thermo::numerology(l0, l1, beta);
    json j;
    j["seed"] = opt.seed;
    j["config"] = hash;
    j["beta"] = p.beta;
    j["frak_b"] = p.frak_b;
    j["delta0"] = p.delta0;
    j["tau"] = p.tau;
    j["delta2"] = p.delta2;
    j["checks"] = {{"b_plus_delta0", p.check_b_plus_delta0()},
                   {"tau_window", p.check_tau_window()},
                   {"gate", p.check_gate()},
                   {"all", p.all_checks()}};
    json table = json::array();
    for (double lh : cfg.get_list("sweep", "h_log2")) {
        const double h = std::pow(2.0, lh);
        table.push_back({{"h", h}, {"n0", p.n0(h)}, {"n1", p.n1(h)}});
    }
    j["n_table"] = table;
    const std::string path = opt.out_dir + "/numerology.json";
    std::ofstream out(path);
    out << j.dump(2) << "\n";
    man.outputs.push_back(path);
}

void exp_classical(const Config& cfg, const RunOptions& opt, const std::string& hash,
                   RunManifest& man) {
    BuiltSystem bs = build_system(cfg);
    const int depth = cfg.get_int("sweep", "depth", 4);
    const int grid = cfg.get_int("sweep", "grid", 127);
    auto pts = trapped_set_sample(bs.sys, depth, grid, grid);
    const std::string path = opt.out_dir + "/survivors.csv";
    write_survivors_csv(path, bs.sys, pts, depth, "config", hash);
    man.outputs.push_back(path);
}

void exp_splitting(const Config& cfg, const RunOptions& opt, const std::string& hash,
                   RunManifest& man) {
    BuiltSystem bs = build_system(cfg);
    if (bs.sys.blocks.size() != 1)
        throw ConfigError("splitting: system must live on a single chart block");
    const int n = cfg.get_int("sweep", "grid", 257);
    splitting::GridChart chart{bs.sys.blocks[0], n, n, 0};
    auto trapped = trapped_for_chart(cfg, bs);
    splitting::FrameField frames =
        splitting::make_frames(bs.sys, chart, trapped, cfg.get_int("sweep", "power_depth", 8));
    const double eps0 = cfg.get_double("system", "eps0", 0.05);
    splitting::ScalarField chi = splitting::make_cutoff(bs.sys, chart, trapped, eps0);
    splitting::SlopeSolve sol = splitting::solve_unstable_slope(
        frames, bs.sys, chi, cfg.get_double("sweep", "tol", 1e-12),
        cfg.get_int("sweep", "max_iter", 200));
    splitting::CovectorSolve der = splitting::solve_derivative_field(frames, bs.sys, sol.field);

    const std::string csv_path = opt.out_dir + "/slope_field.csv";
    CsvWriter csv(csv_path, {"x", "xi", "lambda", "alpha1", "alpha2", "config"});
    for (int j = 0; j < chart.ny; ++j)
        for (int i = 0; i < chart.nx; ++i)
            csv.row({fmt(chart.x(i)), fmt(chart.y(j)), fmt(sol.field.lambda.at(i, j)),
                     fmt(der.alpha.at(i, j)[0]), fmt(der.alpha.at(i, j)[1]), hash});
    man.outputs.push_back(csv_path);

    json j;
    j["seed"] = opt.seed;
    j["config"] = hash;
    j["eta"] = frames.eta;
    j["eta_ok"] = frames.eta_ok;
    j["kappa_direct"] = frames.kappa_direct;
    j["slope"] = {{"iterations", sol.report.iterations},
                  {"factors", sol.report.factors},
                  {"final_residual", sol.report.final_residual},
                  {"masked_nodes", sol.report.masked_nodes}};
    j["derivative"] = {{"iterations", der.report.iterations},
                       {"factors", der.report.factors},
                       {"final_residual", der.report.final_residual}};
    j["invariance_angle"] = splitting::invariance_angle_error(sol.field, frames, bs.sys);
    const std::string jpath = opt.out_dir + "/convergence.json";
    std::ofstream out(jpath);
    out << j.dump(2) << "\n";
    man.outputs.push_back(jpath);
}

void exp_pressure(const Config& cfg, const RunOptions& opt, const std::string& hash,
                  RunManifest& man) {
    BuiltSystem bs = build_system(cfg);
    const int n_max = cfg.get_int("sweep", "n_max", 8);
    const std::size_t budget =
        static_cast<std::size_t>(cfg.get_double("sweep", "budget", 2'000'000.0));
    WordTable table = build_word_table(cfg, bs, n_max);
    thermo::PressureCalculator pc(table, n_max, budget);

    std::vector<double> s_values = cfg.get_list("sweep", "s");
    if (s_values.empty()) {
        const double s0 = cfg.get_double("sweep", "s_min", 0.0);
        const double s1 = cfg.get_double("sweep", "s_max", 1.0);
        const double ds = cfg.get_double("sweep", "s_step", 0.1);
        for (double s = s0; s <= s1 + 1e-12; s += ds) s_values.push_back(s);
    }
    const std::string csv_path = opt.out_dir + "/pressure.csv";
    CsvWriter csv(csv_path, {"s", "n", "estimate", "config"});
    json extr = json::array();
    for (double s : s_values) {
        thermo::PressureEntry e = pc.at(s);
        for (const auto& [n, est] : e.estimates) csv.row({fmt(s), std::to_string(n), fmt(est), hash});
        extr.push_back({{"s", s}, {"extrapolated", e.extrapolated}, {"aitken", e.aitken}});
    }
    man.outputs.push_back(csv_path);

    json j;
    j["seed"] = opt.seed;
    j["config"] = hash;
    j["pressure"] = extr;
    j["gamma_cl"] = thermo::classical_decay_rate(pc);
    if (!bs.sys.fractal_ok)
        j["warning"] = "closed system: no hole, the decay rate vanishes and there is no dimension root";
    try {
        thermo::BowenResult br = thermo::bowen_root(pc, cfg.get_double("sweep", "tol", 1e-8));
        j["bowen_root"] = br.s0;
        j["boundary_case"] = br.boundary_case;
        j["trapped_set_dimension"] = 2.0 * br.s0;
    } catch (const std::runtime_error& e) {
        j["bowen_error"] = e.what();
    }
    const std::string jpath = opt.out_dir + "/pressure.json";
    std::ofstream out(jpath);
    out << j.dump(2) << "\n";
    man.outputs.push_back(jpath);
}

std::vector<double> dimension_point_set(const Config& cfg, const RunOptions&) {
    const std::string kind = cfg.get("set", "kind", "cantor");
    if (kind == "cantor") {
        const int depth = cfg.get_int("set", "depth", 10);
        std::vector<double> xs{0.0};
        for (int k = 0; k < depth; ++k) {
            std::vector<double> next;
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
    if (kind == "trace") {
        Config sys_cfg = cfg;
        BuiltSystem bs = build_system(sys_cfg);
        const PhasePoint base = bs.kind == "disks"
                                    ? facing_point(bs.centers, bs.radii, 0, 1)
                                    : bs.sys.partition[0].center;
        return thermo::unstable_transversal_survivors(
            bs.sys, base, cfg.get_double("set", "span", 0.5), cfg.get_int("set", "survive", 6),
            cfg.get_int("set", "grid", 400000));
    }
    throw ConfigError("set.kind: unknown set '" + kind + "'");
}

void exp_dimension(const Config& cfg, const RunOptions& opt, const std::string& hash,
                   RunManifest& man) {
    auto pts = dimension_point_set(cfg, opt);
    const double eps_min = cfg.get_double("sweep", "eps_min", std::pow(3.0, -8));
    const double eps_max = cfg.get_double("sweep", "eps_max", 1.0 / 3.0);
    const double base = cfg.get_double("sweep", "base", 3.0);
    auto counts = thermo::box_counts(pts, eps_min, eps_max, base);
    thermo::DimensionReport rep = thermo::box_dimension(pts, eps_min, eps_max, base);

    const std::string csv_path = opt.out_dir + "/dimension.csv";
    CsvWriter csv(csv_path, {"eps", "count", "config"});
    for (const auto& [eps, n] : counts) csv.row({fmt(eps), std::to_string(n), hash});
    man.outputs.push_back(csv_path);

    json j;
    j["seed"] = opt.seed;
    j["config"] = hash;
    j["delta"] = rep.delta;
    j["constant_C"] = rep.constant_C;
    j["epsilon0"] = rep.epsilon0;
    j["method"] = rep.method;
    const std::string jpath = opt.out_dir + "/dimension.json";
    std::ofstream out(jpath);
    out << j.dump(2) << "\n";
    man.outputs.push_back(jpath);
}

bool cantor_digit_member(double x) {
    if (x < 0.0 || x > 1.0) return false;
    for (int k = 0; k < 40; ++k) {
        x *= 3.0;
        const int digit = static_cast<int>(std::floor(x));
        if (digit == 1) return false;
        x -= digit;
        if (x <= 0.0) return true;
    }
    return true;
}

void exp_porosity(const Config& cfg, const RunOptions& opt, const std::string& hash,
                  RunManifest& man) {
    std::function<bool(double)> member;
    if (cfg.get("set", "kind", "cantor") == "cantor") {
        member = cantor_digit_member;  // exact digit test
    } else {
        auto pts = dimension_point_set(cfg, opt);
        std::sort(pts.begin(), pts.end());
        const double tol = cfg.get_double("set", "membership_tol", 1e-9);
        member = [pts = std::move(pts), tol](double t) {
            auto it = std::lower_bound(pts.begin(), pts.end(), t - tol);
            return it != pts.end() && *it <= t + tol;
        };
    }
    const double nu = cfg.get_double("sweep", "nu", 1.0 / 3);
    const double a0 = cfg.get_double("sweep", "alpha0", std::pow(3.0, -6));
    const double a1 = cfg.get_double("sweep", "alpha1", 1.0);
    const double res = cfg.get_double("sweep", "resolution", nu * a0 / 12.0);
    auto result = thermo::check_porosity(member, cfg.get_double("sweep", "lo", 0.0),
                                         cfg.get_double("sweep", "hi", 1.0), nu, a0, a1, res);

    const std::string csv_path = opt.out_dir + "/porosity.csv";
    CsvWriter csv(csv_path, {"scale", "i_lo", "i_hi", "j_lo", "j_hi", "config"});
    for (const auto& w : result.certificate.witness_gaps)
        csv.row({fmt(w.i_hi - w.i_lo), fmt(w.i_lo), fmt(w.i_hi), fmt(w.j_lo), fmt(w.j_hi), hash});
    man.outputs.push_back(csv_path);

    json j;
    j["seed"] = opt.seed;
    j["config"] = hash;
    j["certified"] = result.certified;
    j["nu"] = nu;
    j["alpha0"] = a0;
    j["alpha1"] = a1;
    j["checked_resolution"] = res;
    if (!result.certified) j["fail_interval"] = {result.fail_lo, result.fail_hi};
    const std::string jpath = opt.out_dir + "/porosity.json";
    std::ofstream out(jpath);
    out << j.dump(2) << "\n";
    man.outputs.push_back(jpath);
}

void exp_spectrum(const Config& cfg, const RunOptions& opt, const std::string& hash,
                  RunManifest& man) {
    const std::string kind = cfg.get("system", "kind", "model");
    const std::string csv_path = opt.out_dir + "/spectrum.csv";
    json j;
    j["seed"] = opt.seed;
    j["config"] = hash;

    if (kind == "model") {
        auto h_log2 = cfg.get_list("sweep", "h_log2");
        const int n_cap = cfg.get_int("sweep", "n_cap", 4096);
        const double coverage = cfg.get_double("sweep", "coverage", 0.8);
        const bool eig = cfg.get_int("sweep", "eig", 1) != 0;
        struct Row {
            double h = 0, rho = -1, norm = 0;
            int n = 0, power = 0;
        };
        std::vector<Row> rows(h_log2.size());
        parallel_for(static_cast<int>(h_log2.size()), opt.workers, [&](int i) {
            const double h = std::pow(2.0, h_log2[i]);
            Row r;
            r.h = h;
            r.n = std::min(n_cap, static_cast<int>(std::ceil(coverage / h)));
            quant::ModelMap mm = quant::model_open_map(h, r.n);
            const int nlog = static_cast<int>(std::ceil(0.75 * std::abs(h_log2[i])));
            r.power = 2 * nlog + 1;
            r.norm = la::power_norm(mm.op.m, r.power);
            if (eig) r.rho = la::spectral_radius(mm.op.m);
            rows[i] = r;
        });
        CsvWriter csv(csv_path, {"h", "n", "rho_spec", "power", "norm_power", "config"});
        std::vector<double> lx, ly;
        for (const Row& r : rows) {
            csv.row({fmt(r.h), std::to_string(r.n), fmt(r.rho), std::to_string(r.power),
                     fmt(r.norm), hash});
            lx.push_back(std::log(r.h));
            ly.push_back(std::log(r.norm));
        }
        // fitted decay slope of log ||M^(2n+1)|| vs log h
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        j["slope"] = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    } else if (kind == "baker_op") {
        const int base = cfg.get_int("system", "base", 3);
        auto kept = cfg.get_int_list("system", "kept");
        auto ks = cfg.get_int_list("sweep", "k_list");
        struct Row {
            int k = 0, n = 0;
            double rho = 0, norm = 0;
        };
        std::vector<Row> rows(ks.size());
        parallel_for(static_cast<int>(ks.size()), opt.workers, [&](int i) {
            Row r;
            r.k = ks[i];
            r.n = static_cast<int>(std::pow(base, ks[i]));
            quant::DenseOperator b = quant::open_baker_operator(r.n, base, kept);
            r.rho = la::spectral_radius(b.m);
            r.norm = la::operator_norm(b.m);
            rows[i] = r;
        });
        CsvWriter csv(csv_path, {"k", "n", "rho_spec", "norm", "config"});
        double rho_max = 0.0;
        for (const Row& r : rows) {
            csv.row({std::to_string(r.k), std::to_string(r.n), fmt(r.rho), fmt(r.norm), hash});
            rho_max = std::max(rho_max, r.rho);
        }
        j["rho_max"] = rho_max;
    } else {
        throw ConfigError("spectrum: system.kind must be 'model' or 'baker_op'");
    }
    man.outputs.push_back(csv_path);
    const std::string jpath = opt.out_dir + "/spectrum.json";
    std::ofstream out(jpath);
    out << j.dump(2) << "\n";
    man.outputs.push_back(jpath);
}

void exp_fup(const Config& cfg, const RunOptions& opt, const std::string& hash,
             RunManifest& man) {
    const int base = cfg.get_int("fup", "base", 3);
    auto digits = cfg.get_int_list("fup", "digits");
    if (digits.empty()) digits = {0, 2};
    auto ks = cfg.get_int_list("sweep", "k_list");
    fup::FupExperiment e;
    e.h_values.resize(ks.size());
    e.norms.resize(ks.size());
    e.bounds.resize(ks.size());
    e.sizes.resize(ks.size());
    parallel_for(static_cast<int>(ks.size()), opt.workers, [&](int i) {
        const int n = static_cast<int>(std::pow(base, ks[i]));
        quant::GridSpec g = quant::GridSpec::torus(n);
        auto idx = fup::cantor_indices(base, digits, ks[i]);
        e.h_values[i] = 1.0 / n;
        e.norms[i] = fup::fup_norm(g, idx, idx);
        e.bounds[i] = fup::trivial_volume_bound(g, idx.size(), idx.size());
        e.sizes[i] = {idx.size(), idx.size()};
    });
    const std::string csv_path = opt.out_dir + "/fup.csv";
    CsvWriter csv(csv_path, {"k", "h_eff", "n_minus", "n_plus", "norm", "trivial_bound", "config"});
    for (std::size_t i = 0; i < ks.size(); ++i)
        csv.row({std::to_string(ks[i]), fmt(e.h_values[i]), std::to_string(e.sizes[i].first),
                 std::to_string(e.sizes[i].second), fmt(e.norms[i]), fmt(e.bounds[i]), hash});
    man.outputs.push_back(csv_path);

    json j;
    j["seed"] = opt.seed;
    j["config"] = hash;
    fup::FupFit fit = fit_fup_exponent(e);
    j["beta"] = fit.beta;
    j["band"] = fit.band;
    j["used_scales"] = fit.used_scales;
    const std::string jpath = opt.out_dir + "/fup.json";
    std::ofstream out(jpath);
    out << j.dump(2) << "\n";
    man.outputs.push_back(jpath);
}

}  // namespace

Diagnostics validate(const Config& cfg) {
    Diagnostics d;
    static const std::vector<std::string> kinds{"classical",  "splitting", "pressure",
                                                "dimension",  "porosity",  "spectrum",
                                                "fup",        "numerology"};
    const std::string kind = cfg.get("experiment", "kind");
    if (kind.empty()) {
        d.errors.push_back("experiment.kind: missing");
        return d;
    }
    if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end()) {
        d.errors.push_back("experiment.kind: unknown experiment '" + kind + "'");
        return d;
    }
    auto need_list = [&](const std::string& sec, const std::string& key) {
        try {
            if (cfg.get_list(sec, key).empty())
                d.errors.push_back(sec + "." + key + ": missing or empty sweep list");
        } catch (const ConfigError& e) {
            d.errors.push_back(e.what());
        }
    };
    if (kind == "spectrum") {
        const std::string sk = cfg.get("system", "kind", "model");
        if (sk == "model")
            need_list("sweep", "h_log2");
        else if (sk == "baker_op")
            need_list("sweep", "k_list");
        else
            d.errors.push_back("system.kind: spectrum needs 'model' or 'baker_op'");
    }
    if (kind == "fup") need_list("sweep", "k_list");
    if (kind == "classical" || kind == "splitting" || kind == "pressure") {
        const std::string sk = cfg.get("system", "kind");
        if (sk.empty()) d.errors.push_back("system.kind: missing");
    }
    if (kind == "pressure" && cfg.get("system", "kind") == "baker") {
        try {
            auto kept = cfg.get_int_list("system", "kept");
            const int base = cfg.get_int("system", "base", 3);
            if (static_cast<int>(kept.size()) >= base)
                d.warnings.push_back(
                    "system.kept: every branch kept, the system is closed; no hole means no "
                    "decay and no dimension root");
            if (kept.empty()) d.errors.push_back("system.kept: missing or empty");
        } catch (const ConfigError& e) {
            d.errors.push_back(e.what());
        }
    }
    // numbers must parse
    for (const auto& [sec, kv] : cfg.sections()) {
        for (const auto& [key, value] : kv) {
            (void)key;
            (void)value;
        }
        (void)sec;
    }
    return d;
}

RunManifest run_experiment(const Config& cfg, const RunOptions& opt) {
    Diagnostics diag = validate(cfg);
    if (!diag.ok()) {
        std::string msg = "invalid config:";
        for (const std::string& e : diag.errors) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    std::filesystem::create_directories(opt.out_dir);
    RunManifest man;
    man.version = kArtifactVersion;
    man.seed = opt.seed;
    man.config_hash = fnv1a_hex(cfg.canonical() + "\nseed=" + std::to_string(opt.seed));

    Timer timer;
    const std::string kind = cfg.get("experiment", "kind");
    if (kind == "numerology")
        exp_numerology(cfg, opt, man.config_hash, man);
    else if (kind == "classical")
        exp_classical(cfg, opt, man.config_hash, man);
    else if (kind == "splitting")
        exp_splitting(cfg, opt, man.config_hash, man);
    else if (kind == "pressure")
        exp_pressure(cfg, opt, man.config_hash, man);
    else if (kind == "dimension")
        exp_dimension(cfg, opt, man.config_hash, man);
    else if (kind == "porosity")
        exp_porosity(cfg, opt, man.config_hash, man);
    else if (kind == "spectrum")
        exp_spectrum(cfg, opt, man.config_hash, man);
    else if (kind == "fup")
        exp_fup(cfg, opt, man.config_hash, man);
    man.stage_seconds.emplace_back("compute_and_write", timer.lap());
    write_manifest(man, opt.out_dir);
    return man;
}

std::vector<std::pair<std::string, std::string>> experiment_catalog() {
    return {
        {"classical", "survivor grids of an open hyperbolic map, exported as (x, xi, depth)"},
        {"splitting", "graph-transform fixed point of the unstable slope field and its derivative"},
        {"pressure", "word-sum topological pressure, classical decay rate and the dimension root"},
        {"dimension", "box-counting dimension of a one-dimensional fractal sample"},
        {"porosity", "gap certificates for a set over a geometric range of scales"},
        {"spectrum", "spectral radius and long-power norms of quantized open maps"},
        {"fup", "norms of Fourier transforms restricted to fractal sets, with decay exponent"},
        {"numerology", "exponent bookkeeping (b, delta0, tau, delta2, N0, N1) and its constraints"},
    };
}

int run_cli(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    auto usage = []() {
        std::fprintf(stderr,
                     "usage: omaplab <experiment|validate|list> [--config FILE] [--out-dir DIR] "
                     "[--workers N] [--seed S]\n");
    };
    if (args.empty()) {
        usage();
        return 2;
    }
    const std::string command = args[0];
    std::string config_path;
    RunOptions opt;
    for (std::size_t i = 1; i < args.size(); ++i) {
        auto next = [&](const char* flag) -> std::string {
            if (i + 1 >= args.size())
                throw ConfigError(std::string(flag) + ": missing value");
            return args[++i];
        };
        try {
            if (args[i] == "--config")
                config_path = next("--config");
            else if (args[i] == "--out-dir")
                opt.out_dir = next("--out-dir");
            else if (args[i] == "--workers")
                opt.workers = std::stoi(next("--workers"));
            else if (args[i] == "--seed")
                opt.seed = std::stoull(next("--seed"));
            else
                throw ConfigError("unknown flag " + args[i]);
        } catch (const std::exception& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return 2;
        }
    }

    if (command == "list") {
        for (const auto& [name, desc] : experiment_catalog())
            std::printf("%-11s %s\n", name.c_str(), desc.c_str());
        return 0;
    }
    if (config_path.empty()) {
        std::fprintf(stderr, "error: --config is required\n");
        return 2;
    }
    Config cfg;
    try {
        cfg = Config::parse_file(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    if (command == "validate") {
        Diagnostics d = validate(cfg);
        for (const std::string& w : d.warnings) std::printf("warning: %s\n", w.c_str());
        for (const std::string& e : d.errors) std::printf("error: %s\n", e.c_str());
        std::printf(d.ok() ? "config ok\n" : "config invalid\n");
        return d.ok() ? 0 : 2;
    }
    const auto catalog = experiment_catalog();
    const bool known = std::any_of(catalog.begin(), catalog.end(),
                                   [&](const auto& c) { return c.first == command; });
    if (!known) {
        usage();
        return 2;
    }
    cfg.set("experiment", "kind", command);
    try {
        Diagnostics d = validate(cfg);
        for (const std::string& w : d.warnings) std::printf("warning: %s\n", w.c_str());
        RunManifest man = run_experiment(cfg, opt);
        std::printf("wrote %zu outputs under %s (config %s)\n", man.outputs.size(),
                    opt.out_dir.c_str(), man.config_hash.c_str());
        return 0;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
}

}  // namespace omap::cli
