#include "anderloc/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "anderloc/config.hpp"
#include "anderloc/estimators.hpp"
#include "anderloc/oracles.hpp"
#include "anderloc/parallel.hpp"
#include "anderloc/verifier.hpp"

namespace anderloc::experiment {

namespace fs = std::filesystem;
using config::KeyValues;
using estimators::RunOptions;
using geometry::Configuration;
using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

namespace {

struct Context {
    KeyValues kv;
    std::string spec_text;
    model::ModelConfig mc;
    std::string kind;
    RunOptions run;
    std::string out_prefix;
    json meta; // accumulated per-kind result summary
    std::ostringstream csv;
};

model::DomainN model_domain(const Context& ctx) {
    return model::DomainN::cube(ctx.mc.domain, ctx.mc.n);
}

// all particles stacked at one point: dist_H of two such configs is the
// point separation, which makes scripted pair grids easy
Configuration stacked(const model::ModelConfig& mc, double coord) {
    Eigen::MatrixXd pts = Eigen::MatrixXd::Constant(mc.d, mc.n, coord);
    return Configuration(pts);
}

spectral::EnergyWindow parse_window(Context& ctx, const std::string& key) {
    auto vals = ctx.kv.get_doubles(key);
    if (vals.size() == 2 && vals[0] <= vals[1]) return {vals[0], vals[1], ""};
    throw std::invalid_argument(key + " must be 'lo hi'");
}

// window = auto <width> estimates the ground-energy floor on the configured
// box (calibration ensemble) and uses [E0hat, E0hat + width]
spectral::EnergyWindow resolve_window(Context& ctx, const std::string& key) {
    std::string raw = ctx.kv.get_string(key);
    std::istringstream iss(raw);
    std::string kind;
    iss >> kind;
    if (kind == "auto") {
        double width;
        if (!(iss >> width) || width <= 0)
            throw std::invalid_argument(key + ": auto needs a positive width");
        RunOptions cal = ctx.run;
        cal.ensemble = ctx.kv.get_long("experiment.calibration_ensemble", 50);
        double e0 = estimators::estimate_ground_energy_floor(ctx.mc, model_domain(ctx), cal);
        spectral::EnergyWindow w{e0, e0 + width, ""};
        std::ostringstream lab;
        lab << "[E0hat, E0hat + " << width << "], E0hat = " << fmt_double(e0);
        w.label = lab.str();
        return w;
    }
    return parse_window(ctx, key);
}

void csv_row(Context& ctx, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) ctx.csv << ",";
        ctx.csv << cells[i];
    }
    ctx.csv << "\n";
}

json estimate_json(const estimators::EnsembleEstimate& e) {
    return json{{"mean", e.mean}, {"stderr", e.stderr_}, {"count", e.count}};
}

// ------------------------------------------------------------------ kinds

int run_spectrum(Context& ctx) {
    auto domain = model_domain(ctx);
    spectral::EnergyWindow window{-1e300, 1e300, "full"};
    if (ctx.kv.has("experiment.window")) window = parse_window(ctx, "experiment.window");
    csv_row(ctx, {"realization", "index", "eigenvalue", "residual"});
    auto opts = ctx.run.solver;
    json reals = json::array();
    for (long r = 0; r < ctx.run.ensemble; ++r) {
        auto dis = model::sample_disorder(ctx.mc, ctx.run.seed, static_cast<std::uint64_t>(r));
        auto H = model::assemble_hamiltonian(ctx.mc, domain, dis);
        opts.eigenpair_budget = static_cast<int>(H.dim());
        auto eig = spectral::eigenpairs_in_window(H, window, opts);
        for (int i = 0; i < eig.count(); ++i)
            csv_row(ctx, {std::to_string(r), std::to_string(i), fmt_double(eig.values[i]),
                          fmt_double(eig.residuals[i])});
        reals.push_back(json{{"realization", r}, {"count", eig.count()}});
    }
    ctx.meta["window"] = {window.lo, window.hi};
    ctx.meta["realizations"] = reals;
    return kExitOk;
}

int run_fracmom(Context& ctx) {
    auto domain = model_domain(ctx);
    double s = ctx.kv.get_double("experiment.s");
    auto re_z = ctx.kv.get_doubles("experiment.re_z");
    auto im_z = ctx.kv.get_doubles("experiment.im_z");
    auto pairs = config::pairs_from_json(ctx.kv.get_string("experiment.pairs"));
    csv_row(ctx, {"query_id", "pair_id", "dist", "s", "re_z", "im_z", "mean", "stderr", "count"});
    json fits = json::array();
    long qid = 0;
    for (double re : re_z) {
        for (double im : im_z) {
            std::vector<verifier::DecaySample> decay;
            for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
                auto est = estimators::frac_moment(ctx.mc, domain, {re, im}, pairs[pi].first,
                                                   pairs[pi].second, s, ctx.run);
                double dist = geometry::hausdorff_dist(pairs[pi].first, pairs[pi].second);
                csv_row(ctx, {std::to_string(qid++), std::to_string(pi), fmt_double(dist),
                              fmt_double(s), fmt_double(re), fmt_double(im), fmt_double(est.mean),
                              fmt_double(est.stderr_), std::to_string(est.count)});
                if (est.mean > 0) decay.push_back({dist, est.mean, est.stderr_});
            }
            if (ctx.kv.get_long("experiment.fit", 0) != 0 && decay.size() >= 3) {
                auto fit = verifier::fit_decay(decay);
                fits.push_back(json{{"re_z", re},
                                    {"im_z", im},
                                    {"C", fit.C},
                                    {"mu", fit.mu},
                                    {"gamma", fit.gamma},
                                    {"residual", fit.residual}});
            }
        }
    }
    if (!fits.empty()) ctx.meta["fits"] = fits;
    return kExitOk;
}

int run_bs_scan(Context& ctx) {
    estimators::BsQuery q;
    q.s = ctx.kv.get_double("experiment.s");
    q.L = ctx.kv.get_double("experiment.L");
    q.re_z = ctx.kv.get_doubles("experiment.re_z");
    q.im_z = ctx.kv.get_doubles("experiment.im_z");
    q.pairs = config::pairs_from_json(ctx.kv.get_string("experiment.pairs"));
    q.domains.push_back(model_domain(ctx));
    for (const auto& dom : ctx.kv.all("experiment.domain")) {
        std::istringstream iss(dom);
        std::vector<double> nums;
        double v;
        while (iss >> v) nums.push_back(v);
        if (static_cast<int>(nums.size()) != 2 * ctx.mc.d)
            throw std::invalid_argument("experiment.domain needs 2*d numbers");
        grid::Box b;
        b.lo.resize(ctx.mc.d);
        b.hi.resize(ctx.mc.d);
        for (int c = 0; c < ctx.mc.d; ++c) {
            b.lo[c] = nums[c];
            b.hi[c] = nums[ctx.mc.d + c];
        }
        q.domains.push_back(model::DomainN::cube({b}, ctx.mc.n));
    }
    auto res = estimators::bs_estimate(ctx.mc, q, ctx.run);
    csv_row(ctx, {"query_id", "pair_id", "domain_id", "L", "s", "re_z", "im_z", "mean", "stderr",
                  "count", "witness"});
    std::size_t idx = 0;
    for (std::size_t di = 0; di < q.domains.size(); ++di)
        for (std::size_t pi = 0; pi < q.pairs.size(); ++pi)
            for (double re : q.re_z)
                for (double im : q.im_z) {
                    const auto& est = res.all[idx];
                    bool wit = di == res.witness_domain && pi == res.witness_pair &&
                               re == res.witness_z.real() && im == res.witness_z.imag();
                    csv_row(ctx, {std::to_string(idx), std::to_string(pi), std::to_string(di),
                                  fmt_double(q.L), fmt_double(q.s), fmt_double(re), fmt_double(im),
                                  fmt_double(est.mean), fmt_double(est.stderr_),
                                  std::to_string(est.count), wit ? "1" : "0"});
                    ++idx;
                }
    ctx.meta["max"] = estimate_json(res.value);
    ctx.meta["witness"] = {{"pair", res.witness_pair},
                           {"domain", res.witness_domain},
                           {"re_z", res.witness_z.real()},
                           {"im_z", res.witness_z.imag()}};
    return kExitOk;
}

int run_correlator(Context& ctx) {
    auto domain = model_domain(ctx);
    auto window = resolve_window(ctx, "experiment.window");
    auto pairs = config::pairs_from_json(ctx.kv.get_string("experiment.pairs"));
    csv_row(ctx, {"pair_id", "dist", "window_lo", "window_hi", "mean", "stderr", "count"});
    std::vector<verifier::DecaySample> decay;
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        auto est = estimators::ef_correlator(ctx.mc, domain, window, pairs[pi].first,
                                             pairs[pi].second, ctx.run);
        double dist = geometry::hausdorff_dist(pairs[pi].first, pairs[pi].second);
        csv_row(ctx, {std::to_string(pi), fmt_double(dist), fmt_double(window.lo),
                      fmt_double(window.hi), fmt_double(est.mean), fmt_double(est.stderr_),
                      std::to_string(est.count)});
        if (est.mean > 0) decay.push_back({dist, est.mean, est.stderr_});
    }
    ctx.meta["window"] = {{"lo", window.lo}, {"hi", window.hi}, {"label", window.label}};
    if (ctx.kv.get_long("experiment.fit", 0) != 0 && decay.size() >= 3) {
        auto fit = verifier::fit_decay(decay);
        ctx.meta["fit"] = {{"C", fit.C}, {"mu", fit.mu}, {"gamma", fit.gamma},
                           {"residual", fit.residual}};
    }
    return kExitOk;
}

int run_wegner(Context& ctx) {
    auto domain = model_domain(ctx);
    auto x = config::configuration_from_json(ctx.kv.get_string("experiment.x"));
    double ec = ctx.kv.get_double("experiment.e_center");
    auto widths = ctx.kv.get_doubles("experiment.widths");
    RunOptions run = ctx.run;
    run.keep_samples = true;
    auto curve = estimators::wegner_curve(ctx.mc, domain, x, ec, widths, run);
    csv_row(ctx, {"width", "mean", "stderr", "count"});
    for (const auto& p : curve)
        csv_row(ctx, {fmt_double(p.width), fmt_double(p.trace.mean), fmt_double(p.trace.stderr_),
                      std::to_string(p.trace.count)});

    // OLS of mean vs width, intercept uncertainty by the per-realization
    // delta method (the intercept is a fixed linear functional of the means)
    const std::size_t m = widths.size();
    double sw = m, sx = 0, sxx = 0;
    for (auto& p : curve) {
        sx += p.width;
        sxx += p.width * p.width;
    }
    double det = sw * sxx - sx * sx;
    std::vector<double> ci(m); // intercept coefficients
    for (std::size_t i = 0; i < m; ++i) ci[i] = (sxx - curve[i].width * sx) / det;
    double intercept = 0, slope = 0;
    for (std::size_t i = 0; i < m; ++i) {
        intercept += ci[i] * curve[i].trace.mean;
        slope += ((sw * curve[i].width - sx) / det) * curve[i].trace.mean;
    }
    const long R = ctx.run.ensemble;
    double var = 0;
    if (R >= 2) {
        std::vector<double> ir(R, 0.0);
        for (std::size_t i = 0; i < m; ++i)
            for (long r = 0; r < R; ++r) ir[r] += ci[i] * curve[i].trace.samples[r];
        double mean_ir = 0;
        for (double v : ir) mean_ir += v;
        mean_ir /= R;
        for (double v : ir) var += (v - mean_ir) * (v - mean_ir);
        var = var / (R - 1) / R;
    }
    double ss_res = 0, ss_tot = 0, mean_y = 0;
    for (const auto& p : curve) mean_y += p.trace.mean / m;
    for (const auto& p : curve) {
        double pred = intercept + slope * p.width;
        ss_res += (p.trace.mean - pred) * (p.trace.mean - pred);
        ss_tot += (p.trace.mean - mean_y) * (p.trace.mean - mean_y);
    }
    ctx.meta["regression"] = {{"slope", slope},
                              {"intercept", intercept},
                              {"intercept_stderr", std::sqrt(var)},
                              {"r_squared", ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0}};
    return kExitOk;
}

int run_lifshitz(Context& ctx) {
    auto Ls = ctx.kv.get_doubles("experiment.scales");
    double e_ref;
    if (ctx.kv.has("experiment.e_ref")) {
        e_ref = ctx.kv.get_double("experiment.e_ref");
    } else {
        RunOptions cal = ctx.run;
        cal.ensemble = ctx.kv.get_long("experiment.calibration_ensemble", 50);
        e_ref = estimators::estimate_ground_energy_floor(ctx.mc, model_domain(ctx), cal);
    }
    auto pts = estimators::lifshitz_tail(ctx.mc, Ls, e_ref, ctx.run);
    csv_row(ctx, {"L", "probability", "ci_lo", "ci_hi", "hits", "count"});
    for (const auto& p : pts)
        csv_row(ctx, {fmt_double(p.L), fmt_double(p.probability), fmt_double(p.ci_lo),
                      fmt_double(p.ci_hi), std::to_string(p.hits), std::to_string(p.count)});
    // log-log slope over the strictly positive points: an empirical xi
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : pts) {
        if (p.probability <= 0) continue;
        double x = std::log(p.L), y = std::log(p.probability);
        sw += 1; sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    ctx.meta["e_ref"] = e_ref;
    if (sw >= 2 && sw * sxx - sx * sx > 1e-12)
        ctx.meta["empirical_xi"] = -(sw * sxy - sx * sy) / (sw * sxx - sx * sx);
    return kExitOk;
}

int run_dynamical(Context& ctx) {
    auto domain = model_domain(ctx);
    auto window = resolve_window(ctx, "experiment.window");
    auto x = config::configuration_from_json(ctx.kv.get_string("experiment.x"));
    auto y = config::configuration_from_json(ctx.kv.get_string("experiment.y"));
    double t_max = ctx.kv.get_double("experiment.t_max", 20.0);
    long t_points = ctx.kv.get_long("experiment.t_points", 64);
    std::vector<double> times(t_points);
    for (long i = 0; i < t_points; ++i)
        times[i] = t_points == 1 ? 0.0 : t_max * i / (t_points - 1);
    auto res = estimators::dynamical_proxy(ctx.mc, domain, window, x, y, times, ctx.run);
    csv_row(ctx, {"sup_mean", "sup_stderr", "bound_mean", "bound_stderr", "count", "domination"});
    csv_row(ctx, {fmt_double(res.sup_over_time.mean), fmt_double(res.sup_over_time.stderr_),
                  fmt_double(res.correlator_bound.mean), fmt_double(res.correlator_bound.stderr_),
                  std::to_string(res.sup_over_time.count), res.domination_ok ? "1" : "0"});
    ctx.meta["window"] = {{"lo", window.lo}, {"hi", window.hi}, {"label", window.label}};
    ctx.meta["sup_over_time"] = estimate_json(res.sup_over_time);
    ctx.meta["correlator_bound"] = estimate_json(res.correlator_bound);
    ctx.meta["domination_ok"] = res.domination_ok;
    return res.domination_ok ? kExitOk : kExitVerdict;
}

verifier::RescalingConstants constants_from_spec(Context& ctx) {
    verifier::RescalingConstants k;
    k.C = ctx.kv.get_double("experiment.C", 1.0);
    k.nu2 = ctx.kv.get_double("experiment.nu2", 1.0);
    k.alpha = ctx.kv.get_double("experiment.alpha", 0.5);
    k.gamma_star = ctx.kv.get_double("experiment.gamma_star", 1.0);
    k.s = ctx.kv.get_double("experiment.s", 0.25);
    k.d = ctx.mc.d;
    k.n = ctx.mc.n;
    k.R = ctx.mc.safety_R();
    k.wb = ctx.mc.interaction;
    k.wb_reg = ctx.mc.interaction_reg();
    return k;
}

estimators::EnsembleEstimate bs_at_separation(Context& ctx, double sep, double s,
                                              const std::vector<double>& re_z,
                                              const std::vector<double>& im_z) {
    // max of frac-moment estimates over the z grid at one pair separated by
    // `sep` along the first axis, centered in the box
    auto domain = model_domain(ctx);
    const auto& box = ctx.mc.domain[0];
    double mid = 0.5 * (box.lo[0] + box.hi[0]);
    Configuration x = stacked(ctx.mc, std::floor(mid - sep / 2));
    Configuration y = stacked(ctx.mc, std::floor(mid - sep / 2) + sep);
    estimators::EnsembleEstimate best;
    bool first = true;
    for (double re : re_z)
        for (double im : im_z) {
            auto est = estimators::frac_moment(ctx.mc, domain, {re, im}, x, y, s, ctx.run);
            if (first || est.mean > best.mean) {
                best = est;
                first = false;
            }
        }
    return best;
}

int run_rescale_check(Context& ctx) {
    auto k = constants_from_spec(ctx);
    double L = ctx.kv.get_double("experiment.L");
    auto re_z = ctx.kv.get_doubles("experiment.re_z");
    auto im_z = ctx.kv.get_doubles("experiment.im_z");
    double La = std::pow(L, k.alpha);
    double sep_mid = L + La, sep_2L = 2 * L, sep_big = 2 * L + 2 * La + 9 * k.R;
    auto B_mid = bs_at_separation(ctx, sep_mid, k.s, re_z, im_z);
    auto B_2L = bs_at_separation(ctx, sep_2L, k.s, re_z, im_z);
    auto B_big = bs_at_separation(ctx, sep_big, k.s, re_z, im_z);
    auto rep = verifier::rescaling_check(B_mid, B_2L, B_big, k, L);
    csv_row(ctx, {"L", "lhs", "lhs_stderr", "rhs", "rhs_stderr", "C_min", "satisfied"});
    csv_row(ctx, {fmt_double(L), fmt_double(rep.lhs), fmt_double(rep.lhs_err), fmt_double(rep.rhs),
                  fmt_double(rep.rhs_err), fmt_double(rep.C_min), rep.satisfied ? "1" : "0"});
    ctx.meta["report"] = {{"lhs", rep.lhs},         {"rhs", rep.rhs},
                          {"C_min", rep.C_min},     {"satisfied", rep.satisfied},
                          {"term_sq", rep.term_sq}, {"term_exp", rep.term_exp},
                          {"term_int", rep.term_int}};
    bool pinned = ctx.kv.has("experiment.C");
    return (!pinned || rep.satisfied) ? kExitOk : kExitVerdict;
}

int run_iterate(Context& ctx) {
    auto k = constants_from_spec(ctx);
    double C_prime = ctx.kv.get_double("experiment.C_prime");
    double q_prime = ctx.kv.get_double("experiment.q_prime");
    double L1 = ctx.kv.get_double("experiment.L1");
    std::string variant = ctx.kv.get_string("experiment.variant", "exp");
    auto rep = verifier::iterate_corollary(
        C_prime, q_prime, L1, k,
        variant == "poly" ? verifier::IterationVariant::Polynomial
                          : verifier::IterationVariant::Exponential,
        static_cast<int>(ctx.kv.get_long("experiment.max_steps", 16)));
    csv_row(ctx, {"step", "L_lo", "L_hi", "t1", "t2", "t3", "ok"});
    for (std::size_t i = 0; i < rep.steps.size(); ++i) {
        const auto& st = rep.steps[i];
        csv_row(ctx, {std::to_string(i), fmt_double(st.L_lo), fmt_double(st.L_hi),
                      fmt_double(st.t1), fmt_double(st.t2), fmt_double(st.t3),
                      st.ok ? "1" : "0"});
    }
    ctx.meta["beta"] = rep.beta;
    ctx.meta["nu_prime"] = rep.nu_prime;
    ctx.meta["closed"] = rep.closed;
    ctx.meta["first_failure_L"] = rep.first_failure_L;
    if (!rep.hypothesis_issue.empty()) ctx.meta["hypothesis_issue"] = rep.hypothesis_issue;
    return rep.closed && rep.hypothesis_issue.empty() ? kExitOk : kExitVerdict;
}

int run_schedule(Context& ctx) {
    double beta1 = ctx.kv.get_double("experiment.beta1");
    double p_w = ctx.kv.get_double("experiment.p_w", ctx.mc.interaction.p_w);
    auto s = verifier::exponent_schedule(beta1, ctx.mc.n, ctx.mc.d, p_w);
    csv_row(ctx, {"k", "alpha", "beta"});
    for (std::size_t i = 0; i < s.alpha.size(); ++i)
        csv_row(ctx, {std::to_string(i + 1), fmt_double(s.alpha[i]), fmt_double(s.beta[i])});
    ctx.meta["max_particles"] = s.max_particles;
    ctx.meta["admissible"] = ctx.mc.n <= s.max_particles;
    return kExitOk;
}

int run_initial_check(Context& ctx) {
    auto k = constants_from_spec(ctx);
    double C_prime = ctx.kv.get_double("experiment.C_prime");
    double q_prime = ctx.kv.get_double("experiment.q_prime");
    double L1 = ctx.kv.get_double("experiment.L1");
    auto re_z = ctx.kv.get_doubles("experiment.re_z");
    auto im_z = ctx.kv.get_doubles("experiment.im_z");
    std::vector<double> scales;
    if (ctx.kv.has("experiment.scales")) {
        scales = ctx.kv.get_doubles("experiment.scales");
    } else {
        scales = {L1, 2 * L1, 4 * L1 + 9 * k.R};
    }
    std::vector<std::pair<double, estimators::EnsembleEstimate>> samples;
    for (double L : scales) samples.emplace_back(L, bs_at_separation(ctx, L, k.s, re_z, im_z));
    auto rep = verifier::initial_scale_check(samples, C_prime, q_prime, L1, k.R, ctx.mc.alpha_w,
                                             k.s, k.C);
    csv_row(ctx, {"L", "B", "stderr", "bound", "ok"});
    for (const auto& p : rep.points)
        csv_row(ctx, {fmt_double(p.L), fmt_double(p.B), fmt_double(p.B_err), fmt_double(p.bound),
                      p.ok ? "1" : "0"});
    ctx.meta["all_ok"] = rep.all_ok;
    ctx.meta["alpha_margin_rhs"] = rep.alpha_margin_rhs;
    ctx.meta["perturbative_margin_ok"] = rep.perturbative_margin_ok;
    return rep.all_ok ? kExitOk : kExitVerdict;
}

int run_subadd(Context& ctx) {
    auto lengths = ctx.kv.get_doubles("experiment.box_lengths");
    auto part_sizes_d = ctx.kv.get_doubles("experiment.parts");
    std::vector<int> part_sizes;
    int total = 0;
    for (double p : part_sizes_d) {
        part_sizes.push_back(static_cast<int>(p));
        total += static_cast<int>(p);
    }
    if (total != ctx.mc.n)
        throw std::invalid_argument("experiment.parts must sum to the particle count");
    double allowance = ctx.kv.get_double("experiment.allowance", 0.0);

    csv_row(ctx, {"box_length", "E0_whole", "whole_stderr", "parts_sum", "parts_stderr", "gap",
                  "tolerance", "ok"});
    json boxes = json::array();
    bool all_ok = true, monotone = true;
    double prev_gap = 0;
    for (std::size_t bi = 0; bi < lengths.size(); ++bi) {
        double len = lengths[bi];
        grid::Box box;
        box.lo = Eigen::VectorXd::Zero(ctx.mc.d);
        box.hi = Eigen::VectorXd::Constant(ctx.mc.d, len - (ctx.mc.mode == model::Mode::Lattice ? 1 : 0));
        model::ModelConfig whole_mc = ctx.mc;
        whole_mc.domain = {box};
        std::vector<double> e_whole(static_cast<std::size_t>(ctx.run.ensemble));
        auto dn = model::DomainN::cube(whole_mc.domain, whole_mc.n);
        anderloc::parallel_for(ctx.run.ensemble, ctx.run.threads, [&](long i) {
            auto dis = model::sample_disorder(whole_mc, ctx.run.seed, static_cast<std::uint64_t>(i));
            auto H = model::assemble_hamiltonian(whole_mc, dn, dis);
            e_whole[static_cast<std::size_t>(i)] = spectral::ground_energy(H, ctx.run.solver);
        });
        auto whole = estimators::reduce_samples(e_whole, ctx.run.seed);

        std::vector<estimators::EnsembleEstimate> parts;
        for (std::size_t pi = 0; pi < part_sizes.size(); ++pi) {
            model::ModelConfig part_mc = whole_mc;
            part_mc.n = part_sizes[pi];
            auto pdn = model::DomainN::cube(part_mc.domain, part_mc.n);
            std::vector<double> vals(static_cast<std::size_t>(ctx.run.ensemble));
            anderloc::parallel_for(ctx.run.ensemble, ctx.run.threads, [&](long i) {
                auto dis =
                    model::sample_disorder(part_mc, ctx.run.seed, static_cast<std::uint64_t>(i));
                auto H = model::assemble_hamiltonian(part_mc, pdn, dis);
                vals[static_cast<std::size_t>(i)] = spectral::ground_energy(H, ctx.run.solver);
            });
            parts.push_back(estimators::reduce_samples(vals, ctx.run.seed));
        }
        auto rep = verifier::subadditivity_check(whole, parts, allowance);
        csv_row(ctx, {fmt_double(len), fmt_double(rep.whole), fmt_double(rep.whole_err),
                      fmt_double(rep.parts_sum), fmt_double(rep.parts_err), fmt_double(rep.gap),
                      fmt_double(rep.tolerance), rep.ok ? "1" : "0"});
        boxes.push_back(json{{"length", len},
                             {"whole", rep.whole},
                             {"parts_sum", rep.parts_sum},
                             {"gap", rep.gap},
                             {"ok", rep.ok}});
        all_ok = all_ok && rep.ok;
        if (bi > 0 && std::abs(rep.gap) > std::abs(prev_gap) + 1e-12) monotone = false;
        prev_gap = rep.gap;
    }
    ctx.meta["boxes"] = boxes;
    ctx.meta["all_ok"] = all_ok;
    ctx.meta["gap_nonincreasing"] = monotone;
    return all_ok ? kExitOk : kExitVerdict;
}

int run_ct_check(Context& ctx) {
    auto domain = model_domain(ctx);
    auto gaps = ctx.kv.get_doubles("experiment.gaps");
    auto seps = ctx.kv.get_doubles("experiment.seps");
    auto dis = model::sample_disorder(ctx.mc, ctx.run.seed, 0);
    auto H = model::assemble_hamiltonian(ctx.mc, domain, dis);
    double e0 = spectral::ground_energy(H, ctx.run.solver);
    const auto& box = ctx.mc.domain[0];
    double mid = 0.5 * (box.lo[0] + box.hi[0]);

    csv_row(ctx, {"gap", "sep", "value"});
    std::vector<std::tuple<double, verifier::DecayFit, double>> fits;
    for (double g : gaps) {
        std::complex<double> z(e0 - g, 0.0);
        std::vector<verifier::DecaySample> decay;
        for (double sep : seps) {
            Configuration x = stacked(ctx.mc, std::floor(mid - sep / 2));
            Configuration y = stacked(ctx.mc, std::floor(mid - sep / 2) + sep);
            double v = spectral::resolvent_block_norm(H, z, x, y, ctx.run.solver);
            csv_row(ctx, {fmt_double(g), fmt_double(sep), fmt_double(v)});
            if (v > 0) decay.push_back({sep, v, 0.0});
        }
        fits.emplace_back(g, verifier::fit_decay(decay, {1.0}), std::abs(e0 - g));
    }
    auto rep = verifier::ct_check(fits, ctx.kv.get_double("experiment.C0", -1.0));
    json jg = json::array();
    for (const auto& r : rep.gaps)
        jg.push_back(json{{"gap", r.gap},
                          {"mu", r.fit.mu},
                          {"C", r.fit.C},
                          {"mu0_empirical", r.mu0_empirical},
                          {"skipped", r.skipped}});
    ctx.meta["gaps"] = jg;
    ctx.meta["rates_positive"] = rep.rates_positive;
    ctx.meta["nondecreasing"] = rep.nondecreasing;

    // optional energy-restricted block: Gevrey cutoff around a window inside
    // the spectrum, evaluated at real Re z in that window
    if (ctx.kv.has("experiment.gevrey.window")) {
        auto w = ctx.kv.get_doubles("experiment.gevrey.window");
        double r = ctx.kv.get_double("experiment.gevrey.r");
        double delta = ctx.kv.get_double("experiment.gevrey.delta", 0.5);
        double re = ctx.kv.get_double("experiment.gevrey.re_z", 0.5 * (w[0] + w[1]));
        std::vector<verifier::DecaySample> decay;
        for (double sep : seps) {
            Configuration x = stacked(ctx.mc, std::floor(mid - sep / 2));
            Configuration y = stacked(ctx.mc, std::floor(mid - sep / 2) + sep);
            int N = spectral::CutoffFunction::order_for_distance(delta, sep);
            spectral::CutoffFunction cut({w[0], w[1], ""}, r, N);
            double v = spectral::restricted_resolvent_block_norm(H, {re, 0.0}, cut, x, y,
                                                                 ctx.run.solver);
            csv_row(ctx, {"gevrey", fmt_double(sep), fmt_double(v)});
            if (v > 0) decay.push_back({sep, v, 0.0});
        }
        if (decay.size() >= 3) {
            auto fit = verifier::fit_decay(decay, {1.0});
            ctx.meta["gevrey_fit"] = {{"C", fit.C}, {"mu", fit.mu}};
            if (fit.mu <= 0) return kExitVerdict;
        }
    }
    return rep.rates_positive && rep.nondecreasing ? kExitOk : kExitVerdict;
}

int dispatch(Context& ctx) {
    if (ctx.kind == "spectrum") return run_spectrum(ctx);
    if (ctx.kind == "fracmom") return run_fracmom(ctx);
    if (ctx.kind == "bs-scan") return run_bs_scan(ctx);
    if (ctx.kind == "correlator") return run_correlator(ctx);
    if (ctx.kind == "wegner") return run_wegner(ctx);
    if (ctx.kind == "lifshitz") return run_lifshitz(ctx);
    if (ctx.kind == "dynamical") return run_dynamical(ctx);
    if (ctx.kind == "rescale-check") return run_rescale_check(ctx);
    if (ctx.kind == "iterate") return run_iterate(ctx);
    if (ctx.kind == "schedule") return run_schedule(ctx);
    if (ctx.kind == "initial-check") return run_initial_check(ctx);
    if (ctx.kind == "subadd") return run_subadd(ctx);
    if (ctx.kind == "ct-check") return run_ct_check(ctx);
    throw std::invalid_argument("unknown experiment kind: " + ctx.kind);
}

Context make_context(const std::string& spec_path, const Overrides& ov) {
    Context ctx;
    {
        std::ifstream ifs(spec_path);
        if (!ifs) throw std::invalid_argument("cannot open spec file: " + spec_path);
        std::ostringstream buf;
        buf << ifs.rdbuf();
        ctx.spec_text = buf.str();
    }
    ctx.kv = config::parse_spec_text(ctx.spec_text);
    ctx.mc = config::model_from_spec(ctx.kv);
    ctx.mc.validate();
    ctx.kind = ctx.kv.get_string("experiment.kind");
    ctx.run.ensemble = ctx.kv.get_long("experiment.ensemble", 100);
    if (ctx.run.ensemble < 1) throw std::invalid_argument("experiment.ensemble must be >= 1");
    ctx.run.seed = static_cast<std::uint64_t>(ctx.kv.get_long("experiment.seed", 1));
    ctx.run.threads = static_cast<int>(ctx.kv.get_long("experiment.threads", 1));
    if (const char* env = std::getenv("ANDERLOC_THREADS"))
        ctx.run.threads = std::max(1, std::atoi(env));
    if (ov.threads) ctx.run.threads = *ov.threads;
    if (ov.seed) ctx.run.seed = *ov.seed;
    ctx.out_prefix = ctx.kv.get_string("experiment.output", "anderloc_out");
    return ctx;
}

void validate_kind(const Context& ctx, std::vector<Finding>& findings) {
    auto require = [&](const char* key) {
        if (!ctx.kv.has(key))
            findings.push_back({true, std::string("missing required key ") + key});
    };
    const std::string& k = ctx.kind;
    if (k == "fracmom" || k == "bs-scan") {
        require("experiment.s");
        require("experiment.re_z");
        require("experiment.im_z");
        require("experiment.pairs");
        if (ctx.kv.has("experiment.s")) {
            double s = ctx.kv.get_double("experiment.s");
            if (!(s > 0 && s < 1))
                findings.push_back({true, "s must lie in (0,1)"});
        }
        if (ctx.kv.has("experiment.im_z"))
            for (double im : ctx.kv.get_doubles("experiment.im_z"))
                if (!(im > 0 && im < 1))
                    findings.push_back({true, "Im z grid must lie in (0,1)"});
    } else if (k == "correlator") {
        require("experiment.window");
        require("experiment.pairs");
    } else if (k == "wegner") {
        require("experiment.x");
        require("experiment.e_center");
        require("experiment.widths");
    } else if (k == "lifshitz") {
        require("experiment.scales");
    } else if (k == "dynamical") {
        require("experiment.window");
        require("experiment.x");
        require("experiment.y");
    } else if (k == "rescale-check" || k == "initial-check") {
        require("experiment.s");
        require("experiment.re_z");
        require("experiment.im_z");
        if (k == "rescale-check") require("experiment.L");
        if (k == "initial-check") {
            require("experiment.C_prime");
            require("experiment.q_prime");
            require("experiment.L1");
        }
        if (ctx.kv.has("experiment.s")) {
            double s = ctx.kv.get_double("experiment.s");
            if (!(s > 0 && s < 1.0 / 3.0))
                findings.push_back({true, "rescaling requires s in (0,1/3)"});
        }
    } else if (k == "iterate") {
        require("experiment.C_prime");
        require("experiment.q_prime");
        require("experiment.L1");
        if (ctx.kv.has("experiment.q_prime")) {
            double q = ctx.kv.get_double("experiment.q_prime");
            if (!(q > 8.0 * ctx.mc.d * ctx.mc.n))
                findings.push_back({true, "q' must exceed 8dn"});
        }
    } else if (k == "schedule") {
        require("experiment.beta1");
        double p_w = ctx.kv.get_double("experiment.p_w", ctx.mc.interaction.p_w);
        double limit = (p_w + 8.0 * ctx.mc.d) / (48.0 * ctx.mc.d);
        if (!(ctx.mc.n < limit)) {
            std::ostringstream msg;
            msg << "particle count " << ctx.mc.n << " violates n < (p_w+8d)/(48d) = "
                << limit << " (schedule admissibility)";
            findings.push_back({false, msg.str()});
        }
    } else if (k == "subadd") {
        require("experiment.box_lengths");
        require("experiment.parts");
    } else if (k == "ct-check") {
        require("experiment.gaps");
        require("experiment.seps");
    } else if (k == "spectrum") {
        // no extra keys
    } else {
        findings.push_back({true, "unknown experiment kind: " + k});
    }
}

} // namespace

RunResult run(const std::string& spec_path, const Overrides& ov) {
    RunResult result;
    Context ctx;
    try {
        ctx = make_context(spec_path, ov);
        std::vector<Finding> findings;
        validate_kind(ctx, findings);
        for (const auto& f : findings)
            if (f.hard) throw std::invalid_argument(f.message);
    } catch (const std::exception& e) {
        result.exit_code = kExitConfig;
        result.message = e.what();
        return result;
    }

    int code;
    try {
        code = dispatch(ctx);
    } catch (const std::invalid_argument& e) {
        result.exit_code = kExitConfig;
        result.message = e.what();
        return result;
    } catch (const std::exception& e) {
        result.exit_code = kExitNumerical;
        result.message = e.what();
        return result;
    }

    fs::path prefix(ctx.out_prefix);
    if (prefix.has_parent_path()) fs::create_directories(prefix.parent_path());
    result.csv_path = ctx.out_prefix + ".csv";
    result.json_path = ctx.out_prefix + ".json";
    {
        std::ofstream csv(result.csv_path, std::ios::binary);
        csv << ctx.csv.str();
    }
    {
        json j;
        j["schema_version"] = kSchemaVersion;
        j["code_version"] = kCodeVersion;
        j["kind"] = ctx.kind;
        j["seed"] = ctx.run.seed;
        j["ensemble"] = ctx.run.ensemble;
        j["config_hash"] = ctx.mc.hash();
        j["spec_text"] = ctx.spec_text;
        j["results"] = ctx.meta;
        std::ofstream js(result.json_path, std::ios::binary);
        js << j.dump(2) << "\n";
    }
    result.exit_code = code;
    if (code == kExitVerdict) result.message = "hypothesis-violation verdict";
    return result;
}

std::vector<Finding> validate(const std::string& spec_path) {
    std::vector<Finding> findings;
    Context ctx;
    try {
        std::ifstream ifs(spec_path);
        if (!ifs) {
            findings.push_back({true, "cannot open spec file: " + spec_path});
            return findings;
        }
        std::ostringstream buf;
        buf << ifs.rdbuf();
        ctx.spec_text = buf.str();
        ctx.kv = config::parse_spec_text(ctx.spec_text);
        ctx.mc = config::model_from_spec(ctx.kv);
    } catch (const std::exception& e) {
        findings.push_back({true, e.what()});
        return findings;
    }
    try {
        ctx.mc.validate();
    } catch (const std::exception& e) {
        findings.push_back({true, e.what()});
    }
    double margin = model::covering_margin(ctx.mc);
    if (margin <= 0)
        findings.push_back({true, "covering condition fails (margin " + fmt_double(margin) + ")"});
    try {
        ctx.kind = ctx.kv.get_string("experiment.kind");
        ctx.run.ensemble = ctx.kv.get_long("experiment.ensemble", 100);
        if (ctx.run.ensemble < 1) findings.push_back({true, "experiment.ensemble must be >= 1"});
        validate_kind(ctx, findings);
    } catch (const std::exception& e) {
        findings.push_back({true, e.what()});
    }
    return findings;
}

} // namespace anderloc::experiment
