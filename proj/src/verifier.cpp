#include "anderloc/verifier.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace anderloc::verifier {

namespace {

// weighted LS of log(value) = log(C) - mu * dist^gamma for fixed gamma;
// weights are (value/stderr)^2 (delta method), or 1 when stderr is absent
DecayFit fit_for_gamma(const std::vector<DecaySample>& samples, double gamma) {
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (const auto& p : samples) {
        double x = std::pow(p.dist, gamma);
        double y = std::log(p.value);
        double w = 1.0;
        if (p.stderr_ > 0) {
            double sln = p.stderr_ / p.value;
            w = 1.0 / (sln * sln);
        }
        sw += w;
        sx += w * x;
        sy += w * y;
        sxx += w * x * x;
        sxy += w * x * y;
    }
    double det = sw * sxx - sx * sx;
    if (std::abs(det) < 1e-300) throw std::invalid_argument("fit_decay: degenerate distances");
    double slope = (sw * sxy - sx * sy) / det;
    double intercept = (sxx * sy - sx * sxy) / det;
    DecayFit fit;
    fit.gamma = gamma;
    fit.mu = -slope;
    fit.C = std::exp(intercept);
    double rss = 0;
    for (const auto& p : samples) {
        double x = std::pow(p.dist, gamma);
        double w = 1.0;
        if (p.stderr_ > 0) {
            double sln = p.stderr_ / p.value;
            w = 1.0 / (sln * sln);
        }
        double r = std::log(p.value) - (intercept + slope * x);
        rss += w * r * r;
    }
    fit.residual = std::sqrt(rss / sw);
    return fit;
}

void check_samples(const std::vector<DecaySample>& samples) {
    std::set<double> dists;
    for (const auto& p : samples) {
        if (!(p.value > 0)) throw std::invalid_argument("fit_decay: values must be positive");
        if (!(p.dist > 0)) throw std::invalid_argument("fit_decay: distances must be positive");
        dists.insert(p.dist);
    }
    if (dists.size() < 3)
        throw std::invalid_argument("fit_decay: need at least 3 distinct distances");
}

} // namespace

DecayFit fit_decay(const std::vector<DecaySample>& samples, const std::vector<double>& gamma_grid) {
    check_samples(samples);
    if (gamma_grid.empty()) throw std::invalid_argument("fit_decay: empty gamma grid");
    DecayFit best;
    bool first = true;
    for (double g : gamma_grid) {
        auto f = fit_for_gamma(samples, g);
        if (first || f.residual < best.residual) {
            best = f;
            first = false;
        }
    }
    return best;
}

DecayFit fit_decay_free_gamma(const std::vector<DecaySample>& samples) {
    check_samples(samples);
    // golden-section on gamma in (0.05, 1]
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = 0.05, b = 1.0;
    double c = b - phi * (b - a), d = a + phi * (b - a);
    double fc = fit_for_gamma(samples, c).residual;
    double fd = fit_for_gamma(samples, d).residual;
    for (int it = 0; it < 80; ++it) {
        if (fc < fd) {
            b = d; d = c; fd = fc;
            c = b - phi * (b - a);
            fc = fit_for_gamma(samples, c).residual;
        } else {
            a = c; c = d; fc = fd;
            d = a + phi * (b - a);
            fd = fit_for_gamma(samples, d).residual;
        }
    }
    auto fit = fit_for_gamma(samples, 0.5 * (a + b));
    fit.free_gamma = true;
    return fit;
}

RescalingReport rescaling_check(const EnsembleEstimate& B_mid, const EnsembleEstimate& B_2L,
                                const EnsembleEstimate& B_big, const RescalingConstants& k,
                                double L) {
    if (!(k.s > 0 && k.s < 1.0 / 3.0))
        throw std::invalid_argument("rescaling_check requires s in (0,1/3)");
    if (!(k.alpha > 0 && k.alpha <= 1)) throw std::invalid_argument("alpha must lie in (0,1]");
    RescalingReport rep;
    rep.L = L;
    const double dn = static_cast<double>(k.d) * k.n;
    const double La = std::pow(L, k.alpha);

    rep.term_sq = std::pow(L, 8.0 * dn) * B_mid.mean * B_mid.mean;
    double term_sq_err = std::pow(L, 8.0 * dn) * 2.0 * std::abs(B_mid.mean) * B_mid.stderr_;
    if (k.n == 1) {
        rep.term_exp = 0.0;
        rep.term_int = 0.0;
    } else {
        rep.term_exp = std::exp(-k.nu2 * std::pow(L, k.alpha * k.gamma_star));
        rep.term_int = std::pow(L, (5.0 + k.alpha) * dn) *
                       std::pow(k.wb.bound(La / (4.0 * k.n), k.wb_reg), k.s) * B_2L.mean;
    }
    double term_int_err =
        k.n == 1 ? 0.0
                 : std::pow(L, (5.0 + k.alpha) * dn) *
                       std::pow(k.wb.bound(La / (4.0 * k.n), k.wb_reg), k.s) * B_2L.stderr_;

    double inner = rep.term_sq + rep.term_exp + rep.term_int;
    rep.rhs = k.C * inner;
    rep.rhs_err = k.C * std::sqrt(term_sq_err * term_sq_err + term_int_err * term_int_err);
    rep.lhs = B_big.mean;
    rep.lhs_err = B_big.stderr_;
    rep.C_min = inner > 0 ? rep.lhs / inner : 0.0;
    rep.satisfied = rep.lhs - 2.0 * rep.lhs_err <= rep.rhs + 2.0 * rep.rhs_err;
    return rep;
}

IterationReport iterate_corollary(double C_prime, double q_prime, double L1,
                                  const RescalingConstants& k, IterationVariant variant,
                                  int max_steps) {
    IterationReport rep;
    const double dn = static_cast<double>(k.d) * k.n;
    if (!(q_prime > 8.0 * dn)) {
        rep.hypothesis_issue = "q' must exceed 8dn";
        return rep;
    }
    if (!(k.s > 0 && k.s < 1.0 / 3.0)) {
        rep.hypothesis_issue = "s must lie in (0,1/3)";
        return rep;
    }

    double alpha, beta, nu;
    if (variant == IterationVariant::Polynomial) {
        if (k.wb.kind != model::InteractionSpec::Kind::Polynomial &&
            k.wb.kind != model::InteractionSpec::Kind::HardCore) {
            rep.hypothesis_issue = "polynomial variant needs a polynomial interaction bound";
            return rep;
        }
        alpha = k.alpha;
        if (!(alpha > 0 && alpha < 1)) {
            rep.hypothesis_issue = "polynomial variant needs alpha in (0,1)";
            return rep;
        }
        if (!(alpha * k.wb.p_w * k.s > (5.0 + alpha) * dn)) {
            rep.hypothesis_issue = "alpha p_w s > (5+alpha)nd fails";
            return rep;
        }
        beta = std::min(alpha * k.gamma_star, 1.0 - alpha);
        nu = std::min(std::log(2.0) / std::pow(4.0 * L1, beta),
                      k.nu2 / (std::pow(5.0, beta) * 2.0));
    } else {
        if (k.wb.kind != model::InteractionSpec::Kind::Exponential) {
            rep.hypothesis_issue = "exponential variant needs an exponential interaction bound";
            return rep;
        }
        alpha = 1.0;
        beta = k.gamma_star;
        nu = std::min({std::log(2.0) / std::pow(4.0 * L1 + 9.0 * k.R, k.gamma_star),
                       k.nu2 / (std::pow(5.0, k.gamma_star) * 2.0),
                       k.s * k.wb.mu_w / (2.0 * std::pow(20.0 * k.n, k.gamma_star))});
    }
    rep.beta = beta;
    rep.nu_prime = nu;

    // Each step certifies the inequality for L in [Lk, 2Lk] and extends the
    // validity interval to [L1, 4Lk + 2 2^a Lk^a + 9R]; the three terms are
    // evaluated on a grid over the step.
    double Lk = L1;
    rep.closed = true;
    for (int step = 0; step < max_steps; ++step) {
        IterationStep st;
        st.L_lo = Lk;
        st.L_hi = 2.0 * Lk;
        double worst1 = 0, worst2 = 0, worst3 = 0;
        const int grid = 64;
        for (int gi = 0; gi <= grid; ++gi) {
            double L = Lk + (2.0 * Lk - Lk) * gi / grid;
            double La = std::pow(L, alpha);
            double t1, t2, t3;
            if (variant == IterationVariant::Polynomial) {
                double big = 2.0 * L + 2.0 * La + 9.0 * k.R;
                t1 = std::pow(5.0, q_prime) * 2.0 * C_prime * k.C * std::pow(L, 8.0 * dn - q_prime) *
                     std::exp(nu * std::pow(big, beta) - 2.0 * nu * std::pow(L + La, beta));
                t2 = (k.C / (2.0 * C_prime)) * std::pow(5.0, q_prime) * std::pow(L, q_prime) *
                     std::exp(nu * std::pow(5.0, beta) * std::pow(L, beta) -
                              k.nu2 * std::pow(L, alpha * k.gamma_star));
                t3 = std::pow(3.0, q_prime) * k.C * std::pow(L, (5.0 + alpha) * dn) *
                     std::pow(k.wb.c_w, k.s) * std::pow(La / (4.0 * k.n), -k.wb.p_w * k.s) *
                     std::exp(nu * (std::pow(big, beta) - std::pow(2.0 * L, beta)));
            } else {
                double big = 4.0 * L + 9.0 * k.R;
                t1 = std::pow(5.0, q_prime) * 2.0 * C_prime * k.C * std::pow(L, 8.0 * dn - q_prime) *
                     std::exp(nu * std::pow(big, k.gamma_star) -
                              2.0 * nu * std::pow(2.0 * L, k.gamma_star));
                t2 = (k.C / (2.0 * C_prime)) * std::pow(5.0, q_prime) * std::pow(L, q_prime) *
                     std::exp(nu * std::pow(5.0 * L, k.gamma_star) -
                              k.nu2 * std::pow(L, k.gamma_star));
                t3 = std::pow(3.0, q_prime) * k.C * std::pow(L, 6.0 * dn) * std::pow(k.wb.c_w, k.s) *
                     std::exp(-k.s * k.wb.mu_w * std::pow(L / (4.0 * k.n), k.gamma_star)) *
                     std::exp(nu * (std::pow(5.0 * L, k.gamma_star) -
                                    std::pow(2.0 * L, k.gamma_star)));
            }
            if (k.n == 1) { t2 = 0.0; t3 = 0.0; }
            worst1 = std::max(worst1, t1);
            worst2 = std::max(worst2, t2);
            worst3 = std::max(worst3, t3);
        }
        st.t1 = worst1;
        st.t2 = worst2;
        st.t3 = worst3;
        st.ok = worst1 <= 1.0 / 3.0 && worst2 <= 1.0 / 3.0 && worst3 <= 1.0 / 3.0;
        rep.steps.push_back(st);
        if (!st.ok && rep.closed) {
            rep.closed = false;
            rep.first_failure_L = Lk;
        }
        Lk *= 2.0;
    }
    return rep;
}

Schedule exponent_schedule(double beta1, int n, int d, double p_w) {
    if (!(beta1 > 0 && beta1 <= 1)) throw std::invalid_argument("beta1 must lie in (0,1]");
    if (n < 1 || d < 1 || p_w <= 0) throw std::invalid_argument("n, d, p_w must be positive");
    Schedule s;
    s.alpha.resize(n);
    s.beta.resize(n);
    for (int kk = 1; kk <= n; ++kk) {
        if (kk == 1) {
            s.alpha[0] = 1.0;
            s.beta[0] = beta1;
        } else {
            s.alpha[kk - 1] = (1.0 + (kk - 2) * beta1) / (1.0 + (kk - 1) * beta1);
            s.beta[kk - 1] = beta1 / (1.0 + (kk - 1) * beta1);
        }
    }
    double limit = (p_w + 8.0 * d) / (48.0 * d);
    int nmax = static_cast<int>(std::ceil(limit)) - 1;
    while (nmax >= 0 && !(nmax < limit)) --nmax;
    s.max_particles = std::max(0, nmax);
    return s;
}

InitialScaleReport initial_scale_check(
    const std::vector<std::pair<double, EnsembleEstimate>>& B_samples, double C_prime,
    double q_prime, double L1, double R, double alpha_w, double s, double C) {
    if (B_samples.size() < 3)
        throw std::invalid_argument("initial_scale_check: need at least 3 sampled scales");
    InitialScaleReport rep;
    rep.all_ok = true;
    for (const auto& [L, est] : B_samples) {
        InitialScalePoint p;
        p.L = L;
        p.B = est.mean;
        p.B_err = est.stderr_;
        p.bound = C_prime * std::pow(L, -q_prime);
        p.ok = est.mean - 2.0 * est.stderr_ <= p.bound;
        rep.all_ok = rep.all_ok && p.ok;
        rep.points.push_back(p);
    }
    rep.alpha_margin_rhs = C_prime * std::pow(4.0 * L1 + 9.0 * R, -q_prime) / (2.0 * C);
    rep.perturbative_margin_ok = std::pow(alpha_w, s) <= rep.alpha_margin_rhs;
    return rep;
}

SubadditivityReport subadditivity_check(const EnsembleEstimate& whole,
                                        const std::vector<EnsembleEstimate>& parts,
                                        double allowance) {
    if (parts.empty()) throw std::invalid_argument("subadditivity_check: no parts");
    SubadditivityReport rep;
    rep.whole = whole.mean;
    rep.whole_err = whole.stderr_;
    double var = whole.stderr_ * whole.stderr_;
    for (const auto& p : parts) {
        rep.parts_sum += p.mean;
        var += p.stderr_ * p.stderr_;
    }
    rep.parts_err = std::sqrt(var - whole.stderr_ * whole.stderr_);
    rep.tolerance = 3.0 * std::sqrt(var) + allowance;
    rep.gap = rep.parts_sum - rep.whole;
    rep.ok = rep.whole <= rep.parts_sum + rep.tolerance;
    return rep;
}

CtReport ct_check(const std::vector<std::tuple<double, DecayFit, double>>& fits_by_gap, double C0,
                  double slack, double rate_slack) {
    CtReport rep;
    rep.rates_positive = true;
    rep.nondecreasing = true;
    rep.amplitude_ok = true;
    double prev_mu = -1.0;
    for (const auto& [gap, fit, zabs] : fits_by_gap) {
        CtGapResult r;
        r.gap = gap;
        r.fit = fit;
        if (gap <= 0) {
            r.skipped = true;
            rep.gaps.push_back(r);
            continue;
        }
        r.mu0_empirical = fit.mu * (1.0 + zabs + gap) / gap;
        if (!(fit.mu > 0)) rep.rates_positive = false;
        if (prev_mu >= 0 && fit.mu < prev_mu * (1.0 - rate_slack)) rep.nondecreasing = false;
        if (C0 > 0 && fit.C > (C0 / gap) * (1.0 + slack)) rep.amplitude_ok = false;
        prev_mu = std::max(prev_mu, fit.mu);
        rep.gaps.push_back(r);
    }
    return rep;
}

} // namespace anderloc::verifier
