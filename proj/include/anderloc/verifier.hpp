#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "anderloc/estimators.hpp"
#include "anderloc/model.hpp"

namespace anderloc::verifier {

using estimators::EnsembleEstimate;

struct DecaySample {
    double dist = 0.0;
    double value = 0.0;
    double stderr_ = 0.0;
};

// fit of value ~ C exp(-mu dist^gamma), weighted least squares on logs
struct DecayFit {
    double C = 0.0;
    double mu = 0.0;
    double gamma = 1.0;
    double residual = 0.0; // weighted RMS of log residuals
    bool free_gamma = false;

    bool localized() const { return mu > 0.0; }
};

inline std::vector<double> default_gamma_grid() { return {0.25, 1.0 / 3.0, 0.5, 2.0 / 3.0, 1.0}; }

DecayFit fit_decay(const std::vector<DecaySample>& samples,
                   const std::vector<double>& gamma_grid = default_gamma_grid());
// nonconvex; flagged via free_gamma = true in the result
DecayFit fit_decay_free_gamma(const std::vector<DecaySample>& samples);

struct RescalingConstants {
    double C = 1.0;         // the scale-independent constant of the inequality
    double nu2 = 1.0;
    double alpha = 0.5;     // in (0,1]
    double gamma_star = 1.0;
    double s = 1.0 / 3.0;   // must lie in (0,1/3)
    int d = 1;
    int n = 1;
    double R = 6.5;         // safety distance r_U + 6
    model::InteractionSpec wb;
    double wb_reg = 1.0;
};

// B(2L + 2L^a + 9R) <= C ( L^{8dn} B(L+L^a)^2 + e^{-nu2 L^{a g*}}
//                          + L^{(5+a)nd} w_b(L^a/4n)^s B(2L) );
// for n = 1 only the first summand appears
struct RescalingReport {
    double L = 0.0;
    double lhs = 0.0, lhs_err = 0.0;
    double rhs = 0.0, rhs_err = 0.0;
    double term_sq = 0.0, term_exp = 0.0, term_int = 0.0; // before the C factor
    double C_min = 0.0; // smallest C making the inequality hold
    bool satisfied = false; // at 2 sigma, with the supplied C
};
RescalingReport rescaling_check(const EnsembleEstimate& B_mid, const EnsembleEstimate& B_2L,
                                const EnsembleEstimate& B_big, const RescalingConstants& k,
                                double L);

enum class IterationVariant { Polynomial, Exponential };

struct IterationStep {
    double L_lo = 0.0, L_hi = 0.0; // interval gained by this step
    double t1 = 0.0, t2 = 0.0, t3 = 0.0; // worst third-terms over the step
    bool ok = false;
};

struct IterationReport {
    double beta = 0.0;
    double nu_prime = 0.0;
    std::vector<IterationStep> steps;
    bool closed = false;           // every step had all terms <= 1/3
    double first_failure_L = -1.0; // L1 at the first failing step, if any
    std::string hypothesis_issue;  // nonempty when a hypothesis is violated
};

// pure-arithmetic replication of the decay iteration; the initial bound
// B(L) <= C' L^{-q'} on the seed interval is the caller's responsibility
IterationReport iterate_corollary(double C_prime, double q_prime, double L1,
                                  const RescalingConstants& k, IterationVariant variant,
                                  int max_steps = 16);

struct Schedule {
    std::vector<double> alpha; // alpha^{(k)}, k = 1..n (alpha^{(1)} = 1)
    std::vector<double> beta;  // beta^{(k)}
    int max_particles = 0;     // largest n with n < (p_w + 8d)/(48d)
};
Schedule exponent_schedule(double beta1, int n, int d, double p_w);

struct InitialScalePoint {
    double L = 0.0;
    double B = 0.0, B_err = 0.0;
    double bound = 0.0;
    bool ok = false;
};
struct InitialScaleReport {
    std::vector<InitialScalePoint> points;
    bool all_ok = false;
    double alpha_margin_rhs = 0.0; // C'(4L1+9R)^{-q'}/(2C)
    bool perturbative_margin_ok = false;
};
InitialScaleReport initial_scale_check(const std::vector<std::pair<double, EnsembleEstimate>>& B_samples,
                                       double C_prime, double q_prime, double L1, double R,
                                       double alpha_w, double s, double C);

struct SubadditivityReport {
    double whole = 0.0, whole_err = 0.0;
    double parts_sum = 0.0, parts_err = 0.0;
    double tolerance = 0.0; // 3 * combined stderr + finite-volume allowance
    double gap = 0.0;       // parts_sum - whole (>= -tolerance when ok)
    bool ok = false;
};
SubadditivityReport subadditivity_check(const EnsembleEstimate& whole,
                                        const std::vector<EnsembleEstimate>& parts,
                                        double allowance = 0.0);

struct CtGapResult {
    double gap = 0.0;
    DecayFit fit;
    double mu0_empirical = 0.0; // mu * (1+|z|+g)/g
    bool skipped = false;       // gap <= 0: hypothesis void
};
struct CtReport {
    std::vector<CtGapResult> gaps;
    bool rates_positive = false;
    bool nondecreasing = false;
    bool amplitude_ok = false;
};
// fits_by_gap: (gap, fit, |z|) triples; C0 <= 0 disables the amplitude check
CtReport ct_check(const std::vector<std::tuple<double, DecayFit, double>>& fits_by_gap,
                  double C0 = -1.0, double slack = 0.5, double rate_slack = 0.05);

} // namespace anderloc::verifier
