#pragma once

#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "anderloc/geometry.hpp"
#include "anderloc/model.hpp"
#include "anderloc/spectral.hpp"

namespace anderloc::estimators {

using geometry::Configuration;
using model::DomainN;
using model::ModelConfig;
using spectral::EnergyWindow;
using spectral::SolverOptions;

// Monte Carlo mean over disorder realizations. Aggregation is a deterministic
// ordered reduction over realization index, independent of thread count.
struct EnsembleEstimate {
    double mean = 0.0;
    double stderr_ = 0.0;
    long count = 0;
    std::uint64_t seed = 0;
    std::vector<double> samples; // retained when requested

    double rel_stderr() const { return mean != 0.0 ? stderr_ / std::abs(mean) : 0.0; }
};

EnsembleEstimate reduce_samples(const std::vector<double>& values, std::uint64_t seed,
                                bool keep_samples = false);

struct RunOptions {
    long ensemble = 100;
    std::uint64_t seed = 1;
    int threads = 1;
    bool keep_samples = false;
    SolverOptions solver;
};

// E[ || chi_x (H - z)^{-1} chi_y ||^s ]
EnsembleEstimate frac_moment(const ModelConfig& config, const DomainN& domain,
                             std::complex<double> z, const Configuration& x,
                             const Configuration& y, double s, const RunOptions& run);

// finite query grid standing in for the paper's sup over (Omega, z, x, y)
struct BsQuery {
    EnergyWindow I;
    double L = 0.0;                // all pairs must satisfy dist_H >= L
    double s = 1.0 / 3.0;
    std::vector<std::pair<Configuration, Configuration>> pairs;
    std::vector<double> re_z;
    std::vector<double> im_z;      // in (0,1)
    std::vector<DomainN> domains;

    void validate(int n, int d) const;
};

struct BsResult {
    EnsembleEstimate value;      // max over the grid
    std::size_t witness_pair = 0;
    std::size_t witness_domain = 0;
    std::complex<double> witness_z;
    std::vector<EnsembleEstimate> all; // one per grid point, ordered
};

BsResult bs_estimate(const ModelConfig& config, const BsQuery& q, const RunOptions& run);

// E[ sum_{E in sigma cap I} || chi_x P_E chi_y || ]
EnsembleEstimate ef_correlator(const ModelConfig& config, const DomainN& domain,
                               const EnergyWindow& I, const Configuration& x,
                               const Configuration& y, const RunOptions& run);

// per width w: E[ Tr(chi_x P_J) ] with J = [E_c - w/2, E_c + w/2]
struct WegnerPoint {
    double width = 0.0;
    EnsembleEstimate trace;
};
std::vector<WegnerPoint> wegner_curve(const ModelConfig& config, const DomainN& domain,
                                      const Configuration& x, double e_center,
                                      const std::vector<double>& widths, const RunOptions& run);

// empirical P( E_0(H_{B_L}) <= E_ref + 1/L ) with Wilson binomial intervals
struct LifshitzPoint {
    double L = 0.0;
    double probability = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0;
    long hits = 0, count = 0;
};
std::vector<LifshitzPoint> lifshitz_tail(const ModelConfig& config, const std::vector<double>& Ls,
                                         double e_ref, const RunOptions& run);

// per realization: (a) sup over the time grid of || chi_x e^{-itH} P_I chi_y ||
// and (b) the time-independent bound sum_E || chi_x P_E chi_y ||; a <= b always
struct DynamicalResult {
    EnsembleEstimate sup_over_time;
    EnsembleEstimate correlator_bound;
    bool domination_ok = true; // (a) <= (b) held in every realization
};
DynamicalResult dynamical_proxy(const ModelConfig& config, const DomainN& domain,
                                const EnergyWindow& I, const Configuration& x,
                                const Configuration& y, const std::vector<double>& times,
                                const RunOptions& run);

// localization center (argmax cell mass, lexicographic tie-break) and the
// cell-mass decay profile of each eigenfunction in the window
struct DecayProfileRecord {
    double eigenvalue = 0.0;
    Eigen::MatrixXd center; // d x n integer configuration
    std::vector<std::pair<double, double>> samples; // (dist_H from center, cell mass)
};
std::vector<DecayProfileRecord> eigenfunction_decay_profile(const model::SparseOperator& H,
                                                            const spectral::EigenSet& eig);

// probability estimate for E_0 used in window labels: min over a calibration
// ensemble minus two standard errors
double estimate_ground_energy_floor(const ModelConfig& config, const DomainN& domain,
                                    const RunOptions& run);

} // namespace anderloc::estimators
