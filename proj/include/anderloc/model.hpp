#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "anderloc/geometry.hpp"
#include "anderloc/grid.hpp"
#include "anderloc/rng.hpp"

namespace anderloc::model {

using grid::Box;
using grid::Domain;
using grid::Grid1;
using grid::GridN;
using grid::Mode;

// Single-site bump U >= 0, supported in the max-norm ball of radius r_u.
struct SingleSiteProfile {
    enum class Shape { Box, Tent, SmoothBump };
    Shape shape = Shape::Box;
    double amplitude = 1.0;
    double r_u = 0.5;

    double operator()(const Eigen::VectorXd& y) const;
};

struct DisorderDistribution {
    enum class Kind { Uniform, TruncExp };
    Kind kind = Kind::Uniform;
    double eta_max = 1.0;

    // inverse-CDF transform of a uniform [0,1) draw; support is [0, eta_max]
    double sample(double u01) const;
};

struct InteractionSpec {
    enum class Kind { None, Exponential, Polynomial, HardCore };
    enum class Sign { Repulsive, Signed }; // Signed = attractive (-w_b)
    Kind kind = Kind::None;
    Sign sign = Sign::Repulsive;
    double c_w = 1.0;
    double mu_w = 1.0;
    double gamma_w = 1.0;
    double p_w = 2.0;
    double core_radius = 1.0;

    // monotone majorant w_b(r); polynomial kinds are capped at w_b(reg) so the
    // potential stays bounded (reg = grid spacing, or the hard core radius)
    double bound(double r, double reg) const;
    // the pair potential itself, |w| <= w_b
    double value(double r, double reg) const;
};

// Z^d-periodic bounded background V_0.
struct BackgroundSpec {
    enum class Kind { Zero, Constant, Cosine };
    Kind kind = Kind::Zero;
    double amplitude = 0.0;

    double operator()(const Eigen::VectorXd& x) const;
};

struct ModelConfig {
    int d = 1;
    int n = 1;
    Mode mode = Mode::Lattice;
    double h = 1.0; // grid spacing; 1/h must be an integer (continuum mode)
    Domain domain;  // union of boxes in R^d
    BackgroundSpec background;
    SingleSiteProfile single_site;
    DisorderDistribution disorder;
    InteractionSpec interaction;
    double alpha_w = 0.0;

    double safety_R() const { return single_site.r_u + 6.0; }
    double spacing() const { return mode == Mode::Lattice ? 1.0 : h; }
    // regularization radius for interaction caps
    double interaction_reg() const {
        return interaction.kind == InteractionSpec::Kind::HardCore
                   ? interaction.core_radius
                   : spacing();
    }

    // throws std::invalid_argument on any violated invariant
    void validate() const;
    std::uint64_t hash() const;
};

// i.i.d. couplings eta_zeta on the lattice sites within reach (r_U) of the
// domain; each value is a pure function of (seed, index, zeta).
struct DisorderSample {
    std::uint64_t seed = 0;
    std::uint64_t index = 0;
    std::vector<Eigen::VectorXi> sites;
    std::vector<double> values;

    double value_at(const Eigen::VectorXi& site) const;
};

DisorderSample sample_disorder(const ModelConfig& config, std::uint64_t seed, std::uint64_t index);

// coupling value for one site without materializing the whole sample
double disorder_value(const ModelConfig& config, std::uint64_t seed, std::uint64_t index,
                      const Eigen::VectorXi& site);

struct SparseOperator {
    Eigen::SparseMatrix<double> mat;
    std::shared_ptr<const GridN> grid;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::uint64_t realization = 0;

    long dim() const { return mat.rows(); }
};

// n-particle domain: one box per particle (defaults to the same box for all).
struct DomainN {
    std::vector<Domain> particle_domains;

    static DomainN cube(const Domain& dom, int n) {
        DomainN out;
        out.particle_domains.assign(static_cast<std::size_t>(n), dom);
        return out;
    }
};

std::shared_ptr<const GridN> build_grid(const ModelConfig& config, const DomainN& domain_n);

// H = -Delta_h (Dirichlet) + V_0 + sum_zeta eta_zeta N_zeta + alpha_W W,
// N_zeta(x) = sum_j U(x_j - zeta), W(x) = sum_{j<k} w(x_j - x_k).
SparseOperator assemble_hamiltonian(const ModelConfig& config, const DomainN& domain_n,
                                    const DisorderSample& disorder);

// same, but interaction terms crossing the partition are dropped
SparseOperator assemble_partial(const ModelConfig& config, const DomainN& domain_n,
                                const DisorderSample& disorder, const geometry::Partition& p);

// min over one period cell of sum_zeta U(x - zeta); must be > 0 (covering condition)
double covering_margin(const ModelConfig& config);

// total interaction W(x) at a configuration (diagnostics / tests)
double interaction_at(const ModelConfig& config, const Eigen::MatrixXd& pts);

// coordinate text dump (row, col, value per line) for debugging
void dump_coordinate_format(const SparseOperator& op, const std::string& path);

} // namespace anderloc::model
