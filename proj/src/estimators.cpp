#include "anderloc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "anderloc/parallel.hpp"

namespace anderloc::estimators {

using geometry::CellIndex;
using model::SparseOperator;
using spectral::EigenSet;

EnsembleEstimate reduce_samples(const std::vector<double>& values, std::uint64_t seed,
                                bool keep_samples) {
    EnsembleEstimate est;
    est.seed = seed;
    est.count = static_cast<long>(values.size());
    if (values.empty()) return est;
    double sum = 0.0;
    for (double v : values) sum += v;
    est.mean = sum / est.count;
    if (est.count >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - est.mean) * (v - est.mean);
        est.stderr_ = std::sqrt(ss / (est.count - 1)) / std::sqrt(static_cast<double>(est.count));
    }
    if (keep_samples) est.samples = values;
    return est;
}

namespace {

// one value per realization, computed in parallel, reduced in index order;
// any solver failure aborts the whole estimate (no silent dropping)
EnsembleEstimate ensemble_map(const ModelConfig& config, const RunOptions& run,
                              const std::function<double(const SparseOperator&)>& fn,
                              const DomainN& domain) {
    std::vector<double> values(static_cast<std::size_t>(run.ensemble));
    parallel_for(run.ensemble, run.threads, [&](long i) {
        auto dis = model::sample_disorder(config, run.seed, static_cast<std::uint64_t>(i));
        auto H = model::assemble_hamiltonian(config, domain, dis);
        values[static_cast<std::size_t>(i)] = fn(H);
    });
    return reduce_samples(values, run.seed, run.keep_samples);
}

} // namespace

EnsembleEstimate frac_moment(const ModelConfig& config, const DomainN& domain,
                             std::complex<double> z, const Configuration& x,
                             const Configuration& y, double s, const RunOptions& run) {
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("fractional power s must lie in (0,1)");
    if (z.imag() == 0.0) throw std::invalid_argument("frac_moment requires Im z != 0");
    return ensemble_map(
        config, run,
        [&](const SparseOperator& H) {
            return std::pow(spectral::resolvent_block_norm(H, z, x, y, run.solver), s);
        },
        domain);
}

void BsQuery::validate(int n, int d) const {
    if (pairs.empty() || re_z.empty() || im_z.empty() || domains.empty())
        throw std::invalid_argument("bs query requires nonempty pair, z and domain grids");
    if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("s must lie in (0,1)");
    for (double im : im_z)
        if (!(im > 0.0 && im < 1.0)) throw std::invalid_argument("Im z grid must lie in (0,1)");
    for (const auto& [x, y] : pairs) {
        if (x.n() != n || x.d() != d || y.n() != n || y.d() != d)
            throw std::invalid_argument("pair configuration dimensions mismatch");
        if (geometry::hausdorff_dist(x, y) < L)
            throw std::invalid_argument("pair violates dist_H >= L");
    }
}

BsResult bs_estimate(const ModelConfig& config, const BsQuery& q, const RunOptions& run) {
    q.validate(config.n, config.d);
    BsResult out;
    bool first = true;
    for (std::size_t di = 0; di < q.domains.size(); ++di) {
        for (std::size_t pi = 0; pi < q.pairs.size(); ++pi) {
            for (double re : q.re_z) {
                for (double im : q.im_z) {
                    std::complex<double> z(re, im);
                    auto est = frac_moment(config, q.domains[di], z, q.pairs[pi].first,
                                           q.pairs[pi].second, q.s, run);
                    out.all.push_back(est);
                    if (first || est.mean > out.value.mean) {
                        out.value = est;
                        out.witness_pair = pi;
                        out.witness_domain = di;
                        out.witness_z = z;
                        first = false;
                    }
                }
            }
        }
    }
    return out;
}

EnsembleEstimate ef_correlator(const ModelConfig& config, const DomainN& domain,
                               const EnergyWindow& I, const Configuration& x,
                               const Configuration& y, const RunOptions& run) {
    return ensemble_map(
        config, run,
        [&](const SparseOperator& H) {
            auto eig = spectral::eigenpairs_in_window(H, I, run.solver);
            auto cx = geometry::cell_indicator(x, *H.grid);
            auto cy = geometry::cell_indicator(y, *H.grid);
            if (cx.empty() || cy.empty())
                throw std::invalid_argument("ef_correlator: empty cell");
            return spectral::projector_block_norms(eig, cx, cy).sum;
        },
        domain);
}

std::vector<WegnerPoint> wegner_curve(const ModelConfig& config, const DomainN& domain,
                                      const Configuration& x, double e_center,
                                      const std::vector<double>& widths, const RunOptions& run) {
    for (double w : widths)
        if (w < 0) throw std::invalid_argument("widths must be >= 0");
    double wmax = *std::max_element(widths.begin(), widths.end());
    EnergyWindow big{e_center - wmax / 2, e_center + wmax / 2, ""};

    std::vector<std::vector<double>> per_width(widths.size(),
                                               std::vector<double>(run.ensemble));
    parallel_for(run.ensemble, run.threads, [&](long i) {
        auto dis = model::sample_disorder(config, run.seed, static_cast<std::uint64_t>(i));
        auto H = model::assemble_hamiltonian(config, domain, dis);
        auto eig = spectral::eigenpairs_in_window(H, big, run.solver);
        auto cx = geometry::cell_indicator(x, *H.grid);
        if (cx.empty()) throw std::invalid_argument("wegner_curve: empty cell");
        for (std::size_t wi = 0; wi < widths.size(); ++wi) {
            double lo = e_center - widths[wi] / 2, hi = e_center + widths[wi] / 2;
            double tr = 0.0;
            for (int k = 0; k < eig.count(); ++k) {
                if (eig.values[k] < lo || eig.values[k] > hi) continue;
                for (long node : cx) tr += eig.vectors(node, k) * eig.vectors(node, k);
            }
            per_width[wi][static_cast<std::size_t>(i)] = tr;
        }
    });

    std::vector<WegnerPoint> out;
    for (std::size_t wi = 0; wi < widths.size(); ++wi)
        out.push_back({widths[wi], reduce_samples(per_width[wi], run.seed, run.keep_samples)});
    return out;
}

std::vector<LifshitzPoint> lifshitz_tail(const ModelConfig& config, const std::vector<double>& Ls,
                                         double e_ref, const RunOptions& run) {
    std::vector<LifshitzPoint> out;
    for (double L : Ls) {
        // B_L: max-norm ball of radius L about the domain center, clipped to
        // the configured domain so admissibility holds for every L
        grid::Box ball;
        ball.lo.resize(config.d);
        ball.hi.resize(config.d);
        for (int c = 0; c < config.d; ++c) {
            double mid = 0.5 * (config.domain[0].lo[c] + config.domain[0].hi[c]);
            ball.lo[c] = std::max(mid - L, config.domain[0].lo[c]);
            ball.hi[c] = std::min(mid + L, config.domain[0].hi[c]);
        }
        DomainN dn = DomainN::cube(grid::Domain{ball}, config.n);
        std::vector<double> hits(static_cast<std::size_t>(run.ensemble));
        parallel_for(run.ensemble, run.threads, [&](long i) {
            auto dis = model::sample_disorder(config, run.seed, static_cast<std::uint64_t>(i));
            auto H = model::assemble_hamiltonian(config, dn, dis);
            double e0 = spectral::ground_energy(H, run.solver);
            hits[static_cast<std::size_t>(i)] = (e0 <= e_ref + 1.0 / L) ? 1.0 : 0.0;
        });
        long k = 0;
        for (double h : hits) k += static_cast<long>(h);
        const double nn = static_cast<double>(run.ensemble);
        const double p = k / nn;
        const double zq = 1.959963984540054; // 95% Wilson interval
        const double denom = 1.0 + zq * zq / nn;
        const double center = (p + zq * zq / (2 * nn)) / denom;
        const double half = zq * std::sqrt(p * (1 - p) / nn + zq * zq / (4 * nn * nn)) / denom;
        out.push_back({L, p, std::max(0.0, center - half), std::min(1.0, center + half), k,
                       run.ensemble});
    }
    return out;
}

DynamicalResult dynamical_proxy(const ModelConfig& config, const DomainN& domain,
                                const EnergyWindow& I, const Configuration& x,
                                const Configuration& y, const std::vector<double>& times,
                                const RunOptions& run) {
    if (times.empty()) throw std::invalid_argument("dynamical_proxy: empty time grid");
    std::vector<double> sup_vals(static_cast<std::size_t>(run.ensemble));
    std::vector<double> bound_vals(static_cast<std::size_t>(run.ensemble));
    std::vector<char> dominated(static_cast<std::size_t>(run.ensemble), 1);
    parallel_for(run.ensemble, run.threads, [&](long i) {
        auto dis = model::sample_disorder(config, run.seed, static_cast<std::uint64_t>(i));
        auto H = model::assemble_hamiltonian(config, domain, dis);
        auto eig = spectral::eigenpairs_in_window(H, I, run.solver);
        auto cx = geometry::cell_indicator(x, *H.grid);
        auto cy = geometry::cell_indicator(y, *H.grid);
        if (cx.empty() || cy.empty()) throw std::invalid_argument("dynamical_proxy: empty cell");

        auto blocks = spectral::projector_block_norms(eig, cx, cy);
        double bound = blocks.sum;

        // chi_x e^{-itH} P_I chi_y via spectral synthesis on the cell block
        double sup_t = 0.0;
        const int m = eig.count();
        std::vector<Eigen::MatrixXd> outer(m);
        for (int k = 0; k < m; ++k) {
            Eigen::VectorXd vx(cx.size()), vy(cy.size());
            for (std::size_t a = 0; a < cx.size(); ++a) vx[a] = eig.vectors(cx[a], k);
            for (std::size_t b = 0; b < cy.size(); ++b) vy[b] = eig.vectors(cy[b], k);
            outer[k] = vx * vy.transpose();
        }
        for (double t : times) {
            Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(cx.size(), cy.size());
            for (int k = 0; k < m; ++k)
                block += std::exp(std::complex<double>(0.0, -t * eig.values[k])) *
                         outer[k].cast<std::complex<double>>();
            sup_t = std::max(sup_t, spectral::operator_norm(block));
        }
        sup_vals[static_cast<std::size_t>(i)] = sup_t;
        bound_vals[static_cast<std::size_t>(i)] = bound;
        if (sup_t > bound + 1e-10 * std::max(1.0, bound))
            dominated[static_cast<std::size_t>(i)] = 0;
    });
    DynamicalResult out;
    out.sup_over_time = reduce_samples(sup_vals, run.seed, run.keep_samples);
    out.correlator_bound = reduce_samples(bound_vals, run.seed, run.keep_samples);
    out.domination_ok = std::all_of(dominated.begin(), dominated.end(), [](char c) { return c; });
    return out;
}

std::vector<DecayProfileRecord> eigenfunction_decay_profile(const SparseOperator& H,
                                                            const EigenSet& eig) {
    const auto& g = *H.grid;
    const int n = g.particles();
    const int d = g.dim();

    // complete disjoint tiling: node -> nearest integer configuration,
    // half-integer ties resolved downward (cells [u-1/2, u+1/2) per axis)
    std::vector<long> node_cell(g.size());
    std::vector<Eigen::MatrixXd> cell_configs;
    std::unordered_map<std::uint64_t, long> cell_ids;
    std::vector<std::vector<long>> cell_nodes;
    for (long id = 0; id < g.size(); ++id) {
        Eigen::MatrixXd pos = g.position(id);
        Eigen::MatrixXd u(d, n);
        std::uint64_t key = 0xcbf29ce484222325ULL;
        for (int j = 0; j < n; ++j)
            for (int c = 0; c < d; ++c) {
                u(c, j) = std::floor(pos(c, j) + 0.5);
                key = CounterRng::mix(key ^ static_cast<std::uint64_t>(
                                                static_cast<std::int64_t>(u(c, j)) + (1 << 20)));
            }
        auto it = cell_ids.find(key);
        long cid;
        if (it == cell_ids.end()) {
            cid = static_cast<long>(cell_configs.size());
            cell_ids.emplace(key, cid);
            cell_configs.push_back(u);
            cell_nodes.emplace_back();
        } else {
            cid = it->second;
        }
        node_cell[id] = cid;
        cell_nodes[static_cast<std::size_t>(cid)].push_back(id);
    }

    std::vector<DecayProfileRecord> out;
    for (int k = 0; k < eig.count(); ++k) {
        std::vector<double> mass(cell_configs.size(), 0.0);
        for (long id = 0; id < g.size(); ++id)
            mass[static_cast<std::size_t>(node_cell[id])] +=
                eig.vectors(id, k) * eig.vectors(id, k);
        // argmax cell mass; ties -> lexicographically smallest configuration
        long best = 0;
        for (std::size_t c = 1; c < mass.size(); ++c) {
            if (mass[c] > mass[best] + 1e-15) {
                best = static_cast<long>(c);
            } else if (std::abs(mass[c] - mass[best]) <= 1e-15) {
                for (int e = 0; e < cell_configs[c].size(); ++e) {
                    double diff = cell_configs[c](e) - cell_configs[best](e);
                    if (diff < 0) { best = static_cast<long>(c); break; }
                    if (diff > 0) break;
                }
            }
        }
        DecayProfileRecord rec;
        rec.eigenvalue = eig.values[k];
        rec.center = cell_configs[static_cast<std::size_t>(best)];
        geometry::Configuration center_cfg(rec.center);
        for (std::size_t c = 0; c < cell_configs.size(); ++c) {
            double dist = geometry::hausdorff_dist(center_cfg,
                                                   geometry::Configuration(cell_configs[c]));
            rec.samples.emplace_back(dist, std::sqrt(mass[c]));
        }
        std::sort(rec.samples.begin(), rec.samples.end());
        out.push_back(std::move(rec));
    }
    return out;
}

double estimate_ground_energy_floor(const ModelConfig& config, const DomainN& domain,
                                    const RunOptions& run) {
    std::vector<double> values(static_cast<std::size_t>(run.ensemble));
    parallel_for(run.ensemble, run.threads, [&](long i) {
        auto dis = model::sample_disorder(config, run.seed, static_cast<std::uint64_t>(i));
        auto H = model::assemble_hamiltonian(config, domain, dis);
        values[static_cast<std::size_t>(i)] = spectral::ground_energy(H, run.solver);
    });
    auto est = reduce_samples(values, run.seed, false);
    double mn = *std::min_element(values.begin(), values.end());
    return mn - 2.0 * est.stderr_;
}

} // namespace anderloc::estimators
