#include "anderloc/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace anderloc::grid {

Grid1::Grid1(Mode mode, double h, const Domain& dom) : mode_(mode), h_(mode == Mode::Lattice ? 1.0 : h) {
    if (dom.empty()) throw std::invalid_argument("empty domain");
    d_ = dom[0].dim();
    for (const auto& b : dom)
        if (b.dim() != d_) throw std::invalid_argument("mixed-dimension domain boxes");
    if (h_ <= 0) throw std::invalid_argument("grid spacing must be positive");

    // bounding integer ranges
    Eigen::VectorXi lo(d_), hi(d_);
    for (int c = 0; c < d_; ++c) {
        double mn = dom[0].lo[c], mx = dom[0].hi[c];
        for (const auto& b : dom) {
            mn = std::min(mn, b.lo[c]);
            mx = std::max(mx, b.hi[c]);
        }
        lo[c] = static_cast<int>(std::floor(mn / h_)) - 1;
        hi[c] = static_cast<int>(std::ceil(mx / h_)) + 1;
    }
    Eigen::VectorXi idx = lo;
    while (true) {
        Eigen::VectorXd pos = h_ * idx.cast<double>();
        if (grid::domain_contains(dom, pos, mode_)) {
            lookup_[grid::pack_index(idx)] = static_cast<int>(nodes_.size());
            nodes_.push_back(idx);
        }
        int c = 0;
        for (; c < d_; ++c) {
            if (++idx[c] <= hi[c]) break;
            idx[c] = lo[c];
        }
        if (c == d_) break;
    }
    if (nodes_.empty()) throw std::invalid_argument("domain contains no grid nodes");
}

GridN::GridN(std::vector<Grid1> parts) : parts_(std::move(parts)) {
    strides_.assign(parts_.size(), 1);
    total_ = 1;
    for (int j = static_cast<int>(parts_.size()) - 1; j >= 0; --j) {
        strides_[j] = total_;
        total_ *= parts_[j].size();
    }
}

std::vector<int> GridN::unpack(long id) const {
    std::vector<int> out(parts_.size());
    for (std::size_t j = 0; j < parts_.size(); ++j) {
        out[j] = static_cast<int>(id / strides_[j]);
        id %= strides_[j];
    }
    return out;
}

long GridN::pack(const std::vector<int>& per_particle) const {
    long id = 0;
    for (std::size_t j = 0; j < parts_.size(); ++j) id += strides_[j] * per_particle[j];
    return id;
}

Eigen::MatrixXd GridN::position(long id) const {
    Eigen::MatrixXd out(dim(), particles());
    auto ids = unpack(id);
    for (int j = 0; j < particles(); ++j) out.col(j) = parts_[j].position(ids[j]);
    return out;
}

} // namespace anderloc::grid

namespace anderloc::model {

// ---------------------------------------------------------------- potentials

double SingleSiteProfile::operator()(const Eigen::VectorXd& y) const {
    double r = y.lpNorm<Eigen::Infinity>();
    if (r > r_u) return 0.0;
    switch (shape) {
        case Shape::Box:
            return amplitude;
        case Shape::Tent:
            return amplitude * (1.0 - r / r_u);
        case Shape::SmoothBump: {
            double t = r / r_u;
            if (t >= 1.0) return 0.0;
            return amplitude * std::exp(1.0 - 1.0 / (1.0 - t * t));
        }
    }
    return 0.0;
}

double DisorderDistribution::sample(double u01) const {
    switch (kind) {
        case Kind::Uniform:
            return eta_max * u01;
        case Kind::TruncExp: {
            // unit-rate exponential truncated to [0, eta_max]
            double z = 1.0 - std::exp(-eta_max);
            return -std::log(1.0 - u01 * z);
        }
    }
    return 0.0;
}

double InteractionSpec::bound(double r, double reg) const {
    switch (kind) {
        case Kind::None:
            return 0.0;
        case Kind::Exponential:
            return c_w * std::exp(-mu_w * std::pow(r, gamma_w));
        case Kind::Polynomial:
            return c_w * std::pow(std::max(r, reg), -p_w);
        case Kind::HardCore:
            return c_w * std::pow(std::max(r, core_radius), -p_w);
    }
    return 0.0;
}

double InteractionSpec::value(double r, double reg) const {
    double b = bound(r, reg);
    return sign == Sign::Repulsive ? b : -b;
}

double BackgroundSpec::operator()(const Eigen::VectorXd& x) const {
    switch (kind) {
        case Kind::Zero:
            return 0.0;
        case Kind::Constant:
            return amplitude;
        case Kind::Cosine: {
            double v = 0.0;
            for (int c = 0; c < x.size(); ++c) v += 0.5 * (1.0 + std::cos(2.0 * M_PI * x[c]));
            return amplitude * v;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------- config

void ModelConfig::validate() const {
    if (d < 1 || n < 1) throw std::invalid_argument("d and n must be >= 1");
    if (alpha_w < 0) throw std::invalid_argument("alpha_w must be >= 0");
    if (domain.empty()) throw std::invalid_argument("domain must be nonempty");
    if (mode == Mode::Continuum) {
        if (h <= 0) throw std::invalid_argument("grid.h must be positive");
        double inv = 1.0 / h;
        if (std::abs(inv - std::round(inv)) > 1e-9)
            throw std::invalid_argument("1/h must be an integer so cells align with unit balls");
    }
    if (single_site.amplitude < 0 || single_site.r_u <= 0)
        throw std::invalid_argument("single-site profile must be non-negative with positive support radius");
    if (disorder.eta_max < 0) throw std::invalid_argument("disorder.eta_max must be >= 0");
    if (interaction.kind == InteractionSpec::Kind::Exponential &&
        (interaction.gamma_w <= 0 || interaction.gamma_w > 1))
        throw std::invalid_argument("interaction gamma_w must lie in (0,1]");
    if (covering_margin(*this) <= 0)
        throw std::invalid_argument("covering condition fails: translated bumps leave gaps");
}

std::uint64_t ModelConfig::hash() const {
    std::uint64_t h64 = 0xcbf29ce484222325ULL;
    auto add = [&](double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        h64 = CounterRng::mix(h64 ^ bits);
    };
    add(d);
    add(n);
    add(mode == Mode::Lattice ? 0 : 1);
    add(h);
    for (const auto& b : domain) {
        for (int c = 0; c < b.dim(); ++c) {
            add(b.lo[c]);
            add(b.hi[c]);
        }
    }
    add(static_cast<double>(background.kind));
    add(background.amplitude);
    add(static_cast<double>(single_site.shape));
    add(single_site.amplitude);
    add(single_site.r_u);
    add(static_cast<double>(disorder.kind));
    add(disorder.eta_max);
    add(static_cast<double>(interaction.kind));
    add(static_cast<double>(interaction.sign));
    add(interaction.c_w);
    add(interaction.mu_w);
    add(interaction.gamma_w);
    add(interaction.p_w);
    add(interaction.core_radius);
    add(alpha_w);
    return h64;
}

// ---------------------------------------------------------------- disorder

static std::vector<Eigen::VectorXi> disorder_sites(const ModelConfig& config) {
    // lattice sites within r_U of the domain (farther sites contribute nothing)
    const double r = config.single_site.r_u;
    std::vector<Eigen::VectorXi> sites;
    Eigen::VectorXi lo(config.d), hi(config.d);
    for (int c = 0; c < config.d; ++c) {
        double mn = config.domain[0].lo[c], mx = config.domain[0].hi[c];
        for (const auto& b : config.domain) {
            mn = std::min(mn, b.lo[c]);
            mx = std::max(mx, b.hi[c]);
        }
        lo[c] = static_cast<int>(std::floor(mn - r));
        hi[c] = static_cast<int>(std::ceil(mx + r));
    }
    Eigen::VectorXi idx = lo;
    while (true) {
        // box distance from site to the domain, max-norm
        double dist = std::numeric_limits<double>::infinity();
        for (const auto& b : config.domain) {
            double dd = 0.0;
            for (int c = 0; c < config.d; ++c) {
                double v = static_cast<double>(idx[c]);
                dd = std::max(dd, std::max(b.lo[c] - v, v - b.hi[c]));
            }
            dist = std::min(dist, std::max(dd, 0.0));
        }
        if (dist <= r) sites.push_back(idx);
        int c = 0;
        for (; c < config.d; ++c) {
            if (++idx[c] <= hi[c]) break;
            idx[c] = lo[c];
        }
        if (c == config.d) break;
    }
    return sites;
}

double disorder_value(const ModelConfig& config, std::uint64_t seed, std::uint64_t index,
                      const Eigen::VectorXi& site) {
    CounterRng rng(seed);
    return config.disorder.sample(rng.uniform01(index, grid::pack_index(site)));
}

DisorderSample sample_disorder(const ModelConfig& config, std::uint64_t seed, std::uint64_t index) {
    DisorderSample out;
    out.seed = seed;
    out.index = index;
    out.sites = disorder_sites(config);
    out.values.reserve(out.sites.size());
    for (const auto& s : out.sites) out.values.push_back(disorder_value(config, seed, index, s));
    return out;
}

double DisorderSample::value_at(const Eigen::VectorXi& site) const {
    for (std::size_t i = 0; i < sites.size(); ++i)
        if (sites[i] == site) return values[i];
    throw std::out_of_range("site not in disorder sample");
}

// ---------------------------------------------------------------- assembly

std::shared_ptr<const GridN> build_grid(const ModelConfig& config, const DomainN& domain_n) {
    if (static_cast<int>(domain_n.particle_domains.size()) != config.n)
        throw std::invalid_argument("domain_n must provide one domain per particle");
    std::vector<Grid1> parts;
    parts.reserve(config.n);
    for (const auto& dom : domain_n.particle_domains) {
        for (const auto& b : dom) {
            if (b.dim() != config.d) throw std::invalid_argument("domain box dimension mismatch");
        }
        Grid1 g1(config.mode, config.h, dom);
        // the per-particle domain must lie inside Omega
        for (int id = 0; id < g1.size(); ++id)
            if (!grid::domain_contains(config.domain, g1.position(id), config.mode))
                throw std::invalid_argument(
                    "domain/grid mismatch: particle box reaches outside the configured domain");
        parts.push_back(std::move(g1));
    }
    return std::make_shared<GridN>(std::move(parts));
}

double interaction_at(const ModelConfig& config, const Eigen::MatrixXd& pts) {
    if (config.interaction.kind == InteractionSpec::Kind::None) return 0.0;
    const double reg = config.interaction_reg();
    double w = 0.0;
    for (int j = 0; j < pts.cols(); ++j)
        for (int k = j + 1; k < pts.cols(); ++k)
            w += config.interaction.value((pts.col(j) - pts.col(k)).lpNorm<Eigen::Infinity>(), reg);
    return w;
}

static SparseOperator assemble_impl(const ModelConfig& config, const DomainN& domain_n,
                                    const DisorderSample& disorder,
                                    const geometry::Partition* partition) {
    auto g = build_grid(config, domain_n);
    const int n = config.n;
    const int d = config.d;
    const double h = config.spacing();
    const double inv_h2 = 1.0 / (h * h);
    const double reg = config.interaction_reg();
    const double r_u = config.single_site.r_u;

    // per-particle 1-body diagonal: V_0 + disorder, cached per (particle, node)
    std::vector<Eigen::VectorXd> one_body(n);
    for (int j = 0; j < n; ++j) {
        const Grid1& g1 = g->part(j);
        Eigen::VectorXd diag(g1.size());
        for (int id = 0; id < g1.size(); ++id) {
            Eigen::VectorXd pos = g1.position(id);
            double v = config.background(pos);
            for (std::size_t si = 0; si < disorder.sites.size(); ++si) {
                Eigen::VectorXd delta = pos - disorder.sites[si].cast<double>();
                if (delta.lpNorm<Eigen::Infinity>() <= r_u)
                    v += disorder.values[si] * config.single_site(delta);
            }
            diag[id] = v;
        }
        one_body[j] = diag;
    }

    const long dim = g->size();
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(dim) * (2 * d * n + 1));

    std::vector<int> ids(n);
    auto in_same_block = [&](int a, int b) {
        if (!partition) return true;
        bool aJ = std::find(partition->J.begin(), partition->J.end(), a) != partition->J.end();
        bool bJ = std::find(partition->J.begin(), partition->J.end(), b) != partition->J.end();
        return aJ == bJ;
    };

    for (long row = 0; row < dim; ++row) {
        long rem = row;
        for (int j = 0; j < n; ++j) {
            long stride = 1;
            for (int k = j + 1; k < n; ++k) stride *= g->part(k).size();
            ids[j] = static_cast<int>(rem / stride);
            rem %= stride;
        }
        double diag = 2.0 * d * n * inv_h2;
        Eigen::MatrixXd pts(d, n);
        for (int j = 0; j < n; ++j) pts.col(j) = g->part(j).position(ids[j]);
        for (int j = 0; j < n; ++j) diag += one_body[j][ids[j]];
        if (config.interaction.kind != InteractionSpec::Kind::None && config.alpha_w != 0.0) {
            double w = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = a + 1; b < n; ++b)
                    if (in_same_block(a, b))
                        w += config.interaction.value(
                            (pts.col(a) - pts.col(b)).lpNorm<Eigen::Infinity>(), reg);
            diag += config.alpha_w * w;
        }
        trips.emplace_back(row, row, diag);

        // nearest-neighbor stencil: -1/h^2 along each of the dn axes
        for (int j = 0; j < n; ++j) {
            const Grid1& g1 = g->part(j);
            for (int c = 0; c < d; ++c) {
                Eigen::VectorXi nb = g1.index(ids[j]);
                nb[c] += 1;
                int nb_id = g1.lookup(nb);
                if (nb_id < 0) continue;
                long stride = 1;
                for (int k = j + 1; k < n; ++k) stride *= g->part(k).size();
                long col = row + stride * (nb_id - ids[j]);
                trips.emplace_back(row, col, -inv_h2);
                trips.emplace_back(col, row, -inv_h2);
            }
        }
    }

    SparseOperator op;
    op.mat.resize(dim, dim);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    op.grid = g;
    op.config_hash = config.hash();
    op.seed = disorder.seed;
    op.realization = disorder.index;
    return op;
}

SparseOperator assemble_hamiltonian(const ModelConfig& config, const DomainN& domain_n,
                                    const DisorderSample& disorder) {
    return assemble_impl(config, domain_n, disorder, nullptr);
}

SparseOperator assemble_partial(const ModelConfig& config, const DomainN& domain_n,
                                const DisorderSample& disorder, const geometry::Partition& p) {
    if (!p.valid(config.n)) throw std::invalid_argument("invalid partition");
    return assemble_impl(config, domain_n, disorder, &p);
}

double covering_margin(const ModelConfig& config) {
    const double h = config.mode == Mode::Lattice ? 1.0 : config.h;
    const double r_u = config.single_site.r_u;
    const int reach = static_cast<int>(std::ceil(r_u)) + 1;
    const int steps = std::max(1, static_cast<int>(std::round(1.0 / h)));

    double margin = std::numeric_limits<double>::infinity();
    Eigen::VectorXi idx = Eigen::VectorXi::Zero(config.d);
    while (true) {
        Eigen::VectorXd x(config.d);
        for (int c = 0; c < config.d; ++c) x[c] = h * idx[c];
        double total = 0.0;
        Eigen::VectorXi z = Eigen::VectorXi::Constant(config.d, -reach);
        while (true) {
            total += config.single_site(x - z.cast<double>());
            int c = 0;
            for (; c < config.d; ++c) {
                if (++z[c] <= reach) break;
                z[c] = -reach;
            }
            if (c == config.d) break;
        }
        margin = std::min(margin, total);
        int c = 0;
        for (; c < config.d; ++c) {
            if (++idx[c] < steps) break;
            idx[c] = 0;
        }
        if (c == config.d) break;
    }
    return margin;
}

void dump_coordinate_format(const SparseOperator& op, const std::string& path) {
    std::ofstream ofs(path);
    ofs << std::setprecision(17);
    for (int k = 0; k < op.mat.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(op.mat, k); it; ++it)
            ofs << it.row() << " " << it.col() << " " << it.value() << "\n";
}

} // namespace anderloc::model
