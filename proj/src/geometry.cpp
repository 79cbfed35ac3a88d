#include "anderloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace anderloc::geometry {

bool Configuration::valid() const {
    if (pts.rows() < 1 || pts.cols() < 1) return false;
    return pts.allFinite();
}

Configuration Configuration::line(const std::vector<double>& coords) {
    Eigen::MatrixXd p(1, static_cast<int>(coords.size()));
    for (std::size_t j = 0; j < coords.size(); ++j) p(0, static_cast<int>(j)) = coords[j];
    return Configuration(p);
}

bool Partition::valid(int n) const {
    if (J.empty() || K.empty()) return false;
    std::vector<bool> seen(n, false);
    for (int j : J) {
        if (j < 0 || j >= n || seen[j]) return false;
        seen[j] = true;
    }
    for (int k : K) {
        if (k < 0 || k >= n || seen[k]) return false;
        seen[k] = true;
    }
    return std::all_of(seen.begin(), seen.end(), [](bool b) { return b; });
}

static void check_compatible(const Configuration& x, const Configuration& y) {
    if (!x.valid() || !y.valid())
        throw std::invalid_argument("configuration invalid (empty or non-finite)");
    if (x.n() != y.n() || x.d() != y.d())
        throw std::invalid_argument("configuration dimension/particle-count mismatch");
}

double hausdorff_dist(const Configuration& x, const Configuration& y) {
    check_compatible(x, y);
    const int n = x.n();
    double fwd = 0.0, bwd = 0.0;
    for (int j = 0; j < n; ++j) {
        double mn = std::numeric_limits<double>::infinity();
        for (int k = 0; k < n; ++k)
            mn = std::min(mn, (x.pts.col(j) - y.pts.col(k)).lpNorm<Eigen::Infinity>());
        fwd = std::max(fwd, mn);
    }
    for (int k = 0; k < n; ++k) {
        double mn = std::numeric_limits<double>::infinity();
        for (int j = 0; j < n; ++j)
            mn = std::min(mn, (x.pts.col(j) - y.pts.col(k)).lpNorm<Eigen::Infinity>());
        bwd = std::max(bwd, mn);
    }
    return std::max(fwd, bwd);
}

static Configuration select(const Configuration& x, const std::vector<int>& idx) {
    Eigen::MatrixXd p(x.d(), static_cast<int>(idx.size()));
    for (std::size_t c = 0; c < idx.size(); ++c) p.col(static_cast<int>(c)) = x.pts.col(idx[c]);
    return Configuration(p);
}

double partition_dist(const Configuration& x, const Configuration& y, const Partition& p) {
    check_compatible(x, y);
    if (!p.valid(x.n())) throw std::invalid_argument("invalid partition");
    double dJ = hausdorff_dist(select(x, p.J), select(y, p.J));
    double dK = hausdorff_dist(select(x, p.K), select(y, p.K));
    return std::max(dJ, dK);
}

double diameter(const Configuration& x) {
    if (!x.valid()) throw std::invalid_argument("configuration invalid");
    double dm = 0.0;
    for (int j = 0; j < x.n(); ++j)
        for (int k = j + 1; k < x.n(); ++k)
            dm = std::max(dm, (x.pts.col(j) - x.pts.col(k)).lpNorm<Eigen::Infinity>());
    return dm;
}

static double cross_separation(const Configuration& x, const Partition& p) {
    double mn = std::numeric_limits<double>::infinity();
    for (int j : p.J)
        for (int k : p.K)
            mn = std::min(mn, (x.pts.col(j) - x.pts.col(k)).lpNorm<Eigen::Infinity>());
    return mn;
}

std::optional<Partition> find_cluster_partition(const Configuration& x, double threshold) {
    if (threshold <= 0) throw std::invalid_argument("threshold must be positive");
    const int n = x.n();
    if (n < 2) return std::nullopt;

    std::optional<Partition> best;
    double best_sep = -1.0;
    for (int c = 0; c < x.d(); ++c) {
        std::vector<int> order(n);
        for (int j = 0; j < n; ++j) order[j] = j;
        std::sort(order.begin(), order.end(),
                  [&](int a, int b) { return x.pts(c, a) < x.pts(c, b); });
        // largest gap between consecutive sorted coordinates
        int cut = -1;
        double gap = -1.0;
        for (int j = 0; j + 1 < n; ++j) {
            double g = x.pts(c, order[j + 1]) - x.pts(c, order[j]);
            if (g > gap) { gap = g; cut = j; }
        }
        if (cut < 0 || gap <= 0) continue;
        Partition cand;
        for (int j = 0; j <= cut; ++j) cand.J.push_back(order[j]);
        for (int j = cut + 1; j < n; ++j) cand.K.push_back(order[j]);
        std::sort(cand.J.begin(), cand.J.end());
        std::sort(cand.K.begin(), cand.K.end());
        if (!cand.J.empty() && cand.J[0] != 0) std::swap(cand.J, cand.K);
        double sep = cross_separation(x, cand);
        if (sep > best_sep || (sep == best_sep && best && cand.J < best->J)) {
            best_sep = sep;
            best = cand;
        }
    }
    if (!best || best_sep < threshold / n) return std::nullopt;
    return best;
}

CellIndex cell_indicator(const Configuration& x, const grid::GridN& g) {
    if (x.n() != g.particles() || x.d() != g.dim())
        throw std::invalid_argument("configuration does not match grid dimensions");
    // nodes within max-norm < 1/2 per particle; the n-particle cell is the product
    std::vector<std::vector<int>> per(g.particles());
    for (int j = 0; j < g.particles(); ++j) {
        const auto& g1 = g.part(j);
        const double h = g1.spacing();
        Eigen::VectorXi lo(g1.dim()), hi(g1.dim());
        for (int c = 0; c < g1.dim(); ++c) {
            lo[c] = static_cast<int>(std::ceil((x.pts(c, j) - 0.5) / h));
            hi[c] = static_cast<int>(std::floor((x.pts(c, j) + 0.5) / h));
        }
        Eigen::VectorXi idx = lo;
        while (true) {
            Eigen::VectorXd pos = h * idx.cast<double>();
            if ((pos - x.pts.col(j)).lpNorm<Eigen::Infinity>() < 0.5) {
                int id = g1.lookup(idx);
                if (id >= 0) per[j].push_back(id);
            }
            int c = 0;
            for (; c < g1.dim(); ++c) {
                if (++idx[c] <= hi[c]) break;
                idx[c] = lo[c];
            }
            if (c == g1.dim()) break;
        }
        if (per[j].empty()) return {};
    }
    CellIndex out;
    std::vector<std::size_t> pos(g.particles(), 0);
    while (true) {
        std::vector<int> ids(g.particles());
        for (int j = 0; j < g.particles(); ++j) ids[j] = per[j][pos[j]];
        out.push_back(g.pack(ids));
        int j = g.particles() - 1;
        for (; j >= 0; --j) {
            if (++pos[j] < per[j].size()) break;
            pos[j] = 0;
        }
        if (j < 0) break;
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace anderloc::geometry
