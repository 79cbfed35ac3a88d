#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <unordered_map>
#include <vector>

namespace anderloc::grid {

enum class Mode { Lattice, Continuum };

// Axis-aligned box in R^d.
struct Box {
    Eigen::VectorXd lo, hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains_open(const Eigen::VectorXd& x) const {
        for (int c = 0; c < dim(); ++c)
            if (!(x[c] > lo[c] && x[c] < hi[c])) return false;
        return true;
    }
    bool contains_closed(const Eigen::VectorXd& x) const {
        for (int c = 0; c < dim(); ++c)
            if (!(x[c] >= lo[c] && x[c] <= hi[c])) return false;
        return true;
    }
};

// One-particle domain: finite union of axis-aligned boxes.
using Domain = std::vector<Box>;

inline bool domain_contains(const Domain& dom, const Eigen::VectorXd& x, Mode mode) {
    for (const auto& b : dom)
        if (mode == Mode::Lattice ? b.contains_closed(x) : b.contains_open(x)) return true;
    return false;
}

// Packs a d-dimensional integer multi-index into one key (d <= 3, |i| < 2^20).
inline std::uint64_t pack_index(const Eigen::VectorXi& idx) {
    std::uint64_t key = 0;
    for (int c = 0; c < idx.size(); ++c) {
        auto v = static_cast<std::uint64_t>(static_cast<std::int64_t>(idx[c]) + (1 << 20));
        key |= (v & ((1ULL << 21) - 1)) << (21 * c);
    }
    return key;
}

// Discretization nodes for a single particle: integer multi-indices i with
// position h*i inside the domain. Lattice mode has h = 1 and closed boxes
// (a site set); continuum mode keeps strictly interior nodes, realizing
// Dirichlet conditions by node removal.
class Grid1 {
public:
    Grid1() = default;
    Grid1(Mode mode, double h, const Domain& dom);

    Mode mode() const { return mode_; }
    double spacing() const { return h_; }
    int dim() const { return d_; }
    int size() const { return static_cast<int>(nodes_.size()); }

    const Eigen::VectorXi& index(int id) const { return nodes_[id]; }
    Eigen::VectorXd position(int id) const { return h_ * nodes_[id].cast<double>(); }

    // -1 if the multi-index is not a node
    int lookup(const Eigen::VectorXi& idx) const {
        auto it = lookup_.find(pack_index(idx));
        return it == lookup_.end() ? -1 : it->second;
    }

private:
    Mode mode_ = Mode::Lattice;
    double h_ = 1.0;
    int d_ = 0;
    std::vector<Eigen::VectorXi> nodes_;
    std::unordered_map<std::uint64_t, int> lookup_;
};

// Product grid over a box domain in R^{dn}: one Grid1 per particle.
// Flat node ids enumerate the tensor product, particle 0 slowest.
class GridN {
public:
    GridN() = default;
    explicit GridN(std::vector<Grid1> parts);

    int particles() const { return static_cast<int>(parts_.size()); }
    int dim() const { return parts_.empty() ? 0 : parts_[0].dim(); }
    double spacing() const { return parts_.empty() ? 1.0 : parts_[0].spacing(); }
    Mode mode() const { return parts_.empty() ? Mode::Lattice : parts_[0].mode(); }
    long size() const { return total_; }
    const Grid1& part(int j) const { return parts_[j]; }

    // per-particle node ids of a flat node id
    std::vector<int> unpack(long id) const;
    long pack(const std::vector<int>& per_particle) const;

    // node position as a d x n matrix (one column per particle)
    Eigen::MatrixXd position(long id) const;

private:
    std::vector<Grid1> parts_;
    std::vector<long> strides_;
    long total_ = 0;
};

} // namespace anderloc::grid
