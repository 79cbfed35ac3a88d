#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "anderloc/grid.hpp"

namespace anderloc::geometry {

// A point of the n-particle configuration space R^{dn}, stored as a d x n
// matrix with one column per particle. Particle labels are kept (partitions
// need them); set semantics enter only through the Hausdorff pseudo-metric.
struct Configuration {
    Eigen::MatrixXd pts; // d rows, n columns

    Configuration() = default;
    explicit Configuration(Eigen::MatrixXd p) : pts(std::move(p)) {}

    int n() const { return static_cast<int>(pts.cols()); }
    int d() const { return static_cast<int>(pts.rows()); }
    bool valid() const;

    // 1-d convenience: particles at the given scalar coordinates
    static Configuration line(const std::vector<double>& coords);
};

// Two-block partition {1..n} = J u K, both nonempty. Indices are 0-based.
struct Partition {
    std::vector<int> J, K;

    bool valid(int n) const;
};

// Hausdorff distance of the two particle point sets, max-norm throughout.
double hausdorff_dist(const Configuration& x, const Configuration& y);

// max{dist_H(x_J, y_J), dist_H(x_K, y_K)}; dominates hausdorff_dist.
double partition_dist(const Configuration& x, const Configuration& y, const Partition& p);

// max_{j,k} |x_j - x_k| (max-norm)
double diameter(const Configuration& x);

// If diam(x) >= threshold, returns a partition whose blocks are separated by
// at least threshold/n: the coordinate realizing the diameter spans at least
// threshold, so its largest sorted gap is >= threshold/(n-1). Candidates are
// the largest-gap splits of each coordinate axis; the one with maximal
// cross-separation wins, ties broken by lexicographically smallest J.
std::optional<Partition> find_cluster_partition(const Configuration& x, double threshold);

// Grid nodes of the cell B_{1/2}(x): all nodes with max-norm distance < 1/2
// from x in R^{dn}. Sorted ascending; empty when x is outside the domain.
using CellIndex = std::vector<long>;
CellIndex cell_indicator(const Configuration& x, const grid::GridN& g);

} // namespace anderloc::geometry
