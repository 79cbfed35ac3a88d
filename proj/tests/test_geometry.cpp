#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "anderloc/geometry.hpp"
#include "anderloc/model.hpp"
#include "anderloc/oracles.hpp"
#include "anderloc/rng.hpp"

using anderloc::CounterRng;
using namespace anderloc::geometry;

namespace {

Configuration random_config(const CounterRng& rng, std::uint64_t stream, int n, int d,
                            double scale = 10.0) {
    Eigen::MatrixXd pts(d, n);
    std::uint64_t c = 0;
    for (int j = 0; j < n; ++j)
        for (int cc = 0; cc < d; ++cc)
            pts(cc, j) = scale * (rng.uniform01(stream, c++) - 0.5);
    return Configuration(pts);
}

std::vector<std::vector<double>> to_vecs(const Configuration& c) {
    std::vector<std::vector<double>> out(c.n());
    for (int j = 0; j < c.n(); ++j)
        for (int cc = 0; cc < c.d(); ++cc) out[j].push_back(c.pts(cc, j));
    return out;
}

} // namespace

TEST_CASE("hausdorff_dist identity and permutation invariance") {
    auto x = Configuration::line({0, 5});
    auto y = Configuration::line({5, 0});
    CHECK(hausdorff_dist(x, x) == 0.0);
    CHECK(hausdorff_dist(x, y) == 0.0); // equal as point sets
}

TEST_CASE("hausdorff_dist worked example") {
    auto x = Configuration::line({0, 0});
    auto y = Configuration::line({3, 4});
    CHECK(hausdorff_dist(x, y) == doctest::Approx(4.0));
    CHECK(anderloc::oracles::hausdorff_brute(to_vecs(x), to_vecs(y)) == doctest::Approx(4.0));
}

TEST_CASE("hausdorff_dist dimension mismatch is an error") {
    auto x = Configuration::line({0, 1});
    auto y = Configuration::line({0, 1, 2});
    CHECK_THROWS_AS(hausdorff_dist(x, y), std::invalid_argument);
}

TEST_CASE("hausdorff_dist matches brute force on random configurations") {
    CounterRng rng(2024);
    for (int it = 0; it < 2000; ++it) {
        int n = 1 + static_cast<int>(rng.uniform01(1, it) * 5);
        int d = 1 + static_cast<int>(rng.uniform01(2, it) * 3);
        auto x = random_config(rng, 1000 + it, n, d);
        auto y = random_config(rng, 5000 + it, n, d);
        double got = hausdorff_dist(x, y);
        double ref = anderloc::oracles::hausdorff_brute(to_vecs(x), to_vecs(y));
        CHECK(got == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("pseudo-metric axioms on random triples") {
    CounterRng rng(7);
    for (int it = 0; it < 1000; ++it) {
        int n = 1 + static_cast<int>(rng.uniform01(1, it) * 4);
        int d = 1 + static_cast<int>(rng.uniform01(2, it) * 2);
        auto x = random_config(rng, 100 + it, n, d);
        auto y = random_config(rng, 200 + it, n, d);
        auto z = random_config(rng, 300 + it, n, d);
        CHECK(hausdorff_dist(x, y) == doctest::Approx(hausdorff_dist(y, x)));
        CHECK(hausdorff_dist(x, x) == 0.0);
        CHECK(hausdorff_dist(x, z) <= hausdorff_dist(x, y) + hausdorff_dist(y, z) + 1e-12);
    }
}

TEST_CASE("summability of exp(-mu dist_H^gamma): sublinear in volume for n = 2") {
    // sum over integer configurations w in a box of side S, x at the center
    auto x = Configuration::line({0, 0});
    auto sum_for = [&](int S, double mu, double gamma) {
        double total = 0;
        for (int a = -S; a <= S; ++a)
            for (int b = -S; b <= S; ++b) {
                auto w = Configuration::line({static_cast<double>(a), static_cast<double>(b)});
                total += std::exp(-mu * std::pow(hausdorff_dist(x, w), gamma));
            }
        return total;
    };
    for (double mu : {0.5, 1.0}) {
        for (double gamma : {0.5, 1.0}) {
            double s8 = sum_for(8, mu, gamma), s16 = sum_for(16, mu, gamma),
                   s32 = sum_for(32, mu, gamma);
            double v8 = 17. * 17., v16 = 33. * 33., v32 = 65. * 65.;
            CHECK(s16 / v16 < s8 / v8);
            CHECK(s32 / v32 < s16 / v16);
        }
    }
}

TEST_CASE("partition_dist worked example exhibits strict domination") {
    auto x = Configuration::line({0, 10});
    auto y = Configuration::line({10, 0});
    Partition p{{0}, {1}};
    CHECK(partition_dist(x, x, p) == 0.0);
    CHECK(partition_dist(x, y, p) == doctest::Approx(10.0));
    CHECK(hausdorff_dist(x, y) == 0.0);
}

TEST_CASE("partition_dist rejects invalid partitions") {
    auto x = Configuration::line({0, 1});
    CHECK_THROWS_AS(partition_dist(x, x, Partition{{0, 1}, {}}), std::invalid_argument);
    CHECK_THROWS_AS(partition_dist(x, x, Partition{{0}, {0}}), std::invalid_argument);
}

TEST_CASE("partition_dist >= hausdorff_dist and matches brute force") {
    CounterRng rng(13);
    for (int it = 0; it < 500; ++it) {
        int n = 2 + static_cast<int>(rng.uniform01(1, it) * 3);
        int d = 1 + static_cast<int>(rng.uniform01(2, it) * 2);
        auto x = random_config(rng, 400 + it, n, d);
        auto y = random_config(rng, 800 + it, n, d);
        Partition p;
        for (int j = 0; j < n; ++j)
            (rng.uniform01(3, it * 10 + j) < 0.5 ? p.J : p.K).push_back(j);
        if (p.J.empty() || p.K.empty()) continue;
        double pd = partition_dist(x, y, p);
        CHECK(pd >= hausdorff_dist(x, y) - 1e-12);
        auto sel = [&](const Configuration& c, const std::vector<int>& idx) {
            std::vector<std::vector<double>> out;
            for (int j : idx) {
                std::vector<double> row;
                for (int cc = 0; cc < c.d(); ++cc) row.push_back(c.pts(cc, j));
                out.push_back(row);
            }
            return out;
        };
        double ref = std::max(anderloc::oracles::hausdorff_brute(sel(x, p.J), sel(y, p.J)),
                              anderloc::oracles::hausdorff_brute(sel(x, p.K), sel(y, p.K)));
        CHECK(pd == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("diameter basics") {
    CHECK(diameter(Configuration::line({3})) == 0.0);
    CHECK(diameter(Configuration::line({0, 3, 7})) == doctest::Approx(7.0));
    CHECK(diameter(Configuration::line({0, 3, 7, 7, 3})) == doctest::Approx(7.0));
}

TEST_CASE("find_cluster_partition two-particle example") {
    auto x = Configuration::line({0, 10});
    auto p = find_cluster_partition(x, 10.0);
    REQUIRE(p.has_value());
    double sep = 1e300;
    for (int j : p->J)
        for (int k : p->K)
            sep = std::min(sep, std::abs(x.pts(0, j) - x.pts(0, k)));
    CHECK(sep == doctest::Approx(10.0));
    CHECK(sep >= 10.0 / 2);
}

TEST_CASE("find_cluster_partition returns none when no adequate gap exists") {
    auto x = Configuration::line({0, 1, 2});
    CHECK_FALSE(find_cluster_partition(x, 30.0).has_value());
}

TEST_CASE("find_cluster_partition guarantee versus exhaustive enumeration") {
    CounterRng rng(99);
    int produced = 0;
    for (int it = 0; it < 400; ++it) {
        int n = 2 + static_cast<int>(rng.uniform01(1, it) * 4);
        int d = 1 + static_cast<int>(rng.uniform01(2, it) * 2);
        auto x = random_config(rng, 600 + it, n, d, 20.0);
        double threshold = diameter(x); // guarantee applies: diam >= threshold
        if (threshold <= 0) continue;
        auto p = find_cluster_partition(x, threshold);
        REQUIRE(p.has_value());
        REQUIRE(p->valid(n));
        double sep = 1e300;
        for (int j : p->J)
            for (int k : p->K)
                sep = std::min(sep, (x.pts.col(j) - x.pts.col(k)).lpNorm<Eigen::Infinity>());
        CHECK(sep >= threshold / n - 1e-12);
        // exhaustive: the best partition is at least as separated as ours
        double best = 0;
        for (int mask = 1; mask < (1 << n) - 1; ++mask) {
            double s = 1e300;
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    if (((mask >> j) & 1) && !((mask >> k) & 1))
                        s = std::min(s, (x.pts.col(j) - x.pts.col(k)).lpNorm<Eigen::Infinity>());
            best = std::max(best, s);
        }
        CHECK(best >= sep - 1e-12);
        ++produced;
    }
    CHECK(produced > 300);
}

TEST_CASE("find_cluster_partition is deterministic and keeps particle 0 in J") {
    auto x = Configuration::line({0, 10, 20, 30});
    auto p1 = find_cluster_partition(x, 20.0);
    auto p2 = find_cluster_partition(x, 20.0);
    REQUIRE(p1.has_value());
    REQUIRE(p2.has_value());
    CHECK(p1->J == p2->J);
    CHECK(p1->K == p2->K);
    CHECK(std::find(p1->J.begin(), p1->J.end(), 0) != p1->J.end());
}

TEST_CASE("cell_indicator enumerates exactly the nodes within 1/2") {
    using namespace anderloc::grid;
    Box box;
    box.lo = Eigen::VectorXd::Constant(1, -2.0);
    box.hi = Eigen::VectorXd::Constant(1, 2.0);
    Grid1 g1(Mode::Continuum, 0.5, {box});
    GridN g({g1});

    auto cell = cell_indicator(Configuration::line({0.0}), g);
    std::vector<long> expected;
    for (long id = 0; id < g.size(); ++id)
        if (std::abs(g.position(id)(0, 0)) < 0.5) expected.push_back(id);
    CHECK(cell == expected);
    CHECK(cell.size() == 1); // nodes at +-0.5 are not strictly inside

    CHECK(cell_indicator(Configuration::line({50.0}), g).empty());

    auto ca = cell_indicator(Configuration::line({-1.0}), g);
    auto cb = cell_indicator(Configuration::line({0.5}), g);
    REQUIRE(!ca.empty());
    REQUIRE(!cb.empty());
    for (long a : ca)
        for (long b : cb) CHECK(a != b);
}

TEST_CASE("cell_indicator covers multiple nodes on finer grids") {
    using namespace anderloc::grid;
    Box box;
    box.lo = Eigen::VectorXd::Constant(1, -4.0);
    box.hi = Eigen::VectorXd::Constant(1, 4.0);
    Grid1 g1(Mode::Continuum, 0.25, {box});
    GridN g({g1});
    auto cell = cell_indicator(Configuration::line({0.0}), g);
    CHECK(cell.size() == 3); // -0.25, 0, 0.25
}
