#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "anderloc/geometry.hpp"
#include "anderloc/model.hpp"
#include "anderloc/oracles.hpp"
#include "anderloc/spectral.hpp"

using namespace anderloc;

namespace {

model::ModelConfig lattice_chain(int len, double eta_max) {
    model::ModelConfig mc;
    mc.d = 1;
    mc.n = 1;
    mc.mode = model::Mode::Lattice;
    grid::Box box;
    box.lo = Eigen::VectorXd::Zero(1);
    box.hi = Eigen::VectorXd::Constant(1, len - 1);
    mc.domain = {box};
    mc.disorder.eta_max = eta_max;
    return mc;
}

} // namespace

TEST_CASE("lyapunov exponent vanishes inside the free band") {
    model::DisorderDistribution dd;
    dd.eta_max = 0.0;
    auto res = oracles::transfer_matrix_lyapunov(dd, 2.0, 1000000, 2, 1);
    CHECK(std::abs(res.gamma) < 1e-3);
}

TEST_CASE("lyapunov exponent closed form outside the band") {
    model::DisorderDistribution dd;
    dd.eta_max = 0.0;
    double expected = std::log((3.0 + std::sqrt(5.0)) / 2.0); // E = -1
    CHECK(expected == doctest::Approx(0.9624).epsilon(1e-4));
    CHECK(oracles::free_chain_lyapunov(-1.0) == doctest::Approx(expected).epsilon(1e-12));
    auto res = oracles::transfer_matrix_lyapunov(dd, -1.0, 200000, 2, 1);
    CHECK(res.gamma == doctest::Approx(expected).epsilon(1e-4));
}

TEST_CASE("strong disorder gives a large lyapunov exponent at band center") {
    model::DisorderDistribution dd;
    dd.eta_max = 10.0;
    auto res = oracles::transfer_matrix_lyapunov(dd, 2.0 + 5.0, 400000, 8, 3);
    CHECK(res.gamma > 0.5);
    CHECK(res.stderr_ < 0.01);
}

TEST_CASE("dense_brute_force free chain matches the closed form") {
    auto mc = lattice_chain(10, 0.0);
    auto dis = model::sample_disorder(mc, 1, 0);
    auto H = model::assemble_hamiltonian(mc, model::DomainN::cube(mc.domain, 1), dis);
    auto eig = oracles::dense_brute_force(H);
    auto expected = oracles::dirichlet_chain_eigenvalues(10);
    REQUIRE(eig.values.size() == 10);
    for (int k = 0; k < 10; ++k)
        CHECK(eig.values[k] == doctest::Approx(expected[k]).epsilon(1e-10));
}

TEST_CASE("dense_brute_force rejects oversized instances") {
    model::SparseOperator H;
    H.mat.resize(2001, 2001);
    H.mat.setIdentity();
    CHECK_THROWS_AS(oracles::dense_brute_force(H), std::invalid_argument);
}

TEST_CASE("resolvent block: spectral sum agrees with the sparse solve") {
    auto mc = lattice_chain(40, 2.0);
    auto dn = model::DomainN::cube(mc.domain, 1);
    for (int r = 0; r < 5; ++r) {
        auto dis = model::sample_disorder(mc, 11, r);
        auto H = model::assemble_hamiltonian(mc, dn, dis);
        auto eig = oracles::dense_brute_force(H);
        auto x = geometry::Configuration::line({10});
        auto y = geometry::Configuration::line({25});
        auto cx = geometry::cell_indicator(x, *H.grid);
        auto cy = geometry::cell_indicator(y, *H.grid);
        std::complex<double> z(1.5, 1e-2);
        double ref = oracles::dense_resolvent_block_norm(eig, z, cx, cy);
        double got = spectral::resolvent_block_norm(H, z, x, y);
        CHECK(got == doctest::Approx(ref).epsilon(1e-7));
    }
}

TEST_CASE("window eigenvalue counts match the Sturm inertia count") {
    auto mc = lattice_chain(30, 1.5);
    auto dn = model::DomainN::cube(mc.domain, 1);
    for (int r = 0; r < 50; ++r) {
        auto dis = model::sample_disorder(mc, 5, r);
        auto H = model::assemble_hamiltonian(mc, dn, dis);
        Eigen::MatrixXd Hd(H.mat);
        auto eig = oracles::dense_brute_force(H);
        double lo = 1.0, hi = 2.5;
        int dense_count = 0;
        for (int k = 0; k < eig.values.size(); ++k)
            if (eig.values[k] >= lo && eig.values[k] <= hi) ++dense_count;
        int sturm = oracles::inertia_count_below(Hd, hi) - oracles::inertia_count_below(Hd, lo);
        CHECK(dense_count == sturm);
    }
}

TEST_CASE("hausdorff_brute basics") {
    CHECK(oracles::hausdorff_brute({{0.0}, {5.0}}, {{5.0}, {0.0}}) == 0.0);
    // homogeneity under scaling
    std::vector<std::vector<double>> x{{0.0, 1.0}, {2.0, -1.0}}, y{{3.0, 0.5}, {-1.0, 2.0}};
    double base = oracles::hausdorff_brute(x, y);
    for (auto& p : x)
        for (auto& c : p) c *= 3.0;
    for (auto& p : y)
        for (auto& c : p) c *= 3.0;
    CHECK(oracles::hausdorff_brute(x, y) == doctest::Approx(3.0 * base).epsilon(1e-13));
}
