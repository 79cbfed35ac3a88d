#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "anderloc/model.hpp"
#include "anderloc/oracles.hpp"
#include "anderloc/spectral.hpp"

using namespace anderloc;

namespace {

model::ModelConfig lattice_chain(int len, double eta_max, int n = 1) {
    model::ModelConfig mc;
    mc.d = 1;
    mc.n = n;
    mc.mode = model::Mode::Lattice;
    grid::Box box;
    box.lo = Eigen::VectorXd::Zero(1);
    box.hi = Eigen::VectorXd::Constant(1, len - 1);
    mc.domain = {box};
    mc.disorder.eta_max = eta_max;
    return mc;
}

std::vector<double> sorted_eigs(const model::SparseOperator& H) {
    auto eig = oracles::dense_brute_force(H);
    return {eig.values.data(), eig.values.data() + eig.values.size()};
}

} // namespace

TEST_CASE("sample_disorder is deterministic and order-free") {
    auto mc = lattice_chain(16, 2.0);
    auto a = model::sample_disorder(mc, 42, 3);
    auto b = model::sample_disorder(mc, 42, 3);
    REQUIRE(a.values.size() == b.values.size());
    for (std::size_t i = 0; i < a.values.size(); ++i) CHECK(a.values[i] == b.values[i]);
    auto c = model::sample_disorder(mc, 42, 4);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.values.size(); ++i) any_diff |= a.values[i] != c.values[i];
    CHECK(any_diff);
    Eigen::VectorXi site = a.sites[5];
    CHECK(model::disorder_value(mc, 42, 3, site) == a.values[5]);
}

TEST_CASE("uniform disorder: empirical mean near eta_max/2, all values nonnegative") {
    auto mc = lattice_chain(10000, 1.0);
    auto s = model::sample_disorder(mc, 7, 0);
    double mean = 0;
    for (double v : s.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        mean += v;
    }
    mean /= s.values.size();
    CHECK(std::abs(mean - 0.5) < 0.02); // ~3 sigma for 10^4 uniform draws
}

TEST_CASE("truncated-exponential disorder stays in [0, eta_max]") {
    auto mc = lattice_chain(2000, 1.5);
    mc.disorder.kind = model::DisorderDistribution::Kind::TruncExp;
    auto s = model::sample_disorder(mc, 3, 1);
    double mean = 0;
    for (double v : s.values) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.5);
        mean += v;
    }
    mean /= s.values.size();
    CHECK(mean < 0.75); // exponential weight concentrates near 0
}

TEST_CASE("free-chain Dirichlet Laplacian spectrum matches the closed form") {
    for (int m : {5, 10, 50}) {
        auto mc = lattice_chain(m, 0.0);
        auto dis = model::sample_disorder(mc, 1, 0);
        auto H = model::assemble_hamiltonian(mc, model::DomainN::cube(mc.domain, 1), dis);
        auto got = sorted_eigs(H);
        auto expected = oracles::dirichlet_chain_eigenvalues(m);
        REQUIRE(got.size() == expected.size());
        for (std::size_t k = 0; k < got.size(); ++k) CHECK(std::abs(got[k] - expected[k]) < 1e-10);
    }
}

TEST_CASE("assembled operator is exactly symmetric") {
    auto mc = lattice_chain(12, 1.0, 2);
    mc.alpha_w = 0.7;
    mc.interaction.kind = model::InteractionSpec::Kind::Polynomial;
    mc.interaction.p_w = 3.0;
    auto dis = model::sample_disorder(mc, 9, 2);
    auto H = model::assemble_hamiltonian(mc, model::DomainN::cube(mc.domain, 2), dis);
    Eigen::SparseMatrix<double> diff = Eigen::SparseMatrix<double>(H.mat.transpose()) - H.mat;
    CHECK(Eigen::MatrixXd(diff).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("tensor-sum structure at alpha_w = 0") {
    auto mc2 = lattice_chain(8, 1.0, 2);
    auto mc1 = lattice_chain(8, 1.0, 1);
    for (int r = 0; r < 3; ++r) {
        auto dis = model::sample_disorder(mc2, 21, r);
        auto H2 = model::assemble_hamiltonian(mc2, model::DomainN::cube(mc2.domain, 2), dis);
        auto H1 = model::assemble_hamiltonian(mc1, model::DomainN::cube(mc1.domain, 1), dis);
        auto e2 = sorted_eigs(H2);
        auto e1 = sorted_eigs(H1);
        std::vector<double> sums;
        for (double a : e1)
            for (double b : e1) sums.push_back(a + b);
        std::sort(sums.begin(), sums.end());
        REQUIRE(e2.size() == sums.size());
        for (std::size_t k = 0; k < sums.size(); ++k)
            CHECK(std::abs(e2[k] - sums[k]) <= 1e-8 * std::max(1.0, std::abs(sums[k])));
    }
}

TEST_CASE("ground energy decreases when the box is enlarged") {
    auto mc = lattice_chain(30, 1.0);
    auto dis = model::sample_disorder(mc, 5, 0); // same field restricted to nested boxes
    double prev = 1e300;
    for (int len : {10, 20, 30}) {
        grid::Box box;
        box.lo = Eigen::VectorXd::Zero(1);
        box.hi = Eigen::VectorXd::Constant(1, len - 1);
        auto H = model::assemble_hamiltonian(mc, model::DomainN::cube({box}, 1), dis);
        double e0 = spectral::ground_energy(H);
        CHECK(e0 <= prev + 1e-12);
        prev = e0;
    }
}

TEST_CASE("raising one coupling never lowers the ground energy") {
    auto mc = lattice_chain(14, 1.0);
    auto dn = model::DomainN::cube(mc.domain, 1);
    auto dis = model::sample_disorder(mc, 8, 0);
    auto H = model::assemble_hamiltonian(mc, dn, dis);
    double e0 = spectral::ground_energy(H);
    for (std::size_t si = 3; si < 6; ++si) {
        auto bumped = dis;
        bumped.values[si] += 0.5;
        auto Hb = model::assemble_hamiltonian(mc, dn, bumped);
        CHECK(spectral::ground_energy(Hb) >= e0 - 1e-10);
    }
}

TEST_CASE("assemble_partial drops exactly the cross-block interaction") {
    auto mc = lattice_chain(7, 1.0, 2);
    mc.alpha_w = 0.4;
    mc.interaction.kind = model::InteractionSpec::Kind::Polynomial;
    mc.interaction.p_w = 2.0;
    auto dn = model::DomainN::cube(mc.domain, 2);
    auto dis = model::sample_disorder(mc, 2, 0);
    geometry::Partition p{{0}, {1}};

    // J={0},K={1}: no interaction survives, spectrum is the one-particle sumset
    auto Hp = model::assemble_partial(mc, dn, dis, p);
    auto mc1 = lattice_chain(7, 1.0, 1);
    auto H1 = model::assemble_hamiltonian(mc1, model::DomainN::cube(mc1.domain, 1), dis);
    auto ep = sorted_eigs(Hp);
    auto e1 = sorted_eigs(H1);
    std::vector<double> sums;
    for (double a : e1)
        for (double b : e1) sums.push_back(a + b);
    std::sort(sums.begin(), sums.end());
    for (std::size_t k = 0; k < sums.size(); ++k)
        CHECK(std::abs(ep[k] - sums[k]) <= 1e-9 * std::max(1.0, std::abs(sums[k])));

    mc.alpha_w = 0.0;
    auto Ha = model::assemble_hamiltonian(mc, dn, dis);
    auto Hb = model::assemble_partial(mc, dn, dis, p);
    Eigen::SparseMatrix<double> diff = Ha.mat - Hb.mat;
    CHECK(Eigen::MatrixXd(diff).cwiseAbs().maxCoeff() == 0.0);

    CHECK_THROWS_AS(model::assemble_partial(mc, dn, dis, geometry::Partition{{0, 1}, {}}),
                    std::invalid_argument);
}

TEST_CASE("interaction diagonal obeys the declared majorant") {
    auto mc = lattice_chain(9, 0.5, 2);
    mc.alpha_w = 1.3;
    mc.interaction.kind = model::InteractionSpec::Kind::Exponential;
    mc.interaction.sign = model::InteractionSpec::Sign::Signed;
    mc.interaction.c_w = 2.0;
    mc.interaction.mu_w = 0.8;
    mc.interaction.gamma_w = 0.5;
    auto g = model::build_grid(mc, model::DomainN::cube(mc.domain, 2));
    const double reg = mc.interaction_reg();
    for (long id = 0; id < g->size(); ++id) {
        Eigen::MatrixXd pts = g->position(id);
        double w = model::interaction_at(mc, pts);
        double majorant = mc.interaction.bound(
            (pts.col(0) - pts.col(1)).lpNorm<Eigen::Infinity>(), reg);
        CHECK(std::abs(w) <= majorant + 1e-12);
    }
}

TEST_CASE("covering margin: box bump with r_u = 1/2 covers with margin 1") {
    model::ModelConfig mc;
    mc.d = 1;
    mc.mode = model::Mode::Continuum;
    mc.h = 0.1;
    grid::Box box;
    box.lo = Eigen::VectorXd::Zero(1);
    box.hi = Eigen::VectorXd::Constant(1, 4.0);
    mc.domain = {box};
    mc.single_site.shape = model::SingleSiteProfile::Shape::Box;
    mc.single_site.amplitude = 1.0;
    mc.single_site.r_u = 0.5;
    CHECK(model::covering_margin(mc) == doctest::Approx(1.0));

    mc.single_site.r_u = 0.2; // gaps between the bumps
    CHECK(model::covering_margin(mc) == 0.0);
    CHECK_THROWS_AS(mc.validate(), std::invalid_argument);

    mc.single_site.r_u = 0.5;
    mc.single_site.shape = model::SingleSiteProfile::Shape::Tent;
    mc.single_site.amplitude = 1.0;
    double m1 = model::covering_margin(mc);
    mc.single_site.amplitude = 3.0;
    CHECK(model::covering_margin(mc) == doctest::Approx(3.0 * m1));
}

TEST_CASE("config invariants are enforced") {
    auto mc = lattice_chain(5, 1.0);
    mc.alpha_w = -0.1;
    CHECK_THROWS_AS(mc.validate(), std::invalid_argument);
    mc.alpha_w = 0.0;
    CHECK(mc.safety_R() == doctest::Approx(mc.single_site.r_u + 6.0));

    auto cont = lattice_chain(5, 1.0);
    cont.mode = model::Mode::Continuum;
    cont.h = 0.3; // 1/h not an integer
    CHECK_THROWS_AS(cont.validate(), std::invalid_argument);
    cont.h = 0.25;
    CHECK_NOTHROW(cont.validate());
}

TEST_CASE("continuum discretization converges to the interval Laplacian") {
    // -u'' on (0,1), Dirichlet: lowest eigenvalue pi^2
    model::ModelConfig mc;
    mc.d = 1;
    mc.n = 1;
    mc.mode = model::Mode::Continuum;
    grid::Box box;
    box.lo = Eigen::VectorXd::Zero(1);
    box.hi = Eigen::VectorXd::Constant(1, 1.0);
    mc.domain = {box};
    mc.disorder.eta_max = 0.0;
    double prev_err = 1e300;
    for (double h : {1.0 / 8, 1.0 / 16, 1.0 / 32}) {
        mc.h = h;
        auto dis = model::sample_disorder(mc, 1, 0);
        auto H = model::assemble_hamiltonian(mc, model::DomainN::cube(mc.domain, 1), dis);
        double e0 = spectral::ground_energy(H);
        double err = std::abs(e0 - M_PI * M_PI);
        CHECK(err < prev_err);
        prev_err = err;
    }
    CHECK(prev_err < 0.1);
}

TEST_CASE("2-d lattice assembly has the right stencil count") {
    model::ModelConfig mc;
    mc.d = 2;
    mc.n = 1;
    mc.mode = model::Mode::Lattice;
    grid::Box box;
    box.lo = Eigen::VectorXd::Zero(2);
    box.hi = Eigen::VectorXd::Constant(2, 3.0);
    mc.domain = {box};
    mc.disorder.eta_max = 1.0;
    auto dis = model::sample_disorder(mc, 4, 0);
    auto H = model::assemble_hamiltonian(mc, model::DomainN::cube(mc.domain, 1), dis);
    CHECK(H.dim() == 16);
    CHECK(H.mat.nonZeros() == 16 + 2 * 2 * 3 * 4); // diagonal + two directed edges per link
}

TEST_CASE("domain outside the configured Omega is rejected") {
    auto mc = lattice_chain(10, 1.0);
    grid::Box outside;
    outside.lo = Eigen::VectorXd::Constant(1, 100.0);
    outside.hi = Eigen::VectorXd::Constant(1, 120.0);
    auto dis = model::sample_disorder(mc, 1, 0);
    CHECK_THROWS(model::assemble_hamiltonian(mc, model::DomainN::cube({outside}, 1), dis));
}
