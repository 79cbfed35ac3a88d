#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <Eigen/SparseLU>
#include <cmath>
#include <complex>

#include "anderloc/model.hpp"
#include "anderloc/oracles.hpp"
#include "anderloc/spectral.hpp"
#include "anderloc/verifier.hpp"

using namespace anderloc;
using geometry::Configuration;

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

model::SparseOperator make_chain(int len, double eta_max, std::uint64_t seed, int real = 0,
                                 int n = 1) {
    auto mc = lattice_chain(len, eta_max, n);
    auto dis = model::sample_disorder(mc, seed, real);
    return model::assemble_hamiltonian(mc, model::DomainN::cube(mc.domain, n), dis);
}

} // namespace

TEST_CASE("ground_energy: free chain closed form") {
    auto H = make_chain(10, 0.0, 1);
    CHECK(spectral::ground_energy(H) ==
          doctest::Approx(2.0 - 2.0 * std::cos(M_PI / 11.0)).epsilon(1e-10));
}

TEST_CASE("ground_energy: adding a non-negative diagonal never lowers it") {
    auto H = make_chain(20, 1.0, 3);
    double e0 = spectral::ground_energy(H);
    auto H2 = H;
    for (long i = 0; i < H2.dim(); ++i) H2.mat.coeffRef(i, i) += 0.3;
    CHECK(spectral::ground_energy(H2) >= e0 + 0.3 - 1e-9);
}

TEST_CASE("ground_energy: two non-interacting particles double the energy") {
    auto mc1 = lattice_chain(9, 1.0, 1);
    auto mc2 = lattice_chain(9, 1.0, 2);
    auto dis = model::sample_disorder(mc1, 17, 0);
    auto H1 = model::assemble_hamiltonian(mc1, model::DomainN::cube(mc1.domain, 1), dis);
    auto H2 = model::assemble_hamiltonian(mc2, model::DomainN::cube(mc2.domain, 2), dis);
    CHECK(spectral::ground_energy(H2) ==
          doctest::Approx(2.0 * spectral::ground_energy(H1)).epsilon(1e-8));
}

TEST_CASE("ground_energy: Lanczos path agrees with dense on a large instance") {
    auto H = make_chain(1500, 1.0, 5);
    double lam = spectral::ground_energy(H);
    auto eig = oracles::dense_brute_force(H);
    CHECK(lam == doctest::Approx(eig.values[0]).epsilon(1e-9));
}

TEST_CASE("eigenpairs_in_window: window below the spectrum is empty") {
    auto H = make_chain(12, 1.0, 2);
    auto eig = spectral::eigenpairs_in_window(H, {-5.0, -1.0, ""});
    CHECK(eig.count() == 0);
}

TEST_CASE("eigenpairs_in_window: dense path matches brute force with tight residuals") {
    auto H = make_chain(30, 2.0, 9);
    spectral::EnergyWindow I{0.5, 2.5, ""};
    auto eig = spectral::eigenpairs_in_window(H, I);
    auto ref = oracles::dense_brute_force(H);
    std::vector<double> expected;
    for (int k = 0; k < ref.values.size(); ++k)
        if (I.contains(ref.values[k])) expected.push_back(ref.values[k]);
    REQUIRE(eig.count() == static_cast<int>(expected.size()));
    for (int k = 0; k < eig.count(); ++k) {
        CHECK(eig.values[k] == doctest::Approx(expected[k]).epsilon(1e-10));
        CHECK(eig.residuals[k] <= 1e-8 * (1.0 + std::abs(eig.values[k])));
        if (k > 0) CHECK(eig.values[k] >= eig.values[k - 1]);
    }
}

TEST_CASE("eigenpairs_in_window: counts match the inertia oracle on 50 random instances") {
    for (int r = 0; r < 50; ++r) {
        auto H = make_chain(25, 2.0, 31, r);
        spectral::EnergyWindow I{1.0, 3.0, ""};
        auto eig = spectral::eigenpairs_in_window(H, I);
        Eigen::MatrixXd Hd(H.mat);
        int sturm =
            oracles::inertia_count_below(Hd, I.hi) - oracles::inertia_count_below(Hd, I.lo);
        CHECK(eig.count() == sturm);
    }
}

TEST_CASE("eigenpairs_in_window: shift-invert path agrees with the dense oracle") {
    auto H = make_chain(120, 1.5, 77);
    spectral::EnergyWindow I{1.2, 1.8, ""};
    spectral::SolverOptions opts;
    opts.dense_cap = 10; // force the sparse path
    auto eig = spectral::eigenpairs_in_window(H, I, opts);
    auto ref = oracles::dense_brute_force(H);
    std::vector<double> expected;
    for (int k = 0; k < ref.values.size(); ++k)
        if (I.contains(ref.values[k])) expected.push_back(ref.values[k]);
    REQUIRE(eig.count() == static_cast<int>(expected.size()));
    for (int k = 0; k < eig.count(); ++k)
        CHECK(eig.values[k] == doctest::Approx(expected[k]).epsilon(1e-8));
}

TEST_CASE("eigenpairs_in_window: over-wide window trips the budget error") {
    auto H = make_chain(40, 1.0, 2);
    spectral::SolverOptions opts;
    opts.eigenpair_budget = 5;
    CHECK_THROWS_AS(spectral::eigenpairs_in_window(H, {-1.0, 10.0, ""}, opts),
                    std::runtime_error);
}

TEST_CASE("resolvent_block_norm: self-adjoint bound 1/|Im z|") {
    auto H = make_chain(24, 3.0, 4);
    auto x = Configuration::line({12});
    CHECK(spectral::resolvent_block_norm(H, {2.0, 1.0}, x, x) <= 1.0 + 1e-12);
    CHECK(spectral::resolvent_block_norm(H, {2.0, 0.25}, x, x) <= 4.0 + 1e-12);
}

TEST_CASE("resolvent_block_norm agrees with the dense spectral-sum oracle") {
    for (int r = 0; r < 10; ++r) {
        auto H = make_chain(35, 2.0, 13, r);
        auto x = Configuration::line({8});
        auto y = Configuration::line({23});
        auto cx = geometry::cell_indicator(x, *H.grid);
        auto cy = geometry::cell_indicator(y, *H.grid);
        auto eig = oracles::dense_brute_force(H);
        for (double im : {1e-1, 1e-3}) {
            std::complex<double> z(1.7, im);
            double got = spectral::resolvent_block_norm(H, z, x, y);
            double ref = oracles::dense_resolvent_block_norm(eig, z, cx, cy);
            CHECK(got == doctest::Approx(ref).epsilon(1e-7));
        }
    }
}

TEST_CASE("resolvent_block_norm: conjugate symmetry") {
    auto H = make_chain(28, 1.0, 6);
    auto x = Configuration::line({5});
    auto y = Configuration::line({19});
    double a = spectral::resolvent_block_norm(H, {1.3, 1e-2}, x, y);
    double b = spectral::resolvent_block_norm(H, {1.3, -1e-2}, y, x);
    CHECK(a == doctest::Approx(b).epsilon(1e-10));
}

TEST_CASE("resolvent_block_norm: empty cells are an error") {
    auto H = make_chain(10, 1.0, 1);
    auto x = Configuration::line({4});
    auto far = Configuration::line({300});
    CHECK_THROWS_AS(spectral::resolvent_block_norm(H, {1.0, 0.1}, x, far),
                    std::invalid_argument);
}

TEST_CASE("first resolvent identity holds across the solve path") {
    auto H = make_chain(20, 1.0, 10);
    using SpC = Eigen::SparseMatrix<std::complex<double>>;
    std::complex<double> z1(1.0, 0.5), z2(2.0, 0.25);
    SpC A1 = H.mat.cast<std::complex<double>>();
    SpC A2 = A1;
    for (long i = 0; i < H.dim(); ++i) {
        A1.coeffRef(i, i) -= z1;
        A2.coeffRef(i, i) -= z2;
    }
    Eigen::SparseLU<SpC> lu1(A1), lu2(A2);
    Eigen::VectorXcd e = Eigen::VectorXcd::Zero(H.dim());
    e[7] = 1.0;
    Eigen::VectorXcd r2 = lu2.solve(e);
    Eigen::VectorXcd r1 = lu1.solve(e);
    Eigen::VectorXcd chained = lu1.solve(r2);
    CHECK((r1 - r2 - (z1 - z2) * chained).norm() < 1e-9);
}

TEST_CASE("resolvent decays in dist_H far below the spectrum") {
    auto H = make_chain(48, 0.5, 3);
    std::complex<double> z(-2.0, 0.0);
    std::vector<verifier::DecaySample> samples;
    for (double sep : {4.0, 8.0, 12.0, 16.0}) {
        auto x = Configuration::line({16});
        auto y = Configuration::line({16 + sep});
        samples.push_back({sep, spectral::resolvent_block_norm(H, z, x, y), 0.0});
    }
    auto fit = verifier::fit_decay(samples, {1.0});
    CHECK(fit.mu > 0.5);
}

TEST_CASE("projector blocks: completeness, Cauchy-Schwarz, rank-1") {
    auto H = make_chain(18, 1.0, 5);
    spectral::SolverOptions wide;
    wide.eigenpair_budget = 100000;
    auto eig = spectral::eigenpairs_in_window(H, {-1e9, 1e9, ""}, wide);
    auto x = Configuration::line({9});
    auto y = Configuration::line({13});
    auto cx = geometry::cell_indicator(x, *H.grid);
    auto cy = geometry::cell_indicator(y, *H.grid);

    Eigen::MatrixXd full = Eigen::MatrixXd::Zero(cx.size(), cx.size());
    for (int k = 0; k < eig.count(); ++k) {
        Eigen::VectorXd vx(cx.size());
        for (std::size_t a = 0; a < cx.size(); ++a) vx[a] = eig.vectors(cx[a], k);
        full += vx * vx.transpose();
    }
    CHECK(spectral::operator_norm(full) == doctest::Approx(1.0).epsilon(1e-10));

    auto bxy = spectral::projector_block_norms(eig, cx, cy);
    auto bxx = spectral::projector_block_norms(eig, cx, cx);
    auto byy = spectral::projector_block_norms(eig, cy, cy);
    REQUIRE(bxy.norms.size() == bxx.norms.size());
    for (std::size_t k = 0; k < bxy.norms.size(); ++k)
        CHECK(bxy.norms[k] <= std::sqrt(bxx.norms[k] * byy.norms[k]) + 1e-10);

    for (int k = 0; k < std::min(5, eig.count()); ++k) {
        double nx = 0, ny = 0;
        for (std::size_t a = 0; a < cx.size(); ++a)
            nx += eig.vectors(cx[a], k) * eig.vectors(cx[a], k);
        for (std::size_t b = 0; b < cy.size(); ++b)
            ny += eig.vectors(cy[b], k) * eig.vectors(cy[b], k);
        CHECK(bxy.norms[k] == doctest::Approx(std::sqrt(nx * ny)).epsilon(1e-10));
    }
}

TEST_CASE("trace of chi_x P_I chi_x equals the dense eigenvector mass") {
    auto H = make_chain(22, 1.5, 8);
    spectral::EnergyWindow I{0.8, 2.2, ""};
    auto eig = spectral::eigenpairs_in_window(H, I);
    auto x = Configuration::line({11});
    auto cx = geometry::cell_indicator(x, *H.grid);
    auto ref = oracles::dense_brute_force(H);
    double expected = 0;
    for (int k = 0; k < ref.values.size(); ++k)
        if (I.contains(ref.values[k]))
            for (long node : cx) expected += ref.vectors(node, k) * ref.vectors(node, k);
    double got = 0;
    for (int k = 0; k < eig.count(); ++k)
        for (long node : cx) got += eig.vectors(node, k) * eig.vectors(node, k);
    CHECK(got == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("gevrey cutoff: exact plateaus and derivative bounds") {
    spectral::EnergyWindow J{1.0, 2.0, ""};
    double r = 0.5;
    int N = 8;
    auto chi = spectral::gevrey_cutoff(J, r, N);

    CHECK(chi(1.5) == 0.0);
    CHECK(chi(2.4) == 0.0); // dist = 0.4 <= r
    CHECK(chi(0.5) == 0.0);
    CHECK(chi(3.0) == 1.0); // dist = 1.0 >= 2r
    CHECK(chi(-0.1) == 1.0);
    CHECK(chi(2.7) > 0.0);
    CHECK(chi(2.7) < 1.0);

    const double c = chi.bound_c(), A = chi.bound_A();
    for (int k = 0; k <= 4; ++k) {
        double bound = c * std::pow(A * N / r, k);
        for (double E = -0.5; E <= 3.5; E += 0.003)
            CHECK(std::abs(chi.derivative(E, k)) <= bound * (1.0 + 1e-9));
    }

    auto fd = [&](double E, int k) {
        double h = 2e-3;
        if (k == 1) return (chi(E + h) - chi(E - h)) / (2 * h);
        if (k == 2) return (chi(E + h) - 2 * chi(E) + chi(E - h)) / (h * h);
        if (k == 3)
            return (chi(E + 2 * h) - 2 * chi(E + h) + 2 * chi(E - h) - chi(E - 2 * h)) /
                   (2 * h * h * h);
        return (chi(E + 2 * h) - 4 * chi(E + h) + 6 * chi(E) - 4 * chi(E - h) +
                chi(E - 2 * h)) /
               (h * h * h * h);
    };
    for (double E : {2.55, 2.7, 2.85, 0.35, 0.2}) {
        for (int k = 1; k <= 4; ++k) {
            double scale = std::pow(A * N / r, k);
            CHECK(chi.derivative(E, k) == doctest::Approx(fd(E, k)).epsilon(0.05).scale(scale));
        }
    }

    CHECK_THROWS_AS(spectral::gevrey_cutoff(J, r, 100), std::invalid_argument);
    CHECK_THROWS_AS(spectral::gevrey_cutoff(J, r, 1), std::invalid_argument);
}

TEST_CASE("restricted resolvent: zero cutoff, identity cutoff, and decay") {
    auto H = make_chain(40, 1.0, 12);
    auto eig = oracles::dense_brute_force(H);
    double lo = eig.values[0], hi = eig.values[eig.values.size() - 1];
    auto x = Configuration::line({12});
    auto y = Configuration::line({26});

    spectral::CutoffFunction zero({lo - 1.0, hi + 1.0, ""}, 2.0, 4);
    CHECK(spectral::restricted_resolvent_block_norm(H, {2.0, 1.0}, zero, x, y) == 0.0);

    spectral::CutoffFunction one({lo - 30.0, lo - 29.0, ""}, 0.5, 4);
    for (int k = 0; k < eig.values.size(); ++k) CHECK(one(eig.values[k]) == 1.0);
    double a = spectral::restricted_resolvent_block_norm(H, {2.0, 1.0}, one, x, y);
    double b = spectral::resolvent_block_norm(H, {2.0, 1.0}, x, y);
    CHECK(a == doctest::Approx(b).epsilon(1e-8));

    double ec = 0.5 * (lo + hi);
    spectral::EnergyWindow J{ec - 0.1, ec + 0.1, ""};
    std::vector<verifier::DecaySample> samples;
    for (double sep : {4.0, 8.0, 12.0, 16.0, 20.0}) {
        int N = spectral::CutoffFunction::order_for_distance(0.5, sep);
        spectral::CutoffFunction cut(J, 0.4, N);
        auto xx = Configuration::line({10});
        auto yy = Configuration::line({10 + sep});
        double v = spectral::restricted_resolvent_block_norm(H, {ec, 0.0}, cut, xx, yy);
        if (v > 0) samples.push_back({sep, v, 0.0});
    }
    REQUIRE(samples.size() >= 3);
    auto fit = verifier::fit_decay(samples, {1.0});
    CHECK(fit.mu > 0.0);
}
