#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qlab/bulk_potential.hpp"
#include "qlab/tensor_core.hpp"

using namespace qlab;

namespace {

// Independent oracle: brute-force minimization of the uniaxial bulk density
// f_b(s) = -(2a/3)s^2 - (2b/9)s^3 + (4c/9)s^4 by scan plus golden-section
// refinement.
double brute_force_stationary(double a, double b, double c) {
    auto fb = [&](double s) {
        return -(2 * a / 3) * s * s - (2 * b / 9) * s * s * s + (4 * c / 9) * s * s * s * s;
    };
    double best_s = 0, best_f = fb(0);
    for (int i = 0; i <= 40000; ++i) {
        const double s = 1e-3 + (5.0 - 1e-3) * i / 40000.0;
        if (fb(s) < best_f) { best_f = fb(s); best_s = s; }
    }
    double lo = best_s - 2e-4, hi = best_s + 2e-4;
    const double gr = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = fb(x1), f2 = fb(x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - gr * (hi - lo); f1 = fb(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + gr * (hi - lo); f2 = fb(x2);
        }
    }
    return 0.5 * (lo + hi);
}

Vec3 random_unit(std::mt19937& rng) {
    std::normal_distribution<double> g(0, 1);
    Vec3 v;
    do {
        v = {g(rng), g(rng), g(rng)};
    } while (v.norm() < 1e-3);
    return v.normalized();
}

}  // namespace

TEST_CASE("quartic potential and derivatives") {
    const BulkPotential p = BulkPotential::quartic(1.2, 0.7, 2.0);
    CHECK(p.phi(0.3, -0.1) == Catch::Approx(-1.2 * 0.3 + 0.7 * 0.1 + 2.0 * 0.09));
    CHECK(p.d1(0.3, -0.1) == Catch::Approx(-1.2 + 2 * 2.0 * 0.3));
    CHECK(p.d2(0.3, -0.1) == -0.7);
}

TEST_CASE("partials match central differences of phi") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ux(0.01, 3.0), uy(-1.0, 1.0);
    const BulkPotential p = BulkPotential::quartic(0.9, 1.4, 0.8);
    const double step = 1e-6;
    for (int t = 0; t < 100; ++t) {
        const double x = ux(rng), y = uy(rng);
        const double d1_fd = (p.phi(x + step, y) - p.phi(x - step, y)) / (2 * step);
        const double d2_fd = (p.phi(x, y + step) - p.phi(x, y - step)) / (2 * step);
        CHECK(p.d1(x, y) == Catch::Approx(d1_fd).epsilon(1e-6).margin(1e-8));
        CHECK(p.d2(x, y) == Catch::Approx(d2_fd).epsilon(1e-6).margin(1e-8));
    }
}

TEST_CASE("psi values") {
    const MaterialParams mp(1.0, BulkPotential::quartic(1, 1, 1));
    CHECK(psi(mp, 0.0) == 0.0);
    CHECK(psi(mp, 1.0) == Catch::Approx(-2.0 - 1.0 + 8.0 / 3.0));
    const auto roots = stationary_s(mp.bulk);
    for (double r : roots) CHECK(std::abs(psi(mp, r)) < 1e-12);
    // scaling by L
    const MaterialParams mp2(2.5, BulkPotential::quartic(1, 1, 1));
    CHECK(psi(mp2, 0.7) == Catch::Approx(psi(mp, 0.7) / 2.5));
}

TEST_CASE("psi_prime matches finite differences") {
    const MaterialParams mp(1.3, BulkPotential::quartic(0.8, 1.1, 0.9));
    for (double s : {-1.5, -0.2, 0.0, 0.4, 2.0}) {
        const double fd = (psi(mp, s + 1e-6) - psi(mp, s - 1e-6)) / 2e-6;
        CHECK(psi_prime(mp, s) == Catch::Approx(fd).margin(1e-7));
    }
}

TEST_CASE("stationary_s closed forms") {
    SECTION("a=1,b=0,c=1 gives {-sqrt(3)/2, 0, sqrt(3)/2}") {
        const auto r = stationary_s(BulkPotential::quartic(1, 0, 1));
        REQUIRE(r.size() == 3);
        CHECK(r[0] == Catch::Approx(-std::sqrt(3.0) / 2).epsilon(1e-12));
        CHECK(r[1] == Catch::Approx(0.0).margin(1e-15));
        CHECK(r[2] == Catch::Approx(std::sqrt(3.0) / 2).epsilon(1e-12));
    }
    SECTION("a=b=c=1 matches (3+sqrt(201))/16 and the brute-force minimizer") {
        const auto r = stationary_s(BulkPotential::quartic(1, 1, 1));
        REQUIRE(r.size() == 3);
        const double splus = (3.0 + std::sqrt(201.0)) / 16.0;
        CHECK(r.back() == Catch::Approx(splus).epsilon(1e-14));
        CHECK(r.back() == Catch::Approx(brute_force_stationary(1, 1, 1)).margin(1e-8));
    }
    SECTION("negative discriminant leaves only 0") {
        const auto r = stationary_s(BulkPotential::quartic(-1, 0, 1));
        REQUIRE(r.size() == 1);
        CHECK(r[0] == 0.0);
    }
    SECTION("custom kind requires a bracket") {
        auto p = BulkPotential::custom([](double, double) { return 0.0; },
                                       [](double, double) { return 0.0; },
                                       [](double, double) { return 0.0; });
        CHECK_THROWS_AS(stationary_s(p), std::invalid_argument);
    }
    SECTION("bracketed bisection agrees with the closed form") {
        const BulkPotential q = BulkPotential::quartic(1, 1, 1);
        const auto closed = stationary_s(q);
        const auto scanned = stationary_s(q, -2.0, 2.0, 512);
        REQUIRE(scanned.size() == closed.size());
        for (std::size_t i = 0; i < closed.size(); ++i)
            CHECK(scanned[i] == Catch::Approx(closed[i]).margin(1e-9));
    }
}

TEST_CASE("bulk_gradient") {
    const BulkPotential bulk = BulkPotential::quartic(1, 1, 1);
    SECTION("zero at zero") {
        CHECK(bulk_gradient(bulk, QTensor{}).norm() == 0.0);
    }
    SECTION("uniaxial input stays on the same uniaxial ray: L psi(s) (n(x)n - I/3)") {
        std::mt19937 rng(31);
        std::uniform_real_distribution<double> us(-2, 2);
        const MaterialParams mp(1.7, bulk);
        for (int t = 0; t < 100; ++t) {
            const double s = us(rng);
            const Vec3 n = random_unit(rng);
            const QTensor grad = bulk_gradient(bulk, uniaxial(s, n));
            const QTensor expect = uniaxial(1.0, n) * (mp.L * psi(mp, s));
            CHECK((grad - expect).norm() < 1e-12 * (1 + expect.norm()));
        }
    }
    SECTION("vanishes at the stationary uniaxial state") {
        const double sstar = stationary_s(bulk).back();
        const QTensor g = bulk_gradient(bulk, uniaxial(sstar, Vec3{0, 0, 1}));
        CHECK(g.norm() < 1e-10);
    }
    SECTION("output is traceless symmetric for random input") {
        std::mt19937 rng(37);
        std::normal_distribution<double> gau(0, 1);
        for (int t = 0; t < 50; ++t) {
            QTensor q;
            for (auto& ci : q.c) ci = gau(rng);
            const Mat3 M = bulk_gradient(bulk, q).matrix();
            CHECK(std::abs(M.trace()) < 1e-14 * (1 + M.frob()));
        }
    }
}

TEST_CASE("frame invariance of the bulk density") {
    std::mt19937 rng(41);
    std::normal_distribution<double> gau(0, 1);
    std::uniform_real_distribution<double> ua(0, 2 * M_PI);
    const BulkPotential bulk = BulkPotential::quartic(0.9, 1.2, 1.1);
    for (int t = 0; t < 100; ++t) {
        QTensor q;
        for (auto& ci : q.c) ci = gau(rng);
        const Rotation g = Rotation::axis_angle(random_unit(rng), ua(rng));
        auto [x, y] = invariants(q);
        auto [xr, yr] = invariants(rotate(g, q));
        CHECK(bulk.phi(xr, yr) == Catch::Approx(bulk.phi(x, y)).margin(1e-11));
    }
}

TEST_CASE("growth_check") {
    CHECK(growth_check(BulkPotential::quartic(1, 1, 1), 2.0, 2000));
    CHECK_FALSE(growth_check(BulkPotential::quartic(1, 0, 0), 1.0, 200));
    CHECK(growth_check(BulkPotential::quartic(-1, 0, 1), 1.0, 2000));
    CHECK_THROWS_AS(growth_check(BulkPotential::quartic(1, 1, 1), -1.0, 10),
                    std::invalid_argument);
}

TEST_CASE("material params validation") {
    CHECK_THROWS_AS(MaterialParams(0.0, BulkPotential::quartic(1, 1, 1)),
                    std::invalid_argument);
}
