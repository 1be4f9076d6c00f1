#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "qlab/tensor_core.hpp"

using namespace qlab;

namespace {

QTensor q_from_diag(double a, double b, double c) {
    Mat3 M;
    M(0, 0) = a;
    M(1, 1) = b;
    M(2, 2) = c;
    return q_from_matrix(M);
}

Vec3 random_unit(std::mt19937& rng) {
    std::normal_distribution<double> g(0, 1);
    Vec3 v;
    do {
        v = {g(rng), g(rng), g(rng)};
    } while (v.norm() < 1e-3);
    return v.normalized();
}

Rotation random_rotation(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(0, 2 * M_PI);
    return Rotation::axis_angle(random_unit(rng), u(rng));
}

}  // namespace

TEST_CASE("basis reconstruction is symmetric, traceless, isometric") {
    std::mt19937 rng(7);
    std::normal_distribution<double> g(0, 2);
    for (int trial = 0; trial < 200; ++trial) {
        QTensor q;
        for (auto& ci : q.c) ci = g(rng);
        const Mat3 M = q.matrix();
        CHECK(std::abs(M.trace()) < 1e-14 * (1 + q.norm()));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) CHECK(M(i, j) == M(j, i));
        CHECK(M.frob() == Catch::Approx(q.norm()).margin(1e-14));
        // projection round-trip
        const QTensor back = q_from_matrix(M);
        CHECK((back - q).norm() < 1e-14 * (1 + q.norm()));
    }
}

TEST_CASE("invariants on hand-computed matrices") {
    auto [x0, y0] = invariants(QTensor{});
    CHECK(x0 == 0.0);
    CHECK(y0 == 0.0);

    auto [x1, y1] = invariants(q_from_diag(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0));
    CHECK(x1 == Catch::Approx(2.0 / 3.0).epsilon(1e-13));
    CHECK(y1 == Catch::Approx(2.0 / 9.0).epsilon(1e-13));

    auto [x2, y2] = invariants(q_from_diag(0.5, -0.5, 0.0));
    CHECK(x2 == Catch::Approx(0.5).epsilon(1e-13));
    CHECK(y2 == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("uniaxial construction") {
    SECTION("zero order parameter gives the zero tensor") {
        const QTensor q = uniaxial(0.0, Vec3{0, 1, 0});
        CHECK(q.norm() == 0.0);
    }
    SECTION("axis-aligned cases") {
        const QTensor q = uniaxial(1.0, Vec3{1, 0, 0});
        CHECK((q - q_from_diag(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0)).norm() < 1e-14);
        const QTensor p = uniaxial(-2.0, Vec3{0, 0, 1});
        CHECK((p - q_from_diag(2.0 / 3.0, 2.0 / 3.0, -4.0 / 3.0)).norm() < 1e-13);
    }
    SECTION("invariants match 2s^2/3, 2s^3/9") {
        std::mt19937 rng(11);
        std::uniform_real_distribution<double> us(-5, 5);
        for (int t = 0; t < 100; ++t) {
            const double s = us(rng);
            auto [x, y] = invariants(uniaxial(s, random_unit(rng)));
            CHECK(x == Catch::Approx(2 * s * s / 3).margin(1e-12));
            CHECK(y == Catch::Approx(2 * s * s * s / 9).margin(1e-12));
        }
    }
    SECTION("non-unit director is rejected") {
        CHECK_THROWS_AS(uniaxial(1.0, Vec3{1, 1, 0}), std::invalid_argument);
    }
    SECTION("linear in s for fixed n") {
        const Vec3 n = Vec3{1, 2, -1}.normalized();
        const QTensor q1 = uniaxial(0.7, n), q2 = uniaxial(-1.3, n);
        const QTensor sum = uniaxial(0.7 - 1.3, n);
        CHECK((q1 + q2 - sum).norm() < 1e-14);
    }
}

TEST_CASE("biaxiality") {
    CHECK(biaxiality(QTensor{}) == 0.0);
    CHECK(biaxiality(q_from_diag(0.5, -0.5, 0.0)) == Catch::Approx(1.0).margin(1e-13));
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> us(0.05, 5);
    for (int t = 0; t < 200; ++t) {
        double s = us(rng) * (t % 2 ? 1 : -1);
        CHECK(biaxiality(uniaxial(s, random_unit(rng))) < 1e-12);
    }
    // three distinct eigenvalues force beta > 0
    CHECK(biaxiality(q_from_diag(0.6, 0.1, -0.7)) > 0.0);
}

TEST_CASE("rotate") {
    std::mt19937 rng(17);
    std::normal_distribution<double> g(0, 1);

    SECTION("identity") {
        QTensor q;
        for (auto& ci : q.c) ci = g(rng);
        CHECK((rotate(Rotation::identity(), q) - q).norm() < 1e-14);
    }
    SECTION("z-rotation maps ex-uniaxial to ey-uniaxial") {
        const Rotation rz = Rotation::axis_angle(Vec3{0, 0, 1}, M_PI / 2);
        const QTensor got = rotate(rz, uniaxial(1.0, Vec3{1, 0, 0}));
        CHECK((got - uniaxial(1.0, Vec3{0, 1, 0})).norm() < 1e-13);
    }
    SECTION("invariants and biaxiality preserved") {
        for (int t = 0; t < 100; ++t) {
            QTensor q;
            for (auto& ci : q.c) ci = g(rng);
            const Rotation rot = random_rotation(rng);
            auto [x, y] = invariants(q);
            auto [xr, yr] = invariants(rotate(rot, q));
            CHECK(xr == Catch::Approx(x).margin(1e-12));
            CHECK(yr == Catch::Approx(y).margin(1e-12));
            CHECK(std::abs(biaxiality(rotate(rot, q)) - biaxiality(q)) <= 1e-12);
        }
    }
    SECTION("rotation validation") {
        Mat3 notrot = Mat3::identity();
        notrot(0, 0) = 2;
        CHECK_THROWS_AS(Rotation(notrot), std::invalid_argument);
    }
}

TEST_CASE("decompose: classification and examples") {
    SECTION("zero tensor is isotropic") {
        const SpectralData d = decompose(QTensor{}, 1e-9);
        CHECK(d.phase == Phase::Isotropic);
        CHECK(d.s == 0.0);
        CHECK(d.n.norm() == Catch::Approx(1.0));
    }
    SECTION("prolate uniaxial along x") {
        const SpectralData d = decompose(q_from_diag(2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0), 1e-9);
        CHECK(d.phase == Phase::Uniaxial);
        CHECK(d.s == Catch::Approx(1.0).epsilon(1e-12));
        CHECK(std::abs(d.n.x) == Catch::Approx(1.0).margin(1e-12));
        CHECK(d.beta < 1e-12);
        CHECK(d.eigenvalues[0] + d.eigenvalues[1] + d.eigenvalues[2] ==
              Catch::Approx(0.0).margin(1e-12));
    }
    SECTION("maximally biaxial tensor") {
        const SpectralData d = decompose(q_from_diag(0.5, -0.5, 0.0), 1e-9);
        CHECK(d.phase == Phase::Biaxial);
        CHECK(d.s == Catch::Approx(0.0).margin(1e-13));   // 3 tr(Q^3)/|Q|^2 = 0
        CHECK(d.beta == Catch::Approx(1.0).margin(1e-12));
    }
    SECTION("oblate uniaxial picks the simple eigenvalue") {
        const SpectralData d = decompose(uniaxial(-1.5, Vec3{0, 0, 1}), 1e-9);
        CHECK(d.phase == Phase::Uniaxial);
        CHECK(d.s == Catch::Approx(-1.5).epsilon(1e-12));
        CHECK(std::abs(d.n.z) == Catch::Approx(1.0).margin(1e-10));
    }
    SECTION("tol must be positive") {
        CHECK_THROWS_AS(decompose(QTensor{}, 0.0), std::invalid_argument);
    }
}

TEST_CASE("decompose round-trip over random uniaxial tensors") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> us(0.01, 5.0);
    for (int t = 0; t < 2000; ++t) {
        const double s = us(rng) * (t % 2 ? 1 : -1);
        const Vec3 n = random_unit(rng);
        const QTensor q = uniaxial(s, n);
        const SpectralData d = decompose(q, 1e-10);
        REQUIRE(d.phase == Phase::Uniaxial);
        CHECK(std::abs(d.s - s) <= 1e-9 * std::max(1.0, std::abs(s)));
        CHECK(std::abs(std::abs(d.n.dot(n)) - 1.0) < 1e-8);
        // representable round-trip bound from the contract
        CHECK((uniaxial(d.s, d.n) - q).norm() <= 10 * 1e-10 * q.norm() + 1e-13);
    }
}

TEST_CASE("director sign normalization is deterministic") {
    const SpectralData d1 = decompose(uniaxial(1.0, Vec3{-1, 0, 0}), 1e-9);
    CHECK(d1.n.x > 0);
    const Vec3 m = Vec3{0, -0.6, 0.8}.normalized();
    const SpectralData d2 = decompose(uniaxial(0.9, m), 1e-9);
    CHECK(d2.n.y > 0);  // first nonzero component positive
}
