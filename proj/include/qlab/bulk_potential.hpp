// Frame-invariant bulk free energy phi(tr Q^2, tr Q^3): the quartic form and
// user-supplied callbacks, with derived quantities used by the solvers.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "qlab/tensor_core.hpp"

namespace qlab {

struct BulkPotential {
    enum class Kind { Quartic, Custom };
    using Fn = std::function<double(double, double)>;

    Kind kind = Kind::Quartic;
    // quartic: phi(x,y) = -a x - b y + c x^2
    double a = 1, b = 1, c = 1;
    // custom callbacks: phi, d phi/dx, d phi/dy (must be reentrant)
    Fn phi_fn, d1_fn, d2_fn;

    static BulkPotential quartic(double a, double b, double c) {
        BulkPotential p;
        p.kind = Kind::Quartic;
        p.a = a; p.b = b; p.c = c;
        return p;
    }
    static BulkPotential custom(Fn phi, Fn d1, Fn d2) {
        BulkPotential p;
        p.kind = Kind::Custom;
        p.phi_fn = std::move(phi);
        p.d1_fn = std::move(d1);
        p.d2_fn = std::move(d2);
        return p;
    }

    double phi(double x, double y) const {
        return kind == Kind::Quartic ? -a * x - b * y + c * x * x : phi_fn(x, y);
    }
    double d1(double x, double y) const {
        return kind == Kind::Quartic ? -a + 2.0 * c * x : d1_fn(x, y);
    }
    double d2(double x, double y) const {
        return kind == Kind::Quartic ? -b : d2_fn(x, y);
    }
};

struct MaterialParams {
    double L = 1.0;  // one-constant elastic coefficient, > 0
    BulkPotential bulk;

    MaterialParams() = default;
    MaterialParams(double L_, BulkPotential bulk_) : L(L_), bulk(std::move(bulk_)) {
        if (!(L > 0)) throw std::invalid_argument("MaterialParams: L must be positive");
    }
};

// Right-hand side of the tensor equilibrium equation:
//   2 (d1 phi) Q + 3 (d2 phi) (Q^2 - |Q|^2/3 I),
// evaluated at (x,y) = (tr Q^2, tr Q^3). Traceless symmetric by construction.
inline QTensor bulk_gradient(const BulkPotential& bulk, const QTensor& q) {
    const Mat3 M = q.matrix();
    const Mat3 M2 = M * M;
    const double x = M2.trace();
    const double y = (M2 * M).trace();
    Mat3 G = M * (2.0 * bulk.d1(x, y));
    const double d2 = bulk.d2(x, y);
    Mat3 dev = M2;
    const double sub = x / 3.0;
    dev(0, 0) -= sub;
    dev(1, 1) -= sub;
    dev(2, 2) -= sub;
    G = G + dev * (3.0 * d2);
    return q_from_matrix(G);
}

// Scalar nonlinearity of the uniaxial ansatz:
//   psi(s) = (1/L) (2 s d1 + s^2 d2) at (x,y) = (2s^2/3, 2s^3/9).
// For the quartic bulk: psi(s) = (1/L) (-2 a s - b s^2 + (8c/3) s^3).
inline double psi(const MaterialParams& p, double s) {
    const double x = 2.0 * s * s / 3.0;
    const double y = 2.0 * s * s * s / 9.0;
    return (2.0 * s * p.bulk.d1(x, y) + s * s * p.bulk.d2(x, y)) / p.L;
}

// d psi/ds; analytic for the quartic bulk, central difference otherwise.
inline double psi_prime(const MaterialParams& p, double s) {
    if (p.bulk.kind == BulkPotential::Kind::Quartic)
        return (-2.0 * p.bulk.a - 2.0 * p.bulk.b * s + 8.0 * p.bulk.c * s * s) / p.L;
    const double h = 1e-6 * std::max(1.0, std::abs(s));
    return (psi(p, s + h) - psi(p, s - h)) / (2.0 * h);
}

// All real roots of psi(s) = 0, ascending. Quartic kind (requires c > 0):
// closed form {0} plus (3b +- sqrt(9 b^2 + 192 a c))/(16 c) when real.
inline std::vector<double> stationary_s(const BulkPotential& bulk) {
    if (bulk.kind != BulkPotential::Kind::Quartic)
        throw std::invalid_argument(
            "stationary_s: Custom bulk needs an explicit bracket (use the overload)");
    if (!(bulk.c > 0))
        throw std::invalid_argument("stationary_s: quartic kind requires c > 0");
    std::vector<double> roots{0.0};
    const double disc = 9.0 * bulk.b * bulk.b + 192.0 * bulk.a * bulk.c;
    if (disc >= 0) {
        const double sq = std::sqrt(disc);
        for (double r : {(3.0 * bulk.b - sq) / (16.0 * bulk.c),
                         (3.0 * bulk.b + sq) / (16.0 * bulk.c)}) {
            bool dup = false;
            for (double e : roots) dup = dup || std::abs(e - r) < 1e-14;
            if (!dup) roots.push_back(r);
        }
    }
    std::sort(roots.begin(), roots.end());
    return roots;
}

// Bracketed-bisection variant for arbitrary bulk potentials: scans psi on
// [lo, hi] and bisects every sign change (L drops out of the root set).
inline std::vector<double> stationary_s(const BulkPotential& bulk, double lo, double hi,
                                        int scan = 256) {
    if (!(hi > lo) || scan < 2)
        throw std::invalid_argument("stationary_s: invalid bracket");
    MaterialParams p(1.0, bulk);
    std::vector<double> roots;
    double prev_s = lo, prev_f = psi(p, lo);
    for (int i = 1; i <= scan; ++i) {
        const double s = lo + (hi - lo) * i / scan;
        const double f = psi(p, s);
        if (prev_f == 0.0) {
            roots.push_back(prev_s);
        } else if (prev_f * f < 0) {
            double a = prev_s, b = s, fa = prev_f;
            for (int it = 0; it < 100; ++it) {
                const double m = 0.5 * (a + b), fm = psi(p, m);
                if (fa * fm <= 0) b = m; else { a = m; fa = fm; }
            }
            roots.push_back(0.5 * (a + b));
        }
        prev_s = s;
        prev_f = f;
    }
    if (prev_f == 0.0) roots.push_back(prev_s);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-12; }),
                roots.end());
    return roots;
}

// Sampling check of the coercivity condition
//   |Q| >= M  =>  2 |Q|^2 d1 + 3 d2 tr(Q^3) >= 0
// on a deterministic pseudo-random set with |Q| in [M, 4M]. A necessary
// condition witness, not a certificate.
inline bool growth_check(const BulkPotential& bulk, double M, int samples) {
    if (!(M > 0) || samples <= 0)
        throw std::invalid_argument("growth_check: require M > 0 and samples > 0");
    std::mt19937 rng(0x51ab5eedu);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int i = 0; i < samples; ++i) {
        QTensor q;
        double n2 = 0;
        do {
            for (int k = 0; k < 5; ++k) q.c[k] = gauss(rng);
            n2 = q.norm2();
        } while (n2 < 1e-12);
        // van der Corput radius ladder in [M, 4M]
        double t = 0, denom = 1;
        for (unsigned bits = static_cast<unsigned>(i) + 1; bits; bits >>= 1) {
            denom *= 2;
            if (bits & 1u) t += 1.0 / denom;
        }
        const double r = M * (1.0 + 3.0 * t);
        q *= r / std::sqrt(n2);
        auto [x, y] = invariants(q);
        const double expr = 2.0 * x * bulk.d1(x, y) + 3.0 * bulk.d2(x, y) * y;
        if (expr < -1e-12 * std::max(1.0, x * x)) return false;
    }
    return true;
}

}  // namespace qlab
