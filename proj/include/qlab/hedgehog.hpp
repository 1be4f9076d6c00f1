// The radial hedgehog: scalar two-point boundary value problem
//   s'' + (2/r) s' - (6/r^2) s = psi(s),   s(0) = 0, s(R) = s0,
// solved by shooting (RK4 from the regular r^2 branch) or by damped Newton
// collocation, plus the lift to a spherically symmetric tensor field.
#pragma once

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlab/bulk_potential.hpp"
#include "qlab/grid_domain.hpp"

namespace qlab {

enum class ProfileMethod : std::uint8_t { Shooting, Collocation };

struct HedgehogProfile {
    std::vector<double> r;  // uniform radii, r[0] = 0, r.back() = R
    std::vector<double> s;  // s[0] = 0 exactly
    double s1 = 0;          // ds/dr at r = R
    MaterialParams params;
    double s0 = 0;
    double R = 1;
    int n_brackets = 1;     // shooting sign-change intervals found (first is used)
};

namespace detail {

struct OdeState {
    double s, v;  // (s, s')
};

// d/dr (s, s') for the radial equation.
inline OdeState hedgehog_rhs(const MaterialParams& p, double r, const OdeState& y) {
    return {y.v, -2.0 * y.v / r + 6.0 * y.s / (r * r) + psi(p, y.s)};
}

inline OdeState rk4_step(const MaterialParams& p, double r, const OdeState& y, double dr) {
    const OdeState k1 = hedgehog_rhs(p, r, y);
    const OdeState y2{y.s + 0.5 * dr * k1.s, y.v + 0.5 * dr * k1.v};
    const OdeState k2 = hedgehog_rhs(p, r + 0.5 * dr, y2);
    const OdeState y3{y.s + 0.5 * dr * k2.s, y.v + 0.5 * dr * k2.v};
    const OdeState k3 = hedgehog_rhs(p, r + 0.5 * dr, y3);
    const OdeState y4{y.s + dr * k3.s, y.v + dr * k3.v};
    const OdeState k4 = hedgehog_rhs(p, r + dr, y4);
    return {y.s + dr / 6.0 * (k1.s + 2 * k2.s + 2 * k3.s + k4.s),
            y.v + dr / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

// Integrates from eps to R with the quadratic asymptotic start s = C r^2,
// recording s at the radii `out_r` (all >= eps). Steps stay below a fraction
// of r near the coordinate singularity and below a fixed fraction of the
// output spacing elsewhere.
inline void shoot(const MaterialParams& p, double C, double R, const std::vector<double>& out_r,
                  std::vector<double>& out_s, double& v_end) {
    const double eps = R * 1e-6;
    double r = eps;
    OdeState y{C * eps * eps, 2.0 * C * eps};
    const double h_base = out_r.size() > 1 ? (out_r[1] - out_r[0]) / 4.0 : R / 128.0;
    std::size_t next = 0;
    while (next < out_r.size() && out_r[next] <= eps) {
        out_s[next] = C * out_r[next] * out_r[next];
        ++next;
    }
    while (next < out_r.size()) {
        const double target = out_r[next];
        while (r < target - 1e-15 * R) {
            const double dr = std::min({target - r, std::max(0.05 * r, 1e-12 * R), h_base});
            y = rk4_step(p, r, y, dr);
            r += dr;
        }
        out_s[next] = y.s;
        ++next;
    }
    v_end = y.v;
}

}  // namespace detail

// Centered-difference residual of the radial equation at interior radii
// (zero at the endpoints).
inline std::vector<double> profile_residual(const HedgehogProfile& prof) {
    const std::size_t N = prof.r.size();
    std::vector<double> res(N, 0.0);
    const double h = prof.r[1] - prof.r[0];
    for (std::size_t i = 1; i + 1 < N; ++i) {
        const double ri = prof.r[i];
        res[i] = (prof.s[i + 1] - 2 * prof.s[i] + prof.s[i - 1]) / (h * h) +
                 (2.0 / ri) * (prof.s[i + 1] - prof.s[i - 1]) / (2 * h) -
                 6.0 * prof.s[i] / (ri * ri) - psi(prof.params, prof.s[i]);
    }
    return res;
}

inline HedgehogProfile solve_profile(const MaterialParams& params, double s0, double R,
                                     int nodes, ProfileMethod method) {
    if (nodes < 32) throw std::invalid_argument("solve_profile: nodes must be >= 32");
    if (!(R > 0)) throw std::invalid_argument("solve_profile: R must be positive");
    HedgehogProfile prof;
    prof.params = params;
    prof.s0 = s0;
    prof.R = R;
    prof.r.resize(nodes);
    prof.s.assign(nodes, 0.0);
    const double h = R / (nodes - 1);
    for (int i = 0; i < nodes; ++i) prof.r[i] = i * h;
    prof.r.back() = R;

    if (method == ProfileMethod::Shooting) {
        const double scale = 10.0 * std::max(std::abs(s0), 1e-3) / (R * R);
        const int scan = 64;
        auto miss = [&](double C) {
            std::vector<double> tmp(prof.r.size(), 0.0);
            double v_end = 0;
            detail::shoot(params, C, R, prof.r, tmp, v_end);
            return tmp.back() - s0;
        };
        std::vector<std::pair<double, double>> brackets;
        double prevC = -scale, prevG = miss(prevC);
        for (int i = 1; i <= scan; ++i) {
            const double C = -scale + 2.0 * scale * i / scan;
            const double G = miss(C);
            if (prevG == 0.0 || prevG * G < 0) brackets.emplace_back(prevC, C);
            prevC = C;
            prevG = G;
        }
        if (brackets.empty())
            throw std::runtime_error(
                "solve_profile: shooting bracket not found in C within +-10|s0|/R^2");
        prof.n_brackets = static_cast<int>(brackets.size());
        auto [lo, hi] = brackets.front();
        double flo = miss(lo);
        for (int it = 0; it < 90; ++it) {
            const double mid = 0.5 * (lo + hi);
            const double fm = miss(mid);
            if (flo * fm <= 0) hi = mid;
            else { lo = mid; flo = fm; }
        }
        const double C = 0.5 * (lo + hi);
        detail::shoot(params, C, R, prof.r, prof.s, prof.s1);
        prof.s[0] = 0.0;
        return prof;
    }

    // collocation: damped Newton on the centered-difference system, Thomas solve
    const int N = nodes;
    const int M = N - 2;
    std::vector<double> u(M);
    for (int i = 0; i < M; ++i) {
        const double ri = prof.r[i + 1];
        u[i] = s0 * (ri / R) * (ri / R);
    }
    auto residual = [&](const std::vector<double>& w, std::vector<double>& F) {
        for (int i = 0; i < M; ++i) {
            const double ri = prof.r[i + 1];
            const double sm = i == 0 ? 0.0 : w[i - 1];
            const double sp = i == M - 1 ? s0 : w[i + 1];
            F[i] = (sp - 2 * w[i] + sm) / (h * h) + (2.0 / ri) * (sp - sm) / (2 * h) -
                   6.0 * w[i] / (ri * ri) - psi(params, w[i]);
        }
    };
    auto sup = [](const std::vector<double>& v) {
        double m = 0;
        for (double x : v) m = std::max(m, std::abs(x));
        return m;
    };
    std::vector<double> F(M), du(M), lower(M), diag(M), upper(M), cp(M), dp(M);
    residual(u, F);
    double Fn = sup(F);
    // the 1/h^2 stencil terms set the attainable rounding floor
    const double newton_tol =
        std::max(1e-12, 3e-15 / (h * h)) * std::max(1.0, std::abs(s0));
    std::ostringstream trace;
    int it = 0;
    for (; it < 60 && Fn > newton_tol; ++it) {
        for (int i = 0; i < M; ++i) {
            const double ri = prof.r[i + 1];
            lower[i] = 1.0 / (h * h) - 1.0 / (ri * h);
            upper[i] = 1.0 / (h * h) + 1.0 / (ri * h);
            diag[i] = -2.0 / (h * h) - 6.0 / (ri * ri) - psi_prime(params, u[i]);
        }
        // Thomas algorithm for J du = -F
        cp[0] = upper[0] / diag[0];
        dp[0] = -F[0] / diag[0];
        for (int i = 1; i < M; ++i) {
            const double m = diag[i] - lower[i] * cp[i - 1];
            cp[i] = upper[i] / m;
            dp[i] = (-F[i] - lower[i] * dp[i - 1]) / m;
        }
        du[M - 1] = dp[M - 1];
        for (int i = M - 2; i >= 0; --i) du[i] = dp[i] - cp[i] * du[i + 1];

        double lambda = 1.0;
        bool accepted = false;
        std::vector<double> cand(M), Fc(M);
        while (lambda > 1e-4) {
            for (int i = 0; i < M; ++i) cand[i] = u[i] + lambda * du[i];
            residual(cand, Fc);
            const double Fcn = sup(Fc);
            if (Fcn < Fn * (1.0 - 0.25 * lambda) || Fcn < newton_tol) {
                u = cand;
                F = Fc;
                Fn = Fcn;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        trace << "iter " << it << " |F|=" << Fn << " lambda=" << lambda << "\n";
        if (!accepted)
            throw std::runtime_error("solve_profile: Newton divergence\n" + trace.str());
    }
    if (Fn > newton_tol)
        throw std::runtime_error("solve_profile: Newton did not converge\n" + trace.str());
    for (int i = 0; i < M; ++i) prof.s[i + 1] = u[i];
    prof.s[0] = 0.0;
    prof.s[N - 1] = s0;
    // one-sided third-order boundary derivative
    prof.s1 = (11.0 * prof.s[N - 1] - 18.0 * prof.s[N - 2] + 9.0 * prof.s[N - 3] -
               2.0 * prof.s[N - 4]) /
              (6.0 * h);
    return prof;
}

// 4-point Lagrange interpolation of the profile (cubic accuracy).
inline double interp_profile(const HedgehogProfile& prof, double r) {
    const int N = static_cast<int>(prof.r.size());
    const double h = prof.r[1] - prof.r[0];
    r = std::clamp(r, 0.0, prof.R);
    int j = static_cast<int>(std::floor(r / h));
    j = std::clamp(j, 1, N - 3);
    const int base = j - 1;
    double val = 0;
    for (int a = 0; a < 4; ++a) {
        double w = 1;
        for (int b = 0; b < 4; ++b) {
            if (a == b) continue;
            w *= (r - prof.r[base + b]) / (prof.r[base + a] - prof.r[base + b]);
        }
        val += w * prof.s[base + a];
    }
    return val;
}

// Q(x) = s(|x|) (x/|x| (x) x/|x| - I/3) on a Ball grid of the same radius;
// the origin node carries Q = 0 and boundary data is exactly the radial
// anchoring at s0.
inline QField lift_to_3d(const HedgehogProfile& prof, std::shared_ptr<const Grid> grid) {
    if (grid->shape != Shape::Ball)
        throw std::invalid_argument("lift_to_3d: requires a Ball grid");
    if (std::abs(grid->radius - prof.R) > 1e-9 * prof.R)
        throw std::invalid_argument("lift_to_3d: grid radius does not match the profile");
    QField out(std::move(grid));
    const Grid& g = *out.grid;
    parallel_for(g.n_nodes(), [&](std::size_t nd) {
        const Vec3 x = g.coords(static_cast<std::int32_t>(nd));
        const double r = x.norm();
        if (r == 0.0) {
            out.values[nd] = QTensor{};
            return;
        }
        if (g.cls[nd] == NodeClass::Boundary) {
            out.values[nd] = uniaxial(prof.s0, x.normalized());
            return;
        }
        out.values[nd] = uniaxial(interp_profile(prof, r), x.normalized());
    });
    for (std::size_t sl = 0; sl < g.n_cut_slots(); ++sl)
        out.cut_bc[sl] = uniaxial(prof.s0, g.cut_point[sl].normalized());
    return out;
}

}  // namespace qlab
