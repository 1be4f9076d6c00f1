// Theorem-level diagnostics on solved fields: phase and biaxiality maps,
// per-component director constancy, spherical-symmetry deviation, and the
// second-order boundary relation of the radial problem.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qlab/bulk_potential.hpp"
#include "qlab/grid_domain.hpp"
#include "qlab/tensor_core.hpp"

namespace qlab {

// Thrown when an audit's hypotheses are violated by the input field.
struct AuditRefused : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// classify_field
// ---------------------------------------------------------------------------

struct Classified {
    std::vector<Phase> phase;             // per node
    std::vector<double> beta;             // per node
    std::vector<std::int32_t> component;  // per node; -1 where |Q| < tol
    int n_components = 0;
    double beta_max = 0;
    double beta_mean = 0;
    std::array<double, 3> phase_fractions{};  // isotropic, uniaxial, biaxial
};

// Nodewise decomposition plus face-adjacency flood fill of {|Q| >= tol}.
inline Classified classify_field(const QField& field, double tol) {
    if (!(tol > 0)) throw std::invalid_argument("classify_field: tol must be positive");
    const Grid& g = *field.grid;
    const std::size_t N = g.n_nodes();
    Classified out;
    out.phase.resize(N);
    out.beta.resize(N);
    out.component.assign(N, -1);

    parallel_for(N, [&](std::size_t nd) {
        const SpectralData d = decompose(field.values[nd], tol);
        out.phase[nd] = d.phase;
        out.beta[nd] = d.beta;
    });
    std::array<std::int64_t, 3> counts{};
    for (std::size_t nd = 0; nd < N; ++nd) {
        counts[static_cast<int>(out.phase[nd])]++;
        out.beta_max = std::max(out.beta_max, out.beta[nd]);
        out.beta_mean += out.beta[nd];
    }
    out.beta_mean /= static_cast<double>(N);
    for (int i = 0; i < 3; ++i)
        out.phase_fractions[i] = static_cast<double>(counts[i]) / static_cast<double>(N);

    std::deque<std::int32_t> queue;
    for (std::size_t seed = 0; seed < N; ++seed) {
        if (out.component[seed] >= 0 || field.values[seed].norm() < tol) continue;
        const std::int32_t id = out.n_components++;
        out.component[seed] = id;
        queue.push_back(static_cast<std::int32_t>(seed));
        while (!queue.empty()) {
            const std::int32_t cur = queue.front();
            queue.pop_front();
            const auto ijk = g.lattice_coords(cur);
            for (int d = 0; d < g.dim; ++d)
                for (int side = 0; side < 2; ++side) {
                    int p[3] = {ijk[0], ijk[1], ijk[2]};
                    p[d] += side ? 1 : -1;
                    const std::int32_t nb = g.node_at_lattice(p[0], p[1], p[2]);
                    if (nb < 0 || out.component[nb] >= 0 || field.values[nb].norm() < tol)
                        continue;
                    out.component[nb] = id;
                    queue.push_back(nb);
                }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// director_constancy
// ---------------------------------------------------------------------------

struct ComponentSpread {
    std::int32_t id = 0;
    std::int64_t count = 0;
    double spread = 0;      // radians, in [0, pi/2]
    Vec3 mean_line{0, 0, 1};
    double beta_max = 0;
};

struct ConstancyReport {
    std::vector<ComponentSpread> components;
    bool passes = true;
    std::vector<std::string> flags;
};

// Directors are compared as lines (projective |dot|): per component of
// {|Q| >= tol}, the spread is the largest angle between a nodal line and the
// component's principal mean line. A field passes when every component with
// beta_max < tol keeps its spread below angle_tol.
inline ConstancyReport director_constancy(const QField& field, double tol,
                                          double angle_tol = 1e-3) {
    const Classified cls = classify_field(field, tol);
    const Grid& g = *field.grid;
    ConstancyReport out;
    out.components.resize(cls.n_components);
    for (int c = 0; c < cls.n_components; ++c) out.components[c].id = c;

    std::vector<Mat3> proj(cls.n_components, Mat3::zero());
    std::vector<std::vector<std::int32_t>> members(cls.n_components);
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        const std::int32_t c = cls.component[nd];
        if (c < 0 || cls.phase[nd] == Phase::Isotropic) continue;
        const SpectralData d = decompose(field.values[nd], tol);
        proj[c] = proj[c] + Mat3::outer(d.n, d.n);
        members[c].push_back(static_cast<std::int32_t>(nd));
        out.components[c].beta_max = std::max(out.components[c].beta_max, d.beta);
    }
    for (int c = 0; c < cls.n_components; ++c) {
        auto& comp = out.components[c];
        comp.count = static_cast<std::int64_t>(members[c].size());
        if (members[c].empty()) continue;
        const Mat3 M = proj[c] * (1.0 / static_cast<double>(members[c].size()));
        // principal line of the mean projector
        Mat3 dev = M;
        const double tr3 = M.trace() / 3.0;
        dev(0, 0) -= tr3;
        dev(1, 1) -= tr3;
        dev(2, 2) -= tr3;
        const auto lam = detail::eigenvalues_traceless(dev);
        comp.mean_line = detail::sign_normalize(detail::eigenvector_for(dev, lam[0]));
        double spread = 0;
        for (const std::int32_t nd : members[c]) {
            const SpectralData d = decompose(field.values[nd], tol);
            const double dot = std::clamp(std::abs(d.n.dot(comp.mean_line)), 0.0, 1.0);
            spread = std::max(spread, std::acos(dot));
        }
        comp.spread = spread;
        if (comp.beta_max < tol && comp.spread >= angle_tol) out.passes = false;
    }
    // informational: distinct constant lines across components (possible for
    // smooth solutions, excluded for analytic ones)
    for (std::size_t i = 0; i < out.components.size(); ++i)
        for (std::size_t j = i + 1; j < out.components.size(); ++j) {
            const auto &a = out.components[i], &b = out.components[j];
            if (a.count == 0 || b.count == 0) continue;
            if (a.spread < angle_tol && b.spread < angle_tol &&
                std::abs(a.mean_line.dot(b.mean_line)) < std::cos(angle_tol))
                out.flags.push_back("components " + std::to_string(a.id) + " and " +
                                    std::to_string(b.id) + " hold different constant lines");
        }
    return out;
}

// ---------------------------------------------------------------------------
// interpolation helpers
// ---------------------------------------------------------------------------

namespace detail {

// Trilinear interpolation of tensor coefficients; every cell corner must be
// a stored node.
inline QTensor trilinear_q(const QField& f, const Vec3& p) {
    const Grid& g = *f.grid;
    double fr[3] = {0, 0, 0};
    int base[3] = {0, 0, 0};
    for (int d = 0; d < g.dim; ++d) {
        const double t = (p[d] - g.origin[d]) / g.h;
        base[d] = static_cast<int>(std::floor(t));
        base[d] = std::clamp(base[d], 0, g.extent[d] - 2);
        fr[d] = t - base[d];
    }
    QTensor acc;
    const int kmax = g.dim == 3 ? 1 : 0, jmax = g.dim >= 2 ? 1 : 0;
    for (int k = 0; k <= kmax; ++k)
        for (int j = 0; j <= jmax; ++j)
            for (int i = 0; i <= 1; ++i) {
                const std::int32_t nd =
                    g.node_at_lattice(base[0] + i, base[1] + j, base[2] + k);
                if (nd < 0)
                    throw AuditRefused("interpolation cell touches an exterior node");
                double w = (i ? fr[0] : 1 - fr[0]);
                if (g.dim >= 2) w *= (j ? fr[1] : 1 - fr[1]);
                if (g.dim == 3) w *= (k ? fr[2] : 1 - fr[2]);
                acc += f.values[nd] * w;
            }
    return acc;
}

// 4-point Lagrange weights at fractional position t in [0,1] relative to the
// second of four consecutive nodes.
inline std::array<double, 4> lagrange4(double t) {
    const double tm = t + 1, t0 = t, t1 = t - 1, t2 = t - 2;
    return {-t0 * t1 * t2 / 6.0, tm * t1 * t2 / 2.0, -tm * t0 * t2 / 2.0, tm * t0 * t1 / 6.0};
}

// Finite-difference weights for the m-th derivative at x0 from the given
// nodes (Fornberg's recurrence).
inline std::vector<double> fd_weights(double x0, const std::vector<double>& xs, int m) {
    const int n = static_cast<int>(xs.size());
    std::vector<std::vector<double>> w(n, std::vector<double>(m + 1, 0.0));
    double c1 = 1.0;
    double c4 = xs[0] - x0;
    w[0][0] = 1.0;
    for (int i = 1; i < n; ++i) {
        double c2 = 1.0;
        const double c5 = c4;
        c4 = xs[i] - x0;
        for (int j = 0; j < i; ++j) {
            const double c3 = xs[i] - xs[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = std::min(i, m); k >= 1; --k)
                    w[i][k] = c1 * (k * w[i - 1][k - 1] - c5 * w[i - 1][k]) / c2;
                w[i][0] = -c1 * c5 * w[i - 1][0] / c2;
            }
            for (int k = std::min(i, m); k >= 1; --k)
                w[j][k] = (c4 * w[j][k] - k * w[j][k - 1]) / c3;
            w[j][0] = c4 * w[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = w[i][m];
    return out;
}

// The 24 proper rotations of the cube, in a fixed deterministic order.
inline const std::vector<Rotation>& cube_rotations() {
    static const std::vector<Rotation> rots = [] {
        std::vector<Rotation> out;
        const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                 {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
        for (const auto& perm : perms)
            for (int signs = 0; signs < 8; ++signs) {
                Mat3 m = Mat3::zero();
                for (int rrow = 0; rrow < 3; ++rrow)
                    m(rrow, perm[rrow]) = (signs >> rrow) & 1 ? -1.0 : 1.0;
                if (std::abs(m.det() - 1.0) < 1e-12) out.push_back(Rotation(m));
            }
        return out;
    }();
    return rots;
}

inline double halton(int index, int base) {
    double f = 1.0, r = 0.0;
    while (index > 0) {
        f /= base;
        r += f * (index % base);
        index /= base;
    }
    return r;
}

inline Rotation quaternion_rotation(double qw, double qx, double qy, double qz) {
    const double n = std::sqrt(qw * qw + qx * qx + qy * qy + qz * qz);
    qw /= n; qx /= n; qy /= n; qz /= n;
    Mat3 m;
    m(0, 0) = 1 - 2 * (qy * qy + qz * qz);
    m(0, 1) = 2 * (qx * qy - qz * qw);
    m(0, 2) = 2 * (qx * qz + qy * qw);
    m(1, 0) = 2 * (qx * qy + qz * qw);
    m(1, 1) = 1 - 2 * (qx * qx + qz * qz);
    m(1, 2) = 2 * (qy * qz - qx * qw);
    m(2, 0) = 2 * (qx * qz - qy * qw);
    m(2, 1) = 2 * (qy * qz + qx * qw);
    m(2, 2) = 1 - 2 * (qx * qx + qy * qy);
    return Rotation(m);
}

}  // namespace detail

// Maps a field through a lattice-preserving rotation g: the value at node x
// becomes rho(g) Q(g^-1 x). Only rotations that map the node lattice onto
// itself are accepted (axis-aligned multiples of 90 degrees on centered
// grids).
inline QField rotate_field_lattice(const Rotation& g, const QField& field) {
    const Grid& gr = *field.grid;
    QField out(field.grid);
    const Rotation ginv = g.inverse();
    for (std::size_t nd = 0; nd < gr.n_nodes(); ++nd) {
        const Vec3 src = ginv.apply(gr.coords(static_cast<std::int32_t>(nd)));
        const int i = static_cast<int>(std::lround((src.x - gr.origin[0]) / gr.h));
        const int j = static_cast<int>(std::lround((src.y - gr.origin[1]) / gr.h));
        const int k = static_cast<int>(std::lround((src.z - gr.origin[2]) / gr.h));
        const std::int32_t sn = gr.node_at_lattice(i, j, k);
        if (sn < 0) throw std::invalid_argument("rotate_field_lattice: rotation does not map the lattice to itself");
        out.values[nd] = rotate(g, field.values[sn]);
    }
    // cut points permute under the same rotation; rebuild by angle lookup
    for (std::size_t sl = 0; sl < gr.n_cut_slots(); ++sl) {
        const Vec3 src = ginv.apply(gr.cut_point[sl]);
        // find the matching source slot by exact coordinates
        bool found = false;
        for (std::size_t sl2 = 0; sl2 < gr.n_cut_slots(); ++sl2) {
            if ((gr.cut_point[sl2] - src).norm() < 1e-9 * gr.h) {
                out.cut_bc[sl] = rotate(g, field.cut_bc[sl2]);
                found = true;
                break;
            }
        }
        if (!found) out.cut_bc[sl] = rotate(g, detail::trilinear_q(field, src * (1.0 - 1e-9)));
    }
    return out;
}

// Sup over sampled rotations g (the 24 cube rotations plus `samples`
// low-discrepancy ones) and cube-symmetric interpolation points x of
//   |Q(gx) - g Q(x) g^T| / max |Q|.
// Zero for exactly spherically symmetric data up to interpolation error.
inline double symmetry_deviation(const QField& field, int samples) {
    const Grid& g = *field.grid;
    if (g.dim != 3 || !(g.radius > 0))
        throw std::invalid_argument("symmetry_deviation: requires a Ball grid");
    if (samples < 0) throw std::invalid_argument("symmetry_deviation: samples >= 0");
    const double R = g.radius;

    double qmax = 0;
    for (const QTensor& q : field.values) qmax = std::max(qmax, q.norm());
    if (qmax == 0) return 0.0;

    // cube-orbit-closed point set (trilinear-safe radius)
    const double rcap = R - 2.0 * g.h;
    if (rcap <= 0.1 * R)
        throw std::invalid_argument("symmetry_deviation: grid too coarse for interpolation");
    std::vector<Vec3> points;
    const int ndirs = 24;
    constexpr double golden = 2.39996322972865332;  // 2 pi (1 - 1/phi)
    for (int i = 0; i < ndirs; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / ndirs;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        const Vec3 dir{rho * std::cos(phi), rho * std::sin(phi), z};
        for (const double frac : {0.3, 0.55, 0.8, 1.0})
            for (const Rotation& cg : detail::cube_rotations())
                points.push_back(cg.apply(dir * (frac * rcap)));
    }

    std::vector<Rotation> rots = detail::cube_rotations();
    int accepted = 0, index = 1;
    while (accepted < samples) {
        const double a = 2 * detail::halton(index, 2) - 1;
        const double b = 2 * detail::halton(index, 3) - 1;
        const double c = 2 * detail::halton(index, 5) - 1;
        const double d = 2 * detail::halton(index, 7) - 1;
        ++index;
        const double n2 = a * a + b * b + c * c + d * d;
        if (n2 < 0.01 || n2 > 1.0) continue;
        rots.push_back(detail::quaternion_rotation(a, b, c, d));
        ++accepted;
    }

    double dev = 0;
    for (const Rotation& rot : rots) {
        const double local = parallel_max(points.size(), [&](std::size_t pi) {
            const Vec3& x = points[pi];
            const QTensor qx = detail::trilinear_q(field, x);
            const QTensor qgx = detail::trilinear_q(field, rot.apply(x));
            return (qgx - rotate(rot, qx)).norm();
        });
        dev = std::max(dev, local);
    }
    return dev / qmax;
}

// ---------------------------------------------------------------------------
// boundary_audit
// ---------------------------------------------------------------------------

struct BoundaryAudit {
    double sup_dr_n = 0;             // sup over rays of |d n/d r| at the boundary
    double s1_mean = 0;              // mean boundary slope of s
    double s1_std = 0;               // spread of the slope over the sphere
    double star1_discrepancy = 0;    // second-order boundary relation defect
    std::vector<std::string> flags;
};

namespace detail {

// Lagrange-4 interpolation of a per-node scalar on a 3D grid.
template <class Getter>
double lagrange4_scalar(const Grid& g, const Vec3& p, Getter&& value_at) {
    int base[3];
    std::array<double, 4> wx[3];
    for (int d = 0; d < 3; ++d) {
        const double t = (p[d] - g.origin[d]) / g.h;
        int j = static_cast<int>(std::floor(t));
        j = std::clamp(j, 1, g.extent[d] - 3);
        base[d] = j - 1;
        wx[d] = lagrange4(t - j);
    }
    double acc = 0;
    for (int k = 0; k < 4; ++k)
        for (int j = 0; j < 4; ++j)
            for (int i = 0; i < 4; ++i) {
                const std::int32_t nd =
                    g.node_at_lattice(base[0] + i, base[1] + j, base[2] + k);
                if (nd < 0)
                    throw AuditRefused("boundary_audit: interpolation stencil left the ball");
                acc += wx[0][i] * wx[1][j] * wx[2][k] * value_at(nd);
            }
    return acc;
}

}  // namespace detail

// Samples boundary points on a latitude/longitude net and differentiates the
// decomposed scalar order and director along inward rays with one-sided
// stencils anchored at the exact boundary data. Reports the boundary-slope
// statistics, sup |d n/d r|, and the defect of the relation
//   R^2 s2 + R s1 = 3 s0 + (R^2/2) psi(s0)
// with s1 = d s/d r, s2 = (1/2) d^2 s/d r^2 on the sphere.
inline BoundaryAudit boundary_audit(const QField& field, const MaterialParams& params,
                                    double s0) {
    const Grid& g = *field.grid;
    if (g.dim != 3 || !(g.radius > 0))
        throw std::invalid_argument("boundary_audit: requires a Ball grid");
    const double R = g.radius, h = g.h;
    if (R - 6.0 * h - 2.5 * h <= 0)
        throw std::invalid_argument("boundary_audit: grid too coarse for the ray stencils");

    // hypothesis: uniaxial outer shell
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        if (g.cls[nd] != NodeClass::Interior) continue;
        const Vec3 x = g.coords(static_cast<std::int32_t>(nd));
        if (x.norm() < R - 2.0 * h) continue;
        const double b = biaxiality(field.values[nd]);
        if (b > 1e-5)
            throw AuditRefused("boundary_audit: outer shell is biaxial (beta = " +
                               std::to_string(b) + "); the boundary relation assumes a "
                               "uniaxial neighborhood of the sphere");
    }

    // lazy per-node decomposition cache for s and the gauge-fixed director
    std::unordered_map<std::int32_t, SpectralData> cache;
    auto spectral_at = [&](std::int32_t nd) -> const SpectralData& {
        auto it = cache.find(nd);
        if (it == cache.end())
            it = cache.emplace(nd, decompose(field.values[nd], 1e-12)).first;
        return it->second;
    };

    const std::vector<double> radii{R, R - 4 * h, R - 5 * h, R - 6 * h};
    const std::vector<double> radii3(radii.begin(), radii.begin() + 3);
    const auto w1 = detail::fd_weights(R, radii3, 1);  // 3-point first derivative
    const auto w2 = detail::fd_weights(R, radii, 2);   // 4-point second derivative

    const int J = 8, K = 16;
    std::vector<double> s1_samples;
    double star1 = 0, sup_drn = 0;
    for (int j = 0; j < J; ++j)
        for (int k = 0; k < K; ++k) {
            const double th = M_PI * (j + 0.5) / J;
            const double ph = 2.0 * M_PI * k / K;
            const Vec3 omega{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                             std::cos(th)};
            // scalar order along the ray (exact boundary value first)
            std::array<double, 4> sv;
            sv[0] = s0;
            for (int m = 1; m < 4; ++m)
                sv[m] = detail::lagrange4_scalar(g, omega * radii[m], [&](std::int32_t nd) {
                    return spectral_at(nd).s;
                });
            double s1 = 0, d2 = 0;
            for (int m = 0; m < 3; ++m) s1 += w1[m] * sv[m];
            for (int m = 0; m < 4; ++m) d2 += w2[m] * sv[m];
            const double s2 = 0.5 * d2;
            s1_samples.push_back(s1);
            star1 = std::max(star1, std::abs(R * R * s2 + R * s1 - 3.0 * s0 -
                                             0.5 * R * R * psi(params, s0)));

            // director along the ray, gauge-aligned with the outward normal
            std::array<Vec3, 3> nv;
            nv[0] = omega;
            for (int m = 1; m < 3; ++m) {
                Vec3 acc{};
                for (int comp = 0; comp < 3; ++comp) {
                    acc[comp] = detail::lagrange4_scalar(
                        g, omega * radii[m], [&](std::int32_t nd) {
                            const SpectralData& d = spectral_at(nd);
                            const double sign = d.n.dot(omega) < 0 ? -1.0 : 1.0;
                            return sign * d.n[comp];
                        });
                }
                nv[m] = acc.normalized();
                if (nv[m].dot(omega) < 0) nv[m] = -nv[m];
            }
            Vec3 drn{};
            for (int m = 0; m < 3; ++m) drn += nv[m] * w1[m];
            sup_drn = std::max(sup_drn, drn.norm());
        }

    BoundaryAudit out;
    out.sup_dr_n = sup_drn;
    double mean = 0;
    for (double v : s1_samples) mean += v;
    mean /= static_cast<double>(s1_samples.size());
    double var = 0;
    for (double v : s1_samples) var += (v - mean) * (v - mean);
    out.s1_mean = mean;
    out.s1_std = std::sqrt(var / static_cast<double>(s1_samples.size()));
    out.star1_discrepancy = star1;
    if (star1 > 1e-2)
        out.flags.push_back(
            "star1 discrepancy is large; the field does not satisfy the boundary "
            "relation (not an equilibrium?)");
    return out;
}

// ---------------------------------------------------------------------------
// aggregate report
// ---------------------------------------------------------------------------

struct AuditReport {
    double beta_max = 0;
    double beta_mean = 0;
    std::array<double, 3> phase_fractions{};
    std::vector<ComponentSpread> components;
    bool constancy_passes = true;
    std::optional<double> symmetry_dev;
    std::optional<double> star1;
    std::optional<double> sup_dr_n;
    std::vector<std::string> flags;
};

}  // namespace qlab
