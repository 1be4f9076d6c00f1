// The constrained uniaxial world: (s, n) fields with |n| = 1, their energy,
// the coupled equilibrium system, the symmetry-breaking extra-equation
// residual, and a projected gradient flow.
#pragma once

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qlab/bulk_potential.hpp"
#include "qlab/el_solver.hpp"
#include "qlab/grid_domain.hpp"

namespace qlab {

// Constrained pair (scalar field s, unit director field n) on a grid, with
// Dirichlet data for both. `frozen` marks nodes whose director update was
// suspended because s vanished there (n is undetermined at Q = 0).
struct SNField {
    std::shared_ptr<const Grid> grid;
    std::vector<double> s;
    std::vector<Vec3> n;
    std::vector<double> s_cut;
    std::vector<Vec3> n_cut;
    std::vector<std::uint8_t> frozen;

    SNField() = default;
    explicit SNField(std::shared_ptr<const Grid> g)
        : grid(std::move(g)),
          s(grid->n_nodes(), 0.0),
          n(grid->n_nodes(), Vec3{0, 0, 1}),
          s_cut(grid->n_cut_slots(), 0.0),
          n_cut(grid->n_cut_slots(), Vec3{0, 0, 1}),
          frozen(grid->n_nodes(), 0) {}

    void set_dirichlet(const std::function<double(const Vec3&)>& fs,
                       const std::function<Vec3(const Vec3&)>& fn) {
        for (std::size_t nd = 0; nd < grid->n_nodes(); ++nd)
            if (grid->cls[nd] == NodeClass::Boundary) {
                const Vec3 x = grid->coords(static_cast<std::int32_t>(nd));
                s[nd] = fs(x);
                n[nd] = fn(x).normalized();
            }
        for (std::size_t sl = 0; sl < grid->n_cut_slots(); ++sl) {
            s_cut[sl] = fs(grid->cut_point[sl]);
            n_cut[sl] = fn(grid->cut_point[sl]).normalized();
        }
    }
};

// Q = s (n (x) n - I/3) nodewise.
inline QField lift(const SNField& f) {
    QField out(f.grid);
    parallel_for(f.grid->n_nodes(), [&](std::size_t nd) {
        out.values[nd] = uniaxial(f.s[nd], f.n[nd].normalized());
    });
    for (std::size_t sl = 0; sl < f.grid->n_cut_slots(); ++sl)
        out.cut_bc[sl] = uniaxial(f.s_cut[sl], f.n_cut[sl].normalized());
    return out;
}

// F(s,n) = integral of (L/2)((2/3)|grad s|^2 + 2 s^2 |grad n|^2)
//          + phi(2s^2/3, 2s^3/9).
inline double sn_energy(const MaterialParams& params, const SNField& f) {
    const Grid& g = *f.grid;
    const auto gs2 = grad_squared(g, f.s, f.s_cut);
    const auto gn2 = grad_squared(g, f.n, f.n_cut);
    return parallel_sum(g.n_nodes(), [&](std::size_t nd) {
        const double w = g.weight[nd];
        if (w == 0) return 0.0;
        const double s = f.s[nd];
        const double el =
            0.5 * params.L * ((2.0 / 3.0) * gs2[nd] + 2.0 * s * s * gn2[nd]);
        return w * (el + params.bulk.phi(2 * s * s / 3, 2 * s * s * s / 9));
    });
}

struct UResidual {
    std::vector<double> rs;  // Lap s - 3|grad n|^2 s - psi(s)
    std::vector<Vec3> rn;    // s Lap n + 2 (grad s . grad) n + s |grad n|^2 n, tangent part
    double sup_rs = 0;
    double sup_rn = 0;
};

inline UResidual u_residual(const MaterialParams& params, const SNField& f) {
    const Grid& g = *f.grid;
    UResidual out;
    out.rs.assign(g.n_nodes(), 0.0);
    out.rn.assign(g.n_nodes(), Vec3{});
    const auto lap_s = laplacian(g, f.s, f.s_cut);
    const auto lap_n = laplacian(g, f.n, f.n_cut);
    parallel_for(g.n_interior(), [&](std::size_t k) {
        const std::int32_t nd = g.interior_nodes[k];
        const double s = f.s[nd];
        const Vec3& nn = f.n[nd];
        double gn2 = 0;
        Vec3 advect{};
        for (int d = 0; d < g.dim; ++d) {
            const Vec3 dn = axis_derivative(g, f.n, f.n_cut, nd, d);
            const double ds = axis_derivative(g, f.s, f.s_cut, nd, d);
            gn2 += dn.norm2();
            advect += dn * ds;
        }
        out.rs[nd] = lap_s[nd] - 3.0 * gn2 * s - psi(params, s);
        Vec3 rn = lap_n[nd] * s + advect * 2.0 + nn * (s * gn2);
        rn -= nn * nn.dot(rn);  // tangent projection
        out.rn[nd] = rn;
    });
    out.sup_rs = parallel_max(g.n_interior(), [&](std::size_t k) {
        return std::abs(out.rs[g.interior_nodes[k]]);
    });
    out.sup_rn = parallel_max(g.n_interior(), [&](std::size_t k) {
        return out.rn[g.interior_nodes[k]].norm();
    });
    return out;
}

// E = 2 sum_k d_k n (x) d_k n - |grad n|^2 (I - n (x) n), per interior node.
// Symmetric and traceless up to the unit-constraint rounding; stored in the
// tensor basis. Vanishes identically iff n is locally rigid in the sense of
// the symmetry-breaking stationarity condition.
struct ExtraResidual {
    std::vector<QTensor> value;  // per node, zero on boundary
    std::vector<double> fro;     // Frobenius norm per node
    double sup = 0;
    double l2 = 0;  // quadrature-weighted
};

inline ExtraResidual extra_residual(const SNField& f) {
    const Grid& g = *f.grid;
    ExtraResidual out;
    out.value.assign(g.n_nodes(), QTensor{});
    out.fro.assign(g.n_nodes(), 0.0);
    parallel_for(g.n_interior(), [&](std::size_t k) {
        const std::int32_t nd = g.interior_nodes[k];
        const Vec3& nn = f.n[nd];
        Mat3 sum = Mat3::zero();
        double gn2 = 0;
        for (int d = 0; d < g.dim; ++d) {
            const Vec3 dn = axis_derivative(g, f.n, f.n_cut, nd, d);
            sum = sum + Mat3::outer(dn, dn);
            gn2 += dn.norm2();
        }
        Mat3 E = sum * 2.0 - (Mat3::identity() - Mat3::outer(nn, nn)) * gn2;
        out.value[nd] = q_from_matrix(E);
        out.fro[nd] = out.value[nd].norm();
    });
    out.sup = parallel_max(g.n_interior(), [&](std::size_t k) {
        return out.fro[g.interior_nodes[k]];
    });
    double acc = parallel_sum(g.n_interior(), [&](std::size_t k) {
        const std::int32_t nd = g.interior_nodes[k];
        return g.weight[nd] * out.fro[nd] * out.fro[nd];
    });
    out.l2 = std::sqrt(acc);
    return out;
}

// The three mutually orthogonal tensor parts the lifted equilibrium residual
// splits into along the uniaxial ansatz:
//   m1 = L rs (n(x)n - I/3),   m2 = 2 L n (.) rn_full,   m3 = L s E,
// so that el_residual(lift(f)) = m1 + m2 + m3 up to discretization.
struct AnsatzDecomposition {
    std::vector<QTensor> m1, m2, m3;
};

inline AnsatzDecomposition ansatz_decomposition(const MaterialParams& params,
                                                const SNField& f) {
    const Grid& g = *f.grid;
    AnsatzDecomposition out;
    out.m1.assign(g.n_nodes(), QTensor{});
    out.m2.assign(g.n_nodes(), QTensor{});
    out.m3.assign(g.n_nodes(), QTensor{});
    const auto lap_s = laplacian(g, f.s, f.s_cut);
    const auto lap_n = laplacian(g, f.n, f.n_cut);
    const ExtraResidual extra = extra_residual(f);
    parallel_for(g.n_interior(), [&](std::size_t k) {
        const std::int32_t nd = g.interior_nodes[k];
        const double s = f.s[nd];
        const Vec3& nn = f.n[nd];
        double gn2 = 0;
        Vec3 advect{};
        for (int d = 0; d < g.dim; ++d) {
            const Vec3 dn = axis_derivative(g, f.n, f.n_cut, nd, d);
            const double ds = axis_derivative(g, f.s, f.s_cut, nd, d);
            gn2 += dn.norm2();
            advect += dn * ds;
        }
        const double rs = lap_s[nd] - 3.0 * gn2 * s - psi(params, s);
        const Vec3 rn_full = lap_n[nd] * s + advect * 2.0 + nn * (s * gn2);
        out.m1[nd] = uniaxial(1.0, nn) * (params.L * rs);
        out.m2[nd] = q_from_matrix(Mat3::sym_outer(nn, rn_full) * 2.0) * params.L;
        out.m3[nd] = extra.value[nd] * (params.L * s);
    });
    return out;
}

// Propagates a consistent director orientation from a seed by breadth-first
// search over lattice-adjacent live nodes (|s| above threshold), flipping
// signs to align with the visited neighbor. Returns false when some edge
// stays strongly misaligned afterwards (orientation obstruction).
inline bool gauge_fix(SNField& f, double live_threshold = 1e-8) {
    const Grid& g = *f.grid;
    const std::size_t N = g.n_nodes();
    std::vector<std::uint8_t> seen(N, 0);
    std::deque<std::int32_t> queue;
    for (std::size_t nd = 0; nd < N; ++nd)
        if (std::abs(f.s[nd]) >= live_threshold) {
            if (!seen[nd]) {
                seen[nd] = 1;
                queue.push_back(static_cast<std::int32_t>(nd));
                while (!queue.empty()) {
                    const std::int32_t cur = queue.front();
                    queue.pop_front();
                    const auto ijk = g.lattice_coords(cur);
                    for (int d = 0; d < g.dim; ++d)
                        for (int side = 0; side < 2; ++side) {
                            int p[3] = {ijk[0], ijk[1], ijk[2]};
                            p[d] += side ? 1 : -1;
                            const std::int32_t nb = g.node_at_lattice(p[0], p[1], p[2]);
                            if (nb < 0 || seen[nb] || std::abs(f.s[nb]) < live_threshold)
                                continue;
                            if (f.n[cur].dot(f.n[nb]) < 0) f.n[nb] = -f.n[nb];
                            seen[nb] = 1;
                            queue.push_back(nb);
                        }
                }
            }
        }
    // orientation consistency sweep
    for (std::size_t nd = 0; nd < N; ++nd) {
        if (!seen[nd]) continue;
        const auto ijk = g.lattice_coords(static_cast<std::int32_t>(nd));
        for (int d = 0; d < g.dim; ++d) {
            int p[3] = {ijk[0], ijk[1], ijk[2]};
            p[d] += 1;
            const std::int32_t nb = g.node_at_lattice(p[0], p[1], p[2]);
            if (nb >= 0 && seen[nb] && f.n[nd].dot(f.n[nb]) < -0.2) return false;
        }
    }
    return true;
}

// Projected gradient flow for the constrained pair: the scalar steps along
// its equation residual, the director along the tangent-projected residual
// (oriented by sign(s) so the step descends for oblate states too), followed
// by exact renormalization. The semi-implicit scheme treats the diffusion
// parts (unit diffusivity for s, |s| for n) implicitly via red-black sweeps.
// Nodes with |s| < 1e-8 freeze their director. Fixed points satisfy the
// coupled system but not the extra equation.
inline std::pair<SNField, SolveReport> sn_relax(const MaterialParams& params, SNField field,
                                                const SolveOptions& opts) {
    if (!(opts.tol > 0) || opts.max_iters <= 0)
        throw std::invalid_argument("sn_relax: tol and max_iters must be positive");
    const Grid& g = *field.grid;
    SolveReport rep;

    auto smax = [&] {
        double m = 1.0;
        for (const double v : field.s) m = std::max(m, std::abs(v));
        return m;
    };
    const double diffusivity = std::max(1.0, smax());
    const double dt_explicit =
        opts.dt_safety * g.h * g.h / (2.0 * g.dim * diffusivity) * g.stability_scale;
    const double dt_max =
        opts.scheme == Scheme::Explicit ? dt_explicit : 64.0 * dt_explicit;
    double dt = opts.scheme == Scheme::Explicit ? dt_explicit : 8.0 * dt_explicit;

    if (!gauge_fix(field)) rep.flags.push_back("gauge fix failed (orientation obstruction)");
    double E = sn_energy(params, field);
    rep.energy_initial = E;
    rep.energy_trace.emplace_back(0, E);

    std::vector<double> rhs_s(g.n_nodes()), coef_s(g.n_nodes(), 0.0), coef_n(g.n_nodes(), 0.0);
    std::vector<Vec3> rhs_n(g.n_nodes());

    std::size_t frozen_count = 0;
    int iter = 0;
    while (iter < opts.max_iters) {
        const UResidual res = u_residual(params, field);
        rep.final_residual = std::max(res.sup_rs, res.sup_rn);
        if (!std::isfinite(rep.final_residual)) {
            throw SolverDivergence("sn_relax: residual is not finite", lift(field), rep);
        }
        if (rep.final_residual < opts.tol) {
            rep.converged = true;
            break;
        }
        ++iter;

        SNField cand = field;
        frozen_count = 0;
        if (opts.scheme == Scheme::Explicit) {
            parallel_for(g.n_interior(), [&](std::size_t k) {
                const std::int32_t nd = g.interior_nodes[k];
                cand.s[nd] = field.s[nd] + dt * res.rs[nd];
                if (std::abs(field.s[nd]) < 1e-8) {
                    cand.frozen[nd] = 1;
                    return;
                }
                cand.frozen[nd] = 0;
                const double orient = field.s[nd] < 0 ? -1.0 : 1.0;
                cand.n[nd] = (field.n[nd] + res.rn[nd] * (dt * orient)).normalized();
            });
        } else {
            // increment form: (I - dt sigma Lap) delta = dt * residual, so a
            // vanishing increment coincides exactly with a vanishing residual
            parallel_for(g.n_interior(), [&](std::size_t k) {
                const std::int32_t nd = g.interior_nodes[k];
                const double s = field.s[nd];
                rhs_s[nd] = dt * res.rs[nd];
                coef_s[nd] = dt;
                const bool frz = std::abs(s) < 1e-8;
                cand.frozen[nd] = frz ? 1 : 0;
                const double orient = s < 0 ? -1.0 : 1.0;
                coef_n[nd] = frz ? 0.0 : dt * std::abs(s);
                rhs_n[nd] = frz ? Vec3{} : res.rn[nd] * (dt * orient);
            });
            std::vector<double> ds(g.n_nodes(), 0.0);
            std::vector<Vec3> dn(g.n_nodes(), Vec3{});
            const std::vector<double> zero_cut_s(g.n_cut_slots(), 0.0);
            const std::vector<Vec3> zero_cut_n(g.n_cut_slots(), Vec3{});
            for (int sweep = 0; sweep < 40; ++sweep) {
                relaxation_sweep(g, ds, zero_cut_s, rhs_s, coef_s);
                relaxation_sweep(g, dn, zero_cut_n, rhs_n, coef_n);
            }
            parallel_for(g.n_interior(), [&](std::size_t k) {
                const std::int32_t nd = g.interior_nodes[k];
                cand.s[nd] = field.s[nd] + ds[nd];
                if (cand.frozen[nd]) return;
                const Vec3& nn = field.n[nd];
                const Vec3 tangent = dn[nd] - nn * nn.dot(dn[nd]);
                cand.n[nd] = (nn + tangent).normalized();
            });
        }
        for (const std::int32_t nd : g.interior_nodes) frozen_count += cand.frozen[nd];
        gauge_fix(cand);

        const double E_cand = sn_energy(params, cand);
        if (std::isfinite(E_cand) && E_cand <= E + 1e-10) {
            field = std::move(cand);
            E = E_cand;
            rep.energy_trace.emplace_back(iter, E);
            dt = std::min(dt * 1.1, dt_max);
        } else {
            dt *= 0.5;
            if (!(dt > 1e-9 * dt_explicit)) {
                rep.flags.push_back("step size collapsed");
                throw SolverDivergence("sn_relax: energy could not decrease (step collapse)",
                                       lift(field), rep);
            }
        }
    }
    rep.iterations = iter;
    rep.energy_final = E;
    if (!rep.converged) rep.flags.push_back("max_iters reached before tolerance");
    if (frozen_count)
        rep.flags.push_back("frozen directors at " + std::to_string(frozen_count) +
                            " nodes (|s| < 1e-8)");
    return {std::move(field), std::move(rep)};
}

// Escaped-radial director of the cylindrically symmetric family
//   n = cos(psi) e_rho + sin(psi) e_z,  psi(rho) = 2 atan(rho/r0) - pi/2,
// which solves rho psi' = cos(psi) exactly. Defined on 2D grids; s is set
// to 1 everywhere so the field can be used directly in the residual ops.
inline SNField cladis_kleman(double r0, std::shared_ptr<const Grid> grid) {
    if (!(r0 > 0)) throw std::invalid_argument("cladis_kleman: r0 must be positive");
    if (grid->dim != 2) throw std::invalid_argument("cladis_kleman: requires a 2D grid");
    SNField f(std::move(grid));
    auto director = [r0](const Vec3& x) {
        const double rho = std::sqrt(x.x * x.x + x.y * x.y);
        const double psi_r = 2.0 * std::atan(rho / r0) - M_PI / 2.0;
        const double c = std::cos(psi_r), s = std::sin(psi_r);
        if (rho < 1e-300) return Vec3{0, 0, -1.0};
        return Vec3{c * x.x / rho, c * x.y / rho, s};
    };
    for (std::size_t nd = 0; nd < f.grid->n_nodes(); ++nd) {
        f.s[nd] = 1.0;
        f.n[nd] = director(f.grid->coords(static_cast<std::int32_t>(nd)));
    }
    for (std::size_t sl = 0; sl < f.grid->n_cut_slots(); ++sl) {
        f.s_cut[sl] = 1.0;
        f.n_cut[sl] = director(f.grid->cut_point[sl]);
    }
    return f;
}

// psi profile of the escaped-radial family (exposed for tests).
inline double cladis_kleman_psi(double r0, double rho) {
    return 2.0 * std::atan(rho / r0) - M_PI / 2.0;
}

}  // namespace qlab
