// Gradient-flow relaxation of the Landau-de Gennes free energy to tensor
// equilibria, with energy and residual evaluation on grid fields.
#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qlab/bulk_potential.hpp"
#include "qlab/grid_domain.hpp"
#include "qlab/parallel.hpp"

namespace qlab {

enum class Scheme : std::uint8_t { Explicit, SemiImplicit };

struct SolveOptions {
    double tol = 1e-8;        // sup-norm residual target
    int max_iters = 2000000;
    double dt_safety = 0.9;   // fraction of the stable explicit step
    Scheme scheme = Scheme::SemiImplicit;
};

struct SolveReport {
    int iterations = 0;
    double final_residual = 0;
    std::vector<std::pair<int, double>> energy_trace;  // accepted steps only
    bool converged = false;
    double energy_initial = 0;
    double energy_final = 0;
    std::vector<std::string> flags;
};

// Thrown when the flow leaves the admissible region (non-finite values or the
// step size collapses); carries the last accepted state.
struct SolverDivergence : std::runtime_error {
    QField last_state;
    SolveReport report;
    SolverDivergence(std::string msg, QField state, SolveReport rep)
        : std::runtime_error(std::move(msg)),
          last_state(std::move(state)),
          report(std::move(rep)) {}
};

// F(Q) = integral of (L/2)|grad Q|^2 + phi(tr Q^2, tr Q^3), trapezoid weights.
inline double energy(const MaterialParams& params, const QField& field) {
    const Grid& g = *field.grid;
    const auto gsq = grad_squared(g, field.values, field.cut_bc);
    return parallel_sum(g.n_nodes(), [&](std::size_t nd) {
        const double w = g.weight[nd];
        if (w == 0) return 0.0;
        auto [x, y] = invariants(field.values[nd]);
        return w * (0.5 * params.L * gsq[nd] + params.bulk.phi(x, y));
    });
}

struct ELResidual {
    std::vector<QTensor> r;  // per node; zero on boundary
    double sup = 0;
};

// L Laplacian(Q) - bulk_gradient(Q) at interior nodes.
inline ELResidual el_residual(const MaterialParams& params, const QField& field) {
    const Grid& g = *field.grid;
    ELResidual out;
    out.r = laplacian(g, field.values, field.cut_bc);
    std::vector<double> sup_buf(g.n_interior(), 0.0);
    parallel_for(g.n_interior(), [&](std::size_t k) {
        const std::int32_t nd = g.interior_nodes[k];
        out.r[nd] = out.r[nd] * params.L - bulk_gradient(params.bulk, field.values[nd]);
        sup_buf[k] = out.r[nd].norm();
    });
    out.sup = parallel_max(sup_buf.size(), [&](std::size_t k) { return sup_buf[k]; });
    return out;
}

// max over all nodes of |Q| <= max(M, max boundary |Q|) + 1e-10.
inline bool linf_check(const MaterialParams&, const QField& field, double M) {
    const Grid& g = *field.grid;
    double all = 0, bd = 0;
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        const double v = field.values[nd].norm();
        all = std::max(all, v);
        if (g.cls[nd] == NodeClass::Boundary) bd = std::max(bd, v);
    }
    for (const QTensor& q : field.cut_bc) bd = std::max(bd, q.norm());
    return all <= std::max(M, bd) + 1e-10;
}

// Default initialization: linear interpolation of the end values in 1D,
// otherwise boundary mean followed by a fixed number of Laplace sweeps.
inline void initialize_field(QField& field) {
    const Grid& g = *field.grid;
    if (g.dim == 1) {
        const std::int32_t left = g.node_at_lattice(0, 0, 0);
        const std::int32_t right = g.node_at_lattice(g.extent[0] - 1, 0, 0);
        const double len = g.h * (g.extent[0] - 1);
        for (const std::int32_t nd : g.interior_nodes) {
            const double t = g.coords(nd).x / len;
            field.values[nd] = field.values[left] * (1.0 - t) + field.values[right] * t;
        }
        return;
    }
    QTensor mean;
    std::size_t cnt = 0;
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd)
        if (g.cls[nd] == NodeClass::Boundary) { mean += field.values[nd]; ++cnt; }
    for (const QTensor& q : field.cut_bc) { mean += q; ++cnt; }
    if (cnt) mean *= 1.0 / static_cast<double>(cnt);
    for (const std::int32_t nd : g.interior_nodes) field.values[nd] = mean;
    // harmonic-like smoothing toward the boundary data
    for (int sweep = 0; sweep < 60; ++sweep) {
        auto lap = laplacian(g, field.values, field.cut_bc);
        std::vector<QTensor> next = field.values;
        parallel_for(g.n_interior(), [&](std::size_t k) {
            const std::int32_t nd = g.interior_nodes[k];
            double diag = 0;
            for (int d = 0; d < g.dim; ++d) {
                const Arm lo = g.arm(nd, d, 0), hi = g.arm(nd, d, 1);
                diag += 2.0 / (lo.theta * hi.theta);
            }
            next[nd] = field.values[nd] + lap[nd] * (g.h * g.h / diag);
        });
        field.values.swap(next);
    }
}

// L^2 steepest descent d/dt Q = L Lap Q - bulk_gradient(Q) with Dirichlet
// data held fixed. Explicit steps use dt = dt_safety h^2/(2 d L) (shrunk by
// the cut-cell stability factor); semi-implicit steps treat the Laplacian
// implicitly through red-black sweeps and take larger steps. Steps that
// raise the energy beyond a 1e-10 slack are rejected and retried with half
// the step. Stops when the equilibrium residual sup-norm drops below tol.
inline std::pair<QField, SolveReport> relax(const MaterialParams& params, QField field,
                                            const SolveOptions& opts) {
    if (!(opts.tol > 0) || opts.max_iters <= 0)
        throw std::invalid_argument("relax: tol and max_iters must be positive");
    const Grid& g = *field.grid;
    SolveReport rep;

    const double dt_explicit =
        opts.dt_safety * g.h * g.h / (2.0 * g.dim * params.L) * g.stability_scale;
    const double dt_max =
        opts.scheme == Scheme::Explicit ? dt_explicit : 64.0 * dt_explicit;
    double dt = opts.scheme == Scheme::Explicit ? dt_explicit : 8.0 * dt_explicit;

    double E = energy(params, field);
    rep.energy_initial = E;
    rep.energy_trace.emplace_back(0, E);

    std::vector<QTensor> rhs(g.n_nodes());
    std::vector<double> sweep_coef(g.n_nodes(), 0.0);
    int iter = 0;
    while (iter < opts.max_iters) {
        const ELResidual res = el_residual(params, field);
        rep.final_residual = res.sup;
        if (!std::isfinite(res.sup))
            throw SolverDivergence("relax: residual is not finite", field, rep);
        if (res.sup < opts.tol) {
            rep.converged = true;
            break;
        }
        ++iter;

        QField cand = field;
        if (opts.scheme == Scheme::Explicit) {
            parallel_for(g.n_interior(), [&](std::size_t k) {
                const std::int32_t nd = g.interior_nodes[k];
                cand.values[nd] += res.r[nd] * dt;
            });
        } else {
            parallel_for(g.n_interior(), [&](std::size_t k) {
                const std::int32_t nd = g.interior_nodes[k];
                rhs[nd] = field.values[nd] - bulk_gradient(params.bulk, field.values[nd]) * dt;
                sweep_coef[nd] = dt * params.L;
            });
            for (int sweep = 0; sweep < 40; ++sweep)
                relaxation_sweep(g, cand.values, cand.cut_bc, rhs, sweep_coef);
        }

        const double E_cand = energy(params, cand);
        if (std::isfinite(E_cand) && E_cand <= E + 1e-10) {
            field = std::move(cand);
            E = E_cand;
            rep.energy_trace.emplace_back(iter, E);
            dt = std::min(dt * 1.1, dt_max);
        } else {
            dt *= 0.5;
            if (!(dt > 1e-9 * dt_explicit)) {
                rep.flags.push_back("step size collapsed");
                throw SolverDivergence("relax: energy could not decrease (step collapse)",
                                       field, rep);
            }
        }
    }
    rep.iterations = iter;
    rep.energy_final = E;
    if (!rep.converged) rep.flags.push_back("max_iters reached before tolerance");
    return {std::move(field), std::move(rep)};
}

}  // namespace qlab
