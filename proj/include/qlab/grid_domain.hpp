// Discretized domains (interval, rectangle, disk, ball): uniform Cartesian
// lattices with node classification, Shortley-Weller cut-cell data at curved
// boundaries, and second-order finite-difference operators.
#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include "qlab/parallel.hpp"
#include "qlab/tensor_core.hpp"

namespace qlab {

enum class NodeClass : std::uint8_t { Interior, Boundary, Exterior };

enum class Shape : std::uint8_t { Interval, Rectangle, Disk, Ball, Imported };

struct DomainSpec {
    Shape shape = Shape::Interval;
    double length = 1.0;          // Interval
    double lx = 1.0, ly = 1.0;    // Rectangle
    double radius = 1.0;          // Disk / Ball
    double h = 0.0625;

    static DomainSpec interval(double length, double h) {
        return {Shape::Interval, length, 0, 0, 0, h};
    }
    static DomainSpec rectangle(double lx, double ly, double h) {
        return {Shape::Rectangle, 0, lx, ly, 0, h};
    }
    static DomainSpec disk(double radius, double h) {
        return {Shape::Disk, 0, 0, 0, radius, h};
    }
    static DomainSpec ball(double radius, double h) {
        return {Shape::Ball, 0, 0, 0, radius, h};
    }
};

// One stencil arm of an interior node. Either `node` >= 0 (full arm of length
// theta = 1 ending at a lattice node) or `slot` >= 0 (cut arm of length
// theta*h ending on the true boundary; Dirichlet data lives in a per-slot
// array owned by the field).
struct Arm {
    double theta = 1.0;
    std::int32_t node = -1;
    std::int32_t slot = -1;
};

class Grid {
  public:
    Shape shape = Shape::Interval;
    int dim = 1;
    double h = 0;
    double radius = 0;                    // curved shapes only
    std::array<int, 3> extent{1, 1, 1};   // lattice nodes per axis
    std::array<double, 3> origin{0, 0, 0};

    std::vector<NodeClass> cls;           // per compact node
    std::vector<std::int32_t> lattice_of; // compact node -> flat lattice index
    std::vector<std::int32_t> node_at;    // flat lattice index -> node id, -1 if exterior
    std::vector<std::int32_t> interior_nodes;  // node ids, ascending
    std::vector<double> weight;           // quadrature weight per node

    std::vector<double> cut_theta;        // per cut slot
    std::vector<Vec3> cut_point;          // boundary intersection per cut slot
    // (node << 3) | (2*axis + side) -> cut slot
    std::unordered_map<std::uint64_t, std::int32_t> cut_slot_of;

    double stability_scale = 1.0;         // explicit-step scale vs uniform stencil

    std::size_t n_nodes() const { return cls.size(); }
    std::size_t n_interior() const { return interior_nodes.size(); }
    std::size_t n_cut_slots() const { return cut_theta.size(); }

    std::int64_t stride(int d) const {
        return d == 0 ? 1 : (d == 1 ? extent[0] : std::int64_t(extent[0]) * extent[1]);
    }
    std::array<int, 3> lattice_coords(std::int32_t node) const {
        std::int64_t f = lattice_of[node];
        const int i = static_cast<int>(f % extent[0]);
        f /= extent[0];
        const int j = static_cast<int>(f % extent[1]);
        const int k = static_cast<int>(f / extent[1]);
        return {i, j, k};
    }
    Vec3 coords(std::int32_t node) const {
        const auto ijk = lattice_coords(node);
        return {origin[0] + h * ijk[0], origin[1] + h * ijk[1], origin[2] + h * ijk[2]};
    }
    std::int32_t node_at_lattice(int i, int j, int k) const {
        if (i < 0 || i >= extent[0] || j < 0 || j >= extent[1] || k < 0 || k >= extent[2])
            return -1;
        return node_at[(std::int64_t(k) * extent[1] + j) * extent[0] + i];
    }

    Arm arm(std::int32_t node, int axis, int side) const {
        const auto ijk = lattice_coords(node);
        int p[3] = {ijk[0], ijk[1], ijk[2]};
        p[axis] += side ? 1 : -1;
        const std::int32_t nb = node_at_lattice(p[0], p[1], p[2]);
        if (nb >= 0) return {1.0, nb, -1};
        const auto it = cut_slot_of.find((std::uint64_t(node) << 3) | (2 * axis + side));
        if (it == cut_slot_of.end())
            throw std::logic_error("Grid: missing arm (imported grid used with a stencil op?)");
        return {cut_theta[it->second], -1, it->second};
    }

    bool has_cut_arm(std::int32_t node) const {
        for (int d = 0; d < dim; ++d)
            for (int s = 0; s < 2; ++s) {
                const auto ijk = lattice_coords(node);
                int p[3] = {ijk[0], ijk[1], ijk[2]};
                p[d] += s ? 1 : -1;
                if (node_at_lattice(p[0], p[1], p[2]) < 0) return true;
            }
        return false;
    }
};

namespace detail {

inline bool on_sphere(double r2, double R) {
    return std::abs(r2 - R * R) <= 4e-12 * R * R;
}

}  // namespace detail

// Builds the lattice, classifies nodes, and precomputes cut-cell fractions
// for the Shortley-Weller corrected Laplacian on curved shapes.
inline std::shared_ptr<Grid> build_domain(const DomainSpec& spec) {
    if (!(spec.h > 0)) throw std::invalid_argument("build_domain: h must be positive");
    auto g = std::make_shared<Grid>();
    g->shape = spec.shape;

    auto axis_nodes = [&](double len) {
        const int n = static_cast<int>(std::lround(len / spec.h)) + 1;
        if (n < 5)
            throw std::invalid_argument("build_domain: fewer than 3 interior nodes per axis");
        return n;
    };

    if (spec.shape == Shape::Interval || spec.shape == Shape::Rectangle) {
        const double lx = spec.shape == Shape::Interval ? spec.length : spec.lx;
        const int nx = axis_nodes(lx);
        int ny = 1;
        g->dim = spec.shape == Shape::Interval ? 1 : 2;
        g->h = lx / (nx - 1);
        if (spec.shape == Shape::Rectangle) {
            ny = axis_nodes(spec.ly);
            const double hy = spec.ly / (ny - 1);
            if (std::abs(hy - g->h) > 1e-9 * g->h)
                throw std::invalid_argument("build_domain: rectangle sides must share the spacing h");
        }
        g->extent = {nx, ny, 1};
        g->origin = {0, 0, 0};
        const std::int64_t total = std::int64_t(nx) * ny;
        g->node_at.assign(total, -1);
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                const std::int64_t f = std::int64_t(j) * nx + i;
                const bool bd = i == 0 || i == nx - 1 ||
                                (g->dim == 2 && (j == 0 || j == ny - 1));
                g->node_at[f] = static_cast<std::int32_t>(g->cls.size());
                g->lattice_of.push_back(static_cast<std::int32_t>(f));
                g->cls.push_back(bd ? NodeClass::Boundary : NodeClass::Interior);
            }
    } else if (spec.shape == Shape::Disk || spec.shape == Shape::Ball) {
        const double R = spec.radius;
        if (!(R > 0)) throw std::invalid_argument("build_domain: radius must be positive");
        g->dim = spec.shape == Shape::Disk ? 2 : 3;
        g->h = spec.h;
        g->radius = R;
        const int m = static_cast<int>(std::ceil(R / g->h - 1e-12));
        // at least 3 interior nodes along an axis through the center
        if (2 * static_cast<int>(std::floor((R - 1e-12 * R) / g->h)) + 1 < 3)
            throw std::invalid_argument("build_domain: fewer than 3 interior nodes per axis");
        const int n = 2 * m + 1;
        g->extent = {n, n, g->dim == 3 ? n : 1};
        g->origin = {-m * g->h, -m * g->h, g->dim == 3 ? -m * g->h : 0.0};
        const std::int64_t total = std::int64_t(n) * n * (g->dim == 3 ? n : 1);
        g->node_at.assign(total, -1);
        for (std::int64_t f = 0; f < total; ++f) {
            std::int64_t t = f;
            const int i = static_cast<int>(t % n);
            t /= n;
            const int j = static_cast<int>(t % n);
            const int k = static_cast<int>(t / n);
            const Vec3 x{g->origin[0] + g->h * i, g->origin[1] + g->h * j,
                         g->origin[2] + g->h * (g->dim == 3 ? k : 0)};
            const double r2 = x.norm2();
            NodeClass c;
            if (detail::on_sphere(r2, R)) c = NodeClass::Boundary;
            else if (r2 < R * R) c = NodeClass::Interior;
            else continue;
            g->node_at[f] = static_cast<std::int32_t>(g->cls.size());
            g->lattice_of.push_back(static_cast<std::int32_t>(f));
            g->cls.push_back(c);
        }
    } else {
        throw std::invalid_argument("build_domain: unsupported shape");
    }

    for (std::size_t nd = 0; nd < g->n_nodes(); ++nd)
        if (g->cls[nd] == NodeClass::Interior)
            g->interior_nodes.push_back(static_cast<std::int32_t>(nd));

    // cut arms (curved shapes): interior node with a missing lattice neighbor
    if (g->shape == Shape::Disk || g->shape == Shape::Ball) {
        const double R = g->radius;
        for (const std::int32_t nd : g->interior_nodes) {
            const auto ijk = g->lattice_coords(nd);
            const Vec3 x = g->coords(nd);
            for (int d = 0; d < g->dim; ++d)
                for (int side = 0; side < 2; ++side) {
                    int p[3] = {ijk[0], ijk[1], ijk[2]};
                    p[d] += side ? 1 : -1;
                    if (g->node_at_lattice(p[0], p[1], p[2]) >= 0) continue;
                    const double u = x[d];
                    const double rho2 = x.norm2() - u * u;
                    const double w = std::sqrt(std::max(0.0, R * R - rho2));
                    double theta = (side ? (w - u) : (u + w)) / g->h;
                    theta = std::min(1.0, std::max(1e-6, theta));
                    Vec3 bp = x;
                    bp[d] += (side ? 1.0 : -1.0) * theta * g->h;
                    const auto slot = static_cast<std::int32_t>(g->cut_theta.size());
                    g->cut_theta.push_back(theta);
                    g->cut_point.push_back(bp);
                    g->cut_slot_of.emplace((std::uint64_t(nd) << 3) | (2 * d + side), slot);
                }
        }
    }

    // quadrature weights: tensor-product trapezoid on straight shapes, arm-
    // averaged cell volumes at cut cells, zero for on-sphere lattice nodes
    g->weight.assign(g->n_nodes(), 0.0);
    const double cell = std::pow(g->h, g->dim);
    if (g->shape == Shape::Interval || g->shape == Shape::Rectangle) {
        for (std::size_t nd = 0; nd < g->n_nodes(); ++nd) {
            const auto ijk = g->lattice_coords(static_cast<std::int32_t>(nd));
            double w = cell;
            for (int d = 0; d < g->dim; ++d)
                if (ijk[d] == 0 || ijk[d] == g->extent[d] - 1) w *= 0.5;
            g->weight[nd] = w;
        }
    } else {
        for (const std::int32_t nd : g->interior_nodes) {
            double w = cell;
            for (int d = 0; d < g->dim; ++d) {
                const Arm lo = g->arm(nd, d, 0), hi = g->arm(nd, d, 1);
                w *= 0.5 * (lo.theta + hi.theta);
            }
            g->weight[nd] = w;
        }
    }

    // worst-case diagonal growth of the cut stencil, used to scale explicit dt
    double scale = 1.0;
    for (const std::int32_t nd : g->interior_nodes) {
        if (!g->has_cut_arm(nd)) continue;
        double diag = 0;
        for (int d = 0; d < g->dim; ++d) {
            const Arm lo = g->arm(nd, d, 0), hi = g->arm(nd, d, 1);
            diag += 2.0 / (lo.theta * hi.theta);
        }
        scale = std::min(scale, 2.0 * g->dim / diag);
    }
    g->stability_scale = scale;
    return g;
}

// ---------------------------------------------------------------------------
// Fields and stencil operators
// ---------------------------------------------------------------------------

namespace detail {
inline double norm2_of(double v) { return v * v; }
inline double norm2_of(const Vec3& v) { return v.norm2(); }
inline double norm2_of(const QTensor& v) { return v.norm2(); }
}  // namespace detail

// Grid-discretized tensor field with Dirichlet data. `values` covers interior
// and boundary nodes; `cut_bc` carries the Dirichlet values at cut-arm
// intersection points (curved shapes).
struct QField {
    std::shared_ptr<const Grid> grid;
    std::vector<QTensor> values;
    std::vector<QTensor> cut_bc;

    QField() = default;
    explicit QField(std::shared_ptr<const Grid> g)
        : grid(std::move(g)), values(grid->n_nodes()), cut_bc(grid->n_cut_slots()) {}

    void set_dirichlet(const std::function<QTensor(const Vec3&)>& f) {
        for (std::size_t nd = 0; nd < grid->n_nodes(); ++nd)
            if (grid->cls[nd] == NodeClass::Boundary)
                values[nd] = f(grid->coords(static_cast<std::int32_t>(nd)));
        for (std::size_t s = 0; s < grid->n_cut_slots(); ++s)
            cut_bc[s] = f(grid->cut_point[s]);
    }
};

// Radial anchoring s0 (x/|x| (x) x/|x| - I/3) on a Ball grid. Returns a
// warning when s0 = 0 (the anchoring degenerates to isotropic).
inline std::optional<std::string> radial_bc(QField& field, double s0) {
    if (field.grid->shape != Shape::Ball)
        throw std::invalid_argument("radial_bc: requires a Ball grid");
    field.set_dirichlet([s0](const Vec3& x) { return uniaxial(s0, x.normalized()); });
    if (s0 == 0.0) return "radial_bc: s0 = 0 gives isotropic anchoring";
    return std::nullopt;
}

// Centered second-order Laplacian with Shortley-Weller unequal-arm correction
// at cut cells. Output is sized like `values`; boundary entries are zero.
template <class T>
std::vector<T> laplacian(const Grid& g, const std::vector<T>& values,
                         const std::vector<T>& cut_bc) {
    std::vector<T> out(values.size(), T{});
    const double inv_h2 = 1.0 / (g.h * g.h);
    parallel_for(g.n_interior(), [&](std::size_t k) {
        const std::int32_t nd = g.interior_nodes[k];
        T acc{};
        double diag = 0;
        for (int d = 0; d < g.dim; ++d) {
            const Arm lo = g.arm(nd, d, 0), hi = g.arm(nd, d, 1);
            const T& vlo = lo.node >= 0 ? values[lo.node] : cut_bc[lo.slot];
            const T& vhi = hi.node >= 0 ? values[hi.node] : cut_bc[hi.slot];
            const double denom = lo.theta + hi.theta;
            acc += vlo * (2.0 / (lo.theta * denom));
            acc += vhi * (2.0 / (hi.theta * denom));
            diag += 2.0 / (lo.theta * hi.theta);
        }
        out[nd] = (acc - values[nd] * diag) * inv_h2;
    });
    return out;
}

inline std::vector<QTensor> laplacian(const QField& f) {
    return laplacian(*f.grid, f.values, f.cut_bc);
}

// One red-black Gauss-Seidel pass for (I - coef_i Lap) q = rhs on interior
// nodes, Dirichlet data fixed. `coef` is the per-node product of step size
// and diffusivity (zero entries leave the node at its rhs value).
template <class T>
void relaxation_sweep(const Grid& g, std::vector<T>& q, const std::vector<T>& cut_bc,
                      const std::vector<T>& rhs, const std::vector<double>& coef) {
    const double inv_h2 = 1.0 / (g.h * g.h);
    for (int color = 0; color < 2; ++color) {
        parallel_for(g.n_interior(), [&](std::size_t k) {
            const std::int32_t nd = g.interior_nodes[k];
            const auto ijk = g.lattice_coords(nd);
            if (((ijk[0] + ijk[1] + ijk[2]) & 1) != color) return;
            const double c = coef[nd] * inv_h2;
            if (c == 0) {
                q[nd] = rhs[nd];
                return;
            }
            T off{};
            double diag = 0;
            for (int d = 0; d < g.dim; ++d) {
                const Arm lo = g.arm(nd, d, 0), hi = g.arm(nd, d, 1);
                const T& vlo = lo.node >= 0 ? q[lo.node] : cut_bc[lo.slot];
                const T& vhi = hi.node >= 0 ? q[hi.node] : cut_bc[hi.slot];
                const double denom = lo.theta + hi.theta;
                off += vlo * (2.0 / (lo.theta * denom));
                off += vhi * (2.0 / (hi.theta * denom));
                diag += 2.0 / (lo.theta * hi.theta);
            }
            q[nd] = (rhs[nd] + off * c) * (1.0 / (1.0 + c * diag));
        });
    }
}

// First derivative along `axis` at an interior node (centered; arm-weighted
// at cut cells, first-order there).
template <class T>
T axis_derivative(const Grid& g, const std::vector<T>& values, const std::vector<T>& cut_bc,
                  std::int32_t nd, int axis) {
    const Arm lo = g.arm(nd, axis, 0), hi = g.arm(nd, axis, 1);
    const T& vlo = lo.node >= 0 ? values[lo.node] : cut_bc[lo.slot];
    const T& vhi = hi.node >= 0 ? values[hi.node] : cut_bc[hi.slot];
    return (vhi - vlo) * (1.0 / ((lo.theta + hi.theta) * g.h));
}

// Squared gradient magnitude per node (componentwise Frobenius for tensors).
// Interior: centered; straight-boundary nodes: one-sided along available
// arms. On-sphere lattice nodes of curved grids carry quadrature weight zero
// and are skipped.
template <class T>
std::vector<double> grad_squared(const Grid& g, const std::vector<T>& values,
                                 const std::vector<T>& cut_bc) {
    std::vector<double> out(values.size(), 0.0);
    parallel_for(g.n_nodes(), [&](std::size_t ndz) {
        const auto nd = static_cast<std::int32_t>(ndz);
        double acc = 0;
        if (g.cls[nd] == NodeClass::Interior) {
            for (int d = 0; d < g.dim; ++d)
                acc += detail::norm2_of(axis_derivative(g, values, cut_bc, nd, d));
        } else if (g.shape == Shape::Interval || g.shape == Shape::Rectangle) {
            const auto ijk = g.lattice_coords(nd);
            for (int d = 0; d < g.dim; ++d) {
                int pm[3] = {ijk[0], ijk[1], ijk[2]};
                int pp[3] = {ijk[0], ijk[1], ijk[2]};
                pm[d] -= 1;
                pp[d] += 1;
                const std::int32_t nm = g.node_at_lattice(pm[0], pm[1], pm[2]);
                const std::int32_t np = g.node_at_lattice(pp[0], pp[1], pp[2]);
                if (nm >= 0 && np >= 0)
                    acc += detail::norm2_of((values[np] - values[nm]) * (0.5 / g.h));
                else if (np >= 0)
                    acc += detail::norm2_of((values[np] - values[nd]) * (1.0 / g.h));
                else if (nm >= 0)
                    acc += detail::norm2_of((values[nd] - values[nm]) * (1.0 / g.h));
            }
        }
        out[nd] = acc;
    });
    return out;
}

}  // namespace qlab
