// CSV serialization of grid fields and derived per-node quantities, plus
// lattice reconstruction for files loaded without their generating config.
// All numeric cells use 17 significant digits so written fields round-trip
// bit-exactly.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qlab/grid_domain.hpp"
#include "qlab/hedgehog.hpp"
#include "qlab/tensor_core.hpp"
#include "qlab/uniaxial_sn.hpp"

namespace qlab {

struct CsvError : std::runtime_error {
    std::size_t line;
    CsvError(std::size_t line_, const std::string& what_)
        : std::runtime_error("line " + std::to_string(line_) + ": " + what_), line(line_) {}
};

namespace detail {

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw CsvError(line, "bad numeric cell '" + s + "'");
    }
}

}  // namespace detail

inline void write_field_csv(const QField& field, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "x,y,z,c1,c2,c3,c4,c5,class\n";
    const Grid& g = *field.grid;
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        const Vec3 x = g.coords(static_cast<std::int32_t>(nd));
        out << detail::fmt(x.x) << ',' << detail::fmt(x.y) << ',' << detail::fmt(x.z);
        for (int i = 0; i < 5; ++i) out << ',' << detail::fmt(field.values[nd].c[i]);
        out << ',' << (g.cls[nd] == NodeClass::Interior ? "interior" : "boundary") << '\n';
    }
}

// Rebuilds a uniform lattice from node coordinates. The resulting grid has
// shape Imported: classification and adjacency are available (enough for the
// audits and dumps), stencil arms and cut data are not.
inline QField read_field_csv(const std::string& path, double ball_radius = 0.0) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    std::getline(in, line);
    ++lineno;
    if (detail::split_csv(line).size() != 9)
        throw CsvError(lineno, "expected header x,y,z,c1,c2,c3,c4,c5,class");

    struct Row {
        Vec3 x;
        QTensor q;
        NodeClass cls;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto cells = detail::split_csv(line);
        if (cells.size() != 9) throw CsvError(lineno, "expected 9 cells");
        Row r;
        r.x = {detail::parse_double(cells[0], lineno), detail::parse_double(cells[1], lineno),
               detail::parse_double(cells[2], lineno)};
        for (int i = 0; i < 5; ++i) r.q.c[i] = detail::parse_double(cells[3 + i], lineno);
        if (cells[8] == "interior") r.cls = NodeClass::Interior;
        else if (cells[8] == "boundary") r.cls = NodeClass::Boundary;
        else throw CsvError(lineno, "unknown node class '" + cells[8] + "'");
        rows.push_back(r);
    }
    if (rows.size() < 3) throw CsvError(lineno, "fewer than 3 nodes");

    auto g = std::make_shared<Grid>();
    g->shape = Shape::Imported;
    g->radius = ball_radius;

    // per-axis lattice step and offset
    double mins[3], maxs[3];
    for (int d = 0; d < 3; ++d) {
        mins[d] = rows[0].x[d];
        maxs[d] = rows[0].x[d];
    }
    for (const Row& r : rows)
        for (int d = 0; d < 3; ++d) {
            mins[d] = std::min(mins[d], r.x[d]);
            maxs[d] = std::max(maxs[d], r.x[d]);
        }
    double h = 0;
    for (int d = 0; d < 3; ++d) {
        std::vector<double> vals;
        for (const Row& r : rows) vals.push_back(r.x[d]);
        std::sort(vals.begin(), vals.end());
        for (std::size_t i = 1; i < vals.size(); ++i) {
            const double gap = vals[i] - vals[i - 1];
            if (gap > 1e-12 && (h == 0 || gap < h)) h = gap;
        }
    }
    if (h == 0) throw CsvError(lineno, "degenerate lattice (all nodes coincide)");
    g->h = h;
    g->dim = 0;
    int ext[3] = {1, 1, 1};
    for (int d = 0; d < 3; ++d) {
        g->origin[d] = mins[d];
        ext[d] = static_cast<int>(std::lround((maxs[d] - mins[d]) / h)) + 1;
        if (ext[d] > 1) g->dim = d + 1;
    }
    g->extent = {ext[0], ext[1], ext[2]};
    if (g->dim == 0) g->dim = 1;

    const std::int64_t total = std::int64_t(ext[0]) * ext[1] * ext[2];
    g->node_at.assign(total, -1);
    QField field;
    std::vector<QTensor> values;
    std::size_t rowno = 1;
    for (const Row& r : rows) {
        ++rowno;
        std::int64_t idx[3];
        for (int d = 0; d < 3; ++d) {
            idx[d] = std::lround((r.x[d] - g->origin[d]) / h);
            if (std::abs(r.x[d] - (g->origin[d] + idx[d] * h)) > 1e-9 * std::max(1.0, h))
                throw CsvError(rowno, "node is off the uniform lattice");
            if (idx[d] < 0 || idx[d] >= ext[d]) throw CsvError(rowno, "node outside lattice");
        }
        const std::int64_t flat = (idx[2] * ext[1] + idx[1]) * ext[0] + idx[0];
        if (g->node_at[flat] >= 0) throw CsvError(rowno, "duplicate node");
        g->node_at[flat] = static_cast<std::int32_t>(g->cls.size());
        g->lattice_of.push_back(static_cast<std::int32_t>(flat));
        g->cls.push_back(r.cls);
        values.push_back(r.q);
    }
    for (std::size_t nd = 0; nd < g->n_nodes(); ++nd)
        if (g->cls[nd] == NodeClass::Interior)
            g->interior_nodes.push_back(static_cast<std::int32_t>(nd));
    g->weight.assign(g->n_nodes(), std::pow(h, g->dim));

    field.grid = std::move(g);
    field.values = std::move(values);
    return field;
}

// Nodewise decomposition dump: x,y,z,s,nx,ny,nz,beta,phase.
inline void write_decompose_csv(const QField& field, const std::string& path,
                                double tol = 1e-9) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "x,y,z,s,nx,ny,nz,beta,phase\n";
    const Grid& g = *field.grid;
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        const Vec3 x = g.coords(static_cast<std::int32_t>(nd));
        const SpectralData d = decompose(field.values[nd], tol);
        out << detail::fmt(x.x) << ',' << detail::fmt(x.y) << ',' << detail::fmt(x.z) << ','
            << detail::fmt(d.s) << ',' << detail::fmt(d.n.x) << ',' << detail::fmt(d.n.y)
            << ',' << detail::fmt(d.n.z) << ',' << detail::fmt(d.beta) << ','
            << phase_name(d.phase) << '\n';
    }
}

// Symmetry-breaking residual dump: coords, tensor coefficients, Frobenius norm.
inline void write_extra_csv(const SNField& field, const ExtraResidual& extra,
                            const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "x,y,z,e1,e2,e3,e4,e5,fro\n";
    const Grid& g = *field.grid;
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        const Vec3 x = g.coords(static_cast<std::int32_t>(nd));
        out << detail::fmt(x.x) << ',' << detail::fmt(x.y) << ',' << detail::fmt(x.z);
        for (int i = 0; i < 5; ++i) out << ',' << detail::fmt(extra.value[nd].c[i]);
        out << ',' << detail::fmt(extra.fro[nd]) << '\n';
    }
}

// Radial profile dump: r, s, centered ODE residual.
inline void write_profile_csv(const HedgehogProfile& prof, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "r,s,residual\n";
    const auto res = profile_residual(prof);
    for (std::size_t i = 0; i < prof.r.size(); ++i)
        out << detail::fmt(prof.r[i]) << ',' << detail::fmt(prof.s[i]) << ','
            << detail::fmt(res[i]) << '\n';
}

inline void write_beta_csv(const QField& field, const std::string& path, double tol = 1e-9) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << "x,y,z,beta\n";
    const Grid& g = *field.grid;
    for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
        const Vec3 x = g.coords(static_cast<std::int32_t>(nd));
        out << detail::fmt(x.x) << ',' << detail::fmt(x.y) << ',' << detail::fmt(x.z) << ','
            << detail::fmt(decompose(field.values[nd], tol).beta) << '\n';
    }
}

}  // namespace qlab
