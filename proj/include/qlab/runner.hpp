// Configuration and orchestration behind the command-line tool: boundary
// presets, subcommand execution, and report serialization. Exit codes:
// 0 success, 2 validation error, 3 solver non-convergence.
#pragma once

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "qlab/audit.hpp"
#include "qlab/bulk_potential.hpp"
#include "qlab/el_solver.hpp"
#include "qlab/field_io.hpp"
#include "qlab/grid_domain.hpp"
#include "qlab/hedgehog.hpp"
#include "qlab/plot_svg.hpp"
#include "qlab/uniaxial_sn.hpp"

namespace qlab {

struct RunConfig {
    std::string subcommand;

    // domain
    std::string domain = "interval";  // interval | rectangle | disk | ball
    double length = 1.0;
    double lx = 1.0, ly = 1.0;
    double radius = 1.0;
    double h = 1.0 / 64.0;

    // material
    double a = 1.0, b = 1.0, c = 1.0;
    std::string bulk_kind = "quartic";
    double L = 1.0;

    // boundary condition
    std::string bc;              // hybrid-orthogonal | hybrid-parallel | radial
    double bc_angle_deg = 90.0;  // hybrid-parallel plate angle
    double s0 = std::numeric_limits<double>::quiet_NaN();

    // solver
    double tol = 1e-8;
    int max_iters = 2000000;
    double dt_safety = 0.9;
    std::string scheme = "semi-implicit";

    // hedgehog
    int nodes = 256;
    std::string method = "shooting";

    // audit / io
    std::string in;
    std::string out;
    std::string report;
    std::string lift_out;
    std::string extra_out;
    std::string beta_map;
    std::string quantity = "s";  // s | beta | angle
    double audit_R = 0.0;
    int samples = 16;
    double class_tol = 1e-9;
};

struct ValidationError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

inline DomainSpec domain_from(const RunConfig& cfg) {
    if (cfg.domain == "interval") return DomainSpec::interval(cfg.length, cfg.h);
    if (cfg.domain == "rectangle") return DomainSpec::rectangle(cfg.lx, cfg.ly, cfg.h);
    if (cfg.domain == "disk") return DomainSpec::disk(cfg.radius, cfg.h);
    if (cfg.domain == "ball") return DomainSpec::ball(cfg.radius, cfg.h);
    throw ValidationError("unknown domain '" + cfg.domain +
                          "' (valid: interval, rectangle, disk, ball)");
}

inline MaterialParams material_from(const RunConfig& cfg) {
    if (cfg.bulk_kind != "quartic")
        throw ValidationError("config files can only define the quartic bulk");
    if (!(cfg.L > 0)) throw ValidationError("material.L must be positive");
    return MaterialParams(cfg.L, BulkPotential::quartic(cfg.a, cfg.b, cfg.c));
}

inline Scheme scheme_from(const RunConfig& cfg) {
    if (cfg.scheme == "explicit") return Scheme::Explicit;
    if (cfg.scheme == "semi-implicit" || cfg.scheme == "semi") return Scheme::SemiImplicit;
    throw ValidationError("unknown scheme '" + cfg.scheme +
                          "' (valid: explicit, semi-implicit)");
}

inline double positive_stationary(const MaterialParams& mp) {
    const auto roots = stationary_s(mp.bulk);
    for (auto it = roots.rbegin(); it != roots.rend(); ++it)
        if (*it > 1e-12) return *it;
    throw ValidationError("bulk potential has no positive stationary order parameter");
}

struct BcData {
    std::function<double(const Vec3&)> s;
    std::function<Vec3(const Vec3&)> n;
};

inline BcData expand_preset(const RunConfig& cfg, const MaterialParams& mp,
                            const Grid& grid) {
    const std::string valid = "hybrid-orthogonal, hybrid-parallel, radial";
    if (cfg.bc == "hybrid-orthogonal" || cfg.bc == "hybrid-parallel") {
        if (grid.shape != Shape::Interval)
            throw ValidationError("preset '" + cfg.bc + "' applies to interval domains");
        const double sstar = positive_stationary(mp);
        const double len = grid.h * (grid.extent[0] - 1);
        double angle = cfg.bc == "hybrid-orthogonal" ? M_PI / 2 : cfg.bc_angle_deg * M_PI / 180.0;
        const Vec3 n_right{std::cos(angle), 0, std::sin(angle)};
        return {[sstar](const Vec3&) { return sstar; },
                [n_right, len](const Vec3& x) {
                    return x.x < 0.5 * len ? Vec3{1, 0, 0} : n_right;
                }};
    }
    if (cfg.bc == "radial") {
        if (grid.shape != Shape::Ball)
            throw ValidationError("preset 'radial' applies to ball domains");
        if (std::isnan(cfg.s0))
            throw ValidationError("preset 'radial' requires --s0");
        const double s0 = cfg.s0;
        return {[s0](const Vec3&) { return s0; },
                [](const Vec3& x) { return x.normalized(); }};
    }
    throw ValidationError("unknown bc preset '" + cfg.bc + "' (valid: " + valid + ")");
}

inline nlohmann::json report_json(const SolveReport& rep) {
    nlohmann::json j;
    j["iterations"] = rep.iterations;
    j["final_residual"] = rep.final_residual;
    j["converged"] = rep.converged;
    j["energy_initial"] = rep.energy_initial;
    j["energy_final"] = rep.energy_final;
    j["flags"] = rep.flags;
    j["meta"] = {{"written_at", timestamp_utc()}};
    return j;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << j.dump(2) << '\n';
}

inline std::vector<double> quantity_values(const QField& field, const std::string& quantity,
                                           double tol) {
    std::vector<double> v(field.grid->n_nodes());
    for (std::size_t nd = 0; nd < v.size(); ++nd) {
        const SpectralData d = decompose(field.values[nd], tol);
        if (quantity == "s") v[nd] = d.s;
        else if (quantity == "beta") v[nd] = d.beta;
        else if (quantity == "angle") v[nd] = std::acos(std::clamp(std::abs(d.n.z), 0.0, 1.0));
        else throw ValidationError("unknown quantity '" + quantity + "' (valid: s, beta, angle)");
    }
    return v;
}

inline int run_solve(const RunConfig& cfg) {
    const MaterialParams mp = material_from(cfg);
    auto grid = build_domain(domain_from(cfg));
    QField field(grid);
    if (cfg.bc.empty()) throw ValidationError("solve requires --bc");
    const BcData bc = expand_preset(cfg, mp, *grid);
    field.set_dirichlet([&](const Vec3& x) { return uniaxial(bc.s(x), bc.n(x).normalized()); });
    initialize_field(field);

    SolveOptions opts;
    opts.tol = cfg.tol;
    opts.max_iters = cfg.max_iters;
    opts.dt_safety = cfg.dt_safety;
    opts.scheme = scheme_from(cfg);

    QField solved(grid);
    SolveReport rep;
    try {
        std::tie(solved, rep) = relax(mp, field, opts);
    } catch (const SolverDivergence& e) {
        std::cerr << "solver diverged: " << e.what() << '\n';
        if (!cfg.out.empty()) write_field_csv(e.last_state, cfg.out);
        if (!cfg.report.empty()) write_json(report_json(e.report), cfg.report);
        return 3;
    }
    if (!cfg.out.empty()) write_field_csv(solved, cfg.out);
    if (!cfg.report.empty()) write_json(report_json(rep), cfg.report);
    std::cout << "solve: converged=" << (rep.converged ? "true" : "false")
              << " iterations=" << rep.iterations << " residual=" << rep.final_residual
              << '\n';
    return rep.converged ? 0 : 3;
}

inline int run_solve_sn(const RunConfig& cfg) {
    const MaterialParams mp = material_from(cfg);
    auto grid = build_domain(domain_from(cfg));
    SNField field(grid);
    if (cfg.bc.empty()) throw ValidationError("solve-sn requires --bc");
    const BcData bc = expand_preset(cfg, mp, *grid);
    field.set_dirichlet(bc.s, bc.n);

    // initialization: 1D interpolates the plate data; radial starts from the
    // regular r^2 branch with the radial director
    const Grid& g = *grid;
    if (g.dim == 1) {
        const std::int32_t left = g.node_at_lattice(0, 0, 0);
        const std::int32_t right = g.node_at_lattice(g.extent[0] - 1, 0, 0);
        const double len = g.h * (g.extent[0] - 1);
        for (const std::int32_t nd : g.interior_nodes) {
            const double t = g.coords(nd).x / len;
            field.s[nd] = (1 - t) * field.s[left] + t * field.s[right];
            field.n[nd] = (field.n[left] * (1 - t) + field.n[right] * t).normalized();
        }
    } else if (cfg.bc == "radial") {
        const double R = g.radius;
        for (const std::int32_t nd : g.interior_nodes) {
            const Vec3 x = g.coords(nd);
            const double r = x.norm();
            field.s[nd] = cfg.s0 * (r / R) * (r / R);
            field.n[nd] = r > 0 ? x.normalized() : Vec3{0, 0, 1};
        }
    }

    SolveOptions opts;
    opts.tol = cfg.tol;
    opts.max_iters = cfg.max_iters;
    opts.dt_safety = cfg.dt_safety;
    opts.scheme = scheme_from(cfg);

    SNField solved(grid);
    SolveReport rep;
    try {
        std::tie(solved, rep) = sn_relax(mp, field, opts);
    } catch (const SolverDivergence& e) {
        std::cerr << "solver diverged: " << e.what() << '\n';
        if (!cfg.report.empty()) write_json(report_json(e.report), cfg.report);
        return 3;
    }
    if (!cfg.out.empty()) write_field_csv(lift(solved), cfg.out);
    if (!cfg.report.empty()) write_json(report_json(rep), cfg.report);
    if (!cfg.extra_out.empty()) write_extra_csv(solved, extra_residual(solved), cfg.extra_out);
    std::cout << "solve-sn: converged=" << (rep.converged ? "true" : "false")
              << " iterations=" << rep.iterations << " residual=" << rep.final_residual
              << '\n';
    return rep.converged ? 0 : 3;
}

inline int run_hedgehog(const RunConfig& cfg) {
    const MaterialParams mp = material_from(cfg);
    if (std::isnan(cfg.s0)) throw ValidationError("hedgehog requires --s0");
    const ProfileMethod method = [&] {
        if (cfg.method == "shooting") return ProfileMethod::Shooting;
        if (cfg.method == "collocation") return ProfileMethod::Collocation;
        throw ValidationError("unknown method '" + cfg.method +
                              "' (valid: shooting, collocation)");
    }();
    HedgehogProfile prof;
    try {
        prof = solve_profile(mp, cfg.s0, cfg.radius, cfg.nodes, method);
    } catch (const std::runtime_error& e) {
        std::cerr << "hedgehog solve failed: " << e.what() << '\n';
        return 3;
    }
    if (!cfg.out.empty()) write_profile_csv(prof, cfg.out);
    if (!cfg.lift_out.empty()) {
        auto grid = build_domain(DomainSpec::ball(cfg.radius, cfg.h));
        write_field_csv(lift_to_3d(prof, grid), cfg.lift_out);
    }
    std::cout << "hedgehog: s1=" << prof.s1 << " brackets=" << prof.n_brackets << '\n';
    if (prof.n_brackets > 1)
        std::cout << "note: multiple shooting brackets found (" << prof.n_brackets
                  << "); reporting the first\n";
    return 0;
}

inline int run_audit(const RunConfig& cfg) {
    if (cfg.in.empty()) throw ValidationError("audit requires --in field.csv");
    const QField field = read_field_csv(cfg.in, cfg.audit_R);
    AuditReport report;

    const Classified cls = classify_field(field, cfg.class_tol);
    report.beta_max = cls.beta_max;
    report.beta_mean = cls.beta_mean;
    report.phase_fractions = cls.phase_fractions;
    const ConstancyReport con = director_constancy(field, cfg.class_tol);
    report.components = con.components;
    report.constancy_passes = con.passes;
    report.flags = con.flags;

    if (field.grid->dim == 3 && cfg.audit_R > 0) {
        report.symmetry_dev = symmetry_deviation(field, cfg.samples);
        if (!std::isnan(cfg.s0)) {
            try {
                const BoundaryAudit ba = boundary_audit(field, material_from(cfg), cfg.s0);
                report.star1 = ba.star1_discrepancy;
                report.sup_dr_n = ba.sup_dr_n;
                for (const auto& f : ba.flags) report.flags.push_back(f);
            } catch (const AuditRefused& e) {
                report.flags.push_back(std::string("boundary audit refused: ") + e.what());
            }
        }
    }

    nlohmann::json j;
    j["beta_max"] = report.beta_max;
    j["beta_mean"] = report.beta_mean;
    j["phase_fractions"] = {{"isotropic", report.phase_fractions[0]},
                            {"uniaxial", report.phase_fractions[1]},
                            {"biaxial", report.phase_fractions[2]}};
    j["components"] = nlohmann::json::array();
    for (const auto& cspr : report.components)
        j["components"].push_back({{"id", cspr.id},
                                   {"nodes", cspr.count},
                                   {"director_spread", cspr.spread},
                                   {"beta_max", cspr.beta_max}});
    j["constancy_passes"] = report.constancy_passes;
    if (report.symmetry_dev) j["symmetry_deviation"] = *report.symmetry_dev;
    if (report.star1) j["star1_discrepancy"] = *report.star1;
    if (report.sup_dr_n) j["sup_dr_n"] = *report.sup_dr_n;
    j["flags"] = report.flags;
    j["meta"] = {{"written_at", timestamp_utc()}};
    if (!cfg.report.empty()) write_json(j, cfg.report);
    else std::cout << j.dump(2) << '\n';
    if (!cfg.beta_map.empty()) write_beta_csv(field, cfg.beta_map, cfg.class_tol);
    return 0;
}

inline int run_decompose(const RunConfig& cfg) {
    if (cfg.in.empty() || cfg.out.empty())
        throw ValidationError("decompose requires --in and --out");
    write_decompose_csv(read_field_csv(cfg.in), cfg.out, cfg.class_tol);
    return 0;
}

inline int run_plot(const RunConfig& cfg) {
    if (cfg.in.empty() || cfg.out.empty())
        throw ValidationError("plot requires --in and --out");
    const QField field = read_field_csv(cfg.in);
    const Grid& g = *field.grid;
    const auto vals = quantity_values(field, cfg.quantity, cfg.class_tol);
    if (g.dim == 1) {
        std::vector<double> xs;
        for (std::size_t nd = 0; nd < g.n_nodes(); ++nd)
            xs.push_back(g.coords(static_cast<std::int32_t>(nd)).x);
        plot_line_svg(xs, vals, cfg.quantity, cfg.out);
    } else {
        std::vector<std::uint8_t> pick(g.n_nodes(), 0);
        for (std::size_t nd = 0; nd < g.n_nodes(); ++nd) {
            const Vec3 x = g.coords(static_cast<std::int32_t>(nd));
            pick[nd] = (g.dim == 2 || std::abs(x.z) < 0.5 * g.h) ? 1 : 0;
        }
        plot_heatmap_svg(g, vals, pick, cfg.quantity, cfg.out);
    }
    return 0;
}

}  // namespace detail

// Executes one subcommand; exceptions map to the documented exit codes.
inline int run(const RunConfig& cfg) {
    try {
        if (cfg.subcommand == "solve") return detail::run_solve(cfg);
        if (cfg.subcommand == "solve-sn") return detail::run_solve_sn(cfg);
        if (cfg.subcommand == "hedgehog") return detail::run_hedgehog(cfg);
        if (cfg.subcommand == "audit") return detail::run_audit(cfg);
        if (cfg.subcommand == "decompose") return detail::run_decompose(cfg);
        if (cfg.subcommand == "plot") return detail::run_plot(cfg);
        std::cerr << "unknown subcommand '" << cfg.subcommand << "'\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const CsvError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const SolverDivergence& e) {
        std::cerr << "solver diverged: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace qlab
