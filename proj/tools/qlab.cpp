// qlab: a numerical laboratory for tensor order-parameter equilibria.
// Subcommands: solve, solve-sn, hedgehog, audit, decompose, plot.
#include <CLI11.hpp>

#include "qlab/runner.hpp"

namespace {

void add_material_flags(CLI::App* cmd, qlab::RunConfig& cfg) {
    cmd->add_option("--bulk", [&cfg](const std::vector<std::string>& vals) {
            // comma-separated a,b,c
            const auto cells = qlab::detail::split_csv(vals.back());
            if (cells.size() != 3) return false;
            try {
                cfg.a = std::stod(cells[0]);
                cfg.b = std::stod(cells[1]);
                cfg.c = std::stod(cells[2]);
            } catch (...) { return false; }
            return true;
        }, "quartic bulk coefficients a,b,c (default 1,1,1)");
    cmd->add_option("--a", cfg.a, "bulk coefficient a");
    cmd->add_option("--b", cfg.b, "bulk coefficient b");
    cmd->add_option("--c", cfg.c, "bulk coefficient c");
    cmd->add_option("--L", cfg.L, "elastic constant L");
}

void add_domain_flags(CLI::App* cmd, qlab::RunConfig& cfg) {
    cmd->add_option("--domain", cfg.domain, "interval | rectangle | disk | ball");
    cmd->add_option("--length", cfg.length, "interval length");
    cmd->add_option("--lx", cfg.lx, "rectangle x side");
    cmd->add_option("--ly", cfg.ly, "rectangle y side");
    cmd->add_option("--R", cfg.radius, "disk/ball radius");
    cmd->add_option("--h", cfg.h, "grid spacing");
}

void add_solver_flags(CLI::App* cmd, qlab::RunConfig& cfg) {
    cmd->add_option("--tol", cfg.tol, "residual sup-norm target");
    cmd->add_option("--max-iters", cfg.max_iters, "iteration cap");
    cmd->add_option("--dt-safety", cfg.dt_safety, "fraction of the stable step");
    cmd->add_option("--scheme", cfg.scheme, "explicit | semi-implicit");
}

}  // namespace

int main(int argc, char** argv) {
    qlab::RunConfig cfg;
    CLI::App app{"numerical laboratory for tensor order-parameter equilibria"};
    app.require_subcommand(1);
    app.set_config("--config", "", "flat key=value configuration file (flags override)");

    CLI::App* solve = app.add_subcommand("solve", "relax the full tensor field");
    add_domain_flags(solve, cfg);
    add_material_flags(solve, cfg);
    add_solver_flags(solve, cfg);
    solve->add_option("--bc", cfg.bc, "hybrid-orthogonal | hybrid-parallel | radial");
    solve->add_option("--angle", cfg.bc_angle_deg, "hybrid-parallel plate angle (degrees)");
    solve->add_option("--s0", cfg.s0, "radial anchoring order parameter");
    solve->add_option("--out", cfg.out, "field CSV output");
    solve->add_option("--report", cfg.report, "report JSON output");

    CLI::App* sn = app.add_subcommand("solve-sn", "relax the constrained (s, n) pair");
    add_domain_flags(sn, cfg);
    add_material_flags(sn, cfg);
    add_solver_flags(sn, cfg);
    sn->add_option("--bc", cfg.bc, "hybrid-orthogonal | hybrid-parallel | radial");
    sn->add_option("--angle", cfg.bc_angle_deg, "hybrid-parallel plate angle (degrees)");
    sn->add_option("--s0", cfg.s0, "radial anchoring order parameter");
    sn->add_option("--out", cfg.out, "lifted field CSV output");
    sn->add_option("--report", cfg.report, "report JSON output");
    sn->add_option("--extra-residual", cfg.extra_out, "symmetry-breaking residual CSV");

    CLI::App* hh = app.add_subcommand("hedgehog", "solve the radial profile BVP");
    add_material_flags(hh, cfg);
    hh->add_option("--s0", cfg.s0, "boundary order parameter")->required();
    hh->add_option("--R", cfg.radius, "droplet radius");
    hh->add_option("--nodes", cfg.nodes, "profile nodes (>= 32)");
    hh->add_option("--method", cfg.method, "shooting | collocation");
    hh->add_option("--out", cfg.out, "profile CSV output");
    hh->add_option("--lift", cfg.lift_out, "lifted ball field CSV output");
    hh->add_option("--h", cfg.h, "ball grid spacing for --lift");

    CLI::App* audit = app.add_subcommand("audit", "diagnostics on a solved field");
    audit->add_option("--in", cfg.in, "field CSV input")->required();
    audit->add_option("--report", cfg.report, "audit JSON output");
    audit->add_option("--beta-map", cfg.beta_map, "per-node biaxiality CSV");
    audit->add_option("--R", cfg.audit_R, "ball radius (enables symmetry audits)");
    audit->add_option("--s0", cfg.s0, "boundary order parameter (enables the boundary audit)");
    audit->add_option("--samples", cfg.samples, "extra sampled rotations");
    audit->add_option("--tol", cfg.class_tol, "classification tolerance");
    add_material_flags(audit, cfg);

    CLI::App* dec = app.add_subcommand("decompose", "dump s, n, beta, phase per node");
    dec->add_option("--in", cfg.in, "field CSV input")->required();
    dec->add_option("--out", cfg.out, "decomposition CSV output")->required();
    dec->add_option("--tol", cfg.class_tol, "classification tolerance");

    CLI::App* plot = app.add_subcommand("plot", "render an SVG line/heat map");
    plot->add_option("--in", cfg.in, "field CSV input")->required();
    plot->add_option("--out", cfg.out, "SVG output")->required();
    plot->add_option("--quantity", cfg.quantity, "s | beta | angle");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    }

    for (CLI::App* sub : {solve, sn, hh, audit, dec, plot})
        if (sub->parsed()) cfg.subcommand = sub->get_name();
    return qlab::run(cfg);
}
