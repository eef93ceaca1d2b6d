// rieszlab command-line front end: equilibrium solves, capacities, moment
// comparisons, J-grid scans, and theorem-verification campaigns, with CSV
// reports. Exit codes: 0 success, 2 config error, 3 campaign with a violated
// verdict.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rieszlab/config.hpp"

namespace {

using namespace rieszlab;

struct CommonOpts {
    std::string set_path;
    std::string kernel;  // empty: log, or riesz when --p is given
    double p = 1.0;
    bool p_given = false;
    int n_points = 1000;
    std::string grading = "endpoint_refined";
    std::string solver = "active-set";
    double tol = 1e-8;
    std::string out;
};

KernelSpec kernel_from(const CommonOpts& o, int dim) {
    // bare --p implies the Riesz kernel
    const std::string kind = !o.kernel.empty() ? o.kernel : (o.p_given ? "riesz" : "log");
    if (kind == "log") return KernelSpec::log_kernel(dim == 1 ? 2 : dim);
    if (kind == "riesz") {
        if (!o.p_given) throw std::invalid_argument("--kernel riesz requires --p");
        return KernelSpec::riesz(o.p, o.p < dim ? dim : dim + 1);
    }
    throw std::invalid_argument("--kernel must be log or riesz");
}

SolverOptions solver_from(const CommonOpts& o) {
    SolverOptions s;
    s.method = parse_solver_method(o.solver);
    s.tol = o.tol;
    return s;
}

EquilibriumResult solve_from(const CommonOpts& o, KernelSpec* kernel_out = nullptr) {
    const SetSpec set = load_set_spec(o.set_path);
    const KernelSpec kernel = kernel_from(o, set.dim);
    if (kernel_out) *kernel_out = kernel;
    const Mesh mesh = build_mesh(set, o.n_points, parse_grading(o.grading));
    return solve_equilibrium(mesh, kernel, solver_from(o));
}

void add_common(CLI::App* cmd, CommonOpts& o, bool with_set = true) {
    if (with_set) cmd->add_option("--set", o.set_path, "set config (JSON)")->required();
    cmd->add_option("--kernel", o.kernel, "kernel: log or riesz")->check(CLI::IsMember({"log", "riesz"}));
    cmd->add_option("--p", o.p, "Riesz exponent")->each([&o](const std::string&) { o.p_given = true; });
    cmd->add_option("--n-points", o.n_points, "mesh resolution (atom count target)");
    cmd->add_option("--grading", o.grading, "mesh grading")
        ->check(CLI::IsMember({"uniform", "endpoint_refined"}));
    cmd->add_option("--solver", o.solver, "active-set or pgd")
        ->check(CLI::IsMember({"active-set", "active_set", "pgd"}));
    cmd->add_option("--tol", o.tol, "solver KKT tolerance (relative)");
    cmd->add_option("--out", o.out, "output CSV path");
}

void write_measure_csv(const EquilibriumResult& r, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << "x1,x2,x3,cell_weight,w\n";
    const Mesh& m = r.measure.mesh;
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << detail::format17(m.atoms[i][0]) << ',' << detail::format17(m.atoms[i][1]) << ','
            << detail::format17(m.atoms[i][2]) << ',' << detail::format17(m.weights[i]) << ','
            << detail::format17(r.measure.w[i]) << '\n';
    }
}

int run(int argc, char** argv) {
    CLI::App app{"rieszlab: equilibrium measures, capacities, and moment comparisons"};
    app.require_subcommand(1);

    int threads = 0;
    unsigned long long seed = 1;
    app.add_option("--threads", threads, "worker threads (default: RIESZLAB_THREADS or all cores)");
    app.add_option("--seed", seed, "RNG seed (Monte-Carlo self-energy calibration runs only)");

    CommonOpts eq_o, cap_o, mom_o, js_o;
    std::vector<std::string> q_list;
    bool mc_check = false;

    auto* eq = app.add_subcommand("equilibrium", "solve the equilibrium measure of a set");
    add_common(eq, eq_o);
    eq->add_flag("--mc-self-check", mc_check,
                 "print a seeded Monte-Carlo check of the cell self-energy constant");

    auto* cap = app.add_subcommand("capacity", "solved capacity of a set");
    add_common(cap, cap_o);

    auto* mom = app.add_subcommand("moments", "moment comparison against the capacity-matched ball");
    add_common(mom, mom_o);
    mom->add_option("--q", q_list, "moment order(s): number or log")->required();

    auto* jsc = app.add_subcommand("jscan", "grid scan of J(v-u) for the codim-one comparison");
    double r_max = 6.0, z_max = 4.0;
    int nr = 60, nz = 40, jnodes = 64;
    add_common(jsc, js_o);
    jsc->add_option("--r-max", r_max, "grid extent in r");
    jsc->add_option("--z-max", z_max, "grid extent in z");
    jsc->add_option("--nr", nr, "grid nodes in r");
    jsc->add_option("--nz", nz, "grid nodes in z");
    jsc->add_option("--j-nodes", jnodes, "quadrature nodes per radial line");

    std::string campaign_path, verify_out, sweep_out;
    auto* ver = app.add_subcommand("verify", "run a theorem-verification campaign");
    ver->add_option("--campaign", campaign_path, "campaign config (JSON)")->required();
    ver->add_option("--out", verify_out, "report CSV path");

    auto* swp = app.add_subcommand("sweep", "run an exploratory campaign (never gates on verdicts)");
    swp->add_option("--campaign", campaign_path, "campaign config (JSON)")->required();
    swp->add_option("--out", sweep_out, "report CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    }
    if (threads > 0) thread_count().store(threads);

    if (eq->parsed()) {
        KernelSpec kernel;
        const EquilibriumResult r = solve_from(eq_o, &kernel);
        std::printf("atoms = %zu\n", r.measure.mesh.size());
        std::printf("energy = %.10g\n", r.energy);
        std::printf("capacity = %.10g\n", r.capacity);
        std::printf("kkt_residual = %.3g\n", r.kkt_residual);
        std::printf("support_fraction = %.4g\n", r.active_support_fraction);
        std::printf("iterations = %d\n", r.iterations);
        std::printf("converged = %s\n", r.converged ? "yes" : "no");
        if (mc_check && !kernel.is_log()) {
            const int d = r.measure.mesh.cell_dim.front();
            const double mc = mc_cell_constant(kernel, d, 1000000, seed);
            std::printf("mc_cell_constant(dim=%d) = %.6g (closed form %.6g)\n", d, mc,
                        riesz_cell_constant(kernel.p, d));
        }
        if (!eq_o.out.empty()) write_measure_csv(r, eq_o.out);
        return r.converged ? 0 : 1;
    }
    if (cap->parsed()) {
        const EquilibriumResult r = solve_from(cap_o);
        std::printf("capacity = %.10g\n", r.capacity);
        if (!cap_o.out.empty()) write_measure_csv(r, cap_o.out);
        return r.converged ? 0 : 1;
    }
    if (mom->parsed()) {
        KernelSpec kernel;
        const EquilibriumResult r = solve_from(mom_o, &kernel);
        CampaignReport rep;  // reuse the campaign CSV shape for the report
        rep.n = r.measure.mesh.dim;
        rep.p_is_log = kernel.is_log();
        rep.p = kernel.is_log() ? 0.0 : kernel.p;
        std::printf("%-8s %-14s %-14s %-12s %-12s %s\n", "q", "moment_K", "moment_ball", "gap",
                    "error_est", "verdict");
        for (const auto& qs : q_list) {
            const MomentOrder q = qs == "log" ? MomentOrder::log() : MomentOrder::power(std::stod(qs));
            const MomentComparison cmp = compare_moments(r, kernel, q, parse_grading(mom_o.grading));
            std::printf("%-8s %-14.8g %-14.8g %-12.4g %-12.4g %s\n", q.label().c_str(), cmp.moment_K,
                        cmp.moment_ball, cmp.gap, cmp.error_estimate, verdict_label(cmp.verdict).c_str());
            rep.records.push_back(
                ComparisonRecord{0, "set0", static_cast<int>(r.measure.mesh.size()), r.capacity, cmp});
        }
        if (!mom_o.out.empty()) emit_csv(rep, mom_o.out);
        return 0;
    }
    if (jsc->parsed()) {
        const SetSpec set = load_set_spec(js_o.set_path);
        const KernelSpec kernel = set.dim == 1 ? KernelSpec::log_kernel(2)
                                               : KernelSpec::riesz(set.dim - 1.0, set.dim + 1);
        const Mesh mesh = build_mesh(set, js_o.n_points, parse_grading(js_o.grading));
        const EquilibriumResult K = solve_equilibrium(mesh, kernel, solver_from(js_o));
        const BallCase bc = ball_case_for(kernel, set.dim);
        const double R0 = matched_ball_radius(K.capacity, set.dim, bc);
        SetSpec ball;
        ball.dim = set.dim;
        if (set.dim == 1)
            ball.parts.push_back(Primitive::interval(-R0, R0));
        else
            ball.parts.push_back(Primitive::ball({0, 0, 0}, R0));
        const EquilibriumResult B =
            solve_equilibrium(build_mesh(ball, js_o.n_points, parse_grading(js_o.grading)), kernel,
                              solver_from(js_o));
        const JGrid grid = jgrid_scan(LiftedPotential::lift(B), LiftedPotential::lift(K), r_max, z_max,
                                      nr, nz, jnodes);
        std::printf("matched_radius = %.10g\n", R0);
        std::printf("min J(v-u) = %.6g at (r, z) = (%.4g, %.4g)\n", grid.min_value, grid.min_r,
                    grid.min_z);
        if (!js_o.out.empty()) emit_jgrid_csv(grid, js_o.out);
        return 0;
    }

    // verify / sweep
    const CampaignSpec spec = load_campaign(campaign_path);
    const CampaignReport rep = run_campaign(spec);
    std::printf("campaign %s: n=%d p=%s, %zu sets, %zu records, aggregate=%s (%.1fs)\n",
                theorem_label(rep.theorem).c_str(), rep.n,
                rep.p_is_log ? "log" : detail::format17(rep.p).c_str(), spec.sets.size(),
                rep.records.size(), verdict_label(rep.aggregate).c_str(), rep.wall_seconds);
    for (const auto& e : rep.set_errors) std::fprintf(stderr, "error: campaign-set: %s\n", e.c_str());
    for (const auto& jg : rep.jgrids)
        std::printf("  jgrid set=%d res=%d min=%.4g tol=%.4g %s\n", jg.set_index, jg.resolution,
                    jg.grid.min_value, jg.tolerance, jg.pass ? "ok" : "BELOW TOLERANCE");
    for (const auto& d : rep.duals)
        std::printf("  dual-path set=%d res=%d direct=%.6g via_J=%.6g rel=%.3g\n", d.set_index,
                    d.resolution, d.dual.direct, d.dual.via_J, d.dual.rel_discrepancy);
    const std::string& out = ver->parsed() ? verify_out : sweep_out;
    if (!out.empty()) emit_csv(rep, out);
    if (ver->parsed() && any_violated(rep)) return 3;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "error: config: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: internal: %s\n", e.what());
        return 1;
    }
}
