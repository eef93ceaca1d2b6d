#pragma once

// End-to-end theorem verification campaigns: mesh -> solve -> capacity-match
// -> moments -> verdicts, with the J-grid scan and dual-path moment difference
// for the codimension-one theorem, threshold scans for 0 < p < n-2, and the
// exploratory Riesz sweep where the ball side is solved numerically.

#include <chrono>
#include <cmath>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rieszlab/moments.hpp"
#include "rieszlab/startransform.hpp"

namespace rieszlab {

enum class Theorem { T1_newton, T2_codim_one, P4_threshold, C3_sweep };

inline std::string theorem_label(Theorem t) {
    switch (t) {
        case Theorem::T1_newton: return "T1_newton";
        case Theorem::T2_codim_one: return "T2_codim_one";
        case Theorem::P4_threshold: return "P4_threshold";
        case Theorem::C3_sweep: return "C3_sweep";
    }
    return "?";
}

struct NamedSet {
    std::string name;
    SetSpec spec;
};

struct JScanOptions {
    bool enabled = true;
    double r_max = 6.0, z_max = 4.0;
    int nr = 60, nz = 40;
    int quad_nodes = 64;
};

struct CampaignSpec {
    Theorem theorem = Theorem::T2_codim_one;
    int n = 1;
    bool p_is_log = true;
    double p = 0.0;
    std::vector<NamedSet> sets;
    std::vector<MomentOrder> q_values;
    std::vector<int> resolutions;  // ascending; two or more enable Richardson error terms
    SolverOptions solver;
    Grading grading = Grading::endpoint_refined;
    JScanOptions jscan;

    KernelSpec kernel() const {
        if (p_is_log) return KernelSpec::log_kernel(n == 1 ? 2 : n);
        // codim-one kernels measure distances in the lifted space R^{n+1}
        if (theorem == Theorem::T2_codim_one) return KernelSpec::riesz(p, n + 1);
        return KernelSpec::riesz(p, n);
    }

    void validate() const {
        if (sets.empty()) throw std::invalid_argument("campaign: sets must be nonempty");
        if (q_values.empty() && theorem != Theorem::P4_threshold)
            throw std::invalid_argument("campaign: q_values must be nonempty");
        if (resolutions.empty()) throw std::invalid_argument("campaign: resolutions must be nonempty");
        for (std::size_t i = 1; i < resolutions.size(); ++i)
            if (resolutions[i] <= resolutions[i - 1])
                throw std::invalid_argument("campaign: resolutions must be ascending");
        for (const auto& s : sets) {
            if (s.spec.dim != n) throw std::invalid_argument("campaign: set dimension != campaign n");
            s.spec.validate();
        }
        const double eps = 1e-12;
        switch (theorem) {
            case Theorem::T1_newton:
                if (!((n >= 3 && !p_is_log && std::abs(p - (n - 2)) < eps) || (n == 2 && p_is_log)))
                    throw std::invalid_argument("campaign: T1 requires p = n-2 (n >= 3) or log (n = 2)");
                break;
            case Theorem::T2_codim_one:
                if (!((n == 1 && p_is_log) || (n >= 2 && !p_is_log && std::abs(p - (n - 1)) < eps)))
                    throw std::invalid_argument("campaign: T2 requires p = n-1 (n >= 2) or log (n = 1)");
                break;
            case Theorem::P4_threshold:
                if (!(n >= 3 && !p_is_log && p > 0 && p < n - 2))
                    throw std::invalid_argument("campaign: P4 requires n >= 3 and 0 < p < n-2");
                for (std::size_t i = 0; i < q_values.size(); ++i)
                    if (q_values[i].is_log || (i > 0 && !(q_values[i].q > q_values[i - 1].q)))
                        throw std::invalid_argument("campaign: P4 q_values must be ascending powers");
                break;
            case Theorem::C3_sweep:
                if (n >= 2) {
                    if (p_is_log || !(p > n - 2 && p < n))
                        throw std::invalid_argument("campaign: C3 requires n-2 < p < n");
                } else if (!p_is_log && !(p > 0 && p < 1)) {
                    throw std::invalid_argument("campaign: C3 with n = 1 requires log or 0 < p < 1");
                }
                break;
        }
    }
};

struct ComparisonRecord {
    int set_index = 0;
    std::string set_name;
    int resolution = 0;
    double capacity_K = 0.0;
    MomentComparison cmp;
};

struct JGridRecord {
    int set_index = 0;
    int resolution = 0;
    JGrid grid;
    double tolerance = 0.0;  // 3 x combined quadrature + solver error
    bool pass = false;
};

struct DualPathRecord {
    int set_index = 0;
    int resolution = 0;
    MomentDiffDual dual;
};

struct ThresholdRecord {
    int set_index = 0;
    int resolution = 0;
    std::optional<double> first_holds_q;
    bool persistent = true;
};

struct CampaignReport {
    Theorem theorem = Theorem::T2_codim_one;
    int n = 1;
    bool p_is_log = true;
    double p = 0.0;
    std::vector<int> resolutions;
    std::vector<ComparisonRecord> records;
    std::vector<JGridRecord> jgrids;
    std::vector<DualPathRecord> duals;
    std::vector<ThresholdRecord> thresholds;
    std::vector<std::string> set_errors;  // per-set failure notes; campaign continues
    Verdict aggregate = Verdict::holds;
    double wall_seconds = 0.0;
};

namespace detail {

struct NumericBallSide {
    double cap_unit = 0.0;
    DiscreteMeasure unit_measure;
};

// C3 ball side: no closed form for general p, so the unit ball is solved once
// per resolution and rescaled exactly (Cap(sB) = s Cap(B), moments scale by
// s^q). Root-finding for the matched radius is unnecessary by linearity.
inline NumericBallSide solve_unit_ball(const KernelSpec& kernel, int n, int resolution,
                                       Grading grading, const SolverOptions& solver) {
    SetSpec s;
    s.dim = n;
    if (n == 1)
        s.parts.push_back(Primitive::interval(-1.0, 1.0));
    else
        s.parts.push_back(Primitive::ball({0, 0, 0}, 1.0));
    const Mesh mesh = build_mesh(s, resolution, grading);
    const EquilibriumResult res = solve_equilibrium(mesh, kernel, solver);
    return NumericBallSide{res.capacity, res.measure};
}

inline SetSpec matched_ball_set(int n, double R) {
    SetSpec s;
    s.dim = n;
    if (n == 1)
        s.parts.push_back(Primitive::interval(-R, R));
    else
        s.parts.push_back(Primitive::ball({0, 0, 0}, R));
    return s;
}

// n-volume of the radius-rho ball, the scale multiplying a constant potential
// mismatch inside J(v-u).
inline double slice_ball_volume(int n, double rho) {
    return n == 1 ? 2.0 * rho : M_PI * rho * rho;
}

}  // namespace detail

inline CampaignReport run_campaign(const CampaignSpec& spec) {
    spec.validate();
    const auto t0 = std::chrono::steady_clock::now();
    const KernelSpec kernel = spec.kernel();

    CampaignReport rep;
    rep.theorem = spec.theorem;
    rep.n = spec.n;
    rep.p_is_log = spec.p_is_log;
    rep.p = spec.p;
    rep.resolutions = spec.resolutions;

    // C3 ball side, cached per resolution
    std::map<int, detail::NumericBallSide> c3_ball;
    if (spec.theorem == Theorem::C3_sweep)
        for (int res : spec.resolutions)
            c3_ball.emplace(res, detail::solve_unit_ball(kernel, spec.n, res, spec.grading, spec.solver));

    for (std::size_t si = 0; si < spec.sets.size(); ++si) {
        const NamedSet& set = spec.sets[si];
        std::vector<EquilibriumResult> solved;
        try {
            for (int res : spec.resolutions) {
                const Mesh mesh = build_mesh(set.spec, res, spec.grading);
                solved.push_back(solve_equilibrium(mesh, kernel, spec.solver));
            }
        } catch (const std::exception& e) {
            rep.set_errors.push_back(set.name + ": " + e.what());
            continue;
        }

        // per-(resolution, q) comparisons
        std::vector<std::vector<MomentComparison>> cmps(spec.resolutions.size());
        for (std::size_t ri = 0; ri < spec.resolutions.size(); ++ri) {
            const EquilibriumResult& K = solved[ri];
            if (spec.theorem == Theorem::P4_threshold) {
                std::vector<double> grid;
                for (const auto& q : spec.q_values) grid.push_back(q.q);
                ThresholdScanReport scan = threshold_scan(K, kernel, grid, spec.grading);
                cmps[ri] = scan.comparisons;
                rep.thresholds.push_back(ThresholdRecord{static_cast<int>(si), spec.resolutions[ri],
                                                         scan.first_holds_q, scan.persistent});
            } else if (spec.theorem == Theorem::C3_sweep) {
                const auto& ball = c3_ball.at(spec.resolutions[ri]);
                const double R = K.capacity / ball.cap_unit;
                for (const auto& q : spec.q_values) {
                    MomentComparison cmp;
                    cmp.q = q;
                    cmp.matched_radius = R;
                    cmp.moment_K = moment(K.measure, q);
                    cmp.moment_ball = q.is_log
                                          ? std::log(R) + log_moment(ball.unit_measure)
                                          : std::pow(R, q.q) * moment(ball.unit_measure, q.q);
                    cmp.gap = cmp.moment_K - cmp.moment_ball;
                    // matched numerically at this resolution: the K = B gap is
                    // exactly zero by scale equivariance, so only the
                    // refinement term below contributes
                    cmp.error_estimate = 1e-10 * std::max(1.0, std::abs(cmp.moment_K));
                    cmp.verdict = detail::verdict_from_gap(cmp.gap, cmp.error_estimate, false);
                    cmps[ri].push_back(cmp);
                }
            } else {
                for (const auto& q : spec.q_values) {
                    if (!q.is_log && q.q < 0 && spec.theorem == Theorem::T1_newton)
                        cmps[ri].push_back(
                            reversed_and_negative_moment_checks(K, kernel, q.q, spec.grading));
                    else
                        cmps[ri].push_back(compare_moments(K, kernel, q, spec.grading));
                }
            }
        }

        // cross-resolution Richardson terms (coarse records get the same bump)
        for (std::size_t qi = 0; qi < cmps[0].size(); ++qi)
            for (std::size_t ri = 0; ri < cmps.size(); ++ri) {
                const std::size_t other = ri + 1 < cmps.size() ? ri + 1 : (ri > 0 ? ri - 1 : ri);
                if (other != ri) add_refinement_error(cmps[ri][qi], cmps[other][qi]);
            }

        for (std::size_t ri = 0; ri < cmps.size(); ++ri)
            for (auto& cmp : cmps[ri])
                rep.records.push_back(ComparisonRecord{static_cast<int>(si), set.name,
                                                       spec.resolutions[ri], solved[ri].capacity, cmp});

        // T2 extras at the finest resolution: J(v-u) grid scan and the
        // dual-path moment difference at q = 2
        if (spec.theorem == Theorem::T2_codim_one && spec.jscan.enabled && spec.n <= 2) {
            try {
                const std::size_t fi = spec.resolutions.size() - 1;
                const EquilibriumResult& K = solved[fi];
                const BallCase bc = ball_case_for(kernel, spec.n);
                const double R0 = matched_ball_radius(K.capacity, spec.n, bc);
                const Mesh bmesh = build_mesh(detail::matched_ball_set(spec.n, R0),
                                              spec.resolutions[fi], spec.grading);
                const EquilibriumResult B = solve_equilibrium(bmesh, kernel, spec.solver);
                const LiftedPotential u = LiftedPotential::lift(K);
                const LiftedPotential v = LiftedPotential::lift(B);

                JGridRecord jg;
                jg.set_index = static_cast<int>(si);
                jg.resolution = spec.resolutions[fi];
                jg.grid = jgrid_scan(v, u, spec.jscan.r_max, spec.jscan.z_max, spec.jscan.nr,
                                     spec.jscan.nz, spec.jscan.quad_nodes);
                const double mismatch = std::abs(K.energy - B.energy) *
                                        detail::slice_ball_volume(spec.n, R0);
                const double quad_floor =
                    1e-7 * (1.0 + detail::slice_ball_volume(spec.n, spec.jscan.r_max));
                jg.tolerance = 3.0 * (mismatch + quad_floor);
                jg.pass = jg.grid.min_value >= -jg.tolerance;
                rep.jgrids.push_back(std::move(jg));

                DualPathRecord dp;
                dp.set_index = static_cast<int>(si);
                dp.resolution = spec.resolutions[fi];
                const double Rbig = 2.0 * std::max(LiftedPotential::lift(K).circumradius(), R0);
                dp.dual = moment_difference_via_J(K, B, R0, MomentOrder::power(2.0), Rbig);
                rep.duals.push_back(std::move(dp));
            } catch (const std::exception& e) {
                rep.set_errors.push_back(set.name + " (J extras): " + e.what());
            }
        }
    }

    // aggregate: violated only when some (set, q) is violated at every resolution
    bool any_margin = false, any_inconclusive = false, any_violated_everywhere = false;
    for (std::size_t si = 0; si < spec.sets.size(); ++si) {
        const std::size_t nq = spec.q_values.size();
        for (std::size_t qi = 0; qi < nq; ++qi) {
            int violated_count = 0, present = 0;
            for (const auto& r : rep.records)
                if (r.set_index == static_cast<int>(si) && r.cmp.q == spec.q_values[qi]) {
                    ++present;
                    if (r.cmp.verdict == Verdict::violated) ++violated_count;
                    if (r.cmp.verdict == Verdict::holds_with_margin) any_margin = true;
                    if (r.cmp.verdict == Verdict::inconclusive) any_inconclusive = true;
                }
            if (present > 0 && violated_count == present) any_violated_everywhere = true;
        }
    }
    rep.aggregate = any_violated_everywhere
                        ? Verdict::violated
                        : (any_inconclusive ? Verdict::inconclusive
                                            : (any_margin ? Verdict::holds_with_margin : Verdict::holds));

    rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

struct EqualityProbeReport {
    MomentComparison comparison;
    double extra_mass = 0.0;  // total solved weight on the isolated atoms
    bool passed = false;
};

// Discrete surrogate for the equality case K = B + (inner-capacity-zero Z):
// isolated extra atoms are given near-degenerate cells (huge self-energy, the
// discrete stand-in for capacity zero) and should receive essentially no mass,
// leaving the moment gap within the error band. A heuristic, not a
// capacity-zero test. With Riesz kernels the attracted mass scales like
// eps^p and the 1e-3 bound is met easily; with the logarithmic kernel it only
// decays like 1/log(1/eps), bottoming out near 8e-3 in double precision.
inline EqualityProbeReport equality_case_probe(const SetSpec& ball, const std::vector<Point>& extra_atoms,
                                               const KernelSpec& kernel, int resolution,
                                               MomentOrder q = MomentOrder::power(2.0),
                                               Grading grading = Grading::endpoint_refined) {
    Mesh mesh = build_mesh(ball, resolution, grading);
    const std::size_t base = mesh.size();
    if (!extra_atoms.empty()) {
        const double eps_cell = kernel.is_log() ? 1e-300 : 1e-12;
        std::vector<double> w_sorted = mesh.weights;
        std::nth_element(w_sorted.begin(), w_sorted.begin() + w_sorted.size() / 2, w_sorted.end());
        const int cdim = mesh.cell_dim.front();
        for (const auto& x : extra_atoms) {
            mesh.atoms.push_back(x);
            mesh.weights.push_back(w_sorted[w_sorted.size() / 2]);
            mesh.cell_radius.push_back(eps_cell);
            mesh.cell_dim.push_back(cdim);
        }
        const auto nn = detail::nn_distances(mesh.atoms);
        for (std::size_t i = 0; i < mesh.size(); ++i)
            mesh.cell_radius[i] = std::min(mesh.cell_radius[i], nn[i]);
        mesh.validate();
    }

    const EquilibriumResult res = solve_equilibrium(mesh, kernel);
    EqualityProbeReport rep;
    rep.comparison = compare_moments(res, kernel, q, grading);
    for (std::size_t i = base; i < mesh.size(); ++i) rep.extra_mass += res.measure.w[i];
    rep.passed = rep.extra_mass < 1e-3 && rep.comparison.verdict == Verdict::holds;
    return rep;
}

}  // namespace rieszlab
