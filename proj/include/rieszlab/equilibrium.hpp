#pragma once

// Minimization of the discrete energy w -> w^T M w over the probability
// simplex. Primary method: active-set support pruning with direct solves of
// the bordered KKT system on the current support; fallback: projected
// gradient with Armijo backtracking. The first-order conditions of the
// continuous problem (potential constant on the support, no smaller off it)
// become the discrete KKT conditions checked here.

#include <Eigen/Dense>
#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "rieszlab/geometry.hpp"
#include "rieszlab/kernels.hpp"

namespace rieszlab {

struct DiscreteMeasure {
    Mesh mesh;  // owned copy; meshes are small next to the kernel matrix
    Eigen::VectorXd w;

    void validate() const {
        if (static_cast<std::size_t>(w.size()) != mesh.size())
            throw std::invalid_argument("DiscreteMeasure: weight count != atom count");
        double s = 0.0;
        for (Eigen::Index i = 0; i < w.size(); ++i) {
            if (w[i] < 0) throw std::invalid_argument("DiscreteMeasure: negative weight");
            s += w[i];
        }
        if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("DiscreteMeasure: weights must sum to 1");
    }
};

struct SolverOptions {
    enum class Method { active_set, projected_gradient };
    Method method = Method::active_set;
    double tol = 1e-8;   // KKT residual relative to the energy scale
    int max_iter = 200;  // active-set passes; PGD uses 100 * max_iter steps
    std::vector<double>* pgd_energy_trace = nullptr;  // diagnostic hook
};

struct EquilibriumResult {
    DiscreteMeasure measure;
    double energy = 0.0;
    double capacity = 0.0;
    double kkt_residual = 0.0;  // relative to max(|energy|, 1)
    double active_support_fraction = 0.0;
    int iterations = 0;
    bool converged = false;
    SolverOptions::Method method_used = SolverOptions::Method::active_set;
    std::string diagnostic;
};

inline double discrete_energy(const Eigen::MatrixXd& M, const Eigen::VectorXd& w) {
    if (M.rows() != w.size()) throw std::invalid_argument("discrete_energy: size mismatch");
    return w.dot(M * w);
}

// Cap_p = V^{-1/p} for Riesz p; Cap_0 = exp(-V_log).
inline double capacity_from_energy(double energy, const KernelSpec& k) {
    if (k.is_log()) return std::exp(-energy);
    if (!(energy > 0)) throw std::domain_error("capacity_from_energy: Riesz energy must be positive");
    return std::pow(energy, -1.0 / k.p);
}

namespace detail {

inline double kkt_scale(double energy) { return std::max(std::abs(energy), 1.0); }

// max over support of |(Mw)_i - lambda| and over the complement of
// (lambda - (Mw)_i)_+, normalized by the energy scale.
inline double kkt_residual(const Eigen::MatrixXd& M, const Eigen::VectorXd& w, double& lambda_out) {
    const Eigen::VectorXd g = M * w;
    const double lambda = w.dot(g);
    lambda_out = lambda;
    double res = 0.0;
    for (Eigen::Index i = 0; i < w.size(); ++i) {
        if (w[i] > 0.0)
            res = std::max(res, std::abs(g[i] - lambda));
        else
            res = std::max(res, std::max(0.0, lambda - g[i]));
    }
    return res / kkt_scale(lambda);
}

// Euclidean projection onto the probability simplex (sorting construction).
inline Eigen::VectorXd project_simplex(Eigen::VectorXd v) {
    const Eigen::Index n = v.size();
    std::vector<double> u(v.data(), v.data() + n);
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cssv = 0.0, theta = 0.0;
    int rho = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        cssv += u[i];
        const double t = (cssv - 1.0) / (i + 1);
        if (u[i] - t > 0) {
            rho = static_cast<int>(i) + 1;
            theta = t;
        }
    }
    (void)rho;
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::max(0.0, v[i] - theta);
    return v;
}

inline EquilibriumResult projected_gradient(const Eigen::MatrixXd& M, const Mesh& mesh,
                                            const KernelSpec& kernel, const SolverOptions& opts) {
    const Eigen::Index n = M.rows();
    EquilibriumResult out;
    out.method_used = SolverOptions::Method::projected_gradient;
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / n);
    double energy = w.dot(M * w);
    if (opts.pgd_energy_trace) opts.pgd_energy_trace->push_back(energy);
    double step = 1.0 / std::max(1e-300, 2.0 * M.cwiseAbs().rowwise().sum().maxCoeff());
    const int max_steps = opts.max_iter * 100;
    int it = 0;
    for (; it < max_steps; ++it) {
        const Eigen::VectorXd g = 2.0 * (M * w);
        // Armijo backtracking on the projected step
        double alpha = step * 4.0;
        Eigen::VectorXd w_new;
        double e_new = energy;
        for (int bt = 0; bt < 60; ++bt) {
            w_new = project_simplex(w - alpha * g);
            e_new = w_new.dot(M * w_new);
            const double decrease = g.dot(w - w_new);
            if (e_new <= energy - 1e-4 * decrease + 1e-300) break;
            alpha *= 0.5;
        }
        if (e_new > energy) break;  // no descent direction left at this scale
        step = alpha;
        const double delta = energy - e_new;
        w = w_new;
        energy = e_new;
        if (opts.pgd_energy_trace) opts.pgd_energy_trace->push_back(energy);
        double lambda;
        const double res = kkt_residual(M, w, lambda);
        if (res <= opts.tol) {
            out.converged = true;
            break;
        }
        if (delta < 1e-18 * kkt_scale(energy) && it > 50) break;
    }
    double lambda;
    out.kkt_residual = kkt_residual(M, w, lambda);
    out.converged = out.kkt_residual <= opts.tol;
    if (!out.converged) out.diagnostic = "projected_gradient: KKT residual above tolerance";
    out.energy = energy;
    out.capacity = capacity_from_energy(energy, kernel);
    out.iterations = it + 1;
    out.measure = DiscreteMeasure{mesh, w};
    out.active_support_fraction =
        static_cast<double>((w.array() > 0.0).count()) / static_cast<double>(n);
    return out;
}

inline EquilibriumResult active_set(const Eigen::MatrixXd& M, const Mesh& mesh,
                                    const KernelSpec& kernel, const SolverOptions& opts) {
    const Eigen::Index n = M.rows();
    EquilibriumResult out;
    out.method_used = SolverOptions::Method::active_set;

    std::vector<bool> in_support(n, true);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
    int passes = 0;
    int readds = 0;
    for (; passes < opts.max_iter; ++passes) {
        std::vector<Eigen::Index> idx;
        idx.reserve(n);
        for (Eigen::Index i = 0; i < n; ++i)
            if (in_support[i]) idx.push_back(i);
        const Eigen::Index k = static_cast<Eigen::Index>(idx.size());

        // bordered system [M_SS 1; 1^T 0] [w; -lambda] = [0; 1]
        Eigen::MatrixXd A(k + 1, k + 1);
        for (Eigen::Index r = 0; r < k; ++r)
            for (Eigen::Index c = 0; c < k; ++c) A(r, c) = M(idx[r], idx[c]);
        A.col(k).head(k).setOnes();
        A.row(k).head(k).setOnes();
        A(k, k) = 0.0;
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
        rhs[k] = 1.0;

        Eigen::PartialPivLU<Eigen::MatrixXd> lu(A);
        Eigen::VectorXd sol = lu.solve(rhs);
        sol += lu.solve(rhs - A * sol);  // one refinement step
        if (!sol.allFinite()) return projected_gradient(M, mesh, kernel, opts);

        double min_w = 0.0;
        for (Eigen::Index r = 0; r < k; ++r) min_w = std::min(min_w, sol[r]);
        if (min_w < -1e-14) {
            // drop all nonpositive atoms at once (deterministic, order-free)
            int dropped = 0;
            for (Eigen::Index r = 0; r < k; ++r)
                if (sol[r] <= 0.0) {
                    in_support[idx[r]] = false;
                    ++dropped;
                }
            if (dropped == static_cast<int>(k)) return projected_gradient(M, mesh, kernel, opts);
            continue;
        }

        w.setZero();
        for (Eigen::Index r = 0; r < k; ++r) w[idx[r]] = std::max(0.0, sol[r]);
        w /= w.sum();

        // optimality over the dropped atoms; re-admit violators
        double lambda;
        const double res = kkt_residual(M, w, lambda);
        if (res <= opts.tol) {
            out.converged = true;
            break;
        }
        const Eigen::VectorXd g = M * w;
        bool readded = false;
        if (readds < 40) {
            for (Eigen::Index i = 0; i < n; ++i)
                if (!in_support[i] && g[i] < lambda - opts.tol * kkt_scale(lambda)) {
                    in_support[i] = true;
                    readded = true;
                }
        }
        if (!readded) break;  // on-support residual only; report as is
        ++readds;
    }

    if (w.sum() == 0.0) return projected_gradient(M, mesh, kernel, opts);
    double lambda;
    out.kkt_residual = kkt_residual(M, w, lambda);
    out.converged = out.kkt_residual <= opts.tol;
    if (!out.converged)
        out.diagnostic = "active_set: KKT residual above tolerance after " + std::to_string(passes) +
                         " passes (best iterate returned)";
    out.energy = lambda;
    out.capacity = capacity_from_energy(lambda, kernel);
    out.iterations = passes + 1;
    out.measure = DiscreteMeasure{mesh, w};
    out.active_support_fraction =
        static_cast<double>((w.array() > 0.0).count()) / static_cast<double>(n);
    return out;
}

}  // namespace detail

inline EquilibriumResult solve_equilibrium(const Eigen::MatrixXd& M, const Mesh& mesh,
                                           const KernelSpec& kernel,
                                           const SolverOptions& opts = SolverOptions{}) {
    if (M.rows() != M.cols() || static_cast<std::size_t>(M.rows()) != mesh.size())
        throw std::invalid_argument("solve_equilibrium: matrix/mesh size mismatch");
    if (mesh.size() == 1) {
        // degenerate single-atom problem: capacity finite only as a
        // discretization artifact (a true point has zero capacity)
        EquilibriumResult out;
        out.measure = DiscreteMeasure{mesh, Eigen::VectorXd::Ones(1)};
        out.energy = M(0, 0);
        out.capacity = capacity_from_energy(out.energy, kernel);
        out.converged = true;
        out.active_support_fraction = 1.0;
        out.iterations = 0;
        return out;
    }
    if (opts.method == SolverOptions::Method::projected_gradient)
        return detail::projected_gradient(M, mesh, kernel, opts);
    return detail::active_set(M, mesh, kernel, opts);
}

// Convenience: mesh + kernel -> solved equilibrium.
inline EquilibriumResult solve_equilibrium(const Mesh& mesh, const KernelSpec& kernel,
                                           const SolverOptions& opts = SolverOptions{}) {
    return solve_equilibrium(kernel_matrix(kernel, mesh), mesh, kernel, opts);
}

// Equilibrium potential sum_i w_i k(x, atom_i); when x lands inside an atom's
// own cell the point kernel is replaced by that cell's self-energy.
inline double potential(const EquilibriumResult& result, const KernelSpec& kernel, const Point& x) {
    const Mesh& mesh = result.measure.mesh;
    double u = 0.0;
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        const double d = dist(x, mesh.atoms[i]);
        const double v = d < mesh.cell_radius[i]
                             ? self_energy(kernel, mesh.cell_radius[i], mesh.cell_dim[i])
                             : kernel_of_distance(kernel, d);
        u += result.measure.w[i] * v;
    }
    return u;
}

struct FrostmanReport {
    double max_potential_on_support = 0.0;
    double min_potential_on_support = 0.0;
    double energy = 0.0;
    double max_violation = 0.0;   // max over atoms and probes of (u - V)_+
    double regular_fraction = 0.0;  // fraction of atoms with |u - V| < tolerance * scale
};

// Numerical check of the Frostman bound u <= V with equality on the regular
// part of the set. `tolerance` is measured relative to the energy scale.
inline FrostmanReport frostman_check(const EquilibriumResult& result, const KernelSpec& kernel,
                                     double tolerance, const std::vector<Point>& probes = {}) {
    const Mesh& mesh = result.measure.mesh;
    const double V = result.energy;
    const double scale = kernel.is_log() ? std::max(std::abs(V), 1.0) : std::abs(V);

    FrostmanReport rep;
    rep.energy = V;
    double maxs = -std::numeric_limits<double>::infinity();
    double mins = std::numeric_limits<double>::infinity();
    double viol = 0.0;
    std::size_t regular = 0;
    std::vector<double> u(mesh.size());
    parallel_for(mesh.size(), [&](std::size_t i) { u[i] = potential(result, kernel, mesh.atoms[i]); });
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (result.measure.w[i] > 0) {
            maxs = std::max(maxs, u[i]);
            mins = std::min(mins, u[i]);
        }
        viol = std::max(viol, u[i] - V);
        if (std::abs(u[i] - V) < tolerance * scale) ++regular;
    }
    for (const auto& x : probes) viol = std::max(viol, potential(result, kernel, x) - V);
    rep.max_potential_on_support = maxs;
    rep.min_potential_on_support = mins;
    rep.max_violation = std::max(0.0, viol);
    rep.regular_fraction = static_cast<double>(regular) / static_cast<double>(mesh.size());
    return rep;
}

}  // namespace rieszlab
