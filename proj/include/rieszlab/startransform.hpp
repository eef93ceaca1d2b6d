#pragma once

// The R^{n+1} machinery behind the codimension-one moment theorem: the
// equilibrium potential lifted off the z = 0 slice, the comparison transform
//   (J u)(r, z) = Int_{B^n(r)} u(x, z) dx,
// the degenerate elliptic operator d* = d_rr - ((n-1)/r) d_r + d_zz that
// intertwines J with the ambient Laplacian, the nonnegativity grid scan for
// J(v - u), and the dual-path moment-difference formula
//   a_n ( Psi(R) Int_{B(R)} (v-u) - Int_0^R Psi'(r) Int_{B(r)} (v-u) dr ).

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "rieszlab/closedform.hpp"
#include "rieszlab/equilibrium.hpp"
#include "rieszlab/moments.hpp"
#include "rieszlab/parallel.hpp"

namespace rieszlab {

// fundamental-solution normalization in R^{n+1}
inline double a_n(int n) {
    if (n == 1) return 1.0 / (2.0 * M_PI);
    if (n >= 2) return 1.0 / ((n - 1) * unit_sphere_area(n + 1));
    throw std::invalid_argument("a_n: n must be >= 1");
}

// coefficient of the z-derivative identity d_z u = -b_n z Int |.|^{-(n+1)} d mu
inline double b_n(int n) {
    if (n == 1) return 1.0;
    if (n >= 2) return static_cast<double>(n - 1);
    throw std::invalid_argument("b_n: n must be >= 1");
}

// Equilibrium potential of a set K in R^n, evaluated in R^{n+1}. The kernel is
// Newtonian for the lifted space: Riesz(n-1) when n >= 2, logarithmic when
// n = 1; on the z = 0 slice it coincides with the kernel the measure was
// solved with.
struct LiftedPotential {
    EquilibriumResult source;
    int n = 1;
    KernelSpec kernel;

    static LiftedPotential lift(const EquilibriumResult& result) {
        LiftedPotential lp;
        lp.n = result.measure.mesh.dim;
        if (lp.n > 2)
            throw std::invalid_argument("LiftedPotential: J machinery implemented for n in {1,2}");
        lp.kernel = lp.n == 1 ? KernelSpec::log_kernel(2) : KernelSpec::riesz(lp.n - 1.0, lp.n + 1);
        lp.source = result;
        return lp;
    }

    double circumradius() const {
        double r = 0.0;
        for (const auto& a : source.measure.mesh.atoms) r = std::max(r, dist(a, Point{0, 0, 0}));
        return r;
    }

    // u(x, z). `capped` replaces the point kernel by its value at the cell
    // radius inside each atom's own cell; this regularizes quadrature lines
    // that pass through the slice z = 0 across K.
    double value(const Point& x, double z, bool capped = false) const {
        const Mesh& mesh = source.measure.mesh;
        double u = 0.0;
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            const Point& a = mesh.atoms[i];
            double d2 = z * z;
            for (int k = 0; k < n; ++k) d2 += (x[k] - a[k]) * (x[k] - a[k]);
            double d = std::sqrt(d2);
            if (capped) d = std::max(d, mesh.cell_radius[i]);
            u += source.measure.w[i] * kernel_of_distance(kernel, d);
        }
        return u;
    }

    // analytic d_z u = -b_n z sum_i w_i |(x,z)-(a_i,0)|^{-(n+1)}, z != 0
    double dz(const Point& x, double z) const {
        const Mesh& mesh = source.measure.mesh;
        double s = 0.0;
        for (std::size_t i = 0; i < mesh.size(); ++i) {
            const Point& a = mesh.atoms[i];
            double d2 = z * z;
            for (int k = 0; k < n; ++k) d2 += (x[k] - a[k]) * (x[k] - a[k]);
            s += source.measure.w[i] * std::pow(std::sqrt(d2), -(n + 1.0));
        }
        return -b_n(n) * z * s;
    }
};

// Mean of the potential over the sphere of radius r in R^{n+1}, by an
// equal-weight lattice (midpoint circle rule for n = 1, Fibonacci lattice for
// n = 2). Equals 1/r^{n-1} (resp. log 1/r) once the set fits inside B(r).
inline double spherical_mean(const LiftedPotential& lp, double r, int nodes,
                             bool* inside_warning = nullptr) {
    if (!(r > 0)) throw std::invalid_argument("spherical_mean: r must be positive");
    if (inside_warning) *inside_warning = r <= lp.circumradius();
    double s = 0.0;
    if (lp.n == 1) {
        for (int k = 0; k < nodes; ++k) {
            const double th = 2.0 * M_PI * (k + 0.5) / nodes;
            s += lp.value(Point{r * std::cos(th), 0, 0}, r * std::sin(th));
        }
    } else {
        for (const auto& u : fibonacci_sphere(nodes))
            s += lp.value(Point{r * u[0], r * u[1], 0}, r * u[2]);
    }
    return s / nodes;
}

namespace detail {

// J of a plain callable g(x, z) over B^n(r): Gauss-Legendre on the segment for
// n = 1, polar product rule (Gauss-Legendre radial x midpoint angular) for
// n = 2.
inline double J_of_function(const std::function<double(const Point&, double)>& g, int n, double r,
                            double z, int nodes) {
    if (!(r > 0)) return 0.0;
    if (n == 1) {
        const QuadRule& q = gauss_legendre(nodes);
        double s = 0.0;
        for (int i = 0; i < nodes; ++i) s += q.w[i] * g(Point{r * q.x[i], 0, 0}, z);
        return s * r;
    }
    const QuadRule& q = gauss_legendre(nodes);
    const int nth = std::max(16, nodes / 2);
    double s = 0.0;
    for (int i = 0; i < nodes; ++i) {
        const double rs = 0.5 * r * (q.x[i] + 1.0);
        double ring = 0.0;
        for (int k = 0; k < nth; ++k) {
            const double th = 2.0 * M_PI * (k + 0.5) / nth;
            ring += g(Point{rs * std::cos(th), rs * std::sin(th), 0}, z);
        }
        s += q.w[i] * rs * ring * (2.0 * M_PI / nth);
    }
    return s * 0.5 * r;
}

}  // namespace detail

// J(v - u)(r, z). Node count doubles on the slice z = 0, where the integrand
// has a mildly singular derivative across K.
inline double J_value(const LiftedPotential& v, const LiftedPotential& u, double r, double z,
                      int quad_nodes = 64) {
    if (v.n != u.n) throw std::invalid_argument("J_value: potentials live over different n");
    const int nodes = (z == 0.0) ? 2 * quad_nodes : quad_nodes;
    return detail::J_of_function(
        [&](const Point& x, double zz) { return v.value(x, zz, true) - u.value(x, zz, true); }, v.n, r,
        z, nodes);
}

struct JGrid {
    std::vector<double> r_nodes;  // ascending, starting at 0
    std::vector<double> z_nodes;  // ascending, starting at 0
    std::vector<double> values;   // row-major [ir * nz + iz]
    double min_value = 0.0;
    double min_r = 0.0, min_z = 0.0;

    double at(std::size_t ir, std::size_t iz) const { return values[ir * z_nodes.size() + iz]; }
};

// Sampled nonnegativity scan of J(v - u) over [0, r_max] x [0, z_max]
// (z >= 0 suffices: both potentials are even in z).
inline JGrid jgrid_scan(const LiftedPotential& v, const LiftedPotential& u, double r_max, double z_max,
                        int nr, int nz, int quad_nodes = 64) {
    if (nr < 2 || nz < 2) throw std::invalid_argument("jgrid_scan: need nr, nz >= 2");
    JGrid g;
    g.r_nodes.resize(nr);
    g.z_nodes.resize(nz);
    for (int i = 0; i < nr; ++i) g.r_nodes[i] = r_max * i / static_cast<double>(nr - 1);
    for (int j = 0; j < nz; ++j) g.z_nodes[j] = z_max * j / static_cast<double>(nz - 1);
    g.values.assign(static_cast<std::size_t>(nr) * nz, 0.0);
    parallel_for(static_cast<std::size_t>(nr) * nz, [&](std::size_t idx) {
        const int i = static_cast<int>(idx / nz), j = static_cast<int>(idx % nz);
        g.values[idx] = J_value(v, u, g.r_nodes[i], g.z_nodes[j], quad_nodes);
    });
    g.min_value = std::numeric_limits<double>::infinity();
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nz; ++j)
            if (g.at(i, j) < g.min_value) {
                g.min_value = g.at(i, j);
                g.min_r = g.r_nodes[i];
                g.min_z = g.z_nodes[j];
            }
    return g;
}

// Uniform (r, z) lattice samples of a function w(r, z).
struct GridFn {
    double r0 = 0.0, z0 = 0.0;
    double hr = 0.0, hz = 0.0;
    int nr = 0, nz = 0;
    std::vector<double> values;  // row-major [ir * nz + iz]

    double at(int i, int j) const { return values[static_cast<std::size_t>(i) * nz + j]; }
    double& at(int i, int j) { return values[static_cast<std::size_t>(i) * nz + j]; }
    double r_of(int i) const { return r0 + i * hr; }
};

// Centered second-order differences of d* w = w_rr - ((n-1)/r) w_r + w_zz.
// Boundary entries are NaN; interior lattice points require r > 0.
inline GridFn delta_star_apply(const GridFn& w, int n) {
    GridFn out = w;
    std::fill(out.values.begin(), out.values.end(), std::numeric_limits<double>::quiet_NaN());
    for (int i = 1; i + 1 < w.nr; ++i) {
        const double r = w.r_of(i);
        if (!(r > 0)) continue;
        for (int j = 1; j + 1 < w.nz; ++j) {
            const double wrr = (w.at(i + 1, j) - 2.0 * w.at(i, j) + w.at(i - 1, j)) / (w.hr * w.hr);
            const double wr = (w.at(i + 1, j) - w.at(i - 1, j)) / (2.0 * w.hr);
            const double wzz = (w.at(i, j + 1) - 2.0 * w.at(i, j) + w.at(i, j - 1)) / (w.hz * w.hz);
            out.at(i, j) = wrr - (n - 1.0) / r * wr + wzz;
        }
    }
    return out;
}

// Defect of the commutation relation d* J = J Delta on a smooth test field:
// max over interior lattice nodes of |d*(J f) - J(Delta f)|. Decays at the
// O(h^2) truncation rate of the centered differences.
inline double commutation_defect(const std::function<double(const Point&, double)>& f,
                                 const std::function<double(const Point&, double)>& laplacian_f, int n,
                                 double r0, double z0, int nr, int nz, double h, int quad_nodes = 32) {
    GridFn Jf;
    Jf.r0 = r0;
    Jf.z0 = z0;
    Jf.hr = Jf.hz = h;
    Jf.nr = nr;
    Jf.nz = nz;
    Jf.values.resize(static_cast<std::size_t>(nr) * nz);
    GridFn JDf = Jf;
    for (int i = 0; i < nr; ++i)
        for (int j = 0; j < nz; ++j) {
            const double r = r0 + i * h, z = z0 + j * h;
            Jf.at(i, j) = detail::J_of_function(f, n, r, z, quad_nodes);
            JDf.at(i, j) = detail::J_of_function(laplacian_f, n, r, z, quad_nodes);
        }
    const GridFn lhs = delta_star_apply(Jf, n);
    double defect = 0.0;
    for (int i = 1; i + 1 < nr; ++i)
        for (int j = 1; j + 1 < nz; ++j)
            if (std::isfinite(lhs.at(i, j)))
                defect = std::max(defect, std::abs(lhs.at(i, j) - JDf.at(i, j)));
    return defect;
}

// Psi(r) = Phi''(r) + (n/r) Phi'(r), the R^{n+1} Laplacian of Phi(|x|).
// Phi = r^q gives q(q+n-1) r^{q-2}; Phi = log r gives (n-1) r^{-2}.
inline double psi_value(const MomentOrder& phi, int n, double r) {
    if (phi.is_log) return (n - 1.0) / (r * r);
    return phi.q * (phi.q + n - 1.0) * std::pow(r, phi.q - 2.0);
}

inline double psi_derivative(const MomentOrder& phi, int n, double r) {
    if (phi.is_log) return -2.0 * (n - 1.0) / (r * r * r);
    return phi.q * (phi.q + n - 1.0) * (phi.q - 2.0) * std::pow(r, phi.q - 3.0);
}

struct MomentDiffDual {
    double direct = 0.0;  // moment gap via module `moments` closed forms
    double via_J = 0.0;   // the Psi(R) / Psi'(r) evaluation
    double a_n_used = 0.0;
    double rel_discrepancy = 0.0;
    std::optional<double> simplified_q2;  // 2(n+1) a_n Int_{B(R)} (v-u), when q = 2
};

struct MomentDiffOptions {
    int slice_nodes = 96;   // z-quadrature of the slice formula
    int j_nodes = 64;       // per radial line inside J
    double outer_tol = 1e-7;  // adaptive Simpson tolerance for the Psi' integral
};

// Int_{B^{n+1}(r)} (v - u) dxhat via the slice formula
//   Int = Int_{-r}^{r} J(v-u)(sqrt(r^2 - z^2), z) dz.
inline double ball_integral_slices(const LiftedPotential& v, const LiftedPotential& u, double r,
                                   const MomentDiffOptions& opt) {
    if (!(r > 0)) return 0.0;
    const QuadRule& q = gauss_legendre(opt.slice_nodes);
    double s = 0.0;
    for (int i = 0; i < opt.slice_nodes; ++i) {
        const double z = 0.5 * r * (q.x[i] + 1.0);  // [0, r]; integrand is even in z
        const double rr = std::sqrt(std::max(0.0, r * r - z * z));
        s += q.w[i] * J_value(v, u, rr, z, opt.j_nodes);
    }
    return 2.0 * s * 0.5 * r;
}

// Dual-path evaluation of the moment difference between K and the matched
// ball. `ball_radius` is the radius of the solved comparison ball; R must
// contain both sets and Phi must satisfy the formula's hypotheses (power
// 0 < q <= 2, or log with n >= 2).
inline MomentDiffDual moment_difference_via_J(const EquilibriumResult& K,
                                              const EquilibriumResult& ball, double ball_radius,
                                              const MomentOrder& phi, double R,
                                              const MomentDiffOptions& opt = MomentDiffOptions{}) {
    const int n = K.measure.mesh.dim;
    if (ball.measure.mesh.dim != n)
        throw std::invalid_argument("moment_difference_via_J: dimension mismatch");
    if (!phi.is_log && !(phi.q > 0.0 && phi.q <= 2.0))
        throw std::domain_error("moment_difference_via_J: power moments need 0 < q <= 2");
    if (phi.is_log && n < 2)
        throw std::domain_error("moment_difference_via_J: log moments via J need n >= 2");

    const LiftedPotential u = LiftedPotential::lift(K);
    const LiftedPotential v = LiftedPotential::lift(ball);
    if (!(R > u.circumradius()) || !(R > v.circumradius()))
        throw std::invalid_argument("moment_difference_via_J: R must contain both sets");

    MomentDiffDual out;
    out.a_n_used = a_n(n);

    const BallCase c = n == 1 ? BallCase::CodimOneCase : ball_case_for(u.kernel, n);
    out.direct = moment(K.measure, phi) - ball_side_moment(n, c, phi, ball_radius);

    const double I_R = ball_integral_slices(v, u, R, opt);
    double outer = 0.0;
    const bool psi_constant = !phi.is_log && std::abs(phi.q - 2.0) < 1e-14;
    if (!psi_constant) {
        const double eps = 1e-6 * R;
        outer = adaptive_simpson(
            [&](double r) { return psi_derivative(phi, n, r) * ball_integral_slices(v, u, r, opt); },
            eps, R, opt.outer_tol, 24);
    }
    out.via_J = out.a_n_used * (psi_value(phi, n, R) * I_R - outer);
    if (!phi.is_log && std::abs(phi.q - 2.0) < 1e-14)
        out.simplified_q2 = 2.0 * (n + 1) * out.a_n_used * I_R;

    const double floor = 1e-6 * std::max(1.0, std::abs(moment(K.measure, phi)));
    out.rel_discrepancy = std::abs(out.direct - out.via_J) / std::max(std::abs(out.direct), floor);
    return out;
}

}  // namespace rieszlab
