#include <catch_amalgamated.hpp>

#include "rieszlab/startransform.hpp"

using namespace rieszlab;

namespace {

SetSpec interval_spec(double a, double b) {
    SetSpec s;
    s.dim = 1;
    s.parts.push_back(Primitive::interval(a, b));
    return s;
}
SetSpec two_intervals() {
    SetSpec s;
    s.dim = 1;
    s.parts.push_back(Primitive::interval(-2, -1));
    s.parts.push_back(Primitive::interval(1, 2));
    return s;
}
SetSpec disk_spec(double R) {
    SetSpec s;
    s.dim = 2;
    s.parts.push_back(Primitive::ball({0, 0, 0}, R));
    return s;
}

EquilibriumResult point_mass_result(int dim, const KernelSpec& k) {
    Mesh m;
    m.dim = dim;
    m.intrinsic_dim = dim;
    m.atoms = {{0, 0, 0}};
    m.weights = {1};
    m.cell_radius = {1e-3};
    m.cell_dim = {dim};
    return solve_equilibrium(kernel_matrix(k, m), m, k);
}

struct T2Setup {
    EquilibriumResult K, B;
    double R0;
};

const T2Setup& two_interval_setup() {
    static T2Setup s = [] {
        const KernelSpec k = KernelSpec::log_kernel(2);
        T2Setup t;
        t.K = solve_equilibrium(build_mesh(two_intervals(), 800), k);
        t.R0 = matched_ball_radius(t.K.capacity, 1, BallCase::CodimOneCase);
        t.B = solve_equilibrium(build_mesh(interval_spec(-t.R0, t.R0), 800), k);
        return t;
    }();
    return s;
}

}  // namespace

TEST_CASE("a_n and b_n constants") {
    CHECK(a_n(1) == Catch::Approx(1.0 / (2 * M_PI)));
    CHECK(a_n(2) == Catch::Approx(1.0 / (1.0 * 4.0 * M_PI)));  // |S^2| = 4 pi
    CHECK(b_n(1) == 1.0);
    CHECK(b_n(2) == 1.0);
    CHECK(b_n(3) == 2.0);
}

TEST_CASE("lifted potential of a single atom") {
    const EquilibriumResult p2 = point_mass_result(2, KernelSpec::riesz(1.0, 3));
    const LiftedPotential lp2 = LiftedPotential::lift(p2);
    for (double z : {0.5, 2.0, -3.0})
        CHECK(lp2.value({0, 0, 0}, z) == Catch::Approx(1.0 / std::abs(z)));

    const EquilibriumResult p1 = point_mass_result(1, KernelSpec::log_kernel(2));
    const LiftedPotential lp1 = LiftedPotential::lift(p1);
    for (double r : {0.5, 2.0})
        CHECK(lp1.value({r, 0, 0}, 0.0) == Catch::Approx(std::log(1.0 / r)));
}

TEST_CASE("spherical means reproduce the radial harmonics") {
    const KernelSpec k1 = KernelSpec::log_kernel(2);
    const EquilibriumResult K = solve_equilibrium(build_mesh(interval_spec(-1, 1), 500), k1);
    const LiftedPotential u = LiftedPotential::lift(K);
    bool warned = false;
    const double m5 = spherical_mean(u, 5.0, 2048, &warned);
    CHECK_FALSE(warned);
    CHECK(std::abs(m5 - std::log(1.0 / 5.0)) < 0.01 * std::abs(std::log(5.0)));

    const KernelSpec k2 = KernelSpec::riesz(1.0, 3);
    const EquilibriumResult D = solve_equilibrium(build_mesh(disk_spec(1.0), 600), k2);
    const LiftedPotential v = LiftedPotential::lift(D);
    const double m10 = spherical_mean(v, 10.0, 2000);
    CHECK(std::abs(m10 - 0.1) < 0.005 * 0.1);

    // stability in the node count
    const double m10b = spherical_mean(v, 10.0, 4000);
    CHECK(std::abs(m10 - m10b) < 1e-6);

    spherical_mean(u, 0.5, 128, &warned);
    CHECK(warned);  // inside the circumradius
}

TEST_CASE("J at r = 0 vanishes and J(v - v) is identically zero") {
    const T2Setup& s = two_interval_setup();
    const LiftedPotential u = LiftedPotential::lift(s.K);
    const LiftedPotential v = LiftedPotential::lift(s.B);
    CHECK(J_value(v, u, 0.0, 1.0) == 0.0);
    for (double r : {0.5, 2.0})
        for (double z : {0.0, 1.0}) CHECK(J_value(u, u, r, z) == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("J quadrature on an analytic field") {
    // u = x^2 + z^2 (n = 1): Ju = 2 r^3 / 3 + 2 r z^2
    auto f = [](const Point& x, double z) { return x[0] * x[0] + z * z; };
    for (double r : {0.5, 1.0, 2.5})
        for (double z : {0.0, 0.7, 1.5})
            CHECK(detail::J_of_function(f, 1, r, z, 32) ==
                  Catch::Approx(2 * r * r * r / 3 + 2 * r * z * z).epsilon(1e-12));
}

TEST_CASE("jgrid scan: ball against itself is flat zero") {
    const T2Setup& s = two_interval_setup();
    const LiftedPotential v = LiftedPotential::lift(s.B);
    const JGrid g = jgrid_scan(v, v, 4.0, 3.0, 10, 8, 32);
    CHECK(g.min_value == Catch::Approx(0.0).margin(1e-13));
    for (std::size_t j = 0; j < g.z_nodes.size(); ++j) CHECK(g.at(0, j) == 0.0);  // r = 0 column
}

TEST_CASE("jgrid scan: two intervals against the matched interval stays nonnegative") {
    const T2Setup& s = two_interval_setup();
    const LiftedPotential u = LiftedPotential::lift(s.K);
    const LiftedPotential v = LiftedPotential::lift(s.B);
    const JGrid g = jgrid_scan(v, u, 6.0, 4.0, 30, 20, 64);
    const double mismatch = std::abs(s.K.energy - s.B.energy) * 2.0 * s.R0;
    CHECK(g.min_value >= -3.0 * (mismatch + 1e-6));
}

TEST_CASE("evenness in z is exact by construction") {
    const T2Setup& s = two_interval_setup();
    const LiftedPotential u = LiftedPotential::lift(s.K);
    const LiftedPotential v = LiftedPotential::lift(s.B);
    for (double r : {0.5, 2.0})
        for (double z : {0.25, 1.5}) CHECK(J_value(v, u, r, z) == J_value(v, u, r, -z));
}

TEST_CASE("decay: max_r |J(v-u)| behaves like O(1/z)") {
    const T2Setup& s = two_interval_setup();
    const LiftedPotential u = LiftedPotential::lift(s.K);
    const LiftedPotential v = LiftedPotential::lift(s.B);
    auto max_over_r = [&](double z) {
        double m = 0.0;
        for (double r = 0.25; r <= 6.0; r += 0.25) m = std::max(m, std::abs(J_value(v, u, r, z, 48)));
        return m;
    };
    const double m8 = max_over_r(8.0), m16 = max_over_r(16.0);
    CHECK(m16 / m8 < 0.65);  // consistent with 1/z decay
}

TEST_CASE("d_z u is negative for z > 0 and matches finite differences") {
    const T2Setup& s = two_interval_setup();
    const LiftedPotential u = LiftedPotential::lift(s.K);
    for (double x : {-1.5, 0.0, 2.0})
        for (double z : {0.3, 1.0, 4.0}) {
            const double dz = u.dz({x, 0, 0}, z);
            CHECK(dz < 0.0);
            const double h = 1e-5;
            const double fd = (u.value({x, 0, 0}, z + h) - u.value({x, 0, 0}, z - h)) / (2 * h);
            CHECK(dz == Catch::Approx(fd).epsilon(1e-5));
        }
}

TEST_CASE("delta_star on analytic grids") {
    GridFn g;
    g.r0 = 0.5;
    g.z0 = 0.2;
    g.hr = g.hz = 0.05;
    g.nr = g.nz = 12;
    g.values.resize(144);

    // constant field -> 0
    std::fill(g.values.begin(), g.values.end(), 3.7);
    GridFn out = delta_star_apply(g, 1);
    for (int i = 1; i + 1 < g.nr; ++i)
        for (int j = 1; j + 1 < g.nz; ++j) CHECK(out.at(i, j) == Catch::Approx(0.0).margin(1e-10));

    // w = r^2, n = 1: d* w = 2
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nz; ++j) g.at(i, j) = g.r_of(i) * g.r_of(i);
    out = delta_star_apply(g, 1);
    for (int i = 1; i + 1 < g.nr; ++i)
        for (int j = 1; j + 1 < g.nz; ++j) CHECK(out.at(i, j) == Catch::Approx(2.0).epsilon(1e-9));

    // w = 2r^3/3 + 2rz^2 = J(x^2 + z^2): d* w = 8r = J(Delta u)
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nz; ++j) {
            const double r = g.r_of(i), z = g.z0 + j * g.hz;
            g.at(i, j) = 2 * r * r * r / 3 + 2 * r * z * z;
        }
    out = delta_star_apply(g, 1);
    for (int i = 1; i + 1 < g.nr; ++i)
        for (int j = 1; j + 1 < g.nz; ++j)
            CHECK(out.at(i, j) == Catch::Approx(8.0 * g.r_of(i)).epsilon(1e-8));
}

TEST_CASE("commutation relation: exact cases and measured order") {
    auto quadratic = [](const Point& x, double z) { return x[0] * x[0] + z * z; };
    auto lap_quadratic_n1 = [](const Point&, double) { return 4.0; };
    // n = 1: J of a cubic is exact under Gauss-Legendre and the centered
    // differences are exact on cubics, so the defect sits at rounding level
    CHECK(commutation_defect(quadratic, lap_quadratic_n1, 1, 0.5, 0.5, 8, 8, 0.1) < 1e-10);

    // harmonic field: d* J f -> 0 at the same rounding level
    auto harmonic = [](const Point& x, double z) { return x[0] * x[0] - z * z; };
    auto zero = [](const Point&, double) { return 0.0; };
    CHECK(commutation_defect(harmonic, zero, 1, 0.5, 0.5, 8, 8, 0.1) < 1e-10);

    // constant field: exactly zero
    auto constant = [](const Point&, double) { return 2.0; };
    CHECK(commutation_defect(constant, zero, 1, 0.5, 0.5, 8, 8, 0.1) == Catch::Approx(0.0).margin(1e-13));

    // n = 1 quartic: the r^5 term leaves a measurable O(h^2) truncation
    auto quartic = [](const Point& x, double z) {
        return x[0] * x[0] * x[0] * x[0] + z * z * z * z;
    };
    auto lap_quartic = [](const Point& x, double z) { return 12 * (x[0] * x[0] + z * z); };
    const double d1 = commutation_defect(quartic, lap_quartic, 1, 0.5, 0.5, 8, 8, 0.1);
    const double d2 = commutation_defect(quartic, lap_quartic, 1, 0.5, 0.5, 15, 15, 0.05);
    const double order = std::log2(d1 / d2);
    CHECK(order >= 1.8);

    // n = 2 on |x|^2 + z^2: the J integral picks up an r^4 term
    auto quad2 = [](const Point& x, double z) { return x[0] * x[0] + x[1] * x[1] + z * z; };
    auto lap_quad2 = [](const Point&, double) { return 6.0; };
    const double e1 = commutation_defect(quad2, lap_quad2, 2, 0.5, 0.5, 8, 8, 0.1);
    const double e2 = commutation_defect(quad2, lap_quad2, 2, 0.5, 0.5, 15, 15, 0.05);
    CHECK(std::log2(e1 / e2) >= 1.8);
}

TEST_CASE("psi values for the moment-difference formula") {
    CHECK(psi_value(MomentOrder::power(2.0), 1, 0.37) == Catch::Approx(4.0));
    CHECK(psi_value(MomentOrder::power(2.0), 1, 5.0) == Catch::Approx(4.0));
    CHECK(psi_value(MomentOrder::power(1.0), 2, 2.0) == Catch::Approx(2.0 / 2.0));
    CHECK(psi_value(MomentOrder::log(), 2, 3.0) == Catch::Approx(1.0 / 9.0));
    CHECK(psi_derivative(MomentOrder::power(2.0), 1, 1.3) == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("moment difference via J: ball against itself is null") {
    const T2Setup& s = two_interval_setup();
    const MomentDiffDual d =
        moment_difference_via_J(s.B, s.B, s.R0, MomentOrder::power(2.0), 2.0 * s.R0 + 1.0);
    CHECK(std::abs(d.via_J) < 5e-3);
    CHECK(std::abs(d.direct) < 5e-3);
}

TEST_CASE("moment difference via J: dual paths agree on the two-interval set") {
    const T2Setup& s = two_interval_setup();
    const double R = 2.0 * 2.0;  // 2 x the larger circumradius
    for (double q : {1.0, 2.0}) {
        const MomentDiffDual d = moment_difference_via_J(s.K, s.B, s.R0, MomentOrder::power(q), R);
        INFO("q=" << q << " direct=" << d.direct << " via_J=" << d.via_J);
        CHECK(d.rel_discrepancy < 0.02);
        if (q == 2.0) {
            REQUIRE(d.simplified_q2.has_value());
            CHECK(std::abs(*d.simplified_q2 - d.via_J) < 0.02 * std::abs(d.via_J));
        }
    }
}

TEST_CASE("moment difference rejects exponents outside the formula's range") {
    const T2Setup& s = two_interval_setup();
    CHECK_THROWS_AS(moment_difference_via_J(s.K, s.B, s.R0, MomentOrder::power(2.5), 5.0),
                    std::domain_error);
    CHECK_THROWS_AS(moment_difference_via_J(s.K, s.B, s.R0, MomentOrder::power(-1.0), 5.0),
                    std::domain_error);
    CHECK_THROWS_AS(moment_difference_via_J(s.K, s.B, s.R0, MomentOrder::log(), 5.0),
                    std::domain_error);  // log path needs n >= 2
    CHECK_THROWS_AS(moment_difference_via_J(s.K, s.B, s.R0, MomentOrder::power(2.0), 1.0),
                    std::invalid_argument);  // R too small to contain the sets
}

TEST_CASE("delta-star harmonicity of J(v-u) away from the slice") {
    // sample J(v-u) on an interior grid with z > 0 and apply d*; the result is
    // bounded by finite-difference truncation + quadrature noise
    const T2Setup& s = two_interval_setup();
    const LiftedPotential u = LiftedPotential::lift(s.K);
    const LiftedPotential v = LiftedPotential::lift(s.B);
    GridFn g;
    g.r0 = 0.8;
    g.z0 = 0.8;
    g.hr = g.hz = 0.1;
    g.nr = g.nz = 7;
    g.values.resize(49);
    for (int i = 0; i < g.nr; ++i)
        for (int j = 0; j < g.nz; ++j) g.at(i, j) = J_value(v, u, g.r_of(i), g.z0 + j * g.hz, 64);
    const GridFn out = delta_star_apply(g, 1);
    for (int i = 1; i + 1 < g.nr; ++i)
        for (int j = 1; j + 1 < g.nz; ++j) CHECK(std::abs(out.at(i, j)) < 5e-3);
}
