#pragma once

// Closed-form capacities, equilibrium densities, and moments of centered
// balls, used as independent oracles against the numerical solver.
//
//   Cap_{n-2}(unit ball, n >= 3) = 1
//   Cap_{n-1}(unit ball) = (Gamma(n/2) / (Gamma(1/2) Gamma((n+1)/2)))^{1/(n-1)}
//   Cap_0([-1,1]) = 1/2,  Cap_0(unit disk) = 1
// with the codimension-one equilibrium density
//   d mu(x) = (2/|S^{n-1}|) (1/B(n/2,1/2)) (1-|x|^2)^{-1/2} dx,  |x| < 1,
// and all capacities scaling linearly under dilation.

#include <cmath>
#include <stdexcept>
#include <string>

#include "rieszlab/quadrature.hpp"

namespace rieszlab {

// Lanczos approximation (g = 7, 9 terms); relative error below 1e-12 on
// [0.5, 20], with the reflection formula for smaller arguments.
inline double log_gamma(double x) {
    if (!(x > 0.0)) throw std::domain_error("log_gamma: argument must be positive");
    static const double kCoef[9] = {0.99999999999980993,   676.5203681218851,   -1259.1392167224028,
                                    771.32342877765313,    -176.61502916214059, 12.507343278686905,
                                    -0.13857109526572012,  9.9843695780195716e-6,
                                    1.5056327351493116e-7};
    if (x < 0.5) {
        // Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return std::log(M_PI / std::sin(M_PI * x)) - log_gamma(1.0 - x);
    }
    const double z = x - 1.0;
    double a = kCoef[0];
    for (int i = 1; i < 9; ++i) a += kCoef[i] / (z + i);
    const double t = z + 7.5;
    return 0.5 * std::log(2.0 * M_PI) + (z + 0.5) * std::log(t) - t + std::log(a);
}

inline double beta_fn(double a, double b) {
    if (!(a > 0.0) || !(b > 0.0)) throw std::domain_error("beta: arguments must be positive");
    return std::exp(log_gamma(a) + log_gamma(b) - log_gamma(a + b));
}

struct BallSpec {
    int dim = 1;
    double radius = 1.0;  // centered at the origin
    void validate() const {
        if (dim < 1) throw std::invalid_argument("BallSpec: dim must be >= 1");
        if (!(radius > 0)) throw std::invalid_argument("BallSpec: radius must be positive");
    }
};

// p = n-2 (n >= 3), p = n-1 (n >= 1; Log when n = 1), and the logarithmic
// disk. NewtonianCase also serves 0 < p < n-2, where the ball's equilibrium
// measure is likewise normalized surface measure on the boundary sphere.
enum class BallCase { NewtonianCase, CodimOneCase, LogDisk };

inline double ball_capacity(int n, BallCase c, double R) {
    if (!(R > 0)) throw std::invalid_argument("ball_capacity: R must be positive");
    switch (c) {
        case BallCase::NewtonianCase:
            if (n < 3) throw std::invalid_argument("ball_capacity: NewtonianCase requires n >= 3");
            return R;
        case BallCase::CodimOneCase:
            if (n < 1) throw std::invalid_argument("ball_capacity: n must be >= 1");
            if (n == 1) return 0.5 * R;  // logarithmic capacity: a quarter of the length
            return R * std::pow(std::exp(log_gamma(0.5 * n) - log_gamma(0.5) - log_gamma(0.5 * (n + 1))),
                                1.0 / (n - 1));
        case BallCase::LogDisk:
            if (n != 2) throw std::invalid_argument("ball_capacity: LogDisk requires n = 2");
            return R;
    }
    throw std::invalid_argument("ball_capacity: invalid case");
}

// Codimension-one equilibrium density at x, rescaled from the unit ball
// (density scales as R^{-n} f(x/R)).
inline double ball_density_codim_one(int n, double R, const Point& x) {
    if (n < 1 || n > 3) throw std::invalid_argument("ball_density_codim_one: n must be 1, 2, or 3");
    if (!(R > 0)) throw std::invalid_argument("ball_density_codim_one: R must be positive");
    const double s = dist(x, Point{0, 0, 0}) / R;
    if (!(s < 1.0)) throw std::domain_error("ball_density_codim_one: |x| must be < R");
    const double unit = 2.0 / (unit_sphere_area(n) * beta_fn(0.5 * n, 0.5)) /
                        std::sqrt(1.0 - s * s);
    return unit / std::pow(R, n);
}

// q-th moment of the ball's equilibrium measure. Boundary-supported cases
// give R^q; the codimension-one density gives the beta ratio
//   R^q B((n+q)/2, 1/2) / B(n/2, 1/2).
inline double ball_moment(int n, BallCase c, double q, double R) {
    if (!(R > 0)) throw std::invalid_argument("ball_moment: R must be positive");
    switch (c) {
        case BallCase::NewtonianCase:
        case BallCase::LogDisk:
            return std::pow(R, q);
        case BallCase::CodimOneCase:
            if (!(q > -n)) throw std::domain_error("ball_moment: divergent moment (q <= -n)");
            return std::pow(R, q) * beta_fn(0.5 * (n + q), 0.5) / beta_fn(0.5 * n, 0.5);
    }
    throw std::invalid_argument("ball_moment: invalid case");
}

// Logarithmic moment. For the codimension-one density the unit-ball value is
// computed by Gauss-Chebyshev quadrature absorbing the (1-t^2)^{-1/2} weight
// (n = 1 has the classical value -log 2).
inline double ball_log_moment(int n, BallCase c, double R, long gc_nodes = 1 << 17) {
    if (!(R > 0)) throw std::invalid_argument("ball_log_moment: R must be positive");
    if (c != BallCase::CodimOneCase) return std::log(R);
    const double unit = gauss_chebyshev_weighted(
                            [n](double t) {
                                const double a = std::abs(t);
                                return a > 0 ? std::pow(a, n - 1) * std::log(a) : 0.0;
                            },
                            gc_nodes) /
                        beta_fn(0.5 * n, 0.5);
    return std::log(R) + unit;
}

// Quadrature oracle for the codim-one moments: integrates |x|^q against
// ball_density_codim_one reduced to the radial variable, with Gauss-Chebyshev
// nodes absorbing the endpoint singularity. Independent of the beta-ratio
// path in ball_moment.
inline double ball_moment_quadrature(int n, double q, double R, long gc_nodes) {
    const double unit = gauss_chebyshev_weighted(
        [n, q](double t) {
            const double s = std::abs(t);
            if (!(s > 0.0) || s >= 1.0) return 0.0;
            const double dens = ball_density_codim_one(n, 1.0, Point{s, 0, 0});
            return std::pow(s, q + n - 1) * dens * std::sqrt(1.0 - s * s);
        },
        gc_nodes);
    // the Chebyshev sum runs over (-1,1); radial reduction wants 2 * Int_0^1
    return std::pow(R, q) * unit * 0.5 * unit_sphere_area(n);
}

// R such that Cap(B_R) matches cap_K, by linear scaling of the capacity.
inline double matched_ball_radius(double cap_K, int n, BallCase c) {
    if (!(cap_K > 0)) throw std::invalid_argument("matched_ball_radius: capacity must be positive");
    return cap_K / ball_capacity(n, c, 1.0);
}

}  // namespace rieszlab
