#pragma once

// Moments of discrete measures and moment comparisons between a set K and its
// capacity-matched centered ball.
//
// error_estimate combines a resolution-doubling Richardson difference with a
// solved-unit-ball calibration gap at the same resolution. The calibration
// term is needed because the capacity error (hence the matched-radius error)
// decays slower than first order in the atom count, which makes a pure
// Richardson difference an underestimate on near-equality cases.

#include <cmath>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "rieszlab/closedform.hpp"
#include "rieszlab/equilibrium.hpp"

namespace rieszlab {

struct MomentOrder {
    bool is_log = false;
    double q = 0.0;

    static MomentOrder power(double q) { return MomentOrder{false, q}; }
    static MomentOrder log() { return MomentOrder{true, 0.0}; }

    std::string label() const {
        if (is_log) return "log";
        std::ostringstream os;
        os << q;
        return os.str();
    }
    bool operator==(const MomentOrder& o) const {
        return is_log == o.is_log && (is_log || q == o.q);
    }
};

// sum_i w_i |x_i|^q; +infinity signals a divergent negative moment (atom at
// the origin), matching the convention that such moments "might equal +inf".
inline double moment(const DiscreteMeasure& mu, double q) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.mesh.size(); ++i) {
        const double r = dist(mu.mesh.atoms[i], Point{0, 0, 0});
        if (r == 0.0 && q < 0.0) return std::numeric_limits<double>::infinity();
        s += mu.w[i] * std::pow(r, q);
    }
    return s;
}

inline double log_moment(const DiscreteMeasure& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.mesh.size(); ++i) {
        const double r = dist(mu.mesh.atoms[i], Point{0, 0, 0});
        if (r == 0.0) return -std::numeric_limits<double>::infinity();
        s += mu.w[i] * std::log(r);
    }
    return s;
}

inline double moment(const DiscreteMeasure& mu, const MomentOrder& q) {
    return q.is_log ? log_moment(mu) : moment(mu, q.q);
}

enum class Verdict { holds, holds_with_margin, inconclusive, violated };

inline std::string verdict_label(Verdict v) {
    switch (v) {
        case Verdict::holds: return "holds";
        case Verdict::holds_with_margin: return "holds_with_margin";
        case Verdict::inconclusive: return "inconclusive";
        case Verdict::violated: return "violated";
    }
    return "?";
}

struct MomentComparison {
    MomentOrder q;
    double moment_K = 0.0;
    double moment_ball = 0.0;
    double gap = 0.0;  // moment_K - moment_ball
    double matched_radius = 0.0;
    double error_estimate = 0.0;
    Verdict verdict = Verdict::inconclusive;
    // For the reversed range -(n-2) <= q < 0 of the Newtonian comparison the
    // verdict is evaluated against the reversed inequality
    // (moment_K <= moment_ball).
    bool reversed_direction = false;
    std::optional<bool> origin_regular;  // attached for q < -(n-2) checks
    std::string note;
};

// Which ball-side closed form applies for a kernel acting on sets in R^n.
// For 0 < p < n-2 the ball's equilibrium measure is normalized surface
// measure, so the NewtonianCase moment formula R^q applies there as well.
inline BallCase ball_case_for(const KernelSpec& kernel, int n) {
    if (kernel.is_log()) {
        if (n == 1) return BallCase::CodimOneCase;
        if (n == 2) return BallCase::LogDisk;
        throw std::domain_error("ball side: logarithmic kernel supported for n in {1,2}");
    }
    const double p = kernel.p;
    if (std::abs(p - (n - 1)) < 1e-12 && n >= 2) return BallCase::CodimOneCase;
    if (n >= 3 && p <= n - 2 + 1e-12) return BallCase::NewtonianCase;
    throw std::domain_error("ball side: no closed form for n-2 < p < n with p != n-1");
}

inline double ball_side_moment(int n, BallCase c, const MomentOrder& q, double R) {
    return q.is_log ? ball_log_moment(n, c, R) : ball_moment(n, c, q.q, R);
}

namespace detail {

// Unit-ball calibration: the ball meshed and solved the same way the solver
// sees it, at a given resolution. For boundary-supported cases the faithful
// discrete comparator is the boundary sphere/circle mesh; for the
// codimension-one case the solid mesh.
struct Calibration {
    double cap_unit = 0.0;                       // solved unit-ball capacity
    std::function<double(const MomentOrder&)> moment_unit;  // solved unit-ball moments
};

inline SetSpec unit_ball_spec(int n, BallCase c) {
    SetSpec s;
    s.dim = n;
    if (c == BallCase::CodimOneCase && n == 1)
        s.parts.push_back(Primitive::interval(-1.0, 1.0));
    else if (c == BallCase::CodimOneCase)
        s.parts.push_back(Primitive::ball({0, 0, 0}, 1.0));
    else
        s.parts.push_back(Primitive::sphere({0, 0, 0}, 1.0));  // boundary-supported cases
    return s;
}

inline const Calibration& calibration_for(const KernelSpec& kernel, int n, BallCase c, int resolution,
                                          Grading grading) {
    using Key = std::tuple<int, double, int, int, int, int>;
    static std::map<Key, Calibration> cache;
    static std::mutex mu;
    const Key key{kernel.is_log() ? 0 : 1, kernel.is_log() ? 0.0 : kernel.p, n, static_cast<int>(c),
                  resolution, static_cast<int>(grading)};
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;

    const Mesh mesh = build_mesh(unit_ball_spec(n, c), resolution, grading);
    const EquilibriumResult res = solve_equilibrium(mesh, kernel);
    Calibration cal;
    cal.cap_unit = res.capacity;
    DiscreteMeasure measure = res.measure;
    cal.moment_unit = [measure](const MomentOrder& q) { return moment(measure, q); };
    return cache.emplace(key, std::move(cal)).first->second;
}

// Systematic offset of the comparison machinery at this resolution: the gap
// the method reports when K is itself a ball of radius R.
inline double calibration_gap(const KernelSpec& kernel, int n, BallCase c, int resolution,
                              Grading grading, const MomentOrder& q, double R) {
    const Calibration& cal = calibration_for(kernel, n, c, resolution, grading);
    const double cap_exact = ball_capacity(n, c, 1.0);
    const double ratio = cal.cap_unit / cap_exact;  // solved matched radius of the unit ball
    if (q.is_log) return cal.moment_unit(q) - (std::log(ratio) + ball_log_moment(n, c, 1.0));
    return std::pow(R, q.q) * (cal.moment_unit(q) - std::pow(ratio, q.q) * ball_moment(n, c, q.q, 1.0));
}

inline Verdict verdict_from_gap(double gap, double err, bool reversed) {
    if (!std::isfinite(gap)) return Verdict::inconclusive;
    const double signed_gap = reversed ? -gap : gap;
    if (signed_gap > 3.0 * err) return Verdict::holds_with_margin;
    if (signed_gap < -3.0 * err) return Verdict::violated;
    return Verdict::holds;
}

}  // namespace detail

// Comparison of the q-th moment of a solved set K against the capacity-matched
// centered ball, with a calibration-based discretization error estimate.
inline MomentComparison compare_moments(const EquilibriumResult& K, const KernelSpec& kernel,
                                        const MomentOrder& q,
                                        Grading grading = Grading::endpoint_refined) {
    const int n = K.measure.mesh.dim;
    const BallCase c = ball_case_for(kernel, n);
    const int resolution = static_cast<int>(K.measure.mesh.size());

    MomentComparison cmp;
    cmp.q = q;
    cmp.matched_radius = matched_ball_radius(K.capacity, n, c);
    cmp.moment_K = moment(K.measure, q);
    cmp.moment_ball = ball_side_moment(n, c, q, cmp.matched_radius);
    cmp.gap = cmp.moment_K - cmp.moment_ball;
    const double cal = detail::calibration_gap(kernel, n, c, resolution, grading, q, cmp.matched_radius);
    cmp.error_estimate = 1.25 * std::abs(cal) + 1e-12 * std::max(1.0, std::abs(cmp.moment_K));
    cmp.verdict = detail::verdict_from_gap(cmp.gap, cmp.error_estimate, false);
    return cmp;
}

// Merge a coarse-resolution comparison into a finer one: the Richardson
// difference of the gaps is added to the error estimate. Inconclusive
// verdicts (unmet hypotheses, divergent moments) stay inconclusive.
inline void add_refinement_error(MomentComparison& fine, const MomentComparison& coarse) {
    if (std::isfinite(fine.gap) && std::isfinite(coarse.gap))
        fine.error_estimate += std::abs(fine.gap - coarse.gap);
    if (fine.verdict != Verdict::inconclusive)
        fine.verdict = detail::verdict_from_gap(fine.gap, fine.error_estimate, fine.reversed_direction);
}

// Negative-exponent branches of the Newtonian comparison (p = n-2 for n >= 3,
// or the logarithmic plane case n = 2): for q in [-(n-2), 0) the inequality
// reverses; for q < -(n-2) the forward inequality needs the origin to be a
// regular point, checked through the potential at the origin. (For n = 2 the
// reversed band is empty and every q < 0 takes the forward branch.)
inline MomentComparison reversed_and_negative_moment_checks(const EquilibriumResult& K,
                                                            const KernelSpec& kernel, double q,
                                                            Grading grading = Grading::endpoint_refined,
                                                            double regularity_tol = 0.02) {
    const int n = K.measure.mesh.dim;
    const bool log_plane = kernel.is_log() && n == 2;
    const bool newtonian = !kernel.is_log() && n >= 3 && std::abs(kernel.p - (n - 2)) < 1e-12;
    if (!log_plane && !newtonian)
        throw std::domain_error(
            "reversed_and_negative_moment_checks: requires p = n-2 (n >= 3) or log (n = 2)");
    if (!(q < 0)) throw std::invalid_argument("reversed_and_negative_moment_checks: q must be negative");

    MomentComparison cmp = compare_moments(K, kernel, MomentOrder::power(q), grading);
    if (q >= -(n - 2.0)) {
        cmp.reversed_direction = true;
        cmp.verdict = detail::verdict_from_gap(cmp.gap, cmp.error_estimate, true);
        return cmp;
    }
    // q < -(n-2): forward inequality, contingent on origin regularity
    const double u0 = potential(K, kernel, Point{0, 0, 0});
    const double scale = kernel.is_log() ? std::max(std::abs(K.energy), 1.0) : std::abs(K.energy);
    const bool regular = std::abs(u0 - K.energy) <= regularity_tol * scale;
    cmp.origin_regular = regular;
    if (!regular) {
        cmp.verdict = Verdict::inconclusive;
        cmp.note = "origin is not a regular point; the q < -(n-2) inequality needs it";
    }
    return cmp;
}

struct ThresholdScanReport {
    std::vector<MomentComparison> comparisons;  // ascending q
    std::optional<double> first_holds_q;
    bool persistent = true;  // no holds_with_margin followed by violated
};

// Threshold scan for 0 < p < n-2: once the moment inequality holds at some
// q*, it must keep holding for larger q (the ball's equilibrium measure is
// boundary-supported there). The ball side is the surface measure moment R^q.
inline ThresholdScanReport threshold_scan(const EquilibriumResult& K, const KernelSpec& kernel,
                                          const std::vector<double>& q_grid,
                                          Grading grading = Grading::endpoint_refined) {
    const int n = K.measure.mesh.dim;
    if (kernel.is_log() || !(kernel.p > 0) || !(kernel.p < n - 2))
        throw std::domain_error("threshold_scan: requires Riesz 0 < p < n-2");
    for (std::size_t i = 1; i < q_grid.size(); ++i)
        if (!(q_grid[i] > q_grid[i - 1]))
            throw std::invalid_argument("threshold_scan: q_grid must be ascending");

    ThresholdScanReport rep;
    bool seen_margin = false;
    for (double q : q_grid) {
        MomentComparison cmp = compare_moments(K, kernel, MomentOrder::power(q), grading);
        if (!rep.first_holds_q &&
            (cmp.verdict == Verdict::holds || cmp.verdict == Verdict::holds_with_margin))
            rep.first_holds_q = q;
        if (seen_margin && cmp.verdict == Verdict::violated) rep.persistent = false;
        if (cmp.verdict == Verdict::holds_with_margin) seen_margin = true;
        rep.comparisons.push_back(std::move(cmp));
    }
    return rep;
}

}  // namespace rieszlab
