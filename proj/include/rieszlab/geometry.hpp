#pragma once

// Set-geometry specifications and mesh construction. A Mesh carries atoms,
// quadrature weights (length/area/volume or surface measure), and a per-cell
// self-interaction model (an equivalent rod/disk/ball radius plus the model
// dimension). Weights of solid primitives telescope exactly to the set's
// measure.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "rieszlab/quadrature.hpp"

namespace rieszlab {

enum class PrimitiveKind { Interval, Ball, Sphere, Ellipsoid, Annulus };

struct Primitive {
    PrimitiveKind kind = PrimitiveKind::Interval;
    double a = 0.0, b = 0.0;          // Interval
    Point center{0.0, 0.0, 0.0};      // Ball/Sphere/Ellipsoid/Annulus
    double radius = 0.0;              // Ball/Sphere
    Point semi_axes{0.0, 0.0, 0.0};   // Ellipsoid
    double r_inner = 0.0, r_outer = 0.0;  // Annulus

    static Primitive interval(double a, double b) {
        Primitive p;
        p.kind = PrimitiveKind::Interval;
        p.a = a;
        p.b = b;
        return p;
    }
    static Primitive ball(Point c, double r) {
        Primitive p;
        p.kind = PrimitiveKind::Ball;
        p.center = c;
        p.radius = r;
        return p;
    }
    static Primitive sphere(Point c, double r) {
        Primitive p;
        p.kind = PrimitiveKind::Sphere;
        p.center = c;
        p.radius = r;
        return p;
    }
    static Primitive ellipsoid(Point c, Point axes) {
        Primitive p;
        p.kind = PrimitiveKind::Ellipsoid;
        p.center = c;
        p.semi_axes = axes;
        return p;
    }
    static Primitive annulus(Point c, double ri, double ro) {
        Primitive p;
        p.kind = PrimitiveKind::Annulus;
        p.center = c;
        p.r_inner = ri;
        p.r_outer = ro;
        return p;
    }

    bool is_surface() const {
        return kind == PrimitiveKind::Sphere || kind == PrimitiveKind::Ellipsoid;
    }

    void validate(int dim) const {
        switch (kind) {
            case PrimitiveKind::Interval:
                if (dim != 1) throw std::invalid_argument("interval requires dim = 1");
                if (!(a < b)) throw std::invalid_argument("interval requires a < b");
                break;
            case PrimitiveKind::Ball:
                if (!(radius > 0)) throw std::invalid_argument("ball radius must be positive");
                break;
            case PrimitiveKind::Sphere:
                if (dim < 2) throw std::invalid_argument("sphere requires dim >= 2");
                if (!(radius > 0)) throw std::invalid_argument("sphere radius must be positive");
                break;
            case PrimitiveKind::Ellipsoid:
                if (dim != 3) throw std::invalid_argument("ellipsoid surface supported for dim = 3 only");
                for (int k = 0; k < 3; ++k)
                    if (!(semi_axes[k] > 0)) throw std::invalid_argument("semi-axes must be positive");
                break;
            case PrimitiveKind::Annulus:
                if (dim < 2) throw std::invalid_argument("annulus requires dim >= 2");
                if (!(r_inner >= 0) || !(r_outer > r_inner))
                    throw std::invalid_argument("annulus requires 0 <= r_inner < r_outer");
                break;
        }
    }

    // 1D length, 2D area / arc length, 3D volume / surface area.
    double measure(int dim) const {
        switch (kind) {
            case PrimitiveKind::Interval:
                return b - a;
            case PrimitiveKind::Ball:
                if (dim == 1) return 2.0 * radius;
                if (dim == 2) return M_PI * radius * radius;
                return 4.0 / 3.0 * M_PI * radius * radius * radius;
            case PrimitiveKind::Sphere:
                return dim == 2 ? 2.0 * M_PI * radius : 4.0 * M_PI * radius * radius;
            case PrimitiveKind::Ellipsoid: {
                // Thomsen approximation; used only for budget allocation.
                const double p = 1.6075;
                const double ap = std::pow(semi_axes[0], p), bp = std::pow(semi_axes[1], p),
                             cp = std::pow(semi_axes[2], p);
                return 4.0 * M_PI * std::pow((ap * bp + ap * cp + bp * cp) / 3.0, 1.0 / p);
            }
            case PrimitiveKind::Annulus:
                if (dim == 2) return M_PI * (r_outer * r_outer - r_inner * r_inner);
                return 4.0 / 3.0 * M_PI * (std::pow(r_outer, 3) - std::pow(r_inner, 3));
        }
        return 0.0;
    }

    double circumradius_from_origin() const {
        const double c = std::sqrt(center[0] * center[0] + center[1] * center[1] + center[2] * center[2]);
        switch (kind) {
            case PrimitiveKind::Interval:
                return std::max(std::abs(a), std::abs(b));
            case PrimitiveKind::Ball:
            case PrimitiveKind::Sphere:
                return c + radius;
            case PrimitiveKind::Ellipsoid:
                return c + std::max({semi_axes[0], semi_axes[1], semi_axes[2]});
            case PrimitiveKind::Annulus:
                return c + r_outer;
        }
        return 0.0;
    }

    // Strict interior membership with margin (surfaces have empty interior).
    bool interior_contains(int dim, const Point& x, double margin) const {
        switch (kind) {
            case PrimitiveKind::Interval:
                return x[0] > a + margin && x[0] < b - margin;
            case PrimitiveKind::Ball:
                return dist(x, center) < radius - margin;
            case PrimitiveKind::Annulus: {
                const double d = dist(x, center);
                return d > r_inner + margin && d < r_outer - margin;
            }
            case PrimitiveKind::Sphere:
                return false;
            case PrimitiveKind::Ellipsoid:
                return false;
        }
        (void)dim;
        return false;
    }
};

struct SetSpec {
    int dim = 1;
    std::vector<Primitive> parts;

    void validate() const;
    double circumradius() const {
        double r = 0.0;
        for (const auto& p : parts) r = std::max(r, p.circumradius_from_origin());
        return r;
    }
};

enum class Grading { uniform, endpoint_refined };

struct Mesh {
    int dim = 1;            // ambient dimension n
    int intrinsic_dim = 1;  // n for solid primitives, n-1 for surface primitives
    std::vector<Point> atoms;
    std::vector<double> weights;      // cell measure
    std::vector<double> cell_radius;  // equivalent-cell radius for the self-energy model
    std::vector<int> cell_dim;        // per-cell self-energy model dimension (<= intrinsic_dim)

    std::size_t size() const { return atoms.size(); }
    void validate() const;
};

inline double nearest_neighbor_separation(const Mesh& mesh) {
    const std::size_t n = mesh.size();
    if (n < 2) throw std::invalid_argument("nearest_neighbor_separation: need N >= 2");
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) best = std::min(best, dist(mesh.atoms[i], mesh.atoms[j]));
    return best;
}

namespace detail {

// Per-atom nearest-neighbor distances, brute force (desk scale).
inline std::vector<double> nn_distances(const std::vector<Point>& atoms) {
    const std::size_t n = atoms.size();
    std::vector<double> nn(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = dist(atoms[i], atoms[j]);
            if (d < nn[i]) nn[i] = d;
            if (d < nn[j]) nn[j] = d;
        }
    }
    return nn;
}

struct MeshChunk {
    std::vector<Point> atoms;
    std::vector<double> weights, cell_radius;
    std::vector<int> cell_dim;

    void add(const Point& x, double w, double rho, int d) {
        atoms.push_back(x);
        weights.push_back(w);
        cell_radius.push_back(rho);
        cell_dim.push_back(d);
    }
    void append(const MeshChunk& o) {
        atoms.insert(atoms.end(), o.atoms.begin(), o.atoms.end());
        weights.insert(weights.end(), o.weights.begin(), o.weights.end());
        cell_radius.insert(cell_radius.end(), o.cell_radius.begin(), o.cell_radius.end());
        cell_dim.insert(cell_dim.end(), o.cell_dim.begin(), o.cell_dim.end());
    }
};

// --- 1D: interval cells, atoms at cell centers. endpoint_refined uses the
// cosine (Chebyshev) edge map, matching the (1-x^2)^{-1/2} density blow-up.
inline MeshChunk mesh_interval(double a, double b, int n, Grading grading) {
    MeshChunk c;
    std::vector<double> edges(n + 1);
    for (int j = 0; j <= n; ++j) {
        const double t = static_cast<double>(j) / n;
        if (grading == Grading::endpoint_refined)
            edges[j] = 0.5 * (a + b) - 0.5 * (b - a) * std::cos(M_PI * t);
        else
            edges[j] = a + (b - a) * t;
    }
    for (int j = 0; j < n; ++j) {
        const double w = edges[j + 1] - edges[j];
        c.add({0.5 * (edges[j] + edges[j + 1]), 0.0, 0.0}, w, 0.5 * w, 1);
    }
    return c;
}

// --- 2D solid radial region [r0, r1] (disk when r0 = 0). Equal-area sector
// cells per ring. endpoint_refined grows ring widths geometrically from an
// aspect-capped rim ring inward; cells are modelled as equal-area disks.
inline MeshChunk mesh_radial_2d(const Point& center, double r0, double r1, int n, Grading grading) {
    MeshChunk c;
    const double area_total = M_PI * (r1 * r1 - r0 * r0);
    const double cell_area = area_total / n;
    std::vector<double> edges;
    if (grading == Grading::endpoint_refined) {
        // rim ring with aspect ratio ~4, then geometric growth toward the
        // isotropic width sqrt(cell_area)
        const double dr_iso = std::sqrt(cell_area);
        const double dr_rim = 0.5 * std::sqrt(M_PI * cell_area) / 2.0;  // = sqrt(pi A)/4, aspect 4
        std::vector<double> rev;
        double r = r1, drv = std::max(1e-12, dr_rim);
        rev.push_back(r1);
        const bool refine_inner = r0 > 0.0;  // annulus: refine both faces
        while (r > r0) {
            double next = r - drv;
            if (!refine_inner && next < r0 + 0.7 * dr_iso) next = r0;
            if (refine_inner && next < 0.5 * (r0 + r1)) break;
            rev.push_back(std::max(next, r0));
            r = std::max(next, r0);
            drv = std::min(drv * 1.6, dr_iso);
        }
        if (refine_inner) {
            // mirror the grading from the inner face and join in the middle
            std::vector<double> fwd;
            double rr = r0;
            double drf = std::max(1e-12, dr_rim);
            fwd.push_back(r0);
            while (rr < rev.back()) {
                double next = rr + drf;
                if (next >= rev.back() - 0.5 * dr_iso) break;
                fwd.push_back(next);
                rr = next;
                drf = std::min(drf * 1.6, dr_iso);
            }
            edges = fwd;
            for (auto it = rev.rbegin(); it != rev.rend(); ++it) edges.push_back(*it);
        } else {
            edges.assign(rev.rbegin(), rev.rend());
        }
    } else {
        const int nr = std::max(1, static_cast<int>(std::lround((r1 - r0) / std::sqrt(cell_area))));
        edges.resize(nr + 1);
        for (int j = 0; j <= nr; ++j) edges[j] = r0 + (r1 - r0) * j / static_cast<double>(nr);
    }

    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double ra = edges[i], rb = edges[i + 1];
        if (!(rb > ra)) continue;
        const double ring_area = M_PI * (rb * rb - ra * ra);
        int m = std::max(ra == 0.0 ? 3 : 4, static_cast<int>(std::lround(ring_area / cell_area)));
        const double seg_area = ring_area / m;
        const double rc = (2.0 / 3.0) * (rb * rb * rb - ra * ra * ra) / (rb * rb - ra * ra);
        const double off = M_PI / m + (i % 2 ? M_PI / m : 0.0);
        for (int k = 0; k < m; ++k) {
            const double th = 2.0 * M_PI * k / m + off;
            c.add({center[0] + rc * std::cos(th), center[1] + rc * std::sin(th), 0.0}, seg_area,
                  std::sqrt(seg_area / M_PI), 2);
        }
    }
    return c;
}

// --- 3D solid ball. Two zones: a thin boundary layer of pancake cells at the
// outer face (self-energy modelled as equal-area disks) and isotropic interior
// shells of equal-volume cells on rotated Fibonacci lattices. The layer keeps
// the effective support radius within O(1/sqrt(N)) of the true boundary, which
// is what fixes the capacity accuracy for boundary-concentrating kernels.
inline MeshChunk mesh_ball_3d(const Point& center, double R, int n, Grading grading) {
    MeshChunk c;
    auto add_shell_lattice = [&](double ra, double rb, int m, int shell_index, int cdim, double rho) {
        const double vol = 4.0 / 3.0 * M_PI * (rb * rb * rb - ra * ra * ra);
        const double rc = 0.75 * (std::pow(rb, 4) - std::pow(ra, 4)) / (rb * rb * rb - ra * ra * ra);
        auto pts = fibonacci_sphere(m);
        const double ang = 2.399963229728653 * shell_index;  // golden-angle shell rotation
        const double ca = std::cos(ang), sa = std::sin(ang);
        for (const auto& u : pts) {
            const Point v{ca * u[0] - sa * u[1], sa * u[0] + ca * u[1], u[2]};
            const double rr = rho > 0 ? rho : std::cbrt(3.0 * (vol / m) / (4.0 * M_PI));
            c.add({center[0] + rc * v[0], center[1] + rc * v[1], center[2] + rc * v[2]}, vol / m, rr, cdim);
        }
    };

    double r_top = R;
    int n_left = n;
    int shell_index = 0;
    if (grading == Grading::endpoint_refined) {
        const double db = 0.82 * R / std::sqrt(static_cast<double>(n));
        const int mb = std::max(8, n / 4);
        const double rc = R - 0.5 * db;
        const double cap_area = 4.0 * M_PI * rc * rc / mb;
        add_shell_lattice(R - db, R, mb, shell_index++, 2, std::sqrt(cap_area / M_PI));
        r_top = R - db;
        n_left = n - mb;
    }
    const double vol_in = 4.0 / 3.0 * M_PI * r_top * r_top * r_top;
    const double vol_cell = vol_in / std::max(1, n_left);
    const int ns = std::max(1, static_cast<int>(std::lround(r_top / std::cbrt(vol_cell))));
    for (int s = 0; s < ns; ++s) {
        const double ra = r_top * s / static_cast<double>(ns);
        const double rb = r_top * (s + 1) / static_cast<double>(ns);
        const double vol = 4.0 / 3.0 * M_PI * (rb * rb * rb - ra * ra * ra);
        const int m = std::max(1, static_cast<int>(std::lround(vol / vol_cell)));
        add_shell_lattice(ra, rb, m, shell_index++, 3, 0.0);
    }
    return c;
}

// --- 3D solid annulus: isotropic shells between the radii (no boundary layer;
// densities stay integrable on both faces at the kernels we solve).
inline MeshChunk mesh_annulus_3d(const Point& center, double ri, double ro, int n) {
    MeshChunk c;
    const double vol_total = 4.0 / 3.0 * M_PI * (ro * ro * ro - ri * ri * ri);
    const double vol_cell = vol_total / n;
    const int ns = std::max(1, static_cast<int>(std::lround((ro - ri) / std::cbrt(vol_cell))));
    for (int s = 0; s < ns; ++s) {
        const double ra = ri + (ro - ri) * s / static_cast<double>(ns);
        const double rb = ri + (ro - ri) * (s + 1) / static_cast<double>(ns);
        const double vol = 4.0 / 3.0 * M_PI * (rb * rb * rb - ra * ra * ra);
        const int m = std::max(4, static_cast<int>(std::lround(vol / vol_cell)));
        const double rc = 0.75 * (std::pow(rb, 4) - std::pow(ra, 4)) / (rb * rb * rb - ra * ra * ra);
        auto pts = fibonacci_sphere(m);
        const double ang = 2.399963229728653 * s;
        const double ca = std::cos(ang), sa = std::sin(ang);
        for (const auto& u : pts) {
            const Point v{ca * u[0] - sa * u[1], sa * u[0] + ca * u[1], u[2]};
            c.add({center[0] + rc * v[0], center[1] + rc * v[1], center[2] + rc * v[2]}, vol / m,
                  std::cbrt(3.0 * (vol / m) / (4.0 * M_PI)), 3);
        }
    }
    return c;
}

// --- surfaces
inline MeshChunk mesh_sphere_surface(const Point& center, double R, int n, int dim) {
    MeshChunk c;
    if (dim == 3) {
        auto pts = fibonacci_sphere(n);
        const double w = 4.0 * M_PI * R * R / n;
        for (const auto& u : pts)
            c.add({center[0] + R * u[0], center[1] + R * u[1], center[2] + R * u[2]}, w,
                  std::sqrt(w / M_PI), 2);
    } else {  // circle in R^2; arc cells are rods
        const double w = 2.0 * M_PI * R / n;
        for (int k = 0; k < n; ++k) {
            const double th = 2.0 * M_PI * (k + 0.5) / n;
            c.add({center[0] + R * std::cos(th), center[1] + R * std::sin(th), 0.0}, w, 0.5 * w, 1);
        }
    }
    return c;
}

inline MeshChunk mesh_ellipsoid_surface(const Point& center, const Point& axes, int n) {
    // Mapped Fibonacci lattice; weight = spherical cell area times the local
    // area stretch abc * |(u1/a, u2/b, u3/c)| of the linear map.
    MeshChunk c;
    auto pts = fibonacci_sphere(n);
    const double abc = axes[0] * axes[1] * axes[2];
    for (const auto& u : pts) {
        const double g = std::sqrt((u[0] / axes[0]) * (u[0] / axes[0]) +
                                   (u[1] / axes[1]) * (u[1] / axes[1]) +
                                   (u[2] / axes[2]) * (u[2] / axes[2]));
        const double w = 4.0 * M_PI / n * abc * g;
        c.add({center[0] + axes[0] * u[0], center[1] + axes[1] * u[1], center[2] + axes[2] * u[2]}, w,
              std::sqrt(w / M_PI), 2);
    }
    return c;
}

// Analytic strict-interior overlap tests for the easy pairs; the generic
// fallback (atom-in-interior sampling) runs after meshing.
inline bool analytic_overlap(int dim, const Primitive& p, const Primitive& q) {
    auto both = [&](PrimitiveKind x, PrimitiveKind y) {
        return (p.kind == x && q.kind == y) || (p.kind == y && q.kind == x);
    };
    if (p.kind == PrimitiveKind::Interval && q.kind == PrimitiveKind::Interval)
        return std::max(p.a, q.a) < std::min(p.b, q.b);
    if (p.kind == PrimitiveKind::Ball && q.kind == PrimitiveKind::Ball)
        return dist(p.center, q.center) < p.radius + q.radius;
    if (p.kind == PrimitiveKind::Sphere && q.kind == PrimitiveKind::Sphere) {
        const double d = dist(p.center, q.center);
        if (d < 1e-14 && std::abs(p.radius - q.radius) < 1e-14) return true;  // coincide
        return d > std::abs(p.radius - q.radius) + 1e-14 && d < p.radius + q.radius - 1e-14;
    }
    if (both(PrimitiveKind::Ball, PrimitiveKind::Sphere)) {
        const Primitive& ball = p.kind == PrimitiveKind::Ball ? p : q;
        const Primitive& sph = p.kind == PrimitiveKind::Ball ? q : p;
        return std::abs(dist(ball.center, sph.center) - sph.radius) < ball.radius - 1e-14;
    }
    (void)dim;
    return false;
}

}  // namespace detail

inline void SetSpec::validate() const {
    if (dim < 1 || dim > 3) throw std::invalid_argument("SetSpec: dim must be 1, 2, or 3");
    if (parts.empty()) throw std::invalid_argument("SetSpec: parts must be nonempty");
    for (const auto& p : parts) p.validate(dim);
    bool has_surface = false, has_solid = false;
    for (const auto& p : parts) (p.is_surface() ? has_surface : has_solid) = true;
    if (has_surface && has_solid)
        throw std::invalid_argument("SetSpec: mixing surface and solid primitives in one union");
    for (std::size_t i = 0; i < parts.size(); ++i)
        for (std::size_t j = i + 1; j < parts.size(); ++j)
            if (detail::analytic_overlap(dim, parts[i], parts[j]))
                throw std::invalid_argument("SetSpec: parts have overlapping interiors");
}

inline void Mesh::validate() const {
    const std::size_t n = size();
    if (n < 2) throw std::invalid_argument("Mesh: need N >= 2 atoms");
    if (weights.size() != n || cell_radius.size() != n || cell_dim.size() != n)
        throw std::invalid_argument("Mesh: field lengths differ");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(weights[i] > 0)) throw std::invalid_argument("Mesh: weights must be positive");
        if (!(cell_radius[i] > 0)) throw std::invalid_argument("Mesh: cell_radius must be positive");
    }
    const auto nn = detail::nn_distances(atoms);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(nn[i] > 0)) throw std::invalid_argument("Mesh: atoms must be pairwise distinct");
        if (cell_radius[i] > nn[i] * (1.0 + 1e-12))
            throw std::invalid_argument("Mesh: cell_radius exceeds nearest-neighbor distance");
    }
}

// Build a mesh covering `spec` with approximately `resolution` atoms in total;
// the budget is split across union parts proportionally to their measure.
inline Mesh build_mesh(const SetSpec& spec, int resolution, Grading grading = Grading::endpoint_refined) {
    spec.validate();
    if (resolution < 2) throw std::invalid_argument("build_mesh: resolution must be >= 2");

    double total_measure = 0.0;
    for (const auto& p : spec.parts) total_measure += p.measure(spec.dim);

    detail::MeshChunk all;
    for (const auto& p : spec.parts) {
        int n = spec.parts.size() == 1
                    ? resolution
                    : std::max(2, static_cast<int>(std::lround(resolution * p.measure(spec.dim) / total_measure)));
        detail::MeshChunk c;
        switch (p.kind) {
            case PrimitiveKind::Interval:
                c = detail::mesh_interval(p.a, p.b, n, grading);
                break;
            case PrimitiveKind::Ball:
                if (spec.dim == 1)
                    c = detail::mesh_interval(p.center[0] - p.radius, p.center[0] + p.radius, n, grading);
                else if (spec.dim == 2)
                    c = detail::mesh_radial_2d(p.center, 0.0, p.radius, n, grading);
                else
                    c = detail::mesh_ball_3d(p.center, p.radius, n, grading);
                break;
            case PrimitiveKind::Annulus:
                if (spec.dim == 2)
                    c = detail::mesh_radial_2d(p.center, p.r_inner, p.r_outer, n, grading);
                else
                    c = detail::mesh_annulus_3d(p.center, p.r_inner, p.r_outer, n);
                break;
            case PrimitiveKind::Sphere:
                c = detail::mesh_sphere_surface(p.center, p.radius, n, spec.dim);
                break;
            case PrimitiveKind::Ellipsoid:
                c = detail::mesh_ellipsoid_surface(p.center, p.semi_axes, n);
                break;
        }
        // sampled overlap rejection: atoms of this part strictly inside another part
        for (const auto& q : spec.parts) {
            if (&q == &p) continue;
            for (const auto& x : c.atoms)
                if (q.interior_contains(spec.dim, x, 1e-12))
                    throw std::invalid_argument("SetSpec: parts have overlapping interiors");
        }
        all.append(c);
    }

    Mesh mesh;
    mesh.dim = spec.dim;
    mesh.intrinsic_dim = spec.parts.front().is_surface() ? spec.dim - 1 : spec.dim;
    mesh.atoms = std::move(all.atoms);
    mesh.weights = std::move(all.weights);
    mesh.cell_radius = std::move(all.cell_radius);
    mesh.cell_dim = std::move(all.cell_dim);

    // enforce cell_radius_i <= nearest-neighbor distance
    const auto nn = detail::nn_distances(mesh.atoms);
    for (std::size_t i = 0; i < mesh.size(); ++i) {
        if (!(nn[i] > 0)) throw std::invalid_argument("build_mesh: coincident atoms (overlapping parts?)");
        mesh.cell_radius[i] = std::min(mesh.cell_radius[i], nn[i]);
    }
    mesh.validate();
    return mesh;
}

}  // namespace rieszlab
