#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <variant>
#include <vector>

#include "pfk/common.hpp"
#include "pfk/special_functions.hpp"

namespace pfk {

using Point2 = std::array<double, 2>;

struct Ball {
    int n = 2;
    double r = 1.0;
    Point2 center{0.0, 0.0};  // placement only matters for 2D rasterization
};

struct Rectangle {
    double a = 1.0;  // side along x
    double b = 1.0;  // side along y, centered at the origin
};

struct Polygon2D {
    std::vector<Point2> vertices;  // counterclockwise, simple
};

struct Annulus {
    int n = 2;
    double rho = 0.5;
    double R = 1.0;  // 0 < rho < R, centered at the origin
};

using Domain = std::variant<Ball, Rectangle, Polygon2D, Annulus>;

// omega_n, the volume of the n-dimensional unit ball.
inline double unit_ball_volume(int n) {
    if (n <= 0) throw InvalidInput("unit_ball_volume: dimension must be positive");
    return std::pow(pi, 0.5 * n) / gamma_fn(0.5 * n + 1.0);
}

namespace poly {

inline double signed_area(const std::vector<Point2>& v) {
    double s = 0.0;
    const size_t m = v.size();
    for (size_t i = 0; i < m; ++i) {
        const Point2& p = v[i];
        const Point2& q = v[(i + 1) % m];
        s += p[0] * q[1] - q[0] * p[1];
    }
    return 0.5 * s;
}

inline double boundary_length(const std::vector<Point2>& v) {
    double s = 0.0;
    const size_t m = v.size();
    for (size_t i = 0; i < m; ++i) {
        const Point2& p = v[i];
        const Point2& q = v[(i + 1) % m];
        s += std::hypot(q[0] - p[0], q[1] - p[1]);
    }
    return s;
}

inline double point_segment_distance(double x, double y, const Point2& a, const Point2& b) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double len2 = dx * dx + dy * dy;
    double t = len2 > 0.0 ? ((x - a[0]) * dx + (y - a[1]) * dy) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(x - (a[0] + t * dx), y - (a[1] + t * dy));
}

inline double boundary_distance(const std::vector<Point2>& v, double x, double y) {
    double d = std::numeric_limits<double>::infinity();
    const size_t m = v.size();
    for (size_t i = 0; i < m; ++i)
        d = std::min(d, point_segment_distance(x, y, v[i], v[(i + 1) % m]));
    return d;
}

inline bool point_inside(const std::vector<Point2>& v, double x, double y) {
    bool in = false;
    const size_t m = v.size();
    for (size_t i = 0, j = m - 1; i < m; j = i++) {
        if ((v[i][1] > y) != (v[j][1] > y)) {
            const double xi = v[j][0] + (y - v[j][1]) / (v[i][1] - v[j][1]) * (v[i][0] - v[j][0]);
            if (x < xi) in = !in;
        }
    }
    return in;
}

inline bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    auto cross = [](const Point2& o, const Point2& p, const Point2& q) {
        return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0]);
    };
    const double d1 = cross(c, d, a), d2 = cross(c, d, b);
    const double d3 = cross(a, b, c), d4 = cross(a, b, d);
    return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

inline bool is_simple(const std::vector<Point2>& v) {
    const size_t m = v.size();
    for (size_t i = 0; i < m; ++i) {
        for (size_t j = i + 1; j < m; ++j) {
            // skip shared-endpoint pairs
            if (j == i || (j + 1) % m == i || (i + 1) % m == j) continue;
            if (segments_intersect(v[i], v[(i + 1) % m], v[j], v[(j + 1) % m])) return false;
        }
    }
    return true;
}

inline bool is_convex(const std::vector<Point2>& v) {
    const size_t m = v.size();
    for (size_t i = 0; i < m; ++i) {
        const Point2& a = v[i];
        const Point2& b = v[(i + 1) % m];
        const Point2& c = v[(i + 2) % m];
        const double cr = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if (cr < 0.0) return false;  // ccw convex requires all left turns
    }
    return true;
}

// Sutherland-Hodgman clip of a convex region against the half-plane
// n.x <= c, with n the outward edge normal.
inline std::vector<Point2> clip_halfplane(const std::vector<Point2>& v, double nx, double ny, double c) {
    std::vector<Point2> out;
    const size_t m = v.size();
    for (size_t i = 0; i < m; ++i) {
        const Point2& p = v[i];
        const Point2& q = v[(i + 1) % m];
        const double fp = nx * p[0] + ny * p[1] - c;
        const double fq = nx * q[0] + ny * q[1] - c;
        if (fp <= 0.0) out.push_back(p);
        if ((fp < 0.0 && fq > 0.0) || (fp > 0.0 && fq < 0.0)) {
            const double t = fp / (fp - fq);
            out.push_back({p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])});
        }
    }
    return out;
}

// Area of the inner parallel body of a convex ccw polygon at inset t.
inline double inner_parallel_area(const std::vector<Point2>& v, double t) {
    std::vector<Point2> cur = v;
    const size_t m = v.size();
    for (size_t i = 0; i < m && !cur.empty(); ++i) {
        const Point2& p = v[i];
        const Point2& q = v[(i + 1) % m];
        const double ex = q[0] - p[0], ey = q[1] - p[1];
        const double len = std::hypot(ex, ey);
        if (len == 0.0) continue;
        // outward normal of a ccw edge
        const double nx = ey / len, ny = -ex / len;
        const double c = nx * p[0] + ny * p[1] - t;
        cur = clip_halfplane(cur, nx, ny, c);
    }
    return cur.size() < 3 ? 0.0 : signed_area(cur);
}

}  // namespace poly

inline void validate(const Domain& d) {
    struct V {
        void operator()(const Ball& b) const {
            if (b.n < 2) throw InvalidInput("ball: dimension must be >= 2");
            if (!(b.r > 0.0)) throw InvalidInput("ball: radius must be positive");
        }
        void operator()(const Rectangle& r) const {
            if (!(r.a > 0.0) || !(r.b > 0.0)) throw InvalidInput("rectangle: sides must be positive");
        }
        void operator()(const Polygon2D& p) const {
            if (p.vertices.size() < 3) throw InvalidInput("polygon: needs at least 3 vertices");
            const double area = poly::signed_area(p.vertices);
            if (!(area > 0.0))
                throw InvalidInput(area == 0.0 ? "polygon: degenerate (zero area)"
                                               : "polygon: vertices must be counterclockwise");
            if (!poly::is_simple(p.vertices)) throw InvalidInput("polygon: self-intersecting");
        }
        void operator()(const Annulus& a) const {
            if (a.n < 2) throw InvalidInput("annulus: dimension must be >= 2");
            if (!(a.rho > 0.0) || !(a.R > a.rho)) throw InvalidInput("annulus: need 0 < rho < R");
        }
    };
    std::visit(V{}, d);
}

inline int dim(const Domain& d) {
    struct V {
        int operator()(const Ball& b) const { return b.n; }
        int operator()(const Rectangle&) const { return 2; }
        int operator()(const Polygon2D&) const { return 2; }
        int operator()(const Annulus& a) const { return a.n; }
    };
    return std::visit(V{}, d);
}

inline double volume(const Domain& d) {
    validate(d);
    struct V {
        double operator()(const Ball& b) const { return unit_ball_volume(b.n) * std::pow(b.r, b.n); }
        double operator()(const Rectangle& r) const { return r.a * r.b; }
        double operator()(const Polygon2D& p) const { return poly::signed_area(p.vertices); }
        double operator()(const Annulus& a) const {
            return unit_ball_volume(a.n) * (std::pow(a.R, a.n) - std::pow(a.rho, a.n));
        }
    };
    return std::visit(V{}, d);
}

inline double perimeter(const Domain& d) {
    validate(d);
    struct V {
        double operator()(const Ball& b) const {
            return b.n * unit_ball_volume(b.n) * std::pow(b.r, b.n - 1);
        }
        double operator()(const Rectangle& r) const { return 2.0 * (r.a + r.b); }
        double operator()(const Polygon2D& p) const { return poly::boundary_length(p.vertices); }
        double operator()(const Annulus& a) const {
            const double c = a.n * unit_ball_volume(a.n);
            return c * (std::pow(a.R, a.n - 1) + std::pow(a.rho, a.n - 1));
        }
    };
    return std::visit(V{}, d);
}

namespace detail {

// Max of the boundary-distance function over a polygon: coarse lattice scan
// of the exact edge distance, then pattern-search refinement.  Relative
// accuracy ~1e-6, far beyond the 1e-4 the downstream checks need.
inline double polygon_inradius(const Polygon2D& p) {
    const auto& v = p.vertices;
    double xmin = v[0][0], xmax = v[0][0], ymin = v[0][1], ymax = v[0][1];
    for (const auto& q : v) {
        xmin = std::min(xmin, q[0]);
        xmax = std::max(xmax, q[0]);
        ymin = std::min(ymin, q[1]);
        ymax = std::max(ymax, q[1]);
    }
    const int K = 256;
    const double hx = (xmax - xmin) / K, hy = (ymax - ymin) / K;
    double best = 0.0, bx = 0.0, by = 0.0;
    for (int j = 1; j < K; ++j) {
        for (int i = 1; i < K; ++i) {
            const double x = xmin + i * hx, y = ymin + j * hy;
            if (!poly::point_inside(v, x, y)) continue;
            const double dd = poly::boundary_distance(v, x, y);
            if (dd > best) {
                best = dd;
                bx = x;
                by = y;
            }
        }
    }
    if (best == 0.0) throw InvalidInput("polygon: inradius scan found no interior point");

    double step = std::max(hx, hy);
    const double scale = std::max(xmax - xmin, ymax - ymin);
    while (step > 1e-9 * scale) {
        bool moved = false;
        for (int dj = -1; dj <= 1; ++dj) {
            for (int di = -1; di <= 1; ++di) {
                if (di == 0 && dj == 0) continue;
                const double x = bx + di * step, y = by + dj * step;
                if (!poly::point_inside(v, x, y)) continue;
                const double dd = poly::boundary_distance(v, x, y);
                if (dd > best) {
                    best = dd;
                    bx = x;
                    by = y;
                    moved = true;
                }
            }
        }
        if (!moved) step *= 0.5;
    }
    return best;
}

}  // namespace detail

inline double inradius(const Domain& d) {
    validate(d);
    struct V {
        double operator()(const Ball& b) const { return b.r; }
        double operator()(const Rectangle& r) const { return 0.5 * std::min(r.a, r.b); }
        double operator()(const Polygon2D& p) const { return detail::polygon_inradius(p); }
        double operator()(const Annulus& a) const { return 0.5 * (a.R - a.rho); }
    };
    return std::visit(V{}, d);
}

// The ball with the same dimension and volume, centered at the origin.
inline Ball schwarz_ball(const Domain& d) {
    const int n = dim(d);
    const double r = std::pow(volume(d) / unit_ball_volume(n), 1.0 / n);
    return Ball{n, r, {0.0, 0.0}};
}

inline Domain scaled(const Domain& d, double c) {
    if (!(c > 0.0)) throw InvalidInput("scaled: factor must be positive");
    struct V {
        double c;
        Domain operator()(const Ball& b) const {
            return Ball{b.n, c * b.r, {c * b.center[0], c * b.center[1]}};
        }
        Domain operator()(const Rectangle& r) const { return Rectangle{c * r.a, c * r.b}; }
        Domain operator()(const Polygon2D& p) const {
            Polygon2D q = p;
            for (auto& v : q.vertices) {
                v[0] *= c;
                v[1] *= c;
            }
            return q;
        }
        Domain operator()(const Annulus& a) const { return Annulus{a.n, c * a.rho, c * a.R}; }
    };
    return std::visit(V{c}, d);
}

// perimeter / volume^((n-1)/n); bounded below by n omega_n^(1/n), with
// equality exactly for balls.
inline double isoperimetric_ratio(const Domain& d) {
    const int n = dim(d);
    return perimeter(d) / std::pow(volume(d), double(n - 1) / n);
}

inline bool is_convex(const Domain& d) {
    struct V {
        bool operator()(const Ball&) const { return true; }
        bool operator()(const Rectangle&) const { return true; }
        bool operator()(const Polygon2D& p) const { return poly::is_convex(p.vertices); }
        bool operator()(const Annulus&) const { return false; }
    };
    return std::visit(V{}, d);
}

// Axis-aligned bounding box; 2D domains only.
inline std::array<double, 4> bounding_box(const Domain& d) {
    if (dim(d) != 2) throw InvalidInput("bounding_box: 2D domains only");
    struct V {
        std::array<double, 4> operator()(const Ball& b) const {
            return {b.center[0] - b.r, b.center[1] - b.r, b.center[0] + b.r, b.center[1] + b.r};
        }
        std::array<double, 4> operator()(const Rectangle& r) const {
            return {-0.5 * r.a, -0.5 * r.b, 0.5 * r.a, 0.5 * r.b};
        }
        std::array<double, 4> operator()(const Polygon2D& p) const {
            double xmin = p.vertices[0][0], xmax = xmin;
            double ymin = p.vertices[0][1], ymax = ymin;
            for (const auto& v : p.vertices) {
                xmin = std::min(xmin, v[0]);
                xmax = std::max(xmax, v[0]);
                ymin = std::min(ymin, v[1]);
                ymax = std::max(ymax, v[1]);
            }
            return {xmin, ymin, xmax, ymax};
        }
        std::array<double, 4> operator()(const Annulus& a) const { return {-a.R, -a.R, a.R, a.R}; }
    };
    return std::visit(V{}, d);
}

// Strict interior test at a point; 2D domains only.
inline bool contains(const Domain& d, double x, double y) {
    struct V {
        double x, y;
        bool operator()(const Ball& b) const {
            return std::hypot(x - b.center[0], y - b.center[1]) < b.r;
        }
        bool operator()(const Rectangle& r) const {
            return std::fabs(x) < 0.5 * r.a && std::fabs(y) < 0.5 * r.b;
        }
        bool operator()(const Polygon2D& p) const { return poly::point_inside(p.vertices, x, y); }
        bool operator()(const Annulus& a) const {
            const double rr = std::hypot(x, y);
            return rr > a.rho && rr < a.R;
        }
    };
    return std::visit(V{x, y}, d);
}

inline std::string describe(const Domain& d) {
    struct V {
        std::string operator()(const Ball& b) const {
            return "ball(n=" + std::to_string(b.n) + ",r=" + fmt_g(b.r, 9) + ")";
        }
        std::string operator()(const Rectangle& r) const {
            return "rectangle(" + fmt_g(r.a, 9) + "x" + fmt_g(r.b, 9) + ")";
        }
        std::string operator()(const Polygon2D& p) const {
            return "polygon(" + std::to_string(p.vertices.size()) + " vertices)";
        }
        std::string operator()(const Annulus& a) const {
            return "annulus(n=" + std::to_string(a.n) + "," + fmt_g(a.rho, 9) + "," + fmt_g(a.R, 9) + ")";
        }
    };
    return std::visit(V{}, d);
}

}  // namespace pfk
