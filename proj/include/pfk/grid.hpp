#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <ostream>
#include <vector>

#include "pfk/geometry.hpp"

namespace pfk {

// Uniform-lattice rasterization of a 2D domain.  Cell (i,j) has center
// (x0 + (i+0.5)h, y0 + (j+0.5)h).  The border ring of cells is always
// outside, so forward differences never reach past the array.
struct GridMask {
    double x0 = 0.0, y0 = 0.0;
    double h = 1.0;
    int nx = 0, ny = 0;
    std::vector<uint8_t> inside;
    int inside_count = 0;

    int idx(int i, int j) const { return j * nx + i; }
    bool is_inside(int i, int j) const {
        return i >= 0 && j >= 0 && i < nx && j < ny && inside[idx(i, j)] != 0;
    }
    double cx(int i) const { return x0 + (i + 0.5) * h; }
    double cy(int j) const { return y0 + (j + 0.5) * h; }
    double area() const { return inside_count * h * h; }

    void recount() { inside_count = int(std::count(inside.begin(), inside.end(), uint8_t(1))); }
};

using MaskPtr = std::shared_ptr<const GridMask>;

// Scalar samples on a mask; identically zero outside it (the discrete
// stand-in for compact support).
struct GridField {
    MaskPtr mask;
    std::vector<double> values;

    double at(int i, int j) const {
        if (i < 0 || j < 0 || i >= mask->nx || j >= mask->ny) return 0.0;
        return values[mask->idx(i, j)];
    }
    double& ref(int i, int j) { return values[mask->idx(i, j)]; }
};

inline GridField make_field(MaskPtr m) {
    GridField f;
    f.mask = std::move(m);
    f.values.assign(size_t(f.mask->nx) * f.mask->ny, 0.0);
    return f;
}

inline GridField make_field(MaskPtr m, const std::function<double(double, double)>& fn) {
    GridField f = make_field(m);
    const GridMask& g = *f.mask;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.is_inside(i, j)) f.values[g.idx(i, j)] = fn(g.cx(i), g.cy(j));
    return f;
}

inline MaskPtr rasterize(const Domain& d, int resolution) {
    validate(d);
    if (dim(d) != 2) throw InvalidInput("rasterize: unsupported dimension (2D only)");
    if (resolution < 2) throw InvalidInput("rasterize: resolution too coarse");

    const auto bb = bounding_box(d);
    const double wx = bb[2] - bb[0], wy = bb[3] - bb[1];
    const double h = std::max(wx, wy) / resolution;

    auto g = std::make_shared<GridMask>();
    g->h = h;
    g->x0 = bb[0] - h;
    g->y0 = bb[1] - h;
    g->nx = int(std::ceil(wx / h - 1e-9)) + 2;
    g->ny = int(std::ceil(wy / h - 1e-9)) + 2;
    g->inside.assign(size_t(g->nx) * g->ny, 0);
    for (int j = 1; j < g->ny - 1; ++j)
        for (int i = 1; i < g->nx - 1; ++i)
            if (contains(d, g->cx(i), g->cy(j))) g->inside[g->idx(i, j)] = 1;
    g->recount();
    if (g->inside_count == 0) throw InvalidInput("rasterize: resolution too coarse (empty mask)");
    return g;
}

// sum_cells |forward-difference gradient|^p h^2, with zero Dirichlet
// extension across the support boundary.
inline double grad_p_integral(const GridField& f, double p) {
    if (!(p >= 1.0)) throw InvalidInput("grad_p_integral: invalid exponent (p must be >= 1)");
    const GridMask& g = *f.mask;
    const double inv_h = 1.0 / g.h;
    double sum = 0.0;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const double v = f.values[g.idx(i, j)];
            const double vx = (i + 1 < g.nx) ? f.values[g.idx(i + 1, j)] : 0.0;
            const double vy = (j + 1 < g.ny) ? f.values[g.idx(i, j + 1)] : 0.0;
            const double dx = (vx - v) * inv_h;
            const double dy = (vy - v) * inv_h;
            const double m2 = dx * dx + dy * dy;
            if (m2 > 0.0) sum += std::pow(m2, 0.5 * p);
        }
    }
    return sum * g.h * g.h;
}

inline double lp_integral(const GridField& f, double p) {
    if (!(p >= 1.0)) throw InvalidInput("lp_integral: invalid exponent (p must be >= 1)");
    const GridMask& g = *f.mask;
    double sum = 0.0;
    for (double v : f.values)
        if (v != 0.0) sum += std::pow(std::fabs(v), p);
    return sum * g.h * g.h;
}

inline MaskPtr superlevel_mask(const GridField& f, double t) {
    if (t < 0.0) throw InvalidInput("superlevel_mask: t must be nonnegative");
    const GridMask& g = *f.mask;
    auto out = std::make_shared<GridMask>(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.idx(i, j);
            out->inside[k] = (g.inside[k] && std::fabs(f.values[k]) >= t) ? 1 : 0;
        }
    out->recount();
    return out;
}

namespace detail {

// Felzenszwalb-Huttenlocher 1D squared distance transform.
inline void sq_dist_1d(const std::vector<double>& f, std::vector<double>& d, int n) {
    static thread_local std::vector<int> v;
    static thread_local std::vector<double> z;
    v.assign(n, 0);
    z.assign(n + 1, 0.0);
    const double INF = std::numeric_limits<double>::infinity();
    int k = 0;
    v[0] = 0;
    z[0] = -INF;
    z[1] = INF;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + q * q) - (f[v[k]] + v[k] * v[k])) / (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = INF;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        d[q] = sq(double(q - v[k])) + f[v[k]];
    }
}

}  // namespace detail

// Exact Euclidean distance to the nearest outside cell center; cells past
// the grid edge count as outside.  Values sit on the mask, zero elsewhere.
inline GridField distance_transform(MaskPtr m) {
    const GridMask& g = *m;
    if (g.inside_count == 0) throw InvalidInput("distance_transform: empty mask");
    const double INF = std::numeric_limits<double>::infinity();

    std::vector<double> work(size_t(g.nx) * g.ny);
    for (size_t k = 0; k < work.size(); ++k) work[k] = g.inside[k] ? INF : 0.0;

    // columns
    std::vector<double> col(g.ny), dcol(g.ny);
    for (int i = 0; i < g.nx; ++i) {
        for (int j = 0; j < g.ny; ++j) col[j] = work[g.idx(i, j)];
        detail::sq_dist_1d(col, dcol, g.ny);
        for (int j = 0; j < g.ny; ++j) work[g.idx(i, j)] = dcol[j];
    }
    // rows
    std::vector<double> row(g.nx), drow(g.nx);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) row[i] = work[g.idx(i, j)];
        detail::sq_dist_1d(row, drow, g.nx);
        for (int i = 0; i < g.nx; ++i) work[g.idx(i, j)] = drow[i];
    }

    GridField out = make_field(std::move(m));
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const int k = g.idx(i, j);
            if (!g.inside[k]) continue;
            double d = std::sqrt(work[k]);
            const double border = std::min(std::min(i + 1, g.nx - i), std::min(j + 1, g.ny - j));
            out.values[k] = g.h * std::min(d, border);
        }
    }
    return out;
}

// Decreasing radial rearrangement at cell granularity: the k values of f,
// sorted descending, are laid onto the k cells of a fresh origin-centered
// grid closest to the center (ties by lexicographic (row, column) index).
// Equimeasurability is exact by construction.
inline GridField schwarz_rearrange(const GridField& f) {
    const GridMask& g = *f.mask;
    std::vector<double> vals;
    vals.reserve(g.inside_count);
    for (size_t k = 0; k < f.values.size(); ++k) {
        if (!g.inside[k]) continue;
        if (f.values[k] < 0.0) throw InvalidInput("schwarz_rearrange: negative input values");
        vals.push_back(f.values[k]);
    }
    std::sort(vals.begin(), vals.end(), std::greater<double>());

    const int kcells = int(vals.size());
    const int mhalf = int(std::ceil(std::sqrt(double(kcells) / pi))) + 2;
    const int M = 2 * mhalf + 3;  // odd, with an outside border ring
    const int c = M / 2;

    auto tgt = std::make_shared<GridMask>();
    tgt->h = g.h;
    tgt->nx = tgt->ny = M;
    tgt->x0 = -(c + 0.5) * g.h;
    tgt->y0 = -(c + 0.5) * g.h;
    tgt->inside.assign(size_t(M) * M, 0);

    struct CellOrder {
        long r2;
        int j, i;
    };
    std::vector<CellOrder> order;
    order.reserve(size_t(M) * M);
    for (int j = 1; j < M - 1; ++j)
        for (int i = 1; i < M - 1; ++i) {
            const long di = i - c, dj = j - c;
            order.push_back({di * di + dj * dj, j, i});
        }
    std::sort(order.begin(), order.end(), [](const CellOrder& a, const CellOrder& b) {
        if (a.r2 != b.r2) return a.r2 < b.r2;
        if (a.j != b.j) return a.j < b.j;
        return a.i < b.i;
    });
    if (kcells > int(order.size())) throw SolverFailure("schwarz_rearrange: target grid too small");

    for (int k = 0; k < kcells; ++k) tgt->inside[tgt->idx(order[k].i, order[k].j)] = 1;
    tgt->recount();

    GridField out = make_field(tgt);
    for (int k = 0; k < kcells; ++k) out.values[tgt->idx(order[k].i, order[k].j)] = vals[k];
    return out;
}

// Marching-squares length of the |f| = level contour, linear interpolation
// between cell centers.  Outside cells contribute value 0.
inline double contour_length(const GridField& f, double level) {
    const GridMask& g = *f.mask;
    double total = 0.0;
    auto val = [&](int i, int j) { return std::fabs(f.at(i, j)); };
    for (int j = 0; j < g.ny - 1; ++j) {
        for (int i = 0; i < g.nx - 1; ++i) {
            const double v00 = val(i, j), v10 = val(i + 1, j);
            const double v01 = val(i, j + 1), v11 = val(i + 1, j + 1);
            int code = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) | (v01 >= level ? 4 : 0) |
                       (v11 >= level ? 8 : 0);
            if (code == 0 || code == 15) continue;
            auto frac = [&](double a, double b) {
                const double d = b - a;
                return d == 0.0 ? 0.5 : std::clamp((level - a) / d, 0.0, 1.0);
            };
            // crossing points on the four edges of the dual cell, in units of h
            const double bx = frac(v00, v10);        // bottom edge  (y=0)
            const double tx = frac(v01, v11);        // top edge     (y=1)
            const double ly = frac(v00, v01);        // left edge    (x=0)
            const double ry = frac(v10, v11);        // right edge   (x=1)
            auto seg = [&](double x1, double y1, double x2, double y2) {
                total += g.h * std::hypot(x2 - x1, y2 - y1);
            };
            switch (code) {
                case 1: case 14: seg(bx, 0, 0, ly); break;
                case 2: case 13: seg(bx, 0, 1, ry); break;
                case 4: case 11: seg(0, ly, tx, 1); break;
                case 8: case 7:  seg(1, ry, tx, 1); break;
                case 3: case 12: seg(0, ly, 1, ry); break;
                case 5: case 10: seg(bx, 0, tx, 1); break;
                case 6: case 9: {
                    // saddle: split by the cell-center average
                    const double mid = 0.25 * (v00 + v10 + v01 + v11);
                    const bool connect_low = (mid >= level) == (code == 6);
                    if (connect_low) {
                        seg(bx, 0, 1, ry);
                        seg(0, ly, tx, 1);
                    } else {
                        seg(bx, 0, 0, ly);
                        seg(1, ry, tx, 1);
                    }
                    break;
                }
            }
        }
    }
    return total;
}

// CSV matrix preceded by a one-line structured header.
inline void export_csv(const GridField& f, std::ostream& os) {
    const GridMask& g = *f.mask;
    os << "# {\"origin\":[" << fmt_g17(g.x0) << "," << fmt_g17(g.y0) << "],\"h\":" << fmt_g17(g.h)
       << ",\"nx\":" << g.nx << ",\"ny\":" << g.ny << "}\n";
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (i) os << ',';
            os << fmt_g17(f.values[g.idx(i, j)]);
        }
        os << '\n';
    }
}

}  // namespace pfk
