#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "pfk/descent.hpp"
#include "pfk/geometry.hpp"
#include "pfk/grid.hpp"
#include "pfk/spectral.hpp"

namespace pfk {

enum class BallCapCase {
    whole_space,    // cap_p(B_r; R^n), 1 <= p < n
    zero_at_p_n,    // p = n relative to the ball itself: 0
    point_in_ball,  // p > n: capacity of the center point relative to B_r
};

struct BallCapacity {
    double value = 0.0;
    BallCapCase which = BallCapCase::whole_space;
};

// Closed-form ball capacities; (p-1)^(p-1) is taken as 1 at p = 1, which
// lands cap_1 exactly on the ball's perimeter.
inline BallCapacity ball_capacity(int n, double p, double r) {
    if (n < 2) throw InvalidInput("ball_capacity: dimension must be >= 2");
    if (!(p >= 1.0)) throw InvalidInput("ball_capacity: p must be >= 1");
    if (!(r > 0.0)) throw InvalidInput("ball_capacity: radius must be positive");
    const double nwn = n * unit_ball_volume(n);
    if (p < n) {
        const double c = (p == 1.0) ? 1.0 : std::pow((n - p) / (p - 1.0), p - 1.0);
        return {nwn * c * std::pow(r, n - p), BallCapCase::whole_space};
    }
    if (p == n) return {0.0, BallCapCase::zero_at_p_n};
    return {nwn * std::pow((p - n) / (p - 1.0), p - 1.0) * std::pow(r, n - p),
            BallCapCase::point_in_ball};
}

// cap_p of the closed ball of radius rho relative to the concentric ball of
// radius R (the radial condenser), all p >= 1.
inline double concentric_ball_capacity(int n, double p, double rho, double R) {
    if (n < 2) throw InvalidInput("concentric_ball_capacity: dimension must be >= 2");
    if (!(p >= 1.0)) throw InvalidInput("concentric_ball_capacity: p must be >= 1");
    if (!(rho > 0.0) || !(R > rho)) throw InvalidInput("concentric_ball_capacity: need 0 < rho < R");
    const double nwn = n * unit_ball_volume(n);
    if (p == 1.0) return nwn * std::pow(rho, n - 1);  // enclosing-perimeter limit
    if (p == double(n)) return nwn * std::pow(std::log(R / rho), 1.0 - double(n));
    const double beta = (p - n) / (p - 1.0);
    const double c = std::pow(std::fabs(n - p) / (p - 1.0), p - 1.0);
    return nwn * c * std::pow(std::fabs(std::pow(rho, beta) - std::pow(R, beta)), 1.0 - p);
}

struct CondenserProblem {
    MaskPtr inner;  // compact set K, potential pinned to 1
    MaskPtr outer;  // open set O, potential 0 outside
    double p = 2.0;
};

struct CondenserResult {
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
    GridField potential;  // minimizing field, for level-set reuse
};

namespace detail {

inline void check_same_grid(const GridMask& a, const GridMask& b) {
    if (a.nx != b.nx || a.ny != b.ny || a.h != b.h || a.x0 != b.x0 || a.y0 != b.y0)
        throw InvalidInput("condenser: inner and outer masks live on different grids");
}

inline void check_separation(const GridMask& inner, const GridMask& outer) {
    if (inner.inside_count == 0) throw InvalidInput("invalid-condenser: inner set is empty");
    for (int j = 0; j < inner.ny; ++j) {
        for (int i = 0; i < inner.nx; ++i) {
            if (!inner.is_inside(i, j)) continue;
            if (!outer.is_inside(i, j))
                throw InvalidInput("invalid-condenser: inner set not contained in outer set");
            if (!outer.is_inside(i - 1, j) || !outer.is_inside(i + 1, j) ||
                !outer.is_inside(i, j - 1) || !outer.is_inside(i, j + 1))
                throw InvalidInput("invalid-condenser: no cell layer separating inner from outer boundary");
        }
    }
}

}  // namespace detail

// Variational condenser capacity: minimizes the p-gradient energy over
// fields clamped to [0,1] with f = 1 on the inner cells and f = 0 outside
// the outer mask.  Solves a p = 2 warm start first, then polishes at p.
inline CondenserResult condenser_capacity(const CondenserProblem& prob,
                                          const SolverOptions& opts = {}) {
    if (!(prob.p > 1.0)) throw InvalidInput("condenser_capacity: p must exceed 1 (route p = 1 via cap1_convex)");
    const GridMask& in = *prob.inner;
    const GridMask& out = *prob.outer;
    detail::check_same_grid(in, out);
    detail::check_separation(in, out);

    detail::PEnergy pe;
    pe.grid = &out;
    pe.clamp01 = true;
    pe.free_cells.reserve(out.inside_count - in.inside_count);
    for (int j = 0; j < out.ny; ++j)
        for (int i = 0; i < out.nx; ++i)
            if (out.is_inside(i, j) && !in.is_inside(i, j)) pe.free_cells.push_back(out.idx(i, j));
    if (pe.free_cells.empty()) throw InvalidInput("invalid-condenser: no free cells between inner and outer");

    GridField f = make_field(prob.outer);
    for (int j = 0; j < in.ny; ++j)
        for (int i = 0; i < in.nx; ++i)
            if (in.is_inside(i, j)) f.values[in.idx(i, j)] = 1.0;

    CondenserResult res;
    int iters = 0;
    if (prob.p != 2.0) {
        pe.p = 2.0;
        pe.eps2 = 0.0;
        iters += detail::minimize_p_energy(pe, f.values, 1e-8, opts.inner_max_iterations).iterations;
    }
    pe.p = prob.p;
    pe.eps2 = (prob.p < 2.0) ? sq(1e-12 / out.h) : 0.0;
    auto dres = detail::minimize_p_energy(pe, f.values, opts.inner_tolerance, opts.inner_max_iterations);
    iters += dres.iterations;

    res.value = grad_p_integral(f, prob.p);
    res.converged = dres.converged;
    res.iterations = iters;
    res.potential = std::move(f);
    return res;
}

// cap_1 of a convex compact set relative to the whole space: the infimum of
// enclosing-surface area, attained by the set's own boundary.
inline double cap1_convex(const Domain& K) {
    validate(K);
    if (!is_convex(K))
        throw InvalidInput("cap1_convex: unsupported for nonconvex sets (use the p -> 1 condenser route)");
    return perimeter(K);
}

namespace detail {

// Unique root of  inner_parallel_area(t) = pi t^2  on (0, inradius); the
// Cheeger constant of a convex planar body is 1/t at that root.
template <typename AreaFn>
inline double convex_cheeger_root(AreaFn area, double inr) {
    double lo = 0.0, hi = inr;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (area(mid) - pi * mid * mid > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    const double t = 0.5 * (lo + hi);
    if (!(t > 0.0)) throw SolverFailure("cheeger_constant: inner-parallel bisection lost its bracket");
    return 1.0 / t;
}

}  // namespace detail

// Cheeger constant h(Omega).  Balls are exact (n/R); convex planar bodies
// use the inner-parallel characterization; anything else takes the best
// boundary/volume ratio over distance-transform superlevel candidates.
inline double cheeger_constant(const Domain& d, int resolution = 256) {
    validate(d);
    if (const Ball* b = std::get_if<Ball>(&d)) return double(b->n) / b->r;

    if (const Rectangle* r = std::get_if<Rectangle>(&d)) {
        const double a = r->a, b2 = r->b;
        auto area = [&](double t) { return (a - 2.0 * t) * (b2 - 2.0 * t); };
        return detail::convex_cheeger_root(area, 0.5 * std::min(a, b2));
    }
    if (const Polygon2D* pg = std::get_if<Polygon2D>(&d); pg && poly::is_convex(pg->vertices)) {
        auto area = [&](double t) { return poly::inner_parallel_area(pg->vertices, t); };
        return detail::convex_cheeger_root(area, inradius(d));
    }

    // generic 2D domain: the domain itself plus distance superlevels
    if (dim(d) != 2) throw InvalidInput("cheeger_constant: generic path supports 2D only");
    double best = perimeter(d) / volume(d);
    const MaskPtr m = rasterize(d, resolution);
    const GridField dt = distance_transform(m);
    double dmax = 0.0;
    for (double v : dt.values) dmax = std::max(dmax, v);
    const int levels = 64;
    for (int k = 1; k <= levels; ++k) {
        const double s = dmax * k / (levels + 1.0);
        const MaskPtr sl = superlevel_mask(dt, s);
        if (sl->inside_count == 0) continue;
        const double A = contour_length(dt, s);
        const double V = sl->area();
        if (A > 0.0 && V > 0.0) best = std::min(best, A / V);
    }
    return best;
}

struct MazyaEstimate {
    double gamma_upper = 0.0;  // best cap_p(S;Omega)/V(S) over the family
    std::string witness;
    int family_size = 0;
    int candidates_evaluated = 0;
};

namespace detail {

inline uint64_t mask_key(const GridMask& m) {
    uint64_t hsh = 1469598103934665603ull;
    for (uint8_t b : m.inside) {
        hsh ^= b;
        hsh *= 1099511628211ull;
    }
    return hsh ^ (uint64_t(m.inside_count) << 32);
}

inline bool separated(const GridMask& inner, const GridMask& outer) {
    for (int j = 0; j < inner.ny; ++j)
        for (int i = 0; i < inner.nx; ++i) {
            if (!inner.is_inside(i, j)) continue;
            if (!outer.is_inside(i, j) || !outer.is_inside(i - 1, j) || !outer.is_inside(i + 1, j) ||
                !outer.is_inside(i, j - 1) || !outer.is_inside(i, j + 1))
                return false;
        }
    return true;
}

}  // namespace detail

// Upper estimate of the Mazya constant gamma_p = inf cap_p(S;Omega)/V(S):
// candidates are superlevel sets of the principal eigenfunction at quantile
// thresholds plus inward offsets of the domain (distance superlevels).
inline MazyaEstimate mazya_estimate(const Domain& d, double p, const EigenResult& eig,
                                    int family_size, const SolverOptions& opts = {}) {
    if (!(p > 1.0)) throw InvalidInput("mazya_estimate: p must exceed 1");
    if (!eig.has_field) throw InvalidInput("mazya_estimate: needs a grid eigenfunction");
    (void)d;
    const GridField& u = eig.eigenfunction;
    const MaskPtr outer = u.mask;

    struct Candidate {
        MaskPtr m;
        std::string label;
    };
    std::vector<Candidate> cands;

    std::vector<double> pos;
    pos.reserve(outer->inside_count);
    for (size_t k = 0; k < u.values.size(); ++k)
        if (outer->inside[k] && u.values[k] > 0.0) pos.push_back(u.values[k]);
    std::sort(pos.begin(), pos.end());
    for (int q = 1; q <= family_size && !pos.empty(); ++q) {
        const size_t ix = size_t(double(q) / (family_size + 1.0) * (pos.size() - 1));
        const double t = pos[ix];
        cands.push_back({superlevel_mask(u, t), "eigenfunction superlevel t=" + fmt_g(t, 6)});
    }

    const GridField dt = distance_transform(outer);
    double dmax = 0.0;
    for (double v : dt.values) dmax = std::max(dmax, v);
    for (int q = 1; q <= family_size; ++q) {
        const double s = dmax * q / (family_size + 1.0);
        cands.push_back({superlevel_mask(dt, s), "distance superlevel s=" + fmt_g(s, 6)});
    }

    MazyaEstimate est;
    est.family_size = family_size;
    std::vector<uint64_t> seen;
    for (const auto& c : cands) {
        if (c.m->inside_count == 0 || c.m->inside_count == outer->inside_count) continue;
        if (!detail::separated(*c.m, *outer)) continue;
        const uint64_t key = detail::mask_key(*c.m);
        bool dup = false;
        for (uint64_t s : seen)
            if (s == key) {
                dup = true;
                break;
            }
        if (dup) continue;
        seen.push_back(key);

        CondenserProblem prob{c.m, outer, p};
        const CondenserResult cr = condenser_capacity(prob, opts);
        const double ratio = cr.value / c.m->area();
        ++est.candidates_evaluated;
        if (est.witness.empty() || ratio < est.gamma_upper) {
            est.gamma_upper = ratio;
            est.witness = c.label + " (area " + fmt_g(c.m->area(), 6) + ")";
        }
    }
    if (est.candidates_evaluated == 0)
        throw SolverFailure("mazya_estimate: no admissible candidate in the family");
    return est;
}

// Single-cell condenser at (or nearest) a point: the grid realization of a
// point's p-capacity for p > n.
inline CondenserResult grid_point_capacity(MaskPtr outer, double p, double x, double y,
                                           const SolverOptions& opts = {}) {
    const GridMask& g = *outer;
    int bi = -1, bj = -1;
    double bd = std::numeric_limits<double>::infinity();
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            if (!g.is_inside(i, j)) continue;
            const double dd = sq(g.cx(i) - x) + sq(g.cy(j) - y);
            if (dd < bd) {
                bd = dd;
                bi = i;
                bj = j;
            }
        }
    if (bi < 0) throw InvalidInput("grid_point_capacity: empty outer mask");
    auto inner = std::make_shared<GridMask>(g);
    std::fill(inner->inside.begin(), inner->inside.end(), uint8_t(0));
    inner->inside[g.idx(bi, bj)] = 1;
    inner->recount();
    return condenser_capacity({inner, outer, p}, opts);
}

// Estimate cap_1 from capacities at a few p > 1: divide out the universal
// ((n-p)/(p-1))^(p-1) factor, then extrapolate log-linearly in p-1 to 0.
inline double cap_p1_extrapolate(const std::vector<std::pair<double, double>>& caps, int n) {
    if (caps.size() < 2) throw InvalidInput("cap_p1_extrapolate: need at least two samples");
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (auto [p, cap] : caps) {
        if (!(p > 1.0) || !(p < n)) throw InvalidInput("cap_p1_extrapolate: samples need 1 < p < n");
        const double delta = p - 1.0;
        const double y = std::log(cap) - (p - 1.0) * std::log((n - p) / (p - 1.0));
        sx += delta;
        sy += y;
        sxx += delta * delta;
        sxy += delta * y;
    }
    const double m = double(caps.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    const double icept = (sy - slope * sx) / m;
    return std::exp(icept);
}

}  // namespace pfk
