#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "pfk/descent.hpp"
#include "pfk/grid.hpp"
#include "pfk/special_functions.hpp"

namespace pfk {

struct SolverOptions {
    double tolerance = 1e-6;        // relative eigenvalue change at termination
    int max_iterations = 500;       // outer inverse-iteration cap
    double inner_tolerance = 1e-10; // relative energy decrease cutoff, inner solve
    int inner_max_iterations = 20000;
    unsigned seed = 0;              // 0 keeps the deterministic all-ones start
};

struct EigenResult {
    double lambda = 0.0;
    double p = 0.0;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;

    // grid solver output
    bool has_field = false;
    GridField eigenfunction;

    // radial solver output: u and u' sampled uniformly on [0, R]
    bool has_profile = false;
    int radial_n = 0;
    double radial_R = 0.0;
    std::vector<double> profile_r, profile_u, profile_du;
};

namespace detail {

// ---------------------------------------------------------------- radial ODE

// (r^(n-1) |u'|^(p-2) u')' = -lambda r^(n-1) |u|^(p-2) u, integrated in the
// flux variable W = r^(n-1)|u'|^(p-2)u' to dodge the nonsmooth power.
struct RadialShoot {
    int n;
    double p, lambda;

    void deriv(double r, double u, double W, double& du, double& dW) const {
        const double q = 1.0 / (p - 1.0);
        const double rn1 = std::pow(r, n - 1);
        const double w = W / rn1;
        du = (w == 0.0) ? 0.0 : std::copysign(std::pow(std::fabs(w), q), w);
        dW = -lambda * rn1 * ((u == 0.0) ? 0.0 : std::copysign(std::pow(std::fabs(u), p - 1.0), u));
    }
};

// Cash-Karp embedded RK45 step for the 2-state radial system.
inline void ck45_step(const RadialShoot& f, double r, double u, double W, double h, double& u5,
                      double& W5, double& err) {
    static const double a2 = 0.2, a3 = 0.3, a4 = 0.6, a5 = 1.0, a6 = 0.875;
    static const double b21 = 0.2;
    static const double b31 = 3.0 / 40.0, b32 = 9.0 / 40.0;
    static const double b41 = 0.3, b42 = -0.9, b43 = 1.2;
    static const double b51 = -11.0 / 54.0, b52 = 2.5, b53 = -70.0 / 27.0, b54 = 35.0 / 27.0;
    static const double b61 = 1631.0 / 55296.0, b62 = 175.0 / 512.0, b63 = 575.0 / 13824.0,
                        b64 = 44275.0 / 110592.0, b65 = 253.0 / 4096.0;
    static const double c1 = 37.0 / 378.0, c3 = 250.0 / 621.0, c4 = 125.0 / 594.0,
                        c6 = 512.0 / 1771.0;
    static const double d1 = 2825.0 / 27648.0, d3 = 18575.0 / 48384.0, d4 = 13525.0 / 55296.0,
                        d5 = 277.0 / 14336.0, d6 = 0.25;

    double k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w, k5u, k5w, k6u, k6w;
    f.deriv(r, u, W, k1u, k1w);
    f.deriv(r + a2 * h, u + h * b21 * k1u, W + h * b21 * k1w, k2u, k2w);
    f.deriv(r + a3 * h, u + h * (b31 * k1u + b32 * k2u), W + h * (b31 * k1w + b32 * k2w), k3u, k3w);
    f.deriv(r + a4 * h, u + h * (b41 * k1u + b42 * k2u + b43 * k3u),
            W + h * (b41 * k1w + b42 * k2w + b43 * k3w), k4u, k4w);
    f.deriv(r + a5 * h, u + h * (b51 * k1u + b52 * k2u + b53 * k3u + b54 * k4u),
            W + h * (b51 * k1w + b52 * k2w + b53 * k3w + b54 * k4w), k5u, k5w);
    f.deriv(r + a6 * h, u + h * (b61 * k1u + b62 * k2u + b63 * k3u + b64 * k4u + b65 * k5u),
            W + h * (b61 * k1w + b62 * k2w + b63 * k3w + b64 * k4w + b65 * k5w), k6u, k6w);

    u5 = u + h * (c1 * k1u + c3 * k3u + c4 * k4u + c6 * k6u);
    W5 = W + h * (c1 * k1w + c3 * k3w + c4 * k4w + c6 * k6w);
    const double u4 = u + h * (d1 * k1u + d3 * k3u + d4 * k4u + d5 * k5u + d6 * k6u);
    const double W4 = W + h * (d1 * k1w + d3 * k3w + d4 * k4w + d5 * k5w + d6 * k6w);
    err = std::fabs(u5 - u4) + std::fabs(W5 - W4);
}

struct ShootOutcome {
    bool overshoot = false;  // u crossed zero before R
    double u_end = 0.0;
};

// Series start at r = eps: u = 1 - a r^s with s = p/(p-1),
// a = ((p-1)/p) (lambda/n)^(1/(p-1)); W = -(lambda/n) r^n.
inline void series_start(int n, double p, double lambda, double eps, double& u, double& W) {
    const double s = p / (p - 1.0);
    const double a = ((p - 1.0) / p) * std::pow(lambda / n, 1.0 / (p - 1.0));
    u = 1.0 - a * std::pow(eps, s);
    W = -(lambda / n) * std::pow(eps, n);
}

inline ShootOutcome shoot(int n, double p, double lambda, double R, double rk_tol) {
    RadialShoot f{n, p, lambda};
    double r = 1e-6 * R;
    double u, W;
    series_start(n, p, lambda, r, u, W);

    double h = 1e-4 * R;
    const double hmin = 1e-14 * R;
    ShootOutcome out;
    while (r < R) {
        if (r + h > R) h = R - r;
        double u5, W5, err;
        ck45_step(f, r, u, W, h, u5, W5, err);
        const double scale = std::fabs(u) + std::fabs(W) + 1e-12;
        if (err > rk_tol * scale && h > hmin) {
            h = std::max(hmin, 0.9 * h * std::pow(rk_tol * scale / err, 0.25));
            continue;
        }
        r += h;
        u = u5;
        W = W5;
        if (err > 0.0) h = std::min(0.9 * h * std::pow(rk_tol * scale / err, 0.2), 5.0 * h);
        h = std::min(h, 0.02 * R);
        if (u <= 0.0) {
            out.overshoot = true;
            out.u_end = u;
            return out;
        }
    }
    out.u_end = u;
    return out;
}

// Resample of the converged trajectory on the exactly uniform grid
// r_k = k R/(samples-1); quadrature accuracy depends on the nodes being
// uniform to the last bit.
inline void sample_profile(int n, double p, double lambda, double R, int samples,
                           std::vector<double>& rr, std::vector<double>& uu,
                           std::vector<double>& du) {
    RadialShoot f{n, p, lambda};
    const int substeps = 16;
    const double r0 = 1e-6 * R;

    rr.assign(samples, 0.0);
    uu.assign(samples, 0.0);
    du.assign(samples, 0.0);

    double r = r0, u, W;
    series_start(n, p, lambda, r0, u, W);
    bool dead = false;
    const double q = 1.0 / (p - 1.0);
    auto uprime = [&](double rv, double Wv) {
        const double w = Wv / std::pow(rv, n - 1);
        return (w == 0.0) ? 0.0 : std::copysign(std::pow(std::fabs(w), q), w);
    };
    auto rk4 = [&](double h) {
        double k1u, k1w, k2u, k2w, k3u, k3w, k4u, k4w;
        f.deriv(r, u, W, k1u, k1w);
        f.deriv(r + 0.5 * h, u + 0.5 * h * k1u, W + 0.5 * h * k1w, k2u, k2w);
        f.deriv(r + 0.5 * h, u + 0.5 * h * k2u, W + 0.5 * h * k2w, k3u, k3w);
        f.deriv(r + h, u + h * k3u, W + h * k3w, k4u, k4w);
        u += h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        W += h / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
        r += h;
    };

    rr[0] = 0.0;
    uu[0] = 1.0;
    du[0] = 0.0;
    for (int k = 1; k < samples; ++k) {
        const double target = R * k / double(samples - 1);
        const double h = (target - r) / substeps;
        for (int s = 0; s < substeps; ++s) rk4(h);
        r = target;  // kill accumulated roundoff in the node position
        // only a genuine crossing kills the tail; the converged trajectory
        // grazes zero at R within roundoff and must keep its derivative
        if (u < -1e-9) dead = true;
        rr[k] = target;
        uu[k] = dead ? 0.0 : std::max(u, 0.0);
        du[k] = dead ? 0.0 : uprime(r, W);
    }
}

// composite Simpson on uniformly spaced samples (odd count)
inline double simpson(const std::vector<double>& y, double h) {
    const int m = int(y.size());
    double s = y[0] + y[m - 1];
    for (int i = 1; i < m - 1; ++i) s += y[i] * ((i % 2) ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace detail

// Rayleigh quotient of a sampled radial profile:
//   int |u'|^p r^(n-1) dr / int |u|^p r^(n-1) dr.
inline double radial_rayleigh_quotient(const std::vector<double>& r, const std::vector<double>& u,
                                       const std::vector<double>& du, int n, double p) {
    const int m = int(r.size());
    std::vector<double> num(m), den(m);
    for (int i = 0; i < m; ++i) {
        const double rn1 = std::pow(r[i], n - 1);
        num[i] = std::pow(std::fabs(du[i]), p) * rn1;
        den[i] = std::pow(std::fabs(u[i]), p) * rn1;
    }
    const double h = r[1] - r[0];
    return detail::simpson(num, h) / detail::simpson(den, h);
}

// Principal radial eigenvalue on the n-ball of radius R by shooting with
// bisection on lambda.  The reported lambda is the Rayleigh quotient of the
// sampled eigenfunction; the bisection bracket pins it to |bracket|/2 + O(quad).
inline EigenResult eigen_radial_shoot(int n, double p, double R, double tol) {
    if (n < 2) throw InvalidInput("eigen_radial_shoot: dimension must be >= 2");
    if (!(p > 1.0)) throw InvalidInput("p must exceed 1");
    if (!(R > 0.0)) throw InvalidInput("eigen_radial_shoot: radius must be positive");
    if (!(tol > 0.0)) throw InvalidInput("eigen_radial_shoot: tolerance must be positive");

    const double rk_tol = 1e-12;

    // Bhattacharya's bound scaled to radius R sits strictly below lambda.
    const double bhat = std::pow(double(n), 2.0 - p) * std::pow(p, p - 1.0) *
                        std::pow(p - 1.0, 1.0 - p) * std::pow(R, -p);
    double lo = 0.5 * bhat;
    // Rayleigh quotient of the tent 1 - r/R always overshoots.
    const double tentrq =
        std::pow(R, -p) * gamma_fn(n + p + 1.0) / (n * gamma_fn(double(n)) * gamma_fn(p + 1.0));
    double hi = tentrq;

    int guard = 0;
    while (!detail::shoot(n, p, hi, R, rk_tol).overshoot) {
        hi *= 2.0;
        if (++guard > 60) throw SolverFailure("eigen_radial_shoot: no overshoot bracket found");
    }
    guard = 0;
    while (detail::shoot(n, p, lo, R, rk_tol).overshoot) {
        lo *= 0.5;
        if (++guard > 60)
            throw SolverFailure("eigen_radial_shoot: no undershoot bracket found (bracket [" +
                                fmt_g(lo) + "," + fmt_g(hi) + "])");
    }

    const double width_target = std::min(tol, 1e-9 * std::max(1.0, hi));
    int iters = 0;
    while (hi - lo > width_target && iters < 200) {
        const double mid = 0.5 * (lo + hi);
        if (detail::shoot(n, p, mid, R, rk_tol).overshoot)
            hi = mid;
        else
            lo = mid;
        ++iters;
    }
    const double lam_mid = 0.5 * (lo + hi);

    EigenResult res;
    res.p = p;
    res.radial_n = n;
    res.radial_R = R;
    res.has_profile = true;
    res.iterations = iters;
    res.converged = (hi - lo) <= std::max(tol, width_target * 1.0001);

    detail::sample_profile(n, p, lam_mid, R, 4097, res.profile_r, res.profile_u, res.profile_du);
    const double rq = radial_rayleigh_quotient(res.profile_r, res.profile_u, res.profile_du, n, p);
    res.lambda = rq;
    res.residual = 0.5 * (hi - lo) + std::fabs(rq - lam_mid);
    return res;
}

// Bilinear resample of a field onto another grid's mask (zero where the
// source has no support).  Used for coarse-to-fine warm starts.
inline GridField resample_field(const GridField& src, MaskPtr dst) {
    const GridMask& s = *src.mask;
    GridField out = make_field(std::move(dst));
    const GridMask& g = *out.mask;
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            if (!g.is_inside(i, j)) continue;
            const double fx = (g.cx(i) - s.x0) / s.h - 0.5;
            const double fy = (g.cy(j) - s.y0) / s.h - 0.5;
            const int i0 = int(std::floor(fx)), j0 = int(std::floor(fy));
            const double ax = fx - i0, ay = fy - j0;
            const double v = (1 - ax) * (1 - ay) * src.at(i0, j0) + ax * (1 - ay) * src.at(i0 + 1, j0) +
                             (1 - ax) * ay * src.at(i0, j0 + 1) + ax * ay * src.at(i0 + 1, j0 + 1);
            out.values[g.idx(i, j)] = std::max(v, 0.0);
        }
    }
    return out;
}

// Grid inverse iteration: each sweep solves the convex problem
//   min (1/p) * grad_p(v) - sum |u_k|^(p-2) u_k v h^2
// then normalizes.  Positivity of the iterates keeps the scheme on the
// principal pair.  An optional initial field seeds the iteration (warm
// starts); the default is the deterministic all-ones start.
inline EigenResult eigen_grid(MaskPtr m, double p, const SolverOptions& opts = {},
                              const GridField* init = nullptr) {
    if (!(p > 1.0)) throw InvalidInput("p must exceed 1");
    const GridMask& g = *m;
    if (g.inside_count == 0) throw InvalidInput("eigen_grid: empty mask");

    GridField u = make_field(m);
    if (init != nullptr) {
        double mx = 0.0;
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.is_inside(i, j)) {
                    const double v = std::max(init->at(i, j), 0.0);
                    u.values[g.idx(i, j)] = v;
                    mx = std::max(mx, v);
                }
        if (mx == 0.0) init = nullptr;  // degenerate seed, fall through
    }
    if (init == nullptr && opts.seed == 0) {
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.is_inside(i, j)) u.values[g.idx(i, j)] = 1.0;
    } else if (init == nullptr) {
        std::mt19937 rng(opts.seed);
        std::uniform_real_distribution<double> dist(0.5, 1.5);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                if (g.is_inside(i, j)) u.values[g.idx(i, j)] = dist(rng);
    }

    auto normalize = [&](GridField& f) {
        const double nrm = std::pow(lp_integral(f, p), 1.0 / p);
        if (!(nrm > 0.0)) throw SolverFailure("eigen_grid: iterate collapsed to zero");
        for (double& v : f.values) v /= nrm;
    };
    normalize(u);

    detail::PEnergy prob;
    prob.grid = m.get();
    prob.p = p;
    prob.eps2 = (p < 2.0) ? sq(1e-12 / g.h) : 0.0;
    prob.clamp01 = false;
    prob.free_cells.reserve(g.inside_count);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i)
            if (g.is_inside(i, j)) prob.free_cells.push_back(g.idx(i, j));

    std::vector<double> gvec(u.values.size(), 0.0);
    prob.lin = &gvec;

    double lambda = grad_p_integral(u, p) / lp_integral(u, p);
    std::vector<double> v = u.values;
    const double mu0 = std::pow(lambda, 1.0 / (1.0 - p));
    for (int k : prob.free_cells) v[k] *= mu0;

    EigenResult res;
    res.p = p;
    double residual = 1.0;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        for (int k : prob.free_cells) gvec[k] = std::pow(u.values[k], p - 1.0);
        detail::minimize_p_energy(prob, v, opts.inner_tolerance, opts.inner_max_iterations);

        GridField unew = make_field(m);
        for (int k : prob.free_cells) unew.values[k] = std::max(v[k], 0.0);
        normalize(unew);
        const double lam_new = grad_p_integral(unew, p) / lp_integral(unew, p);
        residual = std::fabs(lam_new - lambda) / std::fabs(lam_new);
        u = std::move(unew);
        lambda = lam_new;
        if (residual < opts.tolerance) {
            ++it;
            break;
        }
        const double mu = std::pow(lambda, 1.0 / (1.0 - p));
        for (int k : prob.free_cells) v[k] = u.values[k] * mu;
    }

    res.lambda = grad_p_integral(u, p) / lp_integral(u, p);
    res.iterations = it;
    res.residual = residual;
    res.converged = residual < opts.tolerance;
    res.has_field = true;
    res.eigenfunction = std::move(u);
    return res;
}

// Coarse-to-fine drive of eigen_grid: solves on res/4 and res/2 rasters
// first and prolongs the eigenfunction, which removes most of the
// low-frequency error before the expensive fine solve.  The final level is
// the plain eigen_grid minimization on the target raster.
inline EigenResult eigen_grid_domain(const Domain& d, double p, int resolution,
                                     const SolverOptions& opts = {}) {
    std::vector<int> levels;
    for (int r = resolution; r >= 32; r /= 2) levels.push_back(r);
    std::reverse(levels.begin(), levels.end());
    if (levels.empty()) levels.push_back(resolution);

    GridField seed;
    bool have_seed = false;
    EigenResult res;
    for (size_t li = 0; li < levels.size(); ++li) {
        const bool last = li + 1 == levels.size();
        MaskPtr m = rasterize(d, levels[li]);
        SolverOptions lo = opts;
        if (!last) {
            lo.tolerance = std::max(opts.tolerance, 1e-5);
            lo.max_iterations = std::min(opts.max_iterations, 60);
        }
        GridField init;
        if (have_seed) init = resample_field(seed, m);
        res = eigen_grid(m, p, lo, have_seed ? &init : nullptr);
        seed = res.eigenfunction;
        have_seed = true;
    }
    return res;
}

}  // namespace pfk
