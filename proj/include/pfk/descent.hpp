#pragma once

#include <cmath>
#include <vector>

#include "pfk/grid.hpp"

namespace pfk {
namespace detail {

// Convex cell energy
//     E(v) = (h^2/p) sum_cells [ (|grad v|^2 + eps^2)^(p/2) - eps^p ]
//            - h^2 sum_cells g * v,
// forward differences with zero Dirichlet extension.  Cells outside the
// free set stay fixed (pinned boundary data or zero exterior).  eps > 0
// regularizes the |grad|^(p-2) weight for p < 2; subtracting eps^p makes
// flat regions contribute nothing.
struct PEnergy {
    const GridMask* grid = nullptr;
    double p = 2.0;
    double eps2 = 0.0;
    const std::vector<double>* lin = nullptr;  // optional linear term g
    std::vector<int> free_cells;
    bool clamp01 = false;
};

struct DescentResult {
    int iterations = 0;
    double energy = 0.0;
    bool converged = false;
};

// m2^e with cheap branches for the exponents the suite actually hits;
// m2 > 0 is guaranteed by the callers.
inline double pow_m2(double m2, double e) {
    if (e == 1.0) return m2;
    if (e == 0.5) return std::sqrt(m2);
    if (e == 2.0) return m2 * m2;
    if (e == 1.5) return m2 * std::sqrt(m2);
    if (e == 0.0) return 1.0;
    if (e == -0.5) return 1.0 / std::sqrt(m2);
    if (e == 0.75) {
        const double s = std::sqrt(m2);
        return std::sqrt(s) * s;
    }
    if (e == -0.25) return 1.0 / std::sqrt(std::sqrt(m2));
    return std::pow(m2, e);
}

// Nonlinear conjugate gradient (Polak-Ribiere+) with Armijo backtracking;
// exact steps for the p = 2 quadratic.
class PDescent {
  public:
    PDescent(const PEnergy& prob, std::vector<double>& v) : pr_(prob), v_(v) {
        const GridMask& g = *pr_.grid;
        ncell_ = size_t(g.nx) * g.ny;
        w_.assign(ncell_, 0.0);
        dxc_.assign(ncell_, 0.0);
        dyc_.assign(ncell_, 0.0);
        grad_.assign(ncell_, 0.0);
        dir_.assign(ncell_, 0.0);
        trial_ = v_;
        epsp_ = pr_.eps2 > 0.0 ? std::pow(pr_.eps2, 0.5 * pr_.p) : 0.0;
    }

    double energy(const std::vector<double>& v) const {
        const GridMask& g = *pr_.grid;
        const double inv_h = 1.0 / g.h;
        double acc = 0.0;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const size_t k = size_t(g.idx(i, j));
                const double vv = v[k];
                const double vx = (i + 1 < g.nx) ? v[k + 1] : 0.0;
                const double vy = (j + 1 < g.ny) ? v[k + g.nx] : 0.0;
                const double m2 = sq((vx - vv) * inv_h) + sq((vy - vv) * inv_h);
                if (m2 > 0.0) acc += pow_m2(m2 + pr_.eps2, 0.5 * pr_.p) - epsp_;
            }
        }
        double e = acc * g.h * g.h / pr_.p;
        if (pr_.lin) {
            double lv = 0.0;
            for (int k : pr_.free_cells) lv += (*pr_.lin)[k] * v[k];
            e -= lv * g.h * g.h;
        }
        return e;
    }

    void gradient(const std::vector<double>& v) {
        const GridMask& g = *pr_.grid;
        const double inv_h = 1.0 / g.h;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const size_t k = size_t(g.idx(i, j));
                const double vv = v[k];
                const double vx = (i + 1 < g.nx) ? v[k + 1] : 0.0;
                const double vy = (j + 1 < g.ny) ? v[k + g.nx] : 0.0;
                const double ddx = (vx - vv) * inv_h;
                const double ddy = (vy - vv) * inv_h;
                dxc_[k] = ddx;
                dyc_[k] = ddy;
                const double m2 = ddx * ddx + ddy * ddy + pr_.eps2;
                w_[k] = (m2 > 0.0) ? pow_m2(m2, 0.5 * pr_.p - 1.0) : 0.0;
            }
        }
        const double h = g.h;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const size_t k = size_t(g.idx(i, j));
                double acc = -w_[k] * (dxc_[k] + dyc_[k]);
                if (i > 0) acc += w_[k - 1] * dxc_[k - 1];
                if (j > 0) acc += w_[k - g.nx] * dyc_[k - g.nx];
                grad_[k] = acc * h;
            }
        }
        if (pr_.lin) {
            const double h2 = h * h;
            for (int k : pr_.free_cells) grad_[k] -= (*pr_.lin)[k] * h2;
        }
    }

    DescentResult minimize(double rel_tol, int max_iters) {
        DescentResult res;
        const bool quadratic = pr_.p == 2.0 && pr_.eps2 == 0.0;
        double e = energy(v_);
        gradient(v_);

        double gg_prev = 0.0;
        std::vector<double> g_prev;
        double step_prev = 1.0;
        int flat_streak = 0;
        bool done = false;

        int it = 0;
        for (; it < max_iters && !done; ++it) {
            double gg = 0.0;
            for (int k : pr_.free_cells) gg += grad_[k] * grad_[k];
            if (gg == 0.0) {
                res.converged = true;
                break;
            }
            double beta = 0.0;
            if (!g_prev.empty() && gg_prev > 0.0 && it % 100 != 0) {
                double num = 0.0;
                for (int k : pr_.free_cells) num += grad_[k] * (grad_[k] - g_prev[k]);
                beta = std::max(0.0, num / gg_prev);
            }
            double gTd = 0.0;
            for (int k : pr_.free_cells) {
                dir_[k] = -grad_[k] + beta * dir_[k];
                gTd += grad_[k] * dir_[k];
            }
            if (gTd >= 0.0) {
                gTd = 0.0;
                for (int k : pr_.free_cells) {
                    dir_[k] = -grad_[k];
                    gTd += grad_[k] * dir_[k];
                }
            }

            double t = 0.0, e_new = e;
            bool accepted = false;
            if (quadratic) {
                const double dAd = quad_form(dir_);
                if (dAd > 0.0) {
                    t = -gTd / dAd;
                    e_new = try_step(t);
                    accepted = e_new < e;
                }
            }
            if (!accepted) {
                t = step_prev;
                for (int bt = 0; bt < 80 && !accepted; ++bt) {
                    e_new = try_step(t);
                    if (e_new <= e + 1e-4 * t * gTd) accepted = true;
                    else t *= 0.5;
                }
                if (accepted && !quadratic) {
                    for (int ex = 0; ex < 8; ++ex) {
                        const double e_try = try_step(2.0 * t);
                        if (e_try < e_new) {
                            t *= 2.0;
                            e_new = e_try;
                        } else
                            break;
                    }
                }
            }
            if (!accepted) {
                // line search exhausted: flat to machine precision
                res.converged = true;
                break;
            }

            bool clamped = false;
            for (int k : pr_.free_cells) {
                double nv = v_[k] + t * dir_[k];
                if (pr_.clamp01) {
                    if (nv < 0.0) {
                        nv = 0.0;
                        clamped = true;
                    } else if (nv > 1.0) {
                        nv = 1.0;
                        clamped = true;
                    }
                }
                v_[k] = nv;
                trial_[k] = nv;
            }
            if (clamped) e_new = energy(v_);

            const double decrease = e - e_new;
            e = e_new;
            step_prev = std::min(std::max(t * 2.0, 1e-280), 1e280);
            g_prev = grad_;
            gg_prev = gg;
            gradient(v_);
            if (clamped) g_prev.clear();  // projection breaks conjugacy
            res.iterations = it + 1;

            if (decrease >= 0.0 && decrease < rel_tol * (std::fabs(e) + 1e-300)) {
                if (++flat_streak >= 3) {
                    res.converged = true;
                    done = true;
                }
            } else
                flat_streak = 0;
        }
        res.energy = e;
        return res;
    }

    // h^2 * sum |grad d|^2: curvature along a direction for the p=2 quadratic.
    double quad_form(const std::vector<double>& d) const {
        const GridMask& g = *pr_.grid;
        const double inv_h = 1.0 / g.h;
        double acc = 0.0;
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const size_t k = size_t(g.idx(i, j));
                const double vv = d[k];
                const double vx = (i + 1 < g.nx) ? d[k + 1] : 0.0;
                const double vy = (j + 1 < g.ny) ? d[k + g.nx] : 0.0;
                acc += sq((vx - vv) * inv_h) + sq((vy - vv) * inv_h);
            }
        }
        return acc * g.h * g.h;
    }

  private:
    double try_step(double t) {
        for (int k : pr_.free_cells) trial_[k] = v_[k] + t * dir_[k];
        const double e = energy(trial_);
        for (int k : pr_.free_cells) trial_[k] = v_[k];
        return e;
    }

    const PEnergy& pr_;
    std::vector<double>& v_;
    size_t ncell_ = 0;
    double epsp_ = 0.0;
    std::vector<double> w_, dxc_, dyc_, grad_, dir_, trial_;
};

inline DescentResult minimize_p_energy(const PEnergy& prob, std::vector<double>& v, double rel_tol,
                                       int max_iters) {
    PDescent solver(prob, v);
    return solver.minimize(rel_tol, max_iters);
}

}  // namespace detail
}  // namespace pfk
