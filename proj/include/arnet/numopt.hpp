#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "arnet/core.hpp"

namespace arnet {

// ---------------------------------------------------------------------------
// Quasi-Newton maximization over a box
// ---------------------------------------------------------------------------

struct OptimizerSettings {
    int max_iter = 200;
    double grad_tol = 1e-8;
    double backtrack_shrink = 0.5;
    double armijo = 1e-4;
};

enum class OptStatus { converged, max_iter, line_search_failed, non_finite };

struct OptResult {
    std::vector<double> x;
    double f = 0;
    OptStatus status = OptStatus::converged;
    int iterations = 0;
};

// objective: f(x, grad_out) returns the value and fills the gradient.
using Objective = std::function<double(std::span<const double>, std::span<double>)>;

namespace detail {

inline void project(std::vector<double>& x, const Box& box) {
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = box.clamp(static_cast<int>(k), x[k]);
}

inline bool finite(double v) { return std::isfinite(v); }

}  // namespace detail

// Maximizes f over the box with a BFGS inverse-Hessian approximation,
// projected steps and Armijo backtracking. Accepted steps never decrease
// the objective.
inline OptResult maximize_box(const Objective& f, std::vector<double> x0, const Box& box,
                              const OptimizerSettings& st = {}) {
    const int d = static_cast<int>(x0.size());
    detail::project(x0, box);
    std::vector<double> g(d), gnew(d), xnew(d), dir(d);
    std::vector<double> B(static_cast<std::size_t>(d) * d, 0.0);  // inverse Hessian approx
    for (int k = 0; k < d; ++k) B[k * d + k] = 1.0;

    OptResult res;
    res.x = x0;
    res.f = f(res.x, g);
    if (!detail::finite(res.f)) {
        res.status = OptStatus::non_finite;
        return res;
    }

    for (int it = 0; it < st.max_iter; ++it) {
        res.iterations = it;
        // projected ascent gradient
        double pg = 0;
        for (int k = 0; k < d; ++k)
            pg = std::max(pg, std::fabs(res.x[k] - box.clamp(k, res.x[k] + g[k])));
        if (pg <= st.grad_tol) {
            res.status = OptStatus::converged;
            return res;
        }

        // ascent direction d = B g, reset to steepest ascent if not ascending
        double dg = 0;
        for (int r = 0; r < d; ++r) {
            double s = 0;
            for (int c = 0; c < d; ++c) s += B[r * d + c] * g[c];
            dir[r] = s;
        }
        for (int k = 0; k < d; ++k) dg += dir[k] * g[k];
        if (!(dg > 0)) {
            dir = g;
            for (auto& b : B) b = 0;
            for (int k = 0; k < d; ++k) B[k * d + k] = 1.0;
        }

        double step = 1.0;
        bool accepted = false;
        double fnew = res.f;
        for (int ls = 0; ls < 60; ++ls) {
            for (int k = 0; k < d; ++k) xnew[k] = box.clamp(k, res.x[k] + step * dir[k]);
            double ascent = 0;
            for (int k = 0; k < d; ++k) ascent += g[k] * (xnew[k] - res.x[k]);
            fnew = f(xnew, gnew);
            if (detail::finite(fnew) && fnew >= res.f + st.armijo * ascent && ascent >= 0) {
                accepted = true;
                break;
            }
            step *= st.backtrack_shrink;
        }
        if (!accepted) {
            res.status = OptStatus::line_search_failed;
            return res;
        }

        // BFGS update on s = xnew - x, y = -(gnew - g) (minimization convention)
        double sy = 0, snorm = 0;
        std::vector<double> svec(d), yvec(d);
        for (int k = 0; k < d; ++k) {
            svec[k] = xnew[k] - res.x[k];
            yvec[k] = -(gnew[k] - g[k]);
            sy += svec[k] * yvec[k];
            snorm += svec[k] * svec[k];
        }
        if (sy > 1e-12 * std::sqrt(snorm)) {
            const double rho = 1.0 / sy;
            std::vector<double> By(d, 0.0);
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c) By[r] += B[r * d + c] * yvec[c];
            double yBy = 0;
            for (int k = 0; k < d; ++k) yBy += yvec[k] * By[k];
            for (int r = 0; r < d; ++r)
                for (int c = 0; c < d; ++c)
                    B[r * d + c] += rho * ((1.0 + rho * yBy) * svec[r] * svec[c] -
                                           By[r] * svec[c] - svec[r] * By[c]);
        }
        res.x = xnew;
        res.f = fnew;
        g = gnew;
        if (std::sqrt(snorm) < 1e-14 * (1.0 + std::fabs(res.f))) {
            res.status = OptStatus::converged;
            return res;
        }
    }
    res.status = OptStatus::max_iter;
    return res;
}

// ---------------------------------------------------------------------------
// Bounded univariate minimization: golden section to width
// 1e-10 max(1, |center|), then one parabolic polish. Ties break toward the
// center of the search ball.
// ---------------------------------------------------------------------------

struct Min1dResult {
    double x = 0;
    double value = 0;
};

inline Min1dResult minimize_1d(const std::function<double(double)>& g, double center,
                               double radius) {
    if (!(radius > 0)) throw ValueError("minimize_1d: radius must be positive");
    double a = center - radius, b = center + radius;
    const double tol = 1e-10 * std::max(1.0, std::fabs(center));
    constexpr double invphi = 0.6180339887498949;

    auto eval = [&](double x) {
        double v = g(x);
        if (!std::isfinite(v)) throw NumericError("minimize_1d: non-finite objective");
        return v;
    };

    double x1 = b - invphi * (b - a), x2 = a + invphi * (b - a);
    double f1 = eval(x1), f2 = eval(x2);
    double fa = eval(a), fb = eval(b);
    while (b - a > tol) {
        bool keep_left;
        if (f1 < f2) keep_left = true;
        else if (f2 < f1) keep_left = false;
        else  // tie: keep the candidate closer to the center
            keep_left = std::fabs(x1 - center) <= std::fabs(x2 - center);
        if (keep_left) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = eval(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = eval(x2);
        }
    }

    Min1dResult best;
    best.x = (f1 <= f2) ? x1 : x2;
    best.value = std::min(f1, f2);
    // interval endpoints can win when the minimum sits on the boundary
    if (fa < best.value) {
        best.x = center - radius;
        best.value = fa;
    }
    if (fb < best.value) {
        best.x = center + radius;
        best.value = fb;
    }

    // one parabolic polish through (x1, m, x2)
    const double xm = 0.5 * (x1 + x2);
    const double fm = eval(xm);
    if (fm < best.value) {
        best.x = xm;
        best.value = fm;
    }
    const double denom = (x1 - xm) * (f2 - fm) - (x2 - xm) * (f1 - fm);
    if (std::fabs(denom) > 0) {
        const double num = (x1 - xm) * (x1 - xm) * (f2 - fm) - (x2 - xm) * (x2 - xm) * (f1 - fm);
        double cand = xm - 0.5 * num / denom;
        if (cand >= center - radius && cand <= center + radius) {
            double fc = eval(cand);
            if (fc < best.value) {
                best.x = cand;
                best.value = fc;
            }
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Dense linear programming: min c'z  s.t.  A z <= b, z >= 0,
// two-phase tableau simplex. Sized for a few hundred rows.
// ---------------------------------------------------------------------------

enum class LpStatus { optimal, infeasible, unbounded };

struct LpProblem {
    std::vector<double> c;  // n
    std::vector<double> a;  // m x n row-major
    std::vector<double> b;  // m
    int m = 0, n = 0;
};

struct LpResult {
    LpStatus status = LpStatus::optimal;
    std::vector<double> z;
    double objective = 0;
};

namespace detail {

class SimplexTableau {
  public:
    // rows: m constraints (equalities after adding slacks), columns:
    // n structural + m slack + (artificials appended as needed) + rhs
    SimplexTableau(const LpProblem& lp) : m_(lp.m), n_(lp.n) {
        ncols_ = n_ + m_;
        // count artificials: one per negative-rhs row
        for (int r = 0; r < m_; ++r)
            if (lp.b[r] < 0) ++n_art_;
        ncols_ += n_art_;
        tab_.assign(static_cast<std::size_t>(m_ + 1) * (ncols_ + 1), 0.0);
        basis_.resize(m_);
        int art = 0;
        for (int r = 0; r < m_; ++r) {
            const double sgn = lp.b[r] < 0 ? -1.0 : 1.0;
            for (int cidx = 0; cidx < n_; ++cidx) at(r, cidx) = sgn * lp.a[r * n_ + cidx];
            at(r, n_ + r) = sgn;  // slack
            rhs(r) = sgn * lp.b[r];
            if (sgn < 0) {
                at(r, n_ + m_ + art) = 1.0;
                basis_[r] = n_ + m_ + art;
                ++art;
            } else {
                basis_[r] = n_ + r;
            }
        }
        init_ = tab_;  // pristine copy for the final refactorization
    }

    LpStatus solve(const LpProblem& lp, std::vector<double>& z, double& obj) {
        if (n_art_ > 0) {
            // phase 1: minimize the sum of artificials
            std::vector<double> cost(ncols_, 0.0);
            for (int k = n_ + m_; k < ncols_; ++k) cost[k] = 1.0;
            set_objective(cost);
            if (!run()) return LpStatus::unbounded;  // cannot happen for phase 1
            if (objective() > 1e-7) return LpStatus::infeasible;
            // drive any artificial still in the basis out of it
            for (int r = 0; r < m_; ++r) {
                if (basis_[r] < n_ + m_) continue;
                int enter = -1;
                for (int cidx = 0; cidx < n_ + m_; ++cidx)
                    if (std::fabs(at(r, cidx)) > 1e-9) {
                        enter = cidx;
                        break;
                    }
                if (enter >= 0) pivot(r, enter);
                // else: redundant row, the artificial stays at zero
            }
            blocked_ = n_ + m_;  // artificials may not re-enter
        }
        std::vector<double> cost(ncols_, 0.0);
        for (int k = 0; k < n_; ++k) cost[k] = lp.c[k];
        set_objective(cost);
        if (!run()) return LpStatus::unbounded;
        // re-solve the final basis on the pristine data to strip the pivot
        // error accumulated in the tableau
        Eigen::MatrixXd bmat(m_, m_);
        Eigen::VectorXd rhs0(m_);
        for (int r = 0; r < m_; ++r) {
            rhs0(r) = init_[static_cast<std::size_t>(r) * (ncols_ + 1) + ncols_];
            for (int k = 0; k < m_; ++k)
                bmat(r, k) = init_[static_cast<std::size_t>(r) * (ncols_ + 1) + basis_[k]];
        }
        Eigen::VectorXd y = bmat.fullPivLu().solve(rhs0);
        z.assign(n_, 0.0);
        for (int k = 0; k < m_; ++k)
            if (basis_[k] < n_) z[basis_[k]] = std::max(0.0, y(k));
        obj = 0;
        for (int k = 0; k < n_; ++k) obj += lp.c[k] * z[k];
        return LpStatus::optimal;
    }

  private:
    double& at(int r, int cidx) { return tab_[static_cast<std::size_t>(r) * (ncols_ + 1) + cidx]; }
    double& rhs(int r) { return tab_[static_cast<std::size_t>(r) * (ncols_ + 1) + ncols_]; }
    double& cost(int cidx) { return at(m_, cidx); }
    double objective() { return -rhs(m_); }

    void set_objective(const std::vector<double>& c) {
        for (int k = 0; k <= ncols_; ++k) at(m_, k) = 0.0;
        for (int k = 0; k < ncols_; ++k) cost(k) = c[k];
        // price out the current basis
        for (int r = 0; r < m_; ++r) {
            const double cb = c[basis_[r]];
            if (cb == 0.0) continue;
            for (int k = 0; k <= ncols_; ++k) at(m_, k) -= cb * at(r, k);
        }
    }

    void pivot(int row, int col) {
        const double piv = at(row, col);
        for (int k = 0; k <= ncols_; ++k) at(row, k) /= piv;
        for (int r = 0; r <= m_; ++r) {
            if (r == row) continue;
            const double f = at(r, col);
            if (f == 0.0) continue;
            for (int k = 0; k <= ncols_; ++k) at(r, k) -= f * at(row, k);
        }
        basis_[row] = col;
    }

    // Dantzig pricing with a Bland fallback once the objective stalls.
    bool run() {
        const int ncand = blocked_ > 0 ? blocked_ : ncols_;
        int stall = 0;
        double last_obj = objective();
        const long iter_cap = 200L * (m_ + ncols_);
        for (long it = 0; it < iter_cap; ++it) {
            const bool bland = stall > 2 * m_ + 20;
            int enter = -1;
            double best = -1e-10;
            for (int cidx = 0; cidx < ncand; ++cidx) {
                const double rc = cost(cidx);
                if (rc < best) {
                    enter = cidx;
                    best = rc;
                    if (bland) break;  // first improving index
                }
            }
            if (enter < 0) return true;  // optimal
            int leave = -1;
            double ratio = std::numeric_limits<double>::infinity();
            for (int r = 0; r < m_; ++r) {
                const double arc = at(r, enter);
                if (arc > 1e-11) {
                    const double q = rhs(r) / arc;
                    if (q < ratio - 1e-12 ||
                        (q < ratio + 1e-12 && (leave < 0 || basis_[r] < basis_[leave]))) {
                        ratio = q;
                        leave = r;
                    }
                }
            }
            if (leave < 0) return false;  // unbounded
            pivot(leave, enter);
            const double obj = objective();
            stall = (obj < last_obj - 1e-12) ? 0 : stall + 1;
            last_obj = obj;
        }
        throw NumericError("simplex: iteration cap exceeded");
    }

    int m_, n_, ncols_ = 0, n_art_ = 0, blocked_ = 0;
    std::vector<double> tab_, init_;
    std::vector<int> basis_;
};

}  // namespace detail

inline LpResult lp_solve(const LpProblem& lp) {
    if (static_cast<int>(lp.c.size()) != lp.n || static_cast<int>(lp.b.size()) != lp.m ||
        static_cast<int>(lp.a.size()) != lp.m * lp.n)
        throw DimensionError("lp_solve: inconsistent problem dimensions");
    detail::SimplexTableau tab(lp);
    LpResult res;
    res.status = tab.solve(lp, res.z, res.objective);
    return res;
}

// ---------------------------------------------------------------------------
// l1 projection direction: arg min |u|_1  s.t.  |H'u - e_l|_inf <= tau.
// Split u = u+ - u- and solve the standard-form LP.
// ---------------------------------------------------------------------------

struct L1ProjectionResult {
    LpStatus status = LpStatus::optimal;
    std::vector<double> phi;
    double l1_norm = 0;
    double residual_inf = 0;  // |H' phi - e_l|_inf
};

inline L1ProjectionResult solve_l1_projection(const std::vector<double>& h, int q, int l,
                                              double tau) {
    if (static_cast<int>(h.size()) != q * q) throw DimensionError("solve_l1_projection: H must be q x q");
    if (l < 0 || l >= q) throw IndexError("solve_l1_projection: l out of range");
    if (tau < 0) throw ValueError("solve_l1_projection: tau must be >= 0");

    LpProblem lp;
    lp.n = 2 * q;
    lp.m = 2 * q;
    lp.c.assign(lp.n, 1.0);
    lp.a.assign(static_cast<std::size_t>(lp.m) * lp.n, 0.0);
    lp.b.assign(lp.m, 0.0);
    // rows 0..q-1:   (H'u)_k - e_k <= tau   ;  rows q..2q-1:  -(H'u)_k + e_k <= tau
    for (int k = 0; k < q; ++k) {
        for (int r = 0; r < q; ++r) {
            const double hrk = h[r * q + k];  // (H')_{k,r} = H_{r,k}
            lp.a[static_cast<std::size_t>(k) * lp.n + r] = hrk;
            lp.a[static_cast<std::size_t>(k) * lp.n + q + r] = -hrk;
            lp.a[static_cast<std::size_t>(q + k) * lp.n + r] = -hrk;
            lp.a[static_cast<std::size_t>(q + k) * lp.n + q + r] = hrk;
        }
        const double ek = (k == l) ? 1.0 : 0.0;
        lp.b[k] = tau + ek;
        lp.b[q + k] = tau - ek;
    }

    LpResult sol = lp_solve(lp);
    L1ProjectionResult out;
    out.status = sol.status;
    if (sol.status != LpStatus::optimal) return out;
    out.phi.resize(q);
    out.l1_norm = 0;
    for (int r = 0; r < q; ++r) {
        out.phi[r] = sol.z[r] - sol.z[q + r];
        out.l1_norm += std::fabs(out.phi[r]);
    }
    for (int k = 0; k < q; ++k) {
        double acc = 0;
        for (int r = 0; r < q; ++r) acc += h[r * q + k] * out.phi[r];
        acc -= (k == l) ? 1.0 : 0.0;
        out.residual_inf = std::max(out.residual_inf, std::fabs(acc));
    }
    return out;
}

}  // namespace arnet
