#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "arnet/likelihood.hpp"
#include "arnet/numopt.hpp"

namespace arnet {

// ---------------------------------------------------------------------------
// Node-level recovery: minimize l(x; v) = sum_{i<j} e^{x_i+x_j} - sum_i x_i v_i
// by damped Newton. Strongly convex for p >= 3, so the minimizer is unique.
// Inverts the map xi -> row sums of (xi xi' with zero diagonal) at x = log xi.
// ---------------------------------------------------------------------------

inline double recover_objective(const std::vector<double>& x, const std::vector<double>& v) {
    const int p = static_cast<int>(x.size());
    double acc = 0;
    for (int i = 0; i < p; ++i)
        for (int j = i + 1; j < p; ++j) acc += std::exp(x[i] + x[j]);
    for (int i = 0; i < p; ++i) acc -= x[i] * v[i];
    return acc;
}

inline std::vector<double> recover_locals(const std::vector<double>& v,
                                          const std::vector<double>* start = nullptr,
                                          int max_iter = 100) {
    const int p = static_cast<int>(v.size());
    if (p < 3) throw DimensionError("recover_locals: need p >= 3");
    double vmax = 0;
    for (double vi : v) {
        if (!(vi > 0)) throw ValueError("recover_locals: v must be strictly positive");
        vmax = std::max(vmax, vi);
    }
    const double gtol = 1e-10 * std::max(1.0, vmax);

    // default start: the constant-xi guess sum_{j != i} xi^2 = mean(v)
    double vbar = 0;
    for (double vi : v) vbar += vi / p;
    std::vector<double> x(p, 0.5 * std::log(std::max(vbar, 1e-300) / (p - 1)));
    if (start) {
        if (static_cast<int>(start->size()) != p)
            throw DimensionError("recover_locals: start has wrong length");
        x = *start;
    }

    Eigen::VectorXd g(p), step(p);
    Eigen::MatrixXd hess(p, p);
    double fx = recover_objective(x, v);
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd w(p);
        for (int i = 0; i < p; ++i) w(i) = std::exp(x[i]);
        const double total = w.sum();
        double gmax = 0;
        for (int i = 0; i < p; ++i) {
            g(i) = w(i) * (total - w(i)) - v[i];
            gmax = std::max(gmax, std::fabs(g(i)));
        }
        if (gmax <= gtol) return x;
        // H = diag(w_i (total - 2 w_i)) + w w'
        hess = w * w.transpose();
        for (int i = 0; i < p; ++i) hess(i, i) = w(i) * (total - w(i));
        Eigen::LLT<Eigen::MatrixXd> llt(hess);
        if (llt.info() != Eigen::Success) {
            hess.diagonal().array() += 1e-12 * (1.0 + hess.trace());
            llt.compute(hess);
        }
        step = llt.solve(g);
        double t = 1.0;
        const double slack = 1e-14 * (1.0 + std::fabs(fx));  // rounding head-room
        for (int ls = 0; ls < 60; ++ls) {
            std::vector<double> xn(p);
            for (int i = 0; i < p; ++i) xn[i] = x[i] - t * step(i);
            const double fn = recover_objective(xn, v);
            if (std::isfinite(fn) && fn <= fx - 1e-4 * t * g.dot(step) + slack) {
                x = std::move(xn);
                fx = fn;
                break;
            }
            t *= 0.5;
            if (ls == 59) throw NumericError("recover_locals: line search failed");
        }
        // the infimum sits at infinity when v is not an attainable row-sum
        // vector; the iterates then drift without bound
        for (double xi : x)
            if (std::fabs(xi) > 70.0)
                throw NumericError("recover_locals: iterates diverged (v not attainable)");
    }
    throw NumericError("recover_locals: Newton did not converge");
}

// ---------------------------------------------------------------------------
// Iterative Method of Moments for AR(1) kernels with the separable form
// alpha = xi_i xi_j f~, beta = eta_i eta_j g~.
// ---------------------------------------------------------------------------

struct ImomOptions {
    double tol = 1e-6;
    int max_iter = 100;
    OptimizerSettings global_opt;
};

struct ImomResult {
    std::vector<double> theta;
    int iterations = 0;
    bool converged = false;
    bool degenerate = false;  // some moment ratio had no information
    int imputed = 0;          // zero-denominator entries imputed by row means
    double max_change = 0;
};

template <class K>
ImomResult imom_fit(const K& kernel, const SnapshotSeries& series, std::vector<double> theta0,
                    const ImomOptions& opts = {}) {
    static_assert(K::separable, "IMoM needs the separable alpha/beta form");
    static_assert(K::order == 1, "IMoM is defined for AR(1) kernels");
    Engine<K> eng(kernel, series);
    const ParameterIndex idx = kernel.index();
    const int p = kernel.p(), ng = idx.n_global();
    const Box box = kernel.default_box();
    const int T = eng.transitions(), E = eng.num_edges();
    if (static_cast<int>(theta0.size()) != idx.q())
        throw DimensionError("imom_fit: starting vector has wrong length");

    ImomResult res;
    res.theta = std::move(theta0);

    // global block box and objective: full partial log-likelihood in theta_G
    Box gbox;
    gbox.lo.assign(box.lo.begin(), box.lo.begin() + ng);
    gbox.hi.assign(box.hi.begin(), box.hi.begin() + ng);

    std::vector<double> xi_row(p), eta_row(p);
    std::vector<double> xnum(E), xden(E), gnum(E), gden(E);
    const PairList& pairs = eng.pairs();

    for (int iter = 1; iter <= opts.max_iter; ++iter) {
        std::vector<double> prev = res.theta;

        // (i) update the global block at the current locals
        if (ng > 0) {
            std::vector<double> work = res.theta;
            Objective gobj = [&](std::span<const double> xg, std::span<double> grad) {
                for (int g = 0; g < ng; ++g) work[g] = xg[g];
                return eng.loglik_and_global_grad(work, grad);
            };
            std::vector<double> gstart(res.theta.begin(), res.theta.begin() + ng);
            auto gopt = maximize_box(gobj, gstart, gbox, opts.global_opt);
            for (int g = 0; g < ng; ++g) res.theta[g] = gopt.x[g];
        }

        // (ii) edgewise moment ratios at the new globals
        auto ev = kernel.evaluator(res.theta);
        std::fill(xnum.begin(), xnum.end(), 0.0);
        std::fill(xden.begin(), xden.end(), 0.0);
        std::fill(gnum.begin(), gnum.end(), 0.0);
        std::fill(gden.begin(), gden.end(), 0.0);
        for (int t = 0; t < T; ++t)
            for (int e = 0; e < E; ++e) {
                const int xp = eng.x_prev(t, e), xc = eng.x_cur(t, e);
                if (!xp) {
                    xnum[e] += xc;
                    xden[e] += ev.f_tilde(eng.context_at(t, e));
                } else {
                    gnum[e] += 1 - xc;
                    gden[e] += ev.g_tilde(eng.context_at(t, e));
                }
            }

        auto ratios = [&](const std::vector<double>& num, const std::vector<double>& den,
                          std::vector<double>& rowsum) {
            std::vector<double> r(E, -1.0);
            for (int e = 0; e < E; ++e)
                if (den[e] > 0) r[e] = num[e] / den[e];
            // impute never-at-risk edges with the mean of defined row entries
            rowsum.assign(p, 0.0);
            std::vector<double> rowmean(p, 0.0);
            std::vector<int> rowcnt(p, 0);
            for (int e = 0; e < E; ++e) {
                if (r[e] < 0) continue;
                rowmean[pairs.i_of[e]] += r[e];
                rowmean[pairs.j_of[e]] += r[e];
                ++rowcnt[pairs.i_of[e]];
                ++rowcnt[pairs.j_of[e]];
            }
            for (int i = 0; i < p; ++i) rowmean[i] = rowcnt[i] ? rowmean[i] / rowcnt[i] : 0.0;
            for (int e = 0; e < E; ++e) {
                double value = r[e];
                if (value < 0) {
                    value = 0.5 * (rowmean[pairs.i_of[e]] + rowmean[pairs.j_of[e]]);
                    ++res.imputed;
                }
                rowsum[pairs.i_of[e]] += value;
                rowsum[pairs.j_of[e]] += value;
            }
        };
        ratios(xnum, xden, xi_row);
        ratios(gnum, gden, eta_row);

        // (iii) recover node-level parameters from the row sums
        bool solver_failed = false;
        auto solve_side = [&](std::vector<double>& rowsum, auto setter) {
            bool bad = false;
            for (double& vi : rowsum)
                if (!(vi > 0)) {
                    vi = 1e-10;
                    bad = true;
                }
            if (bad) res.degenerate = true;
            try {
                auto x = recover_locals(rowsum);
                for (int i = 0; i < p; ++i) setter(i, std::exp(x[i]));
            } catch (const NumericError&) {
                res.degenerate = true;  // keep the previous locals for this side
                solver_failed = true;
            }
        };
        solve_side(xi_row, [&](int i, double v) { res.theta[idx.xi_index(i)] = v; });
        solve_side(eta_row, [&](int i, double v) { res.theta[idx.eta_index(i)] = v; });
        if (solver_failed) break;

        res.iterations = iter;
        res.max_change = 0;
        for (int l = 0; l < idx.q(); ++l)
            res.max_change = std::max(res.max_change, std::fabs(res.theta[l] - prev[l]));
        if (res.max_change < opts.tol) {
            res.converged = true;
            break;
        }
    }
    return res;
}

}  // namespace arnet
