#pragma once

#include <Eigen/Dense>
#include <algorithm>

#include "arnet/estimate.hpp"

namespace arnet {

// ---------------------------------------------------------------------------
// Baseline models (all AR(1) or static), fit by closed forms except the
// transitivity AR model which runs the full estimation pipeline.
// Likelihoods are conditional on the first snapshot (transitions t = 2..n)
// for every model so information criteria share a common support.
// ---------------------------------------------------------------------------

enum class BaselineId { transitivity_ar, global_ar, edgewise_ar, edgewise_mean, degree_mean };

inline std::string to_string(BaselineId b) {
    switch (b) {
        case BaselineId::transitivity_ar: return "transitivity_ar";
        case BaselineId::global_ar: return "global_ar";
        case BaselineId::edgewise_ar: return "edgewise_ar";
        case BaselineId::edgewise_mean: return "edgewise_mean";
        case BaselineId::degree_mean: return "degree_mean";
    }
    throw ValueError("unknown baseline id");
}

inline BaselineId baseline_from_string(const std::string& s) {
    if (s == "transitivity_ar") return BaselineId::transitivity_ar;
    if (s == "global_ar") return BaselineId::global_ar;
    if (s == "edgewise_ar") return BaselineId::edgewise_ar;
    if (s == "edgewise_mean") return BaselineId::edgewise_mean;
    if (s == "degree_mean") return BaselineId::degree_mean;
    throw ValueError("unknown baseline id: \"" + s + "\"");
}

struct BaselineFit {
    BaselineId id = BaselineId::global_ar;
    int p = 0;
    int k = 0;          // parameter count
    double loglik = 0;  // total conditional log-likelihood over t = 2..n
    // global_ar: {alpha, beta}; edgewise_ar: per-edge (alpha_e, beta_e);
    // edgewise_mean / degree_mean: per-edge probability; transitivity_ar:
    // the full parameter vector of the kernel
    std::vector<double> theta;
    int imputed = 0;  // edgewise-AR entries with no at-risk observations
};

namespace detail {

inline double bern_loglik(double prob, int x) {
    return x ? std::log(prob) : std::log1p(-prob);
}

// 1-dimensional adjacency spectral embedding of a mean adjacency matrix:
// scaled leading eigenvector, sign fixed so its sum is nonnegative.
inline std::vector<double> degree_mean_nu(const Eigen::MatrixXd& mbar, double eps = 1e-6) {
    const int p = static_cast<int>(mbar.rows());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mbar);
    const double lambda = eig.eigenvalues()(p - 1);
    Eigen::VectorXd u = eig.eigenvectors().col(p - 1);
    if (u.sum() < 0) u = -u;
    const double scale = std::sqrt(std::max(lambda, 0.0));
    std::vector<double> nu(p);
    for (int i = 0; i < p; ++i) nu[i] = std::clamp(scale * u(i), eps, 1.0);
    return nu;
}

}  // namespace detail

inline BaselineFit fit_baseline(BaselineId id, const SnapshotSeries& s,
                                const EstimationConfig& cfg = {},
                                FitMethod method = FitMethod::mle_imom_init) {
    const int p = s.p(), n = s.n(), E = pair_count(p);
    const double eps = 1e-6;
    if (n < 2) throw DimensionError("baseline fits need at least 2 snapshots");
    PairList pairs(p);
    BaselineFit fit;
    fit.id = id;
    fit.p = p;

    switch (id) {
        case BaselineId::global_ar: {
            double form = 0, risk0 = 0, diss = 0, risk1 = 0;
            for (int t = 1; t < n; ++t)
                for (int e = 0; e < E; ++e) {
                    const int xp = s.at(t - 1, pairs.i_of[e], pairs.j_of[e]);
                    const int xc = s.at(t, pairs.i_of[e], pairs.j_of[e]);
                    if (xp) {
                        ++risk1;
                        diss += 1 - xc;
                    } else {
                        ++risk0;
                        form += xc;
                    }
                }
            const double a = std::clamp(risk0 > 0 ? form / risk0 : 0.0, eps, 1.0 - eps);
            const double b = std::clamp(risk1 > 0 ? diss / risk1 : 0.0, eps, 1.0 - eps);
            fit.k = 2;
            fit.theta = {a, b};
            for (int t = 1; t < n; ++t)
                for (int e = 0; e < E; ++e) {
                    const int xp = s.at(t - 1, pairs.i_of[e], pairs.j_of[e]);
                    const int xc = s.at(t, pairs.i_of[e], pairs.j_of[e]);
                    fit.loglik += detail::bern_loglik(xp ? 1.0 - b : a, xc);
                }
            break;
        }
        case BaselineId::edgewise_ar: {
            // pooled rates back-fill edges that were never at risk
            BaselineFit pooled = fit_baseline(BaselineId::global_ar, s);
            fit.k = p * (p - 1);
            fit.theta.assign(2 * E, 0.0);
            for (int e = 0; e < E; ++e) {
                double form = 0, risk0 = 0, diss = 0, risk1 = 0;
                for (int t = 1; t < n; ++t) {
                    const int xp = s.at(t - 1, pairs.i_of[e], pairs.j_of[e]);
                    const int xc = s.at(t, pairs.i_of[e], pairs.j_of[e]);
                    if (xp) {
                        ++risk1;
                        diss += 1 - xc;
                    } else {
                        ++risk0;
                        form += xc;
                    }
                }
                double a, b;
                if (risk0 > 0) {
                    a = std::clamp(form / risk0, eps, 1.0 - eps);
                } else {
                    a = pooled.theta[0];
                    ++fit.imputed;
                }
                if (risk1 > 0) {
                    b = std::clamp(diss / risk1, eps, 1.0 - eps);
                } else {
                    b = pooled.theta[1];
                    ++fit.imputed;
                }
                fit.theta[2 * e] = a;
                fit.theta[2 * e + 1] = b;
                for (int t = 1; t < n; ++t) {
                    const int xp = s.at(t - 1, pairs.i_of[e], pairs.j_of[e]);
                    const int xc = s.at(t, pairs.i_of[e], pairs.j_of[e]);
                    fit.loglik += detail::bern_loglik(xp ? 1.0 - b : a, xc);
                }
            }
            break;
        }
        case BaselineId::edgewise_mean: {
            fit.k = E;
            fit.theta.assign(E, 0.0);
            for (int e = 0; e < E; ++e) {
                double freq = 0;
                for (int t = 0; t < n; ++t) freq += s.at(t, pairs.i_of[e], pairs.j_of[e]);
                fit.theta[e] = std::clamp(freq / n, eps, 1.0 - eps);
                for (int t = 1; t < n; ++t)
                    fit.loglik += detail::bern_loglik(fit.theta[e],
                                                      s.at(t, pairs.i_of[e], pairs.j_of[e]));
            }
            break;
        }
        case BaselineId::degree_mean: {
            Eigen::MatrixXd mbar = Eigen::MatrixXd::Zero(p, p);
            for (int t = 0; t < n; ++t)
                for (int e = 0; e < E; ++e) {
                    const int i = pairs.i_of[e], j = pairs.j_of[e];
                    mbar(i, j) += s.at(t, i, j) / double(n);
                    mbar(j, i) = mbar(i, j);
                }
            fit.k = p;
            std::vector<double> nu = detail::degree_mean_nu(mbar, eps);
            fit.theta.assign(E, 0.0);
            for (int e = 0; e < E; ++e) {
                fit.theta[e] = std::clamp(nu[pairs.i_of[e]] * nu[pairs.j_of[e]], eps, 1.0 - eps);
                for (int t = 1; t < n; ++t)
                    fit.loglik += detail::bern_loglik(fit.theta[e],
                                                      s.at(t, pairs.i_of[e], pairs.j_of[e]));
            }
            break;
        }
        case BaselineId::transitivity_ar: {
            TransitivityKernel kernel(p);
            auto pipe = fit_pipeline(kernel, s, method, cfg);
            fit.k = 2 * p + 2;
            fit.theta = pipe.reports[pipe.best].theta_hat;
            Engine eng(kernel, s);
            fit.loglik = eng.total_loglik(fit.theta);
            break;
        }
    }
    return fit;
}

// AIC = 2k - 2L, BIC = k log(N) - 2L with N the shared transition count.
struct InfoCriteria {
    double aic = 0, bic = 0;
};

inline InfoCriteria information_criteria(double loglik, int k, long n_obs) {
    InfoCriteria ic;
    ic.aic = 2.0 * k - 2.0 * loglik;
    ic.bic = k * std::log(double(n_obs)) - 2.0 * loglik;
    return ic;
}

inline InfoCriteria information_criteria(const BaselineFit& fit, const SnapshotSeries& s) {
    const long n_obs = static_cast<long>(s.n() - 1) * pair_count(s.p());
    return information_criteria(fit.loglik, fit.k, n_obs);
}

// ---------------------------------------------------------------------------
// Multi-step edge forecasting: exact two-state recursion where edges evolve
// independently, Monte-Carlo continuation for the dependent-edge model.
// Returns one probability per unordered pair.
// ---------------------------------------------------------------------------

inline std::vector<double> forecast(const BaselineFit& fit, const SnapshotSeries& s, int n_step,
                                    int mc_paths = 200, std::uint64_t seed = 0) {
    if (n_step < 1) throw ValueError("forecast: n_step must be >= 1");
    const int p = s.p(), E = pair_count(p);
    PairList pairs(p);
    std::vector<double> prob(E, 0.0);
    switch (fit.id) {
        case BaselineId::edgewise_mean:
        case BaselineId::degree_mean:
            prob = fit.theta;  // static model: independent of the horizon
            break;
        case BaselineId::global_ar:
        case BaselineId::edgewise_ar: {
            for (int e = 0; e < E; ++e) {
                const double a = fit.id == BaselineId::global_ar ? fit.theta[0] : fit.theta[2 * e];
                const double b =
                    fit.id == BaselineId::global_ar ? fit.theta[1] : fit.theta[2 * e + 1];
                double pr = s.at(s.n() - 1, pairs.i_of[e], pairs.j_of[e]);
                for (int h = 0; h < n_step; ++h) pr = a * (1.0 - pr) + (1.0 - b) * pr;
                prob[e] = pr;
            }
            break;
        }
        case BaselineId::transitivity_ar: {
            TransitivityKernel kernel(p);
            ParameterSet theta(kernel.index(), fit.theta);
            std::vector<long> hits(E, 0);
            std::vector<EdgeContext> ctx(E);
            for (int path = 0; path < mc_paths; ++path) {
                Rng rng(seed + static_cast<std::uint64_t>(path));
                SnapshotSeries win = SnapshotSeries::zeros(p, 2);
                for (int e = 0; e < E; ++e)
                    win.set_edge(0, pairs.i_of[e], pairs.j_of[e],
                                 s.at(s.n() - 1, pairs.i_of[e], pairs.j_of[e]));
                auto ev = kernel.evaluator(theta.values);
                for (int h = 0; h < n_step; ++h) {
                    kernel.fill_contexts(win, 1, pairs, ctx.data());
                    for (int e = 0; e < E; ++e) {
                        const int i = pairs.i_of[e], j = pairs.j_of[e];
                        const AlphaBeta ab = ev.ab(ctx[e]);
                        const double g =
                            edge_gamma(ab.alpha, ab.beta, win.at(0, i, j), kernel.clip());
                        win.set_edge(1, i, j, rng.bernoulli(g) ? 1 : 0);
                    }
                    for (int e = 0; e < E; ++e)
                        win.set_edge(0, pairs.i_of[e], pairs.j_of[e],
                                     win.at(1, pairs.i_of[e], pairs.j_of[e]));
                }
                for (int e = 0; e < E; ++e)
                    hits[e] += win.at(0, pairs.i_of[e], pairs.j_of[e]);
            }
            for (int e = 0; e < E; ++e) prob[e] = hits[e] / double(mc_paths);
            break;
        }
    }
    return prob;
}

// ---------------------------------------------------------------------------
// ROC curve by threshold sweep over the unique scores, ties grouped; AUC by
// the trapezoid rule.
// ---------------------------------------------------------------------------

struct RocPoint {
    double fpr = 0, tpr = 0;
};

struct RocCurve {
    std::vector<RocPoint> points;
    double auc = 0;
};

inline RocCurve roc(const std::vector<double>& scores, const std::vector<int>& truth) {
    if (scores.size() != truth.size()) throw DimensionError("roc: shape mismatch");
    long pos = 0, neg = 0;
    for (int x : truth) (x ? pos : neg) += 1;
    if (pos == 0 || neg == 0) throw ValueError("roc: truth must contain both classes");

    std::vector<std::size_t> order(scores.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    RocCurve out;
    out.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    double auc = 0;
    std::size_t k = 0;
    while (k < order.size()) {
        const double level = scores[order[k]];
        long dtp = 0, dfp = 0;
        while (k < order.size() && scores[order[k]] == level) {
            (truth[order[k]] ? dtp : dfp) += 1;
            ++k;
        }
        const double tpr0 = tp / double(pos), fpr0 = fp / double(neg);
        tp += dtp;
        fp += dfp;
        const double tpr1 = tp / double(pos), fpr1 = fp / double(neg);
        auc += 0.5 * (tpr0 + tpr1) * (fpr1 - fpr0);
        out.points.push_back({fpr1, tpr1});
    }
    out.auc = auc;
    return out;
}

// ROC from per-pair forecast probabilities against a truth snapshot.
inline RocCurve roc_snapshot(const std::vector<double>& pair_scores, const SnapshotSeries& s,
                             int t) {
    const int p = s.p(), E = pair_count(p);
    if (static_cast<int>(pair_scores.size()) != E) throw DimensionError("roc: score length != E");
    PairList pairs(p);
    std::vector<int> truth(E);
    for (int e = 0; e < E; ++e) truth[e] = s.at(t, pairs.i_of[e], pairs.j_of[e]);
    return roc(pair_scores, truth);
}

}  // namespace arnet
