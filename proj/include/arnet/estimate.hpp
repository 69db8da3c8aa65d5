#pragma once

#include <chrono>
#include <cmath>
#include <map>
#include <string>

#include "arnet/imom.hpp"
#include "arnet/likelihood.hpp"
#include "arnet/numopt.hpp"
#include "arnet/parallel.hpp"
#include "arnet/simulate.hpp"

namespace arnet {

struct EstimationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Acklam's rational approximation of the standard normal quantile (~1e-9).
inline double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw ValueError("normal_quantile: p in (0,1) required");
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1 - plow;
    double x;
    if (prob < plow) {
        const double u = std::sqrt(-2.0 * std::log(prob));
        x = (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    } else if (prob <= phigh) {
        const double u = prob - 0.5, r = u * u;
        x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * u /
            (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
    } else {
        const double u = std::sqrt(-2.0 * std::log(1.0 - prob));
        x = -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
            ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    return x;
}

// rate bound Delta_n = n^{-1/2} p^{5/2} log^{3/2}(np); tau = tau_mult * sqrt(Delta_n)
inline double delta_n(int n, int p) {
    return std::pow(double(n), -0.5) * std::pow(double(p), 2.5) *
           std::pow(std::log(double(n) * p), 1.5);
}

struct EstimationConfig {
    // constant starting values for the local parameters
    std::vector<double> init_grid = {0.50, 0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90};
    double r_tilde_local = 0.2;
    double r_check_local = 0.05;
    double r_tilde_global = 10.0;
    double r_check_global = 2.0;
    // multipliers applied to Delta_n^{1/2}; the projection constraint only
    // binds for tau < 1, which pins the useful magnitude at desk scale
    std::vector<double> tau_grid = {1e-4, 2e-4, 4e-4};
    double ci_level = 0.95;
    OptimizerSettings opt;
    std::vector<double> global_start;  // empty: kernel-specific default
    // pilot stabilization before the projection stage: blockwise ascent
    // cycles of (global refit, carried univariate local sweeps), stopping
    // early once a full cycle moves no coordinate by more than the tolerance
    int stabilize_cycles = 8;
    int stabilize_sweeps = 2;
    double stabilize_tol = 1e-3;
    // number of projection-refinement passes; later passes re-center the
    // constraint matrix and balls at the previous pass's estimate
    int refine_passes = 1;
    ImomOptions imom{.tol = 1e-6, .max_iter = 3};
    int threads = 1;
};

template <class K>
std::vector<double> default_global_start(const K& kernel) {
    const int ng = kernel.index().n_global();
    switch (K::id) {
        case KernelId::transitivity:
        case KernelId::transitivity_ext:
            return std::vector<double>(ng, 1.0);
        case KernelId::global_ar:
            return {0.3, 0.3};
        default:
            return std::vector<double>(ng, 0.5);
    }
}

// ---------------------------------------------------------------------------
// Initial estimator: per start, (a) maximize the full partial log-likelihood
// over the global block with locals pinned at the start constant, then
// (b) maximize each local's own partial log-likelihood univariately.
// ---------------------------------------------------------------------------

struct InitialFit {
    std::vector<std::vector<double>> theta;  // per start
    std::vector<double> loglik;              // per start (normalized, full)
    std::vector<bool> ok;
    int best = -1;
};

namespace detail {

inline double mid(double lo, double hi) { return 0.5 * (lo + hi); }

inline Min1dResult minimize_interval(const std::function<double(double)>& g, double lo,
                                     double hi) {
    return minimize_1d(g, mid(lo, hi), 0.5 * (hi - lo));
}

// Minimizer of f(x)^2 over [lo, hi] preferring the zero of f closest to
// `center`. The squared projected score can have several near-zero basins
// inside a wide search ball; ties are broken toward the pilot, which the
// plain golden section cannot do on its own.
inline double nearest_root_search(const std::function<double(double)>& f, double lo, double hi,
                                  double center) {
    constexpr int grid = 48;
    double best_bracket_lo = 0, best_bracket_hi = 0, best_dist = 0;
    bool found = false;
    double prev_x = lo, prev_f = f(lo);
    for (int k = 1; k <= grid; ++k) {
        const double x = lo + (hi - lo) * k / grid;
        const double fx = f(x);
        if ((prev_f < 0) != (fx < 0)) {
            const double dist = std::fabs(0.5 * (prev_x + x) - center);
            if (!found || dist < best_dist) {
                best_bracket_lo = prev_x;
                best_bracket_hi = x;
                best_dist = dist;
                found = true;
            }
        }
        prev_x = x;
        prev_f = fx;
    }
    if (found) {
        double a = best_bracket_lo, b = best_bracket_hi, fa = f(a);
        for (int it = 0; it < 60; ++it) {
            const double m = 0.5 * (a + b), fm = f(m);
            if ((fa < 0) == (fm < 0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    }
    // no sign change: fall back to the golden-section minimum of f^2
    auto sq = [&](double x) {
        const double v = f(x);
        return v * v;
    };
    return minimize_interval(sq, lo, hi).x;
}

}  // namespace detail

template <class K>
InitialFit fit_initial(const K& kernel, const Engine<K>& eng, const EstimationConfig& cfg) {
    const ParameterIndex idx = kernel.index();
    const Box box = kernel.default_box();
    const int ng = idx.n_global(), q = idx.q(), p = kernel.p();
    if (cfg.init_grid.empty()) throw ConfigError("init_grid must be nonempty");

    InitialFit out;
    const int nstart = static_cast<int>(cfg.init_grid.size());
    out.theta.resize(nstart);
    out.loglik.assign(nstart, -std::numeric_limits<double>::infinity());
    out.ok.assign(nstart, false);

    Box gbox;
    gbox.lo.assign(box.lo.begin(), box.lo.begin() + ng);
    gbox.hi.assign(box.hi.begin(), box.hi.begin() + ng);
    const std::vector<double> gstart =
        cfg.global_start.empty() ? default_global_start(kernel) : cfg.global_start;
    if (static_cast<int>(gstart.size()) != ng)
        throw ConfigError("global_start length must match the global block");

    for (int v = 0; v < nstart; ++v) {
        const double c0 = cfg.init_grid[v];
        std::vector<double> th(q, c0);
        for (int g = 0; g < ng; ++g) th[g] = gstart[g];
        for (int l = 0; l < q; ++l) th[l] = box.clamp(l, th[l]);

        bool start_ok = true;
        if (ng > 0) {
            std::vector<double> work = th;
            Objective gobj = [&](std::span<const double> xg, std::span<double> grad) {
                for (int g = 0; g < ng; ++g) work[g] = xg[g];
                return eng.loglik_and_global_grad(work, grad);
            };
            auto r = maximize_box(gobj, std::vector<double>(th.begin(), th.begin() + ng), gbox,
                                  cfg.opt);
            if (r.status == OptStatus::non_finite || r.status == OptStatus::line_search_failed)
                start_ok = false;
            for (int g = 0; g < ng; ++g) th[g] = r.x[g];
        }
        if (start_ok && q > ng) {
            std::vector<double> work = th;
            for (int l = ng; l < q; ++l) {
                auto obj = [&](double x) {
                    work[l] = x;
                    return -eng.partial_loglik(l, work);
                };
                auto r = detail::minimize_interval(obj, box.lo[l], box.hi[l]);
                th[l] = r.x;
                work[l] = box.clamp(l, c0);  // other locals stay at the start constant
            }
        }
        if (start_ok) {
            out.theta[v] = th;
            out.loglik[v] = eng.full_loglik(th);
            out.ok[v] = true;
        }
    }
    for (int v = 0; v < nstart; ++v)
        if (out.ok[v] && (out.best < 0 || out.loglik[v] > out.loglik[out.best])) out.best = v;
    if (out.best < 0) throw EstimationError("initial estimation failed for every start");
    return out;
}

template <class K>
InitialFit fit_initial(const K& kernel, const SnapshotSeries& series,
                       const EstimationConfig& cfg = {}) {
    Engine<K> eng(kernel, series);
    return fit_initial(kernel, eng, cfg);
}

// Blockwise partial-likelihood ascent from a starting vector: re-fit the
// global block, then sweep the univariate local maximizations carrying
// updated values forward. Washes out the starting constants so the pilot
// entering the projection stage is nearly start-independent.
template <class K>
std::vector<double> ascent_stabilize(const K& kernel, const Engine<K>& eng,
                                     std::vector<double> th, const EstimationConfig& cfg) {
    const ParameterIndex idx = kernel.index();
    const Box box = kernel.default_box();
    const int ng = idx.n_global(), q = idx.q();
    Box gbox;
    gbox.lo.assign(box.lo.begin(), box.lo.begin() + ng);
    gbox.hi.assign(box.hi.begin(), box.hi.begin() + ng);
    for (int cycle = 0; cycle < cfg.stabilize_cycles; ++cycle) {
        const std::vector<double> prev = th;
        if (ng > 0) {
            std::vector<double> work = th;
            Objective gobj = [&](std::span<const double> xg, std::span<double> grad) {
                for (int g = 0; g < ng; ++g) work[g] = xg[g];
                return eng.loglik_and_global_grad(work, grad);
            };
            auto r = maximize_box(gobj, std::vector<double>(th.begin(), th.begin() + ng), gbox,
                                  cfg.opt);
            for (int g = 0; g < ng; ++g) th[g] = r.x[g];
        }
        for (int sweep = 0; sweep < cfg.stabilize_sweeps; ++sweep) {
            for (int l = ng; l < q; ++l) {
                auto obj = [&](double x) {
                    th[l] = x;
                    return -eng.partial_loglik(l, th);
                };
                th[l] = detail::minimize_interval(obj, box.lo[l], box.hi[l]).x;
            }
        }
        double change = 0;
        for (int l = 0; l < q; ++l) change = std::max(change, std::fabs(th[l] - prev[l]));
        if (change < cfg.stabilize_tol) break;
    }
    return th;
}

// ---------------------------------------------------------------------------
// Projection-refined estimator with variance estimates and confidence
// intervals.
// ---------------------------------------------------------------------------

struct ParamFit {
    std::string name;
    double theta_tilde = 0;  // pilot
    double theta_check = 0;  // after the first ball search
    double theta_hat = 0;    // final
    double tau = 0;          // selected constraint level
    double tau_mult = 0;     // selected grid multiplier
    double audit = 0;        // |H' phi - e_l|_inf at the pilot
    double zeta = 0;         // variance estimate
    double se = 0;
    double ci_lo = 0, ci_hi = 0;
    bool refined = false;  // LP succeeded for some tau
    bool ci_ok = false;
    std::vector<std::pair<int, double>> phi;  // sparse projection vector
};

struct FitReport {
    KernelId kernel = KernelId::transitivity;
    int p = 0, n = 0, q = 0;
    std::vector<double> theta_tilde, theta_check, theta_hat;
    std::vector<ParamFit> params;
    double loglik_initial = 0;  // normalized full conditional loglik at the pilot
    double loglik_final = 0;
    double delta = 0;  // Delta_n
    long clip_count = 0;
    int lp_failures = 0;
    double seconds = 0;
    // multi-start metadata (filled by the pipeline driver)
    int best_start = -1;
    std::vector<double> start_loglik;
};

// variance estimate of Remark-style form at the returned estimate
template <class K>
double variance_estimate(const Engine<K>& eng, int l, std::span<const double> phi,
                         std::span<const double> theta_hat) {
    return eng.zeta(l, phi, theta_hat);
}

template <class K>
FitReport fit_improved(const K& kernel, const Engine<K>& eng, std::vector<double> theta_tilde,
                       const EstimationConfig& cfg) {
    const auto t0 = std::chrono::steady_clock::now();
    const ParameterIndex idx = kernel.index();
    const Box box = kernel.default_box();
    const int q = idx.q(), ng = idx.n_global();
    const int n = eng.transitions() + K::order;
    const int threads = resolve_threads(cfg.threads);

    FitReport rep;
    rep.kernel = K::id;
    rep.p = kernel.p();
    rep.n = n;
    rep.q = q;
    rep.delta = delta_n(n, kernel.p());
    rep.theta_tilde = theta_tilde;
    rep.params.resize(q);
    rep.theta_check.assign(q, 0.0);
    rep.theta_hat.assign(q, 0.0);
    rep.loglik_initial = eng.full_loglik(theta_tilde);

    const double sqrt_delta = std::sqrt(rep.delta);
    ScoreCache cache = eng.build_cache(theta_tilde);
    rep.clip_count = cache.clip_count;

    std::atomic<int> lp_failures{0};

    // stage 1: projection vector, tau selection, first ball search around the pilot
    parallel_for(q, threads, [&](int l) {
        ParamFit& pf = rep.params[l];
        pf.name = idx.name(l);
        pf.theta_tilde = theta_tilde[l];
        const double r_tilde = idx.is_global(l) ? cfg.r_tilde_global : cfg.r_tilde_local;
        auto h = eng.assemble_jacobian(cache, l);

        double best_ratio = std::numeric_limits<double>::infinity();
        for (double mult : cfg.tau_grid) {
            const double tau = mult * sqrt_delta;
            auto lp = solve_l1_projection(h, q, l, tau);
            if (lp.status != LpStatus::optimal) continue;

            std::vector<double> work = theta_tilde;
            auto pre = eng.build_proj1d(l, lp.phi, work);
            const double lo = std::max(theta_tilde[l] - r_tilde, box.lo[l]);
            const double hi = std::min(theta_tilde[l] + r_tilde, box.hi[l]);
            auto fbar = [&](double x) {
                work[l] = x;
                return eng.eval_proj1d(pre, lp.phi, work);
            };
            const double xcheck = detail::nearest_root_search(fbar, lo, hi, theta_tilde[l]);
            work[l] = xcheck;
            auto stats = eng.projected_score_stats(l, lp.phi, work);
            const double denom = stats.sum_dl * stats.sum_dl;
            const double ratio = denom > 0 ? stats.sum_f2 / denom
                                           : std::numeric_limits<double>::infinity();
            if (ratio < best_ratio) {
                best_ratio = ratio;
                pf.refined = true;
                pf.tau = tau;
                pf.tau_mult = mult;
                pf.theta_check = xcheck;
                pf.audit = lp.residual_inf;
                pf.phi.clear();
                for (int k = 0; k < q; ++k)
                    if (lp.phi[k] != 0.0) pf.phi.emplace_back(k, lp.phi[k]);
            }
        }
        if (!pf.refined) {
            pf.theta_check = theta_tilde[l];  // flagged; pilot retained
            lp_failures.fetch_add(1);
        }
        rep.theta_check[l] = pf.theta_check;
    });

    // stage 2: final ball search around theta_check with nuisance at theta_check
    parallel_for(q, threads, [&](int l) {
        ParamFit& pf = rep.params[l];
        if (!pf.refined) {
            rep.theta_hat[l] = pf.theta_check;
            pf.theta_hat = pf.theta_check;
            return;
        }
        const double r_check = idx.is_global(l) ? cfg.r_check_global : cfg.r_check_local;
        std::vector<double> phi(q, 0.0);
        for (auto& [k, v] : pf.phi) phi[k] = v;
        std::vector<double> work = rep.theta_check;
        auto pre = eng.build_proj1d(l, phi, work);
        const double lo = std::max(pf.theta_check - r_check, box.lo[l]);
        const double hi = std::min(pf.theta_check + r_check, box.hi[l]);
        auto fbar = [&](double x) {
            work[l] = x;
            return eng.eval_proj1d(pre, phi, work);
        };
        const double xhat = detail::nearest_root_search(fbar, lo, hi, pf.theta_check);
        pf.theta_hat = xhat;
        rep.theta_hat[l] = xhat;
    });

    // stage 3: variance estimates and confidence intervals at theta_hat
    const double z = normal_quantile(0.5 + 0.5 * cfg.ci_level);
    parallel_for(q, threads, [&](int l) {
        ParamFit& pf = rep.params[l];
        if (!pf.refined) return;
        std::vector<double> phi(q, 0.0);
        for (auto& [k, v] : pf.phi) phi[k] = v;
        pf.zeta = eng.zeta(l, phi, rep.theta_hat);
        if (pf.zeta > 0) {
            pf.se = std::sqrt(pf.zeta / (double(n) * idx.s_size(l)));
            pf.ci_lo = pf.theta_hat - z * pf.se;
            pf.ci_hi = pf.theta_hat + z * pf.se;
            pf.ci_ok = true;
        }
    });

    rep.lp_failures = lp_failures.load();
    rep.loglik_final = eng.full_loglik(rep.theta_hat);
    rep.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rep;
}

template <class K>
FitReport fit_improved(const K& kernel, const SnapshotSeries& series,
                       const std::vector<double>& theta_tilde, const EstimationConfig& cfg = {}) {
    Engine<K> eng(kernel, series);
    return fit_improved(kernel, eng, theta_tilde, cfg);
}

// ---------------------------------------------------------------------------
// Full pipeline: initial estimator, optional IMoM stabilization, improved
// estimator. Runs once per starting value; `best` is the start with the
// highest final conditional log-likelihood.
// ---------------------------------------------------------------------------

enum class FitMethod { mle, imom, mle_imom_init };

inline FitMethod fit_method_from_string(const std::string& s) {
    if (s == "mle") return FitMethod::mle;
    if (s == "imom") return FitMethod::imom;
    if (s == "mle+imom-init") return FitMethod::mle_imom_init;
    throw ConfigError("unknown fit method: \"" + s + "\" (mle | imom | mle+imom-init)");
}

template <class K>
struct PipelineFit {
    InitialFit initial;
    std::vector<FitReport> reports;  // one per start; empty slots when a start failed
    std::vector<ImomResult> imom;    // populated for imom-based methods
    int best = -1;
};

template <class K>
PipelineFit<K> fit_pipeline(const K& kernel, const SnapshotSeries& series, FitMethod method,
                            const EstimationConfig& cfg = {}) {
    Engine<K> eng(kernel, series);
    PipelineFit<K> out;
    out.initial = fit_initial(kernel, eng, cfg);
    const int nstart = static_cast<int>(out.initial.theta.size());
    out.reports.resize(nstart);
    if (method == FitMethod::imom || method == FitMethod::mle_imom_init)
        out.imom.resize(nstart);

    for (int v = 0; v < nstart; ++v) {
        if (!out.initial.ok[v]) continue;
        std::vector<double> pilot = out.initial.theta[v];
        if (method == FitMethod::imom || method == FitMethod::mle_imom_init) {
            if constexpr (K::separable && K::order == 1) {
                out.imom[v] = imom_fit(kernel, series, pilot, cfg.imom);
                pilot = out.imom[v].theta;
            } else {
                throw ConfigError("IMoM requires a separable AR(1) kernel");
            }
        }
        if (method == FitMethod::imom) {
            FitReport rep;
            rep.kernel = K::id;
            rep.p = kernel.p();
            rep.n = series.n();
            rep.q = kernel.index().q();
            rep.theta_tilde = out.initial.theta[v];
            rep.theta_hat = pilot;
            rep.loglik_initial = out.initial.loglik[v];
            rep.loglik_final = eng.full_loglik(pilot);
            out.reports[v] = rep;
        } else {
            if (method == FitMethod::mle && cfg.stabilize_cycles > 0) {
                // restart the blockwise ascent from the raw start constants;
                // the one-shot locals of the initial estimator absorb the
                // start misspecification and would derail the first global
                // refit of the ascent
                const Box box = kernel.default_box();
                const int ng = kernel.index().n_global();
                std::vector<double> th0(kernel.index().q(), cfg.init_grid[v]);
                const std::vector<double> gstart =
                    cfg.global_start.empty() ? default_global_start(kernel) : cfg.global_start;
                for (int g = 0; g < ng; ++g) th0[g] = gstart[g];
                for (int l = 0; l < kernel.index().q(); ++l) th0[l] = box.clamp(l, th0[l]);
                pilot = ascent_stabilize(kernel, eng, th0, cfg);
            }
            const int passes = std::max(1, cfg.refine_passes);
            for (int pass = 0; pass < passes; ++pass) {
                out.reports[v] = fit_improved(kernel, eng, pilot, cfg);
                pilot = out.reports[v].theta_hat;
            }
            out.reports[v].theta_tilde = out.initial.theta[v];  // report the raw initial
            out.reports[v].loglik_initial = out.initial.loglik[v];
        }
        if (out.best < 0 || out.reports[v].loglik_final > out.reports[out.best].loglik_final)
            out.best = v;
    }
    if (out.best < 0) throw EstimationError("estimation failed for every start");
    for (int v = 0; v < nstart; ++v) {
        if (!out.initial.ok[v]) continue;
        out.reports[v].best_start = out.best;
        out.reports[v].start_loglik = out.initial.loglik;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Replication driver and rMAE evaluation
// ---------------------------------------------------------------------------

// relative mean absolute error per parameter group, averaged over starts
struct RmaeTable {
    std::map<std::string, double> value;  // "a", "b", "xi", "eta", ...
};

inline RmaeTable rmae(const ParameterIndex& idx, const std::vector<std::vector<double>>& fits,
                      const std::vector<double>& truth) {
    RmaeTable out;
    if (fits.empty()) return out;
    std::map<std::string, double> acc;
    std::map<std::string, int> cnt;
    for (const auto& th : fits) {
        for (int g = 0; g < idx.n_global(); ++g) {
            acc[idx.name(g)] += std::fabs(th[g] - truth[g]) / std::fabs(truth[g]);
            ++cnt[idx.name(g)];
        }
        if (idx.layout() == LocalLayout::node_pair) {
            double sx = 0, se = 0;
            for (int i = 0; i < idx.p(); ++i) {
                sx += std::fabs(th[idx.xi_index(i)] - truth[idx.xi_index(i)]) /
                      std::fabs(truth[idx.xi_index(i)]);
                se += std::fabs(th[idx.eta_index(i)] - truth[idx.eta_index(i)]) /
                      std::fabs(truth[idx.eta_index(i)]);
            }
            acc["xi"] += sx / idx.p();
            acc["eta"] += se / idx.p();
            ++cnt["xi"];
            ++cnt["eta"];
        }
    }
    for (auto& [k, v] : acc) out.value[k] = v / cnt[k];
    return out;
}

struct ReplicationResult {
    RmaeTable rmae_initial;
    RmaeTable rmae_improved;
    std::map<std::string, double> covered;    // fraction of CIs containing truth
    std::map<std::string, double> ci_length;  // mean CI length
    int fits = 0;                             // successful (replication, start) fits
};

struct ReplicationSummary {
    std::vector<ReplicationResult> per_rep;
    RmaeTable rmae_initial;  // means over replications
    RmaeTable rmae_improved;
    std::map<std::string, double> coverage;
    std::map<std::string, double> ci_length;
};

// Simulates `replications` series at the truth and runs the full pipeline on
// each; replication r uses seed seed_base + r. Parallel across replications.
template <class K>
ReplicationSummary run_replications(const K& kernel, const ParameterSet& truth,
                                    const SimConfig& sim, FitMethod method,
                                    const EstimationConfig& cfg, int replications,
                                    std::uint64_t seed_base, int threads = 0) {
    const ParameterIndex idx = kernel.index();
    ReplicationSummary sum;
    sum.per_rep.resize(replications);
    EstimationConfig cfg_one = cfg;
    cfg_one.threads = 1;  // parallelism lives at the replication level

    parallel_for(replications, resolve_threads(threads), [&](int r) {
        SimConfig s = sim;
        s.seed = seed_base + static_cast<std::uint64_t>(r);
        auto series = simulate(kernel, truth, s);
        auto fit = fit_pipeline(kernel, series, method, cfg_one);
        ReplicationResult& rr = sum.per_rep[r];
        std::vector<std::vector<double>> init_fits, improved_fits;
        std::map<std::string, double> cov, len;
        std::map<std::string, int> cov_n;
        for (std::size_t v = 0; v < fit.reports.size(); ++v) {
            if (!fit.initial.ok[v]) continue;
            init_fits.push_back(fit.initial.theta[v]);
            improved_fits.push_back(fit.reports[v].theta_hat);
            if (!fit.reports[v].params.empty()) {
                for (int g = 0; g < idx.n_global(); ++g) {
                    const ParamFit& pf = fit.reports[v].params[g];
                    if (!pf.ci_ok) continue;
                    const std::string name = idx.name(g);
                    cov[name] += (truth.values[g] >= pf.ci_lo && truth.values[g] <= pf.ci_hi);
                    len[name] += pf.ci_hi - pf.ci_lo;
                    ++cov_n[name];
                }
            }
            ++rr.fits;
        }
        rr.rmae_initial = rmae(idx, init_fits, truth.values);
        rr.rmae_improved = rmae(idx, improved_fits, truth.values);
        for (auto& [k, v] : cov) rr.covered[k] = v / cov_n[k];
        for (auto& [k, v] : len) rr.ci_length[k] = v / cov_n[k];
    });

    // aggregate over replications
    std::map<std::string, double> cnt;
    for (const auto& rr : sum.per_rep) {
        for (auto& [k, v] : rr.rmae_initial.value) sum.rmae_initial.value[k] += v;
        for (auto& [k, v] : rr.rmae_improved.value) sum.rmae_improved.value[k] += v;
        for (auto& [k, v] : rr.covered) {
            sum.coverage[k] += v;
            sum.ci_length[k] += rr.ci_length.at(k);
            cnt[k] += 1;
        }
    }
    const double nrep = double(replications);
    for (auto& [k, v] : sum.rmae_initial.value) v /= nrep;
    for (auto& [k, v] : sum.rmae_improved.value) v /= nrep;
    for (auto& [k, v] : sum.coverage) v /= cnt[k];
    for (auto& [k, v] : sum.ci_length) v /= cnt[k];
    return sum;
}

}  // namespace arnet
