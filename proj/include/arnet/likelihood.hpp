#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "arnet/core.hpp"
#include "arnet/kernels.hpp"

namespace arnet {

// Per-edge score-Jacobian contributions aggregated over time, bound to the
// parameter vector they were built for. Shared across all l when assembling
// the projection constraint matrices.
struct ScoreCache {
    std::vector<double> theta_stamp;
    std::vector<double> blocks;  // E x (ns*ns), row-major slot blocks
    long clip_count = 0;

    bool matches(std::span<const double> theta) const {
        if (theta.size() != theta_stamp.size()) return false;
        for (std::size_t k = 0; k < theta_stamp.size(); ++k)
            if (theta[k] != theta_stamp[k]) return false;
        return true;
    }
};

// Evaluation engine for one kernel/series pair: caches lagged edge statistics
// for every transition once, then serves likelihood, score and Jacobian
// evaluations at arbitrary parameter values. All methods are const and
// thread-safe.
template <class K>
class Engine {
  public:
    static constexpr int ns = K::slot_count;

    Engine(const K& kernel, const SnapshotSeries& series)
        : kernel_(kernel), series_(series), index_(kernel.index()), pairs_(series.p()) {
        if (series.p() != kernel.p()) throw DimensionError("series p does not match kernel");
        m_ = K::order;
        T_ = series.n() - m_;
        if (T_ < 1) throw DimensionError("series must have n > m transitions");
        E_ = pair_count(series.p());
        ctx_.resize(static_cast<std::size_t>(T_) * E_);
        xprev_.resize(ctx_.size());
        xcur_.resize(ctx_.size());
        for (int t = 0; t < T_; ++t) {
            const int tau = m_ + t;  // 0-based target snapshot
            kernel_.fill_contexts(series_, tau, pairs_, &ctx_[static_cast<std::size_t>(t) * E_]);
            for (int e = 0; e < E_; ++e) {
                const std::size_t a = static_cast<std::size_t>(t) * E_ + e;
                xprev_[a] = series_.at(tau - 1, pairs_.i_of[e], pairs_.j_of[e]);
                xcur_[a] = series_.at(tau, pairs_.i_of[e], pairs_.j_of[e]);
            }
        }
        slots_.resize(E_);
        for (int e = 0; e < E_; ++e)
            slots_[e] = index_.params_of_edge(pairs_.i_of[e], pairs_.j_of[e]);
        node_edges_.resize(series.p());
        for (int e = 0; e < E_; ++e) {
            node_edges_[pairs_.i_of[e]].push_back(e);
            node_edges_[pairs_.j_of[e]].push_back(e);
        }
    }

    const K& kernel() const { return kernel_; }
    const ParameterIndex& index() const { return index_; }
    int transitions() const { return T_; }
    int num_edges() const { return E_; }
    int q() const { return index_.q(); }

    template <class F>
    void for_each_scope_edge(int l, F&& fn) const {
        if (index_.is_global(l)) {
            for (int e = 0; e < E_; ++e) fn(e);
        } else if (index_.layout() == LocalLayout::per_edge) {
            fn((l - index_.n_global()) / 2);
        } else {
            const int g = index_.n_global();
            const int node = (l - g < series_.p()) ? l - g : l - g - series_.p();
            for (int e : node_edges_[node]) fn(e);
        }
    }

    // normalized partial log-likelihood for the scope of parameter l
    double partial_loglik(int l, std::span<const double> theta, long* clips = nullptr) const {
        auto ev = kernel_.evaluator(theta);
        double acc = 0;
        long nclip = 0;
        for (int t = 0; t < T_; ++t) {
            const std::size_t base = static_cast<std::size_t>(t) * E_;
            for_each_scope_edge(l, [&](int e) {
                bool cl = false;
                const double g = ev.gamma(ctx_[base + e], xprev_[base + e], &cl);
                nclip += cl;
                acc += xcur_[base + e] ? std::log(g) : std::log1p(-g);
            });
        }
        if (clips) *clips += nclip;
        return acc / (double(T_) * index_.s_size(l));
    }

    // normalized full conditional log-likelihood over all pairs
    double full_loglik(std::span<const double> theta, long* clips = nullptr) const {
        auto ev = kernel_.evaluator(theta);
        double acc = 0;
        long nclip = 0;
        for (std::size_t a = 0; a < ctx_.size(); ++a) {
            bool cl = false;
            const double g = ev.gamma(ctx_[a], xprev_[a], &cl);
            nclip += cl;
            acc += xcur_[a] ? std::log(g) : std::log1p(-g);
        }
        if (clips) *clips += nclip;
        return acc / (double(T_) * E_);
    }

    // unnormalized conditional log-likelihood (for information criteria)
    double total_loglik(std::span<const double> theta) const {
        return full_loglik(theta) * double(T_) * E_;
    }

    // fused full log-likelihood and its global-block gradient (one data pass)
    double loglik_and_global_grad(std::span<const double> theta, std::span<double> grad_g,
                                  long* clips = nullptr) const {
        const int ng = index_.n_global();
        auto ev = kernel_.evaluator(theta);
        double acc = 0;
        double d[ns];
        long nclip = 0;
        for (int g = 0; g < ng; ++g) grad_g[g] = 0.0;
        for (std::size_t a = 0; a < ctx_.size(); ++a) {
            bool cl = false;
            const double g = ev.gamma_and_grad(ctx_[a], xprev_[a], d, &cl);
            nclip += cl;
            acc += xcur_[a] ? std::log(g) : std::log1p(-g);
            const double r = (xcur_[a] - g) / (g * (1.0 - g));
            for (int s = 0; s < ng; ++s) grad_g[s] += r * d[s];  // global slots lead
        }
        const double scale = 1.0 / (double(T_) * E_);
        for (int g = 0; g < ng; ++g) grad_g[g] *= scale;
        if (clips) *clips += nclip;
        return acc * scale;
    }

    // One-coordinate view of the projected score mean_t phi' g_t^{(l)}:
    // transitions whose gamma is structurally free of theta_l contribute a
    // constant, precomputed once; the rest are re-evaluated per candidate.
    struct Proj1d {
        int l = 0;
        double constant = 0;
        double inv_norm = 0;
        std::vector<std::uint32_t> items;  // packed t*E+e of dependent terms
    };

    Proj1d build_proj1d(int l, std::span<const double> phi, std::span<const double> theta) const {
        Proj1d out;
        out.l = l;
        out.inv_norm = 1.0 / (double(T_) * index_.s_size(l));
        auto ev = kernel_.evaluator(theta);
        double d[ns];
        double fixed = 0;
        for (int t = 0; t < T_; ++t) {
            const std::size_t base = static_cast<std::size_t>(t) * E_;
            for_each_scope_edge(l, [&](int e) {
                const std::size_t a = base + e;
                const SlotList& sl = slots_[e];
                int lslot = -1;
                for (int s = 0; s < sl.n; ++s)
                    if (sl[s] == l) lslot = s;
                if (lslot >= 0 && K::depends(lslot, xprev_[a])) {
                    out.items.push_back(static_cast<std::uint32_t>(a));
                    return;
                }
                const double g = ev.gamma_and_grad(ctx_[a], xprev_[a], d);
                double pd = 0;
                for (int s = 0; s < sl.n; ++s) pd += phi[sl[s]] * d[s];
                fixed += (xcur_[a] - g) / (g * (1.0 - g)) * pd;
            });
        }
        out.constant = fixed * out.inv_norm;
        return out;
    }

    // evaluate mean_t phi' g_t at the current theta (theta[l] varies between calls)
    double eval_proj1d(const Proj1d& pre, std::span<const double> phi,
                       std::span<const double> theta) const {
        auto ev = kernel_.evaluator(theta);
        double d[ns];
        double acc = 0;
        for (std::uint32_t a : pre.items) {
            const int e = static_cast<int>(a % E_);
            const SlotList& sl = slots_[e];
            const double g = ev.gamma_and_grad(ctx_[a], xprev_[a], d);
            double pd = 0;
            for (int s = 0; s < sl.n; ++s) pd += phi[sl[s]] * d[s];
            acc += (xcur_[a] - g) / (g * (1.0 - g)) * pd;
        }
        return pre.constant + acc * pre.inv_norm;
    }

    // score of the partial log-likelihood: (n-m)^{-1} sum_t g_t^{(l)}(theta)
    std::vector<double> score(int l, std::span<const double> theta, long* clips = nullptr) const {
        auto ev = kernel_.evaluator(theta);
        std::vector<double> out(q(), 0.0);
        double d[ns];
        long nclip = 0;
        for (int t = 0; t < T_; ++t) {
            const std::size_t base = static_cast<std::size_t>(t) * E_;
            for_each_scope_edge(l, [&](int e) {
                bool cl = false;
                const std::size_t a = base + e;
                const double g = ev.gamma_and_grad(ctx_[a], xprev_[a], d, &cl);
                nclip += cl;
                const double r = (xcur_[a] - g) / (g * (1.0 - g));
                for (int s = 0; s < slots_[e].n; ++s) out[slots_[e][s]] += r * d[s];
            });
        }
        const double scale = 1.0 / (double(T_) * index_.s_size(l));
        for (double& v : out) v *= scale;
        if (clips) *clips += nclip;
        return out;
    }

    // Slot-block contribution of one transition to d g_t / d theta:
    //   -[1/(g(1-g)) + (x-g)(1-2g)/(g^2(1-g)^2)] d_s1 d_s2 + r h_{s1,s2}
    // The blocks, summed over t, are enough to assemble the Jacobian for
    // every l, since scopes only reweight edges.
    ScoreCache build_cache(std::span<const double> theta) const {
        ScoreCache cache;
        cache.theta_stamp.assign(theta.begin(), theta.end());
        cache.blocks.assign(static_cast<std::size_t>(E_) * ns * ns, 0.0);
        auto ev = kernel_.evaluator(theta);

        std::vector<double> thp(theta.begin(), theta.end());
        double d[ns], hess[ns * ns];
        for (int e = 0; e < E_; ++e) {
            double* blk = &cache.blocks[static_cast<std::size_t>(e) * ns * ns];
            for (int t = 0; t < T_; ++t) {
                const std::size_t a = static_cast<std::size_t>(t) * E_ + e;
                bool cl = false;
                const double g = ev.gamma_and_grad(ctx_[a], xprev_[a], d, &cl);
                cache.clip_count += cl;
                const double gg = g * (1.0 - g);
                const double resid = (xcur_[a] - g) / gg;
                const double w2 = 1.0 / gg + (xcur_[a] - g) * (1.0 - 2.0 * g) / (gg * gg);
                if constexpr (K::analytic_hess) {
                    ev.gamma_hess(ctx_[a], xprev_[a], hess);
                } else {
                    fd_hess(thp, ctx_[a], xprev_[a], hess);
                }
                for (int s1 = 0; s1 < ns; ++s1)
                    for (int s2 = 0; s2 < ns; ++s2)
                        blk[s1 * ns + s2] += -w2 * d[s1] * d[s2] + resid * hess[s1 * ns + s2];
            }
        }
        return cache;
    }

    // H^{(l)} = (n-m)^{-1} sum_t d g_t^{(l)} / d theta, dense q x q row-major
    std::vector<double> assemble_jacobian(const ScoreCache& cache, int l) const {
        std::vector<double> h(static_cast<std::size_t>(q()) * q(), 0.0);
        const double scale = 1.0 / (double(T_) * index_.s_size(l));
        for_each_scope_edge(l, [&](int e) {
            const double* blk = &cache.blocks[static_cast<std::size_t>(e) * ns * ns];
            const SlotList& sl = slots_[e];
            for (int s1 = 0; s1 < sl.n; ++s1)
                for (int s2 = 0; s2 < sl.n; ++s2)
                    h[static_cast<std::size_t>(sl[s1]) * q() + sl[s2]] +=
                        scale * blk[s1 * ns + s2];
        });
        return h;
    }

    std::vector<double> score_jacobian(int l, std::span<const double> theta) const {
        return assemble_jacobian(build_cache(theta), l);
    }

    // mean_t of phi' g_t^{(l)}(theta); the projected-score objective is its square
    double projected_score_mean(int l, std::span<const double> phi,
                                std::span<const double> theta, long* clips = nullptr) const {
        auto ev = kernel_.evaluator(theta);
        double acc = 0;
        double d[ns];
        long nclip = 0;
        for (int t = 0; t < T_; ++t) {
            const std::size_t base = static_cast<std::size_t>(t) * E_;
            for_each_scope_edge(l, [&](int e) {
                bool cl = false;
                const std::size_t a = base + e;
                const double g = ev.gamma_and_grad(ctx_[a], xprev_[a], d, &cl);
                nclip += cl;
                double pd = 0;
                for (int s = 0; s < slots_[e].n; ++s) pd += phi[slots_[e][s]] * d[s];
                acc += (xcur_[a] - g) / (g * (1.0 - g)) * pd;
            });
        }
        if (clips) *clips += nclip;
        return acc / (double(T_) * index_.s_size(l));
    }

    struct ProjStats {
        double mean_f = 0;   // mean_t phi' g_t
        double sum_f2 = 0;   // sum_t (phi' g_t)^2
        double sum_dl = 0;   // phi' sum_t d g_t / d theta_l
    };

    // variance-ratio ingredients for the tau selection rule
    ProjStats projected_score_stats(int l, std::span<const double> phi,
                                    std::span<const double> theta) const {
        auto ev = kernel_.evaluator(theta);
        const double h = 1e-5 * std::max(1.0, std::fabs(theta[l]));
        std::vector<double> thp, thm;
        if constexpr (!K::analytic_hess) {
            thp.assign(theta.begin(), theta.end());
            thm.assign(theta.begin(), theta.end());
            thp[l] += h;
            thm[l] -= h;
        }
        auto evp = kernel_.evaluator(K::analytic_hess ? theta : std::span<const double>(thp));
        auto evm = kernel_.evaluator(K::analytic_hess ? theta : std::span<const double>(thm));

        ProjStats out;
        double d[ns], dp[ns], dm[ns], hess[ns * ns];
        const double inv_sl = 1.0 / double(index_.s_size(l));
        for (int t = 0; t < T_; ++t) {
            const std::size_t base = static_cast<std::size_t>(t) * E_;
            double ft = 0, dl = 0;
            for_each_scope_edge(l, [&](int e) {
                const std::size_t a = base + e;
                const SlotList& sl = slots_[e];
                int lslot = -1;
                for (int s = 0; s < sl.n; ++s)
                    if (sl[s] == l) lslot = s;
                const double g = ev.gamma_and_grad(ctx_[a], xprev_[a], d);
                const double gg = g * (1.0 - g);
                const double resid = (xcur_[a] - g) / gg;
                const double w2 = 1.0 / gg + (xcur_[a] - g) * (1.0 - 2.0 * g) / (gg * gg);
                double pd = 0;
                for (int s = 0; s < sl.n; ++s) pd += phi[sl[s]] * d[s];
                ft += resid * pd;
                if (lslot < 0) return;  // theta_l not involved in this edge
                // column l of the per-edge Hessian of gamma
                double hcol[ns];
                if constexpr (K::analytic_hess) {
                    ev.gamma_hess(ctx_[a], xprev_[a], hess);
                    for (int s = 0; s < sl.n; ++s) hcol[s] = hess[s * ns + lslot];
                } else {
                    evp.gamma_and_grad(ctx_[a], xprev_[a], dp);
                    evm.gamma_and_grad(ctx_[a], xprev_[a], dm);
                    for (int s = 0; s < sl.n; ++s) hcol[s] = (dp[s] - dm[s]) / (2.0 * h);
                }
                double ph = 0;
                for (int s = 0; s < sl.n; ++s)
                    ph += phi[sl[s]] * (-w2 * d[s] * d[lslot] + resid * hcol[s]);
                dl += ph;
            });
            ft *= inv_sl;
            dl *= inv_sl;
            out.mean_f += ft;
            out.sum_f2 += ft * ft;
            out.sum_dl += dl;
        }
        out.mean_f /= double(T_);
        return out;
    }

    // variance estimate: [(n-m)|S_l|]^{-1} sum_{t,e} (phi' dgamma)^2 / (g(1-g))
    double zeta(int l, std::span<const double> phi, std::span<const double> theta) const {
        auto ev = kernel_.evaluator(theta);
        double acc = 0;
        double d[ns];
        for (int t = 0; t < T_; ++t) {
            const std::size_t base = static_cast<std::size_t>(t) * E_;
            for_each_scope_edge(l, [&](int e) {
                const std::size_t a = base + e;
                const double g = ev.gamma_and_grad(ctx_[a], xprev_[a], d);
                double pd = 0;
                for (int s = 0; s < slots_[e].n; ++s) pd += phi[slots_[e][s]] * d[s];
                acc += pd * pd / (g * (1.0 - g));
            });
        }
        return acc / (double(T_) * index_.s_size(l));
    }

    const EdgeContext& context_at(int t, int e) const {
        return ctx_[static_cast<std::size_t>(t) * E_ + e];
    }
    int x_prev(int t, int e) const { return xprev_[static_cast<std::size_t>(t) * E_ + e]; }
    int x_cur(int t, int e) const { return xcur_[static_cast<std::size_t>(t) * E_ + e]; }
    const PairList& pairs() const { return pairs_; }

  private:
    void fd_hess(std::vector<double>& th, const EdgeContext& c, int x_prev, double* hess) const {
        const SlotList sl = index_.params_of_edge(c.i, c.j);
        double gp[ns], gm[ns];
        for (int s = 0; s < sl.n; ++s) {
            const int l = sl[s];
            const double h = 1e-5 * std::max(1.0, std::fabs(th[l])), orig = th[l];
            th[l] = orig + h;
            kernel_.evaluator(th).gamma_grad(c, x_prev, gp);
            th[l] = orig - h;
            kernel_.evaluator(th).gamma_grad(c, x_prev, gm);
            th[l] = orig;
            for (int r = 0; r < sl.n; ++r) hess[r * ns + s] = (gp[r] - gm[r]) / (2.0 * h);
        }
        for (int r = 0; r < sl.n; ++r)
            for (int s = r + 1; s < sl.n; ++s) {
                double mid = 0.5 * (hess[r * ns + s] + hess[s * ns + r]);
                hess[r * ns + s] = hess[s * ns + r] = mid;
            }
    }

    const K& kernel_;
    const SnapshotSeries& series_;
    ParameterIndex index_;
    PairList pairs_;
    int m_ = 0, T_ = 0, E_ = 0;
    std::vector<EdgeContext> ctx_;
    std::vector<std::uint8_t> xprev_, xcur_;
    std::vector<SlotList> slots_;
    std::vector<std::vector<int>> node_edges_;
};

}  // namespace arnet
