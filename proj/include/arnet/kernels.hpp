#pragma once

#include <bit>
#include <cmath>
#include <cstring>
#include <span>
#include <vector>

#include "arnet/core.hpp"

namespace arnet {

// ---------------------------------------------------------------------------
// Edge-level sufficient statistics
// ---------------------------------------------------------------------------

// U = (p-2)^{-1} sum_{k != i,j} X_ik X_jk
// V = (p-2)^{-1} sum_{k != i,j} [X_ik (1-X_jk) + (1-X_ik) X_jk]
inline std::pair<double, double> uv_stats(SnapshotView x, int i, int j) {
    if (i == j) throw IndexError("uv_stats: i == j");
    int cu = 0, cv = 0;
    for (int k = 0; k < x.p; ++k) {
        if (k == i || k == j) continue;
        int a = x(i, k), b = x(j, k);
        cu += a & b;
        cv += a ^ b;
    }
    double denom = x.p - 2;
    return {cu / denom, cv / denom};
}

// D_i = (p-1)^{-1} sum_{l != i} X_il
// D_minus = [(p-2)(p-3)]^{-1} sum over ordered pairs (k,l), k != l, both outside {i,j}
inline std::tuple<double, double, double> degree_stats(SnapshotView x, int i, int j) {
    if (x.p < 4) throw DimensionError("degree_stats: requires p >= 4");
    if (i == j) throw IndexError("degree_stats: i == j");
    int di = 0, dj = 0;
    long total = 0;
    for (int a = 0; a < x.p; ++a) {
        for (int b = a + 1; b < x.p; ++b) total += x(a, b);
        if (a != i) di += x(i, a);
        if (a != j) dj += x(j, a);
    }
    long outside2 = 2 * total - 2 * di - 2 * dj + 2 * x(i, j);
    return {di / double(x.p - 1), dj / double(x.p - 1),
            outside2 / double((x.p - 2) * (x.p - 3))};
}

// Lagged statistics needed by a kernel to evaluate one edge transition.
struct EdgeContext {
    int i = 0, j = 0;
    double u = 0, v = 0;               // transitivity stats (normalized)
    int ucnt = 0, vcnt = 0;            // raw common / one-sided neighbour counts
    double d_i = 0, d_j = 0, d_m = 0;  // degree stats
    std::uint8_t x2 = 0, x3 = 0;       // X^{t-2}, X^{t-3} (persistence lags)
};

// gamma = alpha + x_prev (1 - alpha - beta), clipped into [clip, 1-clip].
inline double edge_gamma(double alpha, double beta, int x_prev, double clip = 1e-6) {
    double g = x_prev ? 1.0 - beta : alpha;
    if (g < clip) return clip;
    if (g > 1.0 - clip) return 1.0 - clip;
    return g;
}

struct AlphaBeta {
    double alpha = 0, beta = 0;
    bool alpha_clipped = false, beta_clipped = false;
};

namespace detail {

inline double clip_prob(double x, double clip, bool& flag) {
    if (x < clip) {
        flag = true;
        return clip;
    }
    if (x > 1.0 - clip) {
        flag = true;
        return 1.0 - clip;
    }
    return x;
}

// Bitset-backed computation of U/V counts for every pair of one snapshot.
inline void pair_uv_counts(SnapshotView x, const PairList& pairs, int* ucnt, int* vcnt) {
    const int p = x.p;
    const int words = (p + 63) / 64;
    std::vector<std::uint64_t> rows(static_cast<std::size_t>(p) * words, 0);
    for (int i = 0; i < p; ++i)
        for (int k = 0; k < p; ++k)
            if (x(i, k)) rows[i * words + k / 64] |= 1ULL << (k % 64);
    const int ne = static_cast<int>(pairs.i_of.size());
    for (int e = 0; e < ne; ++e) {
        const std::uint64_t* ri = rows.data() + static_cast<std::size_t>(pairs.i_of[e]) * words;
        const std::uint64_t* rj = rows.data() + static_cast<std::size_t>(pairs.j_of[e]) * words;
        int cu = 0, cv = 0;
        for (int w = 0; w < words; ++w) {
            cu += std::popcount(ri[w] & rj[w]);
            cv += std::popcount(ri[w] ^ rj[w]);
        }
        // k = i and k = j contribute X_ij to the XOR count twice
        cv -= 2 * x(pairs.i_of[e], pairs.j_of[e]);
        ucnt[e] = cu;
        vcnt[e] = cv;
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Transitivity model (AR(1)):
//   alpha = xi_i xi_j e^{aU} / (1 + e^{aU} + e^{bV})
//   beta  = eta_i eta_j e^{bV} / (1 + e^{aU} + e^{bV})
// ---------------------------------------------------------------------------

class TransitivityKernel {
  public:
    static constexpr KernelId id = KernelId::transitivity;
    static constexpr int order = 1;
    static constexpr int slot_count = 6;  // [a, b, xi_i, xi_j, eta_i, eta_j]
    static constexpr bool analytic_hess = true;
    static constexpr bool separable = true;

    // whether gamma for a transition with this x_prev involves the slot
    static constexpr bool depends(int slot, int x_prev) {
        if (slot < 2) return true;                  // a, b enter both branches
        return (slot < 4) == (x_prev == 0);         // xi only forms, eta only dissolves
    }

    explicit TransitivityKernel(int p, double clip = 1e-6) : p_(p), clip_(clip) {
        if (p < 3) throw DimensionError("transitivity kernel requires p >= 3");
    }

    int p() const { return p_; }
    double clip() const { return clip_; }
    ParameterIndex index() const { return ParameterIndex(id, p_); }
    Box default_box() const {
        Box b;
        b.lo.assign(index().q(), 1e-4);
        b.hi.assign(index().q(), 3.0);
        b.lo[0] = b.lo[1] = 0.0;
        b.hi[0] = b.hi[1] = 60.0;
        return b;
    }

    EdgeContext context(const SnapshotSeries& s, int t, int i, int j) const {
        EdgeContext c;
        c.i = i;
        c.j = j;
        auto [u, v] = uv_stats(view(s, t - 1), i, j);
        c.u = u;
        c.v = v;
        c.ucnt = static_cast<int>(std::lround(u * (p_ - 2)));
        c.vcnt = static_cast<int>(std::lround(v * (p_ - 2)));
        return c;
    }

    void fill_contexts(const SnapshotSeries& s, int t, const PairList& pairs,
                       EdgeContext* out) const {
        const int ne = static_cast<int>(pairs.i_of.size());
        std::vector<int> cu(ne), cv(ne);
        detail::pair_uv_counts(view(s, t - 1), pairs, cu.data(), cv.data());
        for (int e = 0; e < ne; ++e) {
            out[e].i = pairs.i_of[e];
            out[e].j = pairs.j_of[e];
            out[e].ucnt = cu[e];
            out[e].vcnt = cv[e];
            out[e].u = cu[e] / double(p_ - 2);
            out[e].v = cv[e] / double(p_ - 2);
        }
    }

    class Eval {
      public:
        Eval(const TransitivityKernel& k, std::span<const double> theta)
            : k_(&k), th_(theta.data()), xi_(theta.data() + 2), eta_(theta.data() + 2 + k.p_) {
            const int levels = k.p_ - 1;  // raw counts range over [0, p-2]
            ea_.resize(levels);
            eb_.resize(levels);
            const double a = th_[0], b = th_[1], inv = 1.0 / (k.p_ - 2);
            for (int l = 0; l < levels; ++l) {
                ea_[l] = std::exp(a * l * inv);
                eb_[l] = std::exp(b * l * inv);
            }
        }

        AlphaBeta ab(const EdgeContext& c) const {
            const double A = ea_[c.ucnt], B = eb_[c.vcnt], S = 1.0 + A + B;
            AlphaBeta r;
            r.alpha = detail::clip_prob(xi_[c.i] * xi_[c.j] * A / S, k_->clip_, r.alpha_clipped);
            r.beta = detail::clip_prob(eta_[c.i] * eta_[c.j] * B / S, k_->clip_, r.beta_clipped);
            return r;
        }

        double gamma(const EdgeContext& c, int x_prev, bool* clipped = nullptr) const {
            AlphaBeta r = ab(c);
            if (clipped) *clipped = x_prev ? r.beta_clipped : r.alpha_clipped;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }

        // d gamma / d [a, b, xi_i, xi_j, eta_i, eta_j]; zero where the clip is active
        double gamma_and_grad(const EdgeContext& c, int x_prev, double* d,
                              bool* clipped = nullptr) const {
            const double A = ea_[c.ucnt], B = eb_[c.vcnt], S = 1.0 + A + B;
            const double inv_s2 = 1.0 / (S * S);
            std::memset(d, 0, slot_count * sizeof(double));
            if (!x_prev) {
                const double xx = xi_[c.i] * xi_[c.j], F = A / S;
                bool cl = false;
                double alpha = detail::clip_prob(xx * F, k_->clip_, cl);
                if (clipped) *clipped = cl;
                if (!cl) {
                    d[0] = xx * c.u * A * (1.0 + B) * inv_s2;
                    d[1] = -xx * c.v * A * B * inv_s2;
                    d[2] = xi_[c.j] * F;
                    d[3] = xi_[c.i] * F;
                }
                return alpha;
            }
            const double hh = eta_[c.i] * eta_[c.j], G = B / S;
            bool cl = false;
            double beta = detail::clip_prob(hh * G, k_->clip_, cl);
            if (clipped) *clipped = cl;
            if (!cl) {
                // gamma = 1 - beta
                d[0] = hh * c.u * A * B * inv_s2;
                d[1] = -hh * c.v * B * (1.0 + A) * inv_s2;
                d[4] = -eta_[c.j] * G;
                d[5] = -eta_[c.i] * G;
            }
            return 1.0 - beta;
        }

        void gamma_grad(const EdgeContext& c, int x_prev, double* d) const {
            gamma_and_grad(c, x_prev, d);
        }

        // d^2 gamma, row-major slot_count x slot_count
        void gamma_hess(const EdgeContext& c, int x_prev, double* h) const {
            const double A = ea_[c.ucnt], B = eb_[c.vcnt], S = 1.0 + A + B;
            const double inv_s2 = 1.0 / (S * S), inv_s3 = inv_s2 / S;
            const double u = c.u, v = c.v;
            std::memset(h, 0, slot_count * slot_count * sizeof(double));
            auto at = [&](int r, int col) -> double& { return h[r * slot_count + col]; };
            bool cl = false;
            if (!x_prev) {
                const double xx = xi_[c.i] * xi_[c.j], F = A / S;
                detail::clip_prob(xx * F, k_->clip_, cl);
                if (cl) return;
                const double Fa = u * A * (1.0 + B) * inv_s2;
                const double Fb = -v * A * B * inv_s2;
                at(0, 0) = xx * u * u * A * (1.0 + B) * (S - 2.0 * A) * inv_s3;
                at(0, 1) = at(1, 0) = xx * u * v * A * B * (A - 1.0 - B) * inv_s3;
                at(1, 1) = xx * v * v * A * B * (2.0 * B - S) * inv_s3;
                at(0, 2) = at(2, 0) = xi_[c.j] * Fa;
                at(0, 3) = at(3, 0) = xi_[c.i] * Fa;
                at(1, 2) = at(2, 1) = xi_[c.j] * Fb;
                at(1, 3) = at(3, 1) = xi_[c.i] * Fb;
                at(2, 3) = at(3, 2) = F;
                return;
            }
            const double hh = eta_[c.i] * eta_[c.j], G = B / S;
            detail::clip_prob(hh * G, k_->clip_, cl);
            if (cl) return;
            // gamma = 1 - beta, so negate the beta Hessian
            const double Ga = -u * A * B * inv_s2;
            const double Gb = v * B * (1.0 + A) * inv_s2;
            at(0, 0) = -hh * u * u * A * B * (2.0 * A - S) * inv_s3;
            at(0, 1) = at(1, 0) = -hh * u * v * A * B * (B - 1.0 - A) * inv_s3;
            at(1, 1) = -hh * v * v * B * (1.0 + A) * (S - 2.0 * B) * inv_s3;
            at(0, 4) = at(4, 0) = -eta_[c.j] * Ga;
            at(0, 5) = at(5, 0) = -eta_[c.i] * Ga;
            at(1, 4) = at(4, 1) = -eta_[c.j] * Gb;
            at(1, 5) = at(5, 1) = -eta_[c.i] * Gb;
            at(4, 5) = at(5, 4) = -G;
        }

        // separable parts: alpha = xi_i xi_j f, beta = eta_i eta_j g
        double f_tilde(const EdgeContext& c) const {
            const double A = ea_[c.ucnt], B = eb_[c.vcnt];
            return A / (1.0 + A + B);
        }
        double g_tilde(const EdgeContext& c) const {
            const double A = ea_[c.ucnt], B = eb_[c.vcnt];
            return B / (1.0 + A + B);
        }

      private:
        const TransitivityKernel* k_;
        const double* th_;
        const double* xi_;
        const double* eta_;
        std::vector<double> ea_, eb_;
    };

    Eval evaluator(std::span<const double> theta) const { return Eval(*this, theta); }

  private:
    friend class Eval;
    int p_;
    double clip_;
};

// ---------------------------------------------------------------------------
// Extended transitivity model (AR(1)): separate (a1,b1) for formation and
// (a2,b2) for dissolution. Ill-conditioned on sparse data; the dissolution
// block sees few at-risk observations.
// ---------------------------------------------------------------------------

class TransitivityExtKernel {
  public:
    static constexpr KernelId id = KernelId::transitivity_ext;
    static constexpr int order = 1;
    static constexpr int slot_count = 8;  // [a1, b1, a2, b2, xi_i, xi_j, eta_i, eta_j]
    static constexpr bool analytic_hess = false;
    static constexpr bool separable = true;

    static constexpr bool depends(int slot, int x_prev) {
        const bool formation = (slot == 0 || slot == 1 || slot == 4 || slot == 5);
        return formation == (x_prev == 0);
    }

    explicit TransitivityExtKernel(int p, double clip = 1e-6) : p_(p), clip_(clip) {
        if (p < 3) throw DimensionError("extended transitivity kernel requires p >= 3");
    }

    int p() const { return p_; }
    double clip() const { return clip_; }
    ParameterIndex index() const { return ParameterIndex(id, p_); }
    Box default_box() const {
        Box b;
        b.lo.assign(index().q(), 1e-4);
        b.hi.assign(index().q(), 3.0);
        for (int g = 0; g < 4; ++g) {
            b.lo[g] = 0.0;
            b.hi[g] = 60.0;
        }
        return b;
    }

    EdgeContext context(const SnapshotSeries& s, int t, int i, int j) const {
        TransitivityKernel base(p_, clip_);
        return base.context(s, t, i, j);
    }
    void fill_contexts(const SnapshotSeries& s, int t, const PairList& pairs,
                       EdgeContext* out) const {
        TransitivityKernel base(p_, clip_);
        base.fill_contexts(s, t, pairs, out);
    }

    class Eval {
      public:
        Eval(const TransitivityExtKernel& k, std::span<const double> theta)
            : k_(&k), xi_(theta.data() + 4), eta_(theta.data() + 4 + k.p_) {
            const int levels = k.p_ - 1;
            const double inv = 1.0 / (k.p_ - 2);
            for (auto [tab, coef] : {std::pair{&e_[0], theta[0]}, {&e_[1], theta[1]},
                                     {&e_[2], theta[2]}, {&e_[3], theta[3]}}) {
                tab->resize(levels);
                for (int l = 0; l < levels; ++l) (*tab)[l] = std::exp(coef * l * inv);
            }
        }

        AlphaBeta ab(const EdgeContext& c) const {
            const double A1 = e_[0][c.ucnt], B1 = e_[1][c.vcnt], S1 = 1.0 + A1 + B1;
            const double A2 = e_[2][c.ucnt], B2 = e_[3][c.vcnt], S2 = 1.0 + A2 + B2;
            AlphaBeta r;
            r.alpha = detail::clip_prob(xi_[c.i] * xi_[c.j] * A1 / S1, k_->clip_, r.alpha_clipped);
            r.beta = detail::clip_prob(eta_[c.i] * eta_[c.j] * B2 / S2, k_->clip_, r.beta_clipped);
            return r;
        }

        double gamma(const EdgeContext& c, int x_prev, bool* clipped = nullptr) const {
            AlphaBeta r = ab(c);
            if (clipped) *clipped = x_prev ? r.beta_clipped : r.alpha_clipped;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }

        double gamma_and_grad(const EdgeContext& c, int x_prev, double* d,
                              bool* clipped = nullptr) const {
            std::memset(d, 0, slot_count * sizeof(double));
            bool cl = false;
            if (!x_prev) {
                const double A = e_[0][c.ucnt], B = e_[1][c.vcnt], S = 1.0 + A + B;
                const double xx = xi_[c.i] * xi_[c.j], F = A / S, inv_s2 = 1.0 / (S * S);
                double alpha = detail::clip_prob(xx * F, k_->clip_, cl);
                if (clipped) *clipped = cl;
                if (!cl) {
                    d[0] = xx * c.u * A * (1.0 + B) * inv_s2;
                    d[1] = -xx * c.v * A * B * inv_s2;
                    d[4] = xi_[c.j] * F;
                    d[5] = xi_[c.i] * F;
                }
                return alpha;
            }
            const double A = e_[2][c.ucnt], B = e_[3][c.vcnt], S = 1.0 + A + B;
            const double hh = eta_[c.i] * eta_[c.j], G = B / S, inv_s2 = 1.0 / (S * S);
            double beta = detail::clip_prob(hh * G, k_->clip_, cl);
            if (clipped) *clipped = cl;
            if (!cl) {
                d[2] = hh * c.u * A * B * inv_s2;
                d[3] = -hh * c.v * B * (1.0 + A) * inv_s2;
                d[6] = -eta_[c.j] * G;
                d[7] = -eta_[c.i] * G;
            }
            return 1.0 - beta;
        }

        void gamma_grad(const EdgeContext& c, int x_prev, double* d) const {
            gamma_and_grad(c, x_prev, d);
        }

        double f_tilde(const EdgeContext& c) const {
            const double A = e_[0][c.ucnt], B = e_[1][c.vcnt];
            return A / (1.0 + A + B);
        }
        double g_tilde(const EdgeContext& c) const {
            const double A = e_[2][c.ucnt], B = e_[3][c.vcnt];
            return B / (1.0 + A + B);
        }

      private:
        const TransitivityExtKernel* k_;
        const double* xi_;
        const double* eta_;
        std::vector<double> e_[4];  // e^{a1 U}, e^{b1 V}, e^{a2 U}, e^{b2 V} by raw count
    };

    Eval evaluator(std::span<const double> theta) const { return Eval(*this, theta); }

  private:
    friend class Eval;
    int p_;
    double clip_;
};

// ---------------------------------------------------------------------------
// Degree heterogeneity model (AR(1)):
//   theta_stat = exp(a0 Dm + a1 (Di + Dj)),  varpi = exp(b0 (1-Dm) + b1 (2-Di-Dj))
//   alpha = xi_i xi_j theta_stat / (1 + theta_stat + varpi)
//   beta  = eta_i eta_j varpi / (1 + theta_stat + varpi)
// ---------------------------------------------------------------------------

class DegreeHetKernel {
  public:
    static constexpr KernelId id = KernelId::degree_het;
    static constexpr int order = 1;
    static constexpr int slot_count = 8;  // [a0, a1, b0, b1, xi_i, xi_j, eta_i, eta_j]
    static constexpr bool analytic_hess = false;
    static constexpr bool separable = true;

    static constexpr bool depends(int slot, int x_prev) {
        if (slot < 4) return true;
        return (slot < 6) == (x_prev == 0);
    }

    explicit DegreeHetKernel(int p, double clip = 1e-6) : p_(p), clip_(clip) {
        if (p < 4) throw DimensionError("degree heterogeneity kernel requires p >= 4");
    }

    int p() const { return p_; }
    double clip() const { return clip_; }
    ParameterIndex index() const { return ParameterIndex(id, p_); }
    Box default_box() const {
        Box b;
        b.lo.assign(index().q(), 1e-4);
        b.hi.assign(index().q(), 3.0);
        for (int g = 0; g < 4; ++g) {
            b.lo[g] = 0.0;
            b.hi[g] = 5.0;
        }
        return b;
    }

    EdgeContext context(const SnapshotSeries& s, int t, int i, int j) const {
        EdgeContext c;
        c.i = i;
        c.j = j;
        auto [di, dj, dm] = degree_stats(view(s, t - 1), i, j);
        c.d_i = di;
        c.d_j = dj;
        c.d_m = dm;
        return c;
    }

    void fill_contexts(const SnapshotSeries& s, int t, const PairList& pairs,
                       EdgeContext* out) const {
        SnapshotView x = view(s, t - 1);
        std::vector<int> deg(p_, 0);
        long total = 0;
        for (int i = 0; i < p_; ++i)
            for (int j = i + 1; j < p_; ++j)
                if (x(i, j)) {
                    ++deg[i];
                    ++deg[j];
                    ++total;
                }
        const double dd = double((p_ - 2)) * (p_ - 3);
        const int ne = static_cast<int>(pairs.i_of.size());
        for (int e = 0; e < ne; ++e) {
            const int i = pairs.i_of[e], j = pairs.j_of[e];
            out[e].i = i;
            out[e].j = j;
            out[e].d_i = deg[i] / double(p_ - 1);
            out[e].d_j = deg[j] / double(p_ - 1);
            out[e].d_m = (2 * total - 2 * deg[i] - 2 * deg[j] + 2 * x(i, j)) / dd;
        }
    }

    class Eval {
      public:
        Eval(const DegreeHetKernel& k, std::span<const double> theta)
            : k_(&k), th_(theta.data()), xi_(theta.data() + 4), eta_(theta.data() + 4 + k.p_) {}

        AlphaBeta ab(const EdgeContext& c) const {
            double th, vp, S;
            stats(c, th, vp, S);
            AlphaBeta r;
            r.alpha = detail::clip_prob(xi_[c.i] * xi_[c.j] * th / S, k_->clip_, r.alpha_clipped);
            r.beta = detail::clip_prob(eta_[c.i] * eta_[c.j] * vp / S, k_->clip_, r.beta_clipped);
            return r;
        }

        double gamma(const EdgeContext& c, int x_prev, bool* clipped = nullptr) const {
            AlphaBeta r = ab(c);
            if (clipped) *clipped = x_prev ? r.beta_clipped : r.alpha_clipped;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }

        double gamma_and_grad(const EdgeContext& c, int x_prev, double* d,
                              bool* clipped = nullptr) const {
            double th, vp, S;
            stats(c, th, vp, S);
            const double t1 = c.d_m, t2 = c.d_i + c.d_j, inv_s2 = 1.0 / (S * S);
            std::memset(d, 0, slot_count * sizeof(double));
            bool cl = false;
            if (!x_prev) {
                const double xx = xi_[c.i] * xi_[c.j], F = th / S;
                double alpha = detail::clip_prob(xx * F, k_->clip_, cl);
                if (clipped) *clipped = cl;
                if (!cl) {
                    d[0] = xx * t1 * th * (1.0 + vp) * inv_s2;
                    d[1] = xx * t2 * th * (1.0 + vp) * inv_s2;
                    d[2] = -xx * (1.0 - t1) * th * vp * inv_s2;
                    d[3] = -xx * (2.0 - t2) * th * vp * inv_s2;
                    d[4] = xi_[c.j] * F;
                    d[5] = xi_[c.i] * F;
                }
                return alpha;
            }
            const double hh = eta_[c.i] * eta_[c.j], G = vp / S;
            double beta = detail::clip_prob(hh * G, k_->clip_, cl);
            if (clipped) *clipped = cl;
            if (!cl) {
                // gamma = 1 - beta
                d[0] = hh * t1 * th * vp * inv_s2;
                d[1] = hh * t2 * th * vp * inv_s2;
                d[2] = -hh * (1.0 - t1) * vp * (1.0 + th) * inv_s2;
                d[3] = -hh * (2.0 - t2) * vp * (1.0 + th) * inv_s2;
                d[6] = -eta_[c.j] * G;
                d[7] = -eta_[c.i] * G;
            }
            return 1.0 - beta;
        }

        void gamma_grad(const EdgeContext& c, int x_prev, double* d) const {
            gamma_and_grad(c, x_prev, d);
        }

        double f_tilde(const EdgeContext& c) const {
            double th, vp, S;
            stats(c, th, vp, S);
            return th / S;
        }
        double g_tilde(const EdgeContext& c) const {
            double th, vp, S;
            stats(c, th, vp, S);
            return vp / S;
        }

      private:
        void stats(const EdgeContext& c, double& th, double& vp, double& S) const {
            th = std::exp(th_[0] * c.d_m + th_[1] * (c.d_i + c.d_j));
            vp = std::exp(th_[2] * (1.0 - c.d_m) + th_[3] * (2.0 - c.d_i - c.d_j));
            S = 1.0 + th + vp;
        }
        const DegreeHetKernel* k_;
        const double* th_;
        const double* xi_;
        const double* eta_;
    };

    Eval evaluator(std::span<const double> theta) const { return Eval(*this, theta); }

  private:
    friend class Eval;
    int p_;
    double clip_;
};

// ---------------------------------------------------------------------------
// Persistence model (AR(3)):
//   alpha = xi_i xi_j exp[-1 - a{(1-X2) + (1-X2)(1-X3)}]
//   beta  = eta_i eta_j exp[-1 - b(X2 + X2 X3)]
// with X2 = X^{t-2}, X3 = X^{t-3}.
// ---------------------------------------------------------------------------

class PersistenceKernel {
  public:
    static constexpr KernelId id = KernelId::persistence;
    static constexpr int order = 3;
    static constexpr int slot_count = 6;  // [a, b, xi_i, xi_j, eta_i, eta_j]
    static constexpr bool analytic_hess = false;
    static constexpr bool separable = true;  // separable but AR(3), so not IMoM-eligible

    static constexpr bool depends(int slot, int x_prev) {
        const bool formation = (slot == 0 || slot == 2 || slot == 3);
        return formation == (x_prev == 0);
    }

    explicit PersistenceKernel(int p, double clip = 1e-6) : p_(p), clip_(clip) {
        if (p < 3) throw DimensionError("persistence kernel requires p >= 3");
    }

    int p() const { return p_; }
    double clip() const { return clip_; }
    ParameterIndex index() const { return ParameterIndex(id, p_); }
    Box default_box() const {
        Box b;
        b.lo.assign(index().q(), 1e-4);
        b.hi.assign(index().q(), 2.5);
        b.lo[0] = b.lo[1] = 0.0;
        b.hi[0] = b.hi[1] = 10.0;
        return b;
    }

    EdgeContext context(const SnapshotSeries& s, int t, int i, int j) const {
        EdgeContext c;
        c.i = i;
        c.j = j;
        c.x2 = s.at(t - 2, i, j);
        c.x3 = s.at(t - 3, i, j);
        return c;
    }

    void fill_contexts(const SnapshotSeries& s, int t, const PairList& pairs,
                       EdgeContext* out) const {
        const int ne = static_cast<int>(pairs.i_of.size());
        for (int e = 0; e < ne; ++e) {
            out[e].i = pairs.i_of[e];
            out[e].j = pairs.j_of[e];
            out[e].x2 = s.at(t - 2, out[e].i, out[e].j);
            out[e].x3 = s.at(t - 3, out[e].i, out[e].j);
        }
    }

    class Eval {
      public:
        Eval(const PersistenceKernel& k, std::span<const double> theta)
            : k_(&k), xi_(theta.data() + 2), eta_(theta.data() + 2 + k.p_) {
            for (int w = 0; w < 3; ++w) {
                ea_[w] = std::exp(-1.0 - theta[0] * w);
                eb_[w] = std::exp(-1.0 - theta[1] * w);
            }
        }

        static int a_weight(const EdgeContext& c) { return (1 - c.x2) + (1 - c.x2) * (1 - c.x3); }
        static int b_weight(const EdgeContext& c) { return c.x2 + c.x2 * c.x3; }

        AlphaBeta ab(const EdgeContext& c) const {
            AlphaBeta r;
            r.alpha = detail::clip_prob(xi_[c.i] * xi_[c.j] * ea_[a_weight(c)], k_->clip_,
                                        r.alpha_clipped);
            r.beta = detail::clip_prob(eta_[c.i] * eta_[c.j] * eb_[b_weight(c)], k_->clip_,
                                       r.beta_clipped);
            return r;
        }

        double gamma(const EdgeContext& c, int x_prev, bool* clipped = nullptr) const {
            AlphaBeta r = ab(c);
            if (clipped) *clipped = x_prev ? r.beta_clipped : r.alpha_clipped;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }

        double gamma_and_grad(const EdgeContext& c, int x_prev, double* d,
                              bool* clipped = nullptr) const {
            std::memset(d, 0, slot_count * sizeof(double));
            bool cl = false;
            if (!x_prev) {
                const int w = a_weight(c);
                const double E = ea_[w], xx = xi_[c.i] * xi_[c.j];
                double alpha = detail::clip_prob(xx * E, k_->clip_, cl);
                if (clipped) *clipped = cl;
                if (!cl) {
                    d[0] = -w * xx * E;
                    d[2] = xi_[c.j] * E;
                    d[3] = xi_[c.i] * E;
                }
                return alpha;
            }
            const int w = b_weight(c);
            const double E = eb_[w], hh = eta_[c.i] * eta_[c.j];
            double beta = detail::clip_prob(hh * E, k_->clip_, cl);
            if (clipped) *clipped = cl;
            if (!cl) {
                d[1] = w * hh * E;
                d[4] = -eta_[c.j] * E;
                d[5] = -eta_[c.i] * E;
            }
            return 1.0 - beta;
        }

        void gamma_grad(const EdgeContext& c, int x_prev, double* d) const {
            gamma_and_grad(c, x_prev, d);
        }

        double f_tilde(const EdgeContext& c) const { return ea_[a_weight(c)]; }
        double g_tilde(const EdgeContext& c) const { return eb_[b_weight(c)]; }

      private:
        const PersistenceKernel* k_;
        const double* xi_;
        const double* eta_;
        double ea_[3], eb_[3];
    };

    Eval evaluator(std::span<const double> theta) const { return Eval(*this, theta); }

  private:
    friend class Eval;
    int p_;
    double clip_;
};

// ---------------------------------------------------------------------------
// Global AR baseline: constant alpha, beta shared by all edges.
// ---------------------------------------------------------------------------

class GlobalArKernel {
  public:
    static constexpr KernelId id = KernelId::global_ar;
    static constexpr int order = 1;
    static constexpr int slot_count = 2;  // [alpha, beta]
    static constexpr bool analytic_hess = true;
    static constexpr bool separable = false;

    static constexpr bool depends(int slot, int x_prev) {
        return (slot == 0) == (x_prev == 0);
    }

    explicit GlobalArKernel(int p, double clip = 1e-6) : p_(p), clip_(clip) {
        if (p < 3) throw DimensionError("global AR kernel requires p >= 3");
    }

    int p() const { return p_; }
    double clip() const { return clip_; }
    ParameterIndex index() const { return ParameterIndex(id, p_); }
    Box default_box() const {
        Box b;
        b.lo.assign(2, clip_);
        b.hi.assign(2, 1.0 - clip_);
        return b;
    }

    EdgeContext context(const SnapshotSeries&, int, int i, int j) const {
        EdgeContext c;
        c.i = i;
        c.j = j;
        return c;
    }
    void fill_contexts(const SnapshotSeries&, int, const PairList& pairs,
                       EdgeContext* out) const {
        for (std::size_t e = 0; e < pairs.i_of.size(); ++e) {
            out[e].i = pairs.i_of[e];
            out[e].j = pairs.j_of[e];
        }
    }

    class Eval {
      public:
        Eval(const GlobalArKernel& k, std::span<const double> theta) : k_(&k), th_(theta.data()) {}

        AlphaBeta ab(const EdgeContext&) const {
            AlphaBeta r;
            r.alpha = detail::clip_prob(th_[0], k_->clip_, r.alpha_clipped);
            r.beta = detail::clip_prob(th_[1], k_->clip_, r.beta_clipped);
            return r;
        }
        double gamma(const EdgeContext& c, int x_prev, bool* clipped = nullptr) const {
            AlphaBeta r = ab(c);
            if (clipped) *clipped = x_prev ? r.beta_clipped : r.alpha_clipped;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }
        double gamma_and_grad(const EdgeContext& c, int x_prev, double* d,
                              bool* clipped = nullptr) const {
            d[0] = d[1] = 0.0;
            AlphaBeta r = ab(c);
            if (x_prev) {
                if (clipped) *clipped = r.beta_clipped;
                if (!r.beta_clipped) d[1] = -1.0;
                return 1.0 - r.beta;
            }
            if (clipped) *clipped = r.alpha_clipped;
            if (!r.alpha_clipped) d[0] = 1.0;
            return r.alpha;
        }
        void gamma_grad(const EdgeContext& c, int x_prev, double* d) const {
            gamma_and_grad(c, x_prev, d);
        }
        void gamma_hess(const EdgeContext&, int, double* h) const {
            std::memset(h, 0, slot_count * slot_count * sizeof(double));
        }

      private:
        const GlobalArKernel* k_;
        const double* th_;
    };

    Eval evaluator(std::span<const double> theta) const { return Eval(*this, theta); }

  private:
    friend class Eval;
    int p_;
    double clip_;
};

// ---------------------------------------------------------------------------
// Edgewise AR baseline: one (alpha, beta) pair per edge.
// ---------------------------------------------------------------------------

class EdgewiseArKernel {
  public:
    static constexpr KernelId id = KernelId::edgewise_ar;
    static constexpr int order = 1;
    static constexpr int slot_count = 2;  // [alpha_e, beta_e]
    static constexpr bool analytic_hess = true;
    static constexpr bool separable = false;

    static constexpr bool depends(int slot, int x_prev) {
        return (slot == 0) == (x_prev == 0);
    }

    explicit EdgewiseArKernel(int p, double clip = 1e-6) : p_(p), clip_(clip) {
        if (p < 3) throw DimensionError("edgewise AR kernel requires p >= 3");
    }

    int p() const { return p_; }
    double clip() const { return clip_; }
    ParameterIndex index() const { return ParameterIndex(id, p_); }
    Box default_box() const {
        Box b;
        b.lo.assign(index().q(), clip_);
        b.hi.assign(index().q(), 1.0 - clip_);
        return b;
    }

    EdgeContext context(const SnapshotSeries&, int, int i, int j) const {
        EdgeContext c;
        c.i = i;
        c.j = j;
        return c;
    }
    void fill_contexts(const SnapshotSeries&, int, const PairList& pairs,
                       EdgeContext* out) const {
        for (std::size_t e = 0; e < pairs.i_of.size(); ++e) {
            out[e].i = pairs.i_of[e];
            out[e].j = pairs.j_of[e];
        }
    }

    class Eval {
      public:
        Eval(const EdgewiseArKernel& k, std::span<const double> theta)
            : k_(&k), th_(theta.data()) {}

        AlphaBeta ab(const EdgeContext& c) const {
            const int e = pair_index(k_->p_, c.i, c.j);
            AlphaBeta r;
            r.alpha = detail::clip_prob(th_[2 * e], k_->clip_, r.alpha_clipped);
            r.beta = detail::clip_prob(th_[2 * e + 1], k_->clip_, r.beta_clipped);
            return r;
        }
        double gamma(const EdgeContext& c, int x_prev, bool* clipped = nullptr) const {
            AlphaBeta r = ab(c);
            if (clipped) *clipped = x_prev ? r.beta_clipped : r.alpha_clipped;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }
        double gamma_and_grad(const EdgeContext& c, int x_prev, double* d,
                              bool* clipped = nullptr) const {
            d[0] = d[1] = 0.0;
            AlphaBeta r = ab(c);
            if (x_prev) {
                if (clipped) *clipped = r.beta_clipped;
                if (!r.beta_clipped) d[1] = -1.0;
                return 1.0 - r.beta;
            }
            if (clipped) *clipped = r.alpha_clipped;
            if (!r.alpha_clipped) d[0] = 1.0;
            return r.alpha;
        }
        void gamma_grad(const EdgeContext& c, int x_prev, double* d) const {
            gamma_and_grad(c, x_prev, d);
        }
        void gamma_hess(const EdgeContext&, int, double* h) const {
            std::memset(h, 0, slot_count * slot_count * sizeof(double));
        }

      private:
        const EdgewiseArKernel* k_;
        const double* th_;
    };

    Eval evaluator(std::span<const double> theta) const { return Eval(*this, theta); }

  private:
    friend class Eval;
    int p_;
    double clip_;
};

// ---------------------------------------------------------------------------
// Hessian of gamma in slot coordinates. Analytic where the kernel provides
// one, otherwise central finite differences of the gradient with step
// h = 1e-5 max(1, |theta_l|).
// ---------------------------------------------------------------------------

template <class K>
void kernel_gamma_hess(const K& kernel, std::span<const double> theta, const EdgeContext& ctx,
                       int x_prev, double* h_out) {
    constexpr int ns = K::slot_count;
    if constexpr (K::analytic_hess) {
        kernel.evaluator(theta).gamma_hess(ctx, x_prev, h_out);
        return;
    }
    SlotList slots = kernel.index().params_of_edge(ctx.i, ctx.j);
    std::vector<double> th(theta.begin(), theta.end());
    double gp[ns], gm[ns];
    for (int s = 0; s < ns; ++s) {
        const int l = slots[s];
        const double h = 1e-5 * std::max(1.0, std::fabs(th[l])), orig = th[l];
        th[l] = orig + h;
        kernel.evaluator(th).gamma_grad(ctx, x_prev, gp);
        th[l] = orig - h;
        kernel.evaluator(th).gamma_grad(ctx, x_prev, gm);
        th[l] = orig;
        for (int r = 0; r < ns; ++r) h_out[r * ns + s] = (gp[r] - gm[r]) / (2.0 * h);
    }
    // symmetrize; mixed partials agree up to finite-difference error
    for (int r = 0; r < ns; ++r)
        for (int s = r + 1; s < ns; ++s) {
            double m = 0.5 * (h_out[r * ns + s] + h_out[s * ns + r]);
            h_out[r * ns + s] = h_out[s * ns + r] = m;
        }
}

// Applies fn to a freshly constructed kernel of the requested id.
template <class F>
decltype(auto) dispatch_kernel(KernelId id, int p, double clip, F&& fn) {
    switch (id) {
        case KernelId::degree_het: return fn(DegreeHetKernel(p, clip));
        case KernelId::persistence: return fn(PersistenceKernel(p, clip));
        case KernelId::transitivity: return fn(TransitivityKernel(p, clip));
        case KernelId::transitivity_ext: return fn(TransitivityExtKernel(p, clip));
        case KernelId::global_ar: return fn(GlobalArKernel(p, clip));
        case KernelId::edgewise_ar: return fn(EdgewiseArKernel(p, clip));
    }
    throw ValueError("unknown kernel id");
}

}  // namespace arnet
