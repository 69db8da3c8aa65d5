#pragma once

// Minimal hand-rolled kernels used only by tests: they exercise the template
// extension points with transition probabilities simple enough to reason
// about by hand.

#include <cstring>

#include "arnet/core.hpp"
#include "arnet/kernels.hpp"

namespace testutil {

// alpha = xi_i xi_j, beta = eta_i eta_j (separable with f~ = g~ = 1)
class ProductKernel {
  public:
    static constexpr arnet::KernelId id = arnet::KernelId::transitivity;  // reporting only
    static constexpr int order = 1;
    static constexpr int slot_count = 4;  // [xi_i, xi_j, eta_i, eta_j]
    static constexpr bool analytic_hess = false;
    static constexpr bool separable = true;

    static constexpr bool depends(int slot, int x_prev) {
        return (slot < 2) == (x_prev == 0);
    }

    explicit ProductKernel(int p, double clip = 1e-6) : p_(p), clip_(clip) {}

    int p() const { return p_; }
    double clip() const { return clip_; }
    arnet::ParameterIndex index() const {
        return arnet::ParameterIndex(p_, 0, arnet::LocalLayout::node_pair);
    }
    arnet::Box default_box() const {
        arnet::Box b;
        b.lo.assign(index().q(), 1e-4);
        b.hi.assign(index().q(), 1.0);
        return b;
    }

    arnet::EdgeContext context(const arnet::SnapshotSeries&, int, int i, int j) const {
        arnet::EdgeContext c;
        c.i = i;
        c.j = j;
        return c;
    }
    void fill_contexts(const arnet::SnapshotSeries&, int, const arnet::PairList& pairs,
                       arnet::EdgeContext* out) const {
        for (std::size_t e = 0; e < pairs.i_of.size(); ++e) {
            out[e].i = pairs.i_of[e];
            out[e].j = pairs.j_of[e];
        }
    }

    class Eval {
      public:
        Eval(const ProductKernel& k, std::span<const double> theta)
            : k_(&k), xi_(theta.data()), eta_(theta.data() + k.p_) {}

        arnet::AlphaBeta ab(const arnet::EdgeContext& c) const {
            arnet::AlphaBeta r;
            r.alpha = arnet::detail::clip_prob(xi_[c.i] * xi_[c.j], k_->clip_, r.alpha_clipped);
            r.beta = arnet::detail::clip_prob(eta_[c.i] * eta_[c.j], k_->clip_, r.beta_clipped);
            return r;
        }
        double gamma(const arnet::EdgeContext& c, int x_prev, bool* clipped = nullptr) const {
            auto r = ab(c);
            if (clipped) *clipped = x_prev ? r.beta_clipped : r.alpha_clipped;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }
        double gamma_and_grad(const arnet::EdgeContext& c, int x_prev, double* d,
                              bool* clipped = nullptr) const {
            std::memset(d, 0, slot_count * sizeof(double));
            auto r = ab(c);
            if (!x_prev) {
                if (clipped) *clipped = r.alpha_clipped;
                if (!r.alpha_clipped) {
                    d[0] = xi_[c.j];
                    d[1] = xi_[c.i];
                }
                return r.alpha;
            }
            if (clipped) *clipped = r.beta_clipped;
            if (!r.beta_clipped) {
                d[2] = -eta_[c.j];
                d[3] = -eta_[c.i];
            }
            return 1.0 - r.beta;
        }
        void gamma_grad(const arnet::EdgeContext& c, int x_prev, double* d) const {
            gamma_and_grad(c, x_prev, d);
        }
        double f_tilde(const arnet::EdgeContext&) const { return 1.0; }
        double g_tilde(const arnet::EdgeContext&) const { return 1.0; }

      private:
        const ProductKernel* k_;
        const double* xi_;
        const double* eta_;
    };

    Eval evaluator(std::span<const double> theta) const { return Eval(*this, theta); }

  private:
    friend class Eval;
    int p_;
    double clip_;
};

// gamma = theta for every edge and history: a single-parameter kernel
class BernoulliKernel {
  public:
    static constexpr arnet::KernelId id = arnet::KernelId::global_ar;  // reporting only
    static constexpr int order = 1;
    static constexpr int slot_count = 1;
    static constexpr bool analytic_hess = true;
    static constexpr bool separable = false;

    static constexpr bool depends(int, int) { return true; }

    explicit BernoulliKernel(int p, double clip = 1e-6) : p_(p), clip_(clip) {}

    int p() const { return p_; }
    double clip() const { return clip_; }
    arnet::ParameterIndex index() const {
        return arnet::ParameterIndex(p_, 1, arnet::LocalLayout::none, {"theta"});
    }
    arnet::Box default_box() const {
        arnet::Box b;
        b.lo.assign(1, clip_);
        b.hi.assign(1, 1.0 - clip_);
        return b;
    }

    arnet::EdgeContext context(const arnet::SnapshotSeries&, int, int i, int j) const {
        arnet::EdgeContext c;
        c.i = i;
        c.j = j;
        return c;
    }
    void fill_contexts(const arnet::SnapshotSeries&, int, const arnet::PairList& pairs,
                       arnet::EdgeContext* out) const {
        for (std::size_t e = 0; e < pairs.i_of.size(); ++e) {
            out[e].i = pairs.i_of[e];
            out[e].j = pairs.j_of[e];
        }
    }

    class Eval {
      public:
        Eval(const BernoulliKernel& k, std::span<const double> theta)
            : k_(&k), th_(theta[0]) {}

        arnet::AlphaBeta ab(const arnet::EdgeContext&) const {
            arnet::AlphaBeta r;
            r.alpha = arnet::detail::clip_prob(th_, k_->clip_, r.alpha_clipped);
            r.beta = arnet::detail::clip_prob(1.0 - th_, k_->clip_, r.beta_clipped);
            return r;
        }
        double gamma(const arnet::EdgeContext& c, int x_prev, bool* clipped = nullptr) const {
            auto r = ab(c);
            if (clipped) *clipped = x_prev ? r.beta_clipped : r.alpha_clipped;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }
        double gamma_and_grad(const arnet::EdgeContext& c, int x_prev, double* d,
                              bool* clipped = nullptr) const {
            auto r = ab(c);
            const bool cl = x_prev ? r.beta_clipped : r.alpha_clipped;
            if (clipped) *clipped = cl;
            d[0] = cl ? 0.0 : 1.0;
            return x_prev ? 1.0 - r.beta : r.alpha;
        }
        void gamma_grad(const arnet::EdgeContext& c, int x_prev, double* d) const {
            gamma_and_grad(c, x_prev, d);
        }
        void gamma_hess(const arnet::EdgeContext&, int, double* h) const { h[0] = 0.0; }

      private:
        const BernoulliKernel* k_;
        double th_;
    };

    Eval evaluator(std::span<const double> theta) const { return Eval(*this, theta); }

  private:
    friend class Eval;
    int p_;
    double clip_;
};

}  // namespace testutil
