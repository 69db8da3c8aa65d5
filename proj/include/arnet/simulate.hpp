#pragma once

#include <cstring>

#include "arnet/core.hpp"
#include "arnet/kernels.hpp"
#include "arnet/rng.hpp"

namespace arnet {

struct SimConfig {
    int p = 0;
    int n = 0;
    int burn_in = 200;
    std::uint64_t seed = 0;
    enum class Init { empty, erdos_renyi };
    Init init = Init::erdos_renyi;
    double init_density = 0.1;

    void validate() const {
        if (p < 3) throw ConfigError("sim config: p must be >= 3");
        if (n < 2) throw ConfigError("sim config: n must be >= 2");
        if (burn_in < 0) throw ConfigError("sim config: burn_in must be >= 0");
        if (init_density < 0.0 || init_density > 1.0)
            throw ConfigError("sim config: init density must be in [0,1]");
    }
};

// Draws burn_in + n snapshots, edge by edge from Bernoulli(gamma), and keeps
// the last n. The m lag snapshots are one initial draw replicated.
template <class K>
SnapshotSeries simulate(const K& kernel, const ParameterSet& theta, const SimConfig& cfg) {
    cfg.validate();
    if (cfg.p != kernel.p()) throw ConfigError("sim config p does not match kernel");
    const int m = K::order;
    const int p = cfg.p;
    Rng rng(cfg.seed);
    PairList pairs(p);
    const int ne = pair_count(p);

    // rolling window: slots [0, m) hold the lags, slot m receives the draw
    SnapshotSeries win = SnapshotSeries::zeros(p, m + 1);
    if (cfg.init == SimConfig::Init::erdos_renyi) {
        for (int e = 0; e < ne; ++e) {
            if (rng.bernoulli(cfg.init_density))
                for (int t = 0; t < m; ++t) win.set_edge(t, pairs.i_of[e], pairs.j_of[e], 1);
        }
    }

    SnapshotSeries out = SnapshotSeries::zeros(p, cfg.n);
    std::vector<EdgeContext> ctx(ne);
    auto ev = kernel.evaluator(theta.values);
    const int steps = cfg.burn_in + cfg.n;
    for (int s = 0; s < steps; ++s) {
        kernel.fill_contexts(win, m, pairs, ctx.data());
        for (int e = 0; e < ne; ++e) {
            const int i = pairs.i_of[e], j = pairs.j_of[e];
            const AlphaBeta ab = ev.ab(ctx[e]);
            const double g = edge_gamma(ab.alpha, ab.beta, win.at(m - 1, i, j), kernel.clip());
            win.set_edge(m, i, j, rng.bernoulli(g) ? 1 : 0);
        }
        if (s >= cfg.burn_in) {
            const int t = s - cfg.burn_in;
            for (int e = 0; e < ne; ++e)
                out.set_edge(t, pairs.i_of[e], pairs.j_of[e],
                             win.at(m, pairs.i_of[e], pairs.j_of[e]));
        }
        // shift lags forward
        for (int t = 0; t < m; ++t)
            for (int e = 0; e < ne; ++e)
                win.set_edge(t, pairs.i_of[e], pairs.j_of[e],
                             win.at(t + 1, pairs.i_of[e], pairs.j_of[e]));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Summary diagnostics: density / growth / dissolution series with running
// means, and the U/V relative-frequency tables keyed by raw neighbour counts.
// ---------------------------------------------------------------------------

struct FreqRow {
    int ell = 0;    // raw common (U) or one-sided (V) neighbour count
    long count = 0; // |U_ell| or |V_ell|
    long hits = 0;  // |U_ell^1| (edges grown) or |V_ell^0| (edges dissolved)
    double ratio() const { return count > 0 ? double(hits) / double(count) : 0.0; }
};

struct DiagnosticsTable {
    std::vector<double> density;      // D_t for t = 1..n
    std::vector<double> growth;       // D_{1,t} for t = 2..n
    std::vector<double> dissolution;  // D_{0,t} for t = 2..n
    std::vector<double> density_mean;
    std::vector<double> growth_mean;
    std::vector<double> dissolution_mean;
    std::vector<FreqRow> u_table;
    std::vector<FreqRow> v_table;
};

inline DiagnosticsTable diagnostics(const SnapshotSeries& s) {
    if (s.n() < 2) throw DimensionError("diagnostics: need at least 2 snapshots");
    const int p = s.p(), n = s.n();
    const double ne = pair_count(p);
    PairList pairs(p);
    DiagnosticsTable d;
    d.density.resize(n);
    d.growth.resize(n - 1);
    d.dissolution.resize(n - 1);
    std::vector<long> ucount(p - 1, 0), uhits(p - 1, 0), vcount(p - 1, 0), vhits(p - 1, 0);
    std::vector<int> cu(static_cast<std::size_t>(ne)), cv(static_cast<std::size_t>(ne));

    for (int t = 0; t < n; ++t) d.density[t] = s.edge_count(t) / ne;
    for (int t = 1; t < n; ++t) {
        long grow = 0, diss = 0;
        detail::pair_uv_counts(view(s, t - 1), pairs, cu.data(), cv.data());
        for (int e = 0; e < static_cast<int>(ne); ++e) {
            const int i = pairs.i_of[e], j = pairs.j_of[e];
            const int prev = s.at(t - 1, i, j), cur = s.at(t, i, j);
            grow += (1 - prev) * cur;
            diss += prev * (1 - cur);
            if (!prev) {
                ++ucount[cu[e]];
                uhits[cu[e]] += cur;
            } else {
                ++vcount[cv[e]];
                vhits[cv[e]] += 1 - cur;
            }
        }
        d.growth[t - 1] = grow / ne;
        d.dissolution[t - 1] = diss / ne;
    }

    d.density_mean.resize(n);
    double acc = 0;
    for (int t = 0; t < n; ++t) {
        acc += d.density[t];
        d.density_mean[t] = acc / (t + 1);
    }
    d.growth_mean.resize(n - 1);
    d.dissolution_mean.resize(n - 1);
    double ag = 0, ad = 0;
    for (int t = 0; t < n - 1; ++t) {
        ag += d.growth[t];
        ad += d.dissolution[t];
        d.growth_mean[t] = ag / (t + 1);
        d.dissolution_mean[t] = ad / (t + 1);
    }

    for (int l = 0; l < p - 1; ++l) {
        if (ucount[l] > 0) d.u_table.push_back({l, ucount[l], uhits[l]});
        if (vcount[l] > 0) d.v_table.push_back({l, vcount[l], vhits[l]});
    }
    return d;
}

}  // namespace arnet
