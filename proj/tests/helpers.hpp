#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "arnet/core.hpp"
#include "arnet/kernels.hpp"
#include "arnet/rng.hpp"
#include "arnet/simulate.hpp"

namespace testutil {

inline double rel_err(double a, double b) {
    return std::fabs(a - b) / std::max({1.0, std::fabs(a), std::fabs(b)});
}

// random symmetric snapshot series with iid Bernoulli(dens) edges
inline arnet::SnapshotSeries random_series(int p, int n, double dens, std::uint64_t seed) {
    arnet::Rng rng(seed);
    auto s = arnet::SnapshotSeries::zeros(p, n);
    for (int t = 0; t < n; ++t)
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j)
                if (rng.bernoulli(dens)) s.set_edge(t, i, j, 1);
    return s;
}

// random interior parameter vector for a kernel: globals moderate, locals
// away from both the clip region and the box edge
template <class K>
std::vector<double> random_theta(const K& kernel, arnet::Rng& rng) {
    const arnet::ParameterIndex idx = kernel.index();
    std::vector<double> th(idx.q());
    if constexpr (K::id == arnet::KernelId::global_ar || K::id == arnet::KernelId::edgewise_ar) {
        for (auto& v : th) v = 0.1 + 0.8 * rng.uniform();
        return th;
    }
    for (int g = 0; g < idx.n_global(); ++g) th[g] = 0.3 + 2.0 * rng.uniform();
    for (int i = 0; i < kernel.p(); ++i) {
        th[idx.xi_index(i)] = 0.4 + 0.6 * rng.uniform();
        th[idx.eta_index(i)] = 0.4 + 0.6 * rng.uniform();
    }
    return th;
}

// central finite difference of a scalar function of theta
template <class F>
double fd_derivative(F&& f, std::vector<double> theta, int l, double h) {
    const double orig = theta[l];
    theta[l] = orig + h;
    const double fp = f(theta);
    theta[l] = orig - h;
    const double fm = f(theta);
    return (fp - fm) / (2.0 * h);
}

}  // namespace testutil
