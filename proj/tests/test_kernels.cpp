#include <catch2/catch_amalgamated.hpp>

#include "arnet/kernels.hpp"
#include "helpers.hpp"

using namespace arnet;
using Catch::Approx;

namespace {

SnapshotSeries complete_series(int p, int n) {
    auto s = SnapshotSeries::zeros(p, n);
    for (int t = 0; t < n; ++t)
        for (int i = 0; i < p; ++i)
            for (int j = i + 1; j < p; ++j) s.set_edge(t, i, j, 1);
    return s;
}

}  // namespace

TEST_CASE("uv_stats examples", "[kernels]") {
    auto complete = complete_series(4, 1);
    auto [u1, v1] = uv_stats(view(complete, 0), 0, 1);
    REQUIRE(u1 == Approx(1.0));
    REQUIRE(v1 == Approx(0.0));

    auto empty = SnapshotSeries::zeros(4, 1);
    auto [u2, v2] = uv_stats(view(empty, 0), 0, 1);
    REQUIRE(u2 == 0.0);
    REQUIRE(v2 == 0.0);

    // path 1-2-3 on p=3, edge (1,2): k=3 is a one-sided neighbour
    auto path = SnapshotSeries::zeros(3, 1);
    path.set_edge(0, 0, 1, 1);
    path.set_edge(0, 1, 2, 1);
    auto [u3, v3] = uv_stats(view(path, 0), 0, 1);
    REQUIRE(u3 == Approx(0.0));
    REQUIRE(v3 == Approx(1.0));

    REQUIRE_THROWS_AS(uv_stats(view(path, 0), 1, 1), IndexError);
}

TEST_CASE("uv bounds: 0 <= U,V and U+V <= 1", "[kernels]") {
    Rng rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        auto s = testutil::random_series(9, 1, rng.uniform(), 100 + rep);
        for (int i = 0; i < 9; ++i)
            for (int j = i + 1; j < 9; ++j) {
                auto [u, v] = uv_stats(view(s, 0), i, j);
                REQUIRE(u >= 0.0);
                REQUIRE(v >= 0.0);
                REQUIRE(u + v <= 1.0 + 1e-12);
            }
    }
}

TEST_CASE("degree_stats examples", "[kernels]") {
    auto complete = complete_series(4, 1);
    auto [di, dj, dm] = degree_stats(view(complete, 0), 0, 1);
    REQUIRE(di == Approx(1.0));
    REQUIRE(dj == Approx(1.0));
    REQUIRE(dm == Approx(1.0));

    auto empty = SnapshotSeries::zeros(4, 1);
    auto [ei, ej, em] = degree_stats(view(empty, 0), 0, 1);
    REQUIRE(ei == 0.0);
    REQUIRE(em == 0.0);

    // p=4, single edge {3,4}, query (1,2): ordered pairs (3,4),(4,3) both count
    auto one = SnapshotSeries::zeros(4, 1);
    one.set_edge(0, 2, 3, 1);
    auto [fi, fj, fm] = degree_stats(view(one, 0), 0, 1);
    REQUIRE(fi == 0.0);
    REQUIRE(fj == 0.0);
    REQUIRE(fm == Approx(1.0));

    auto small = SnapshotSeries::zeros(3, 1);
    REQUIRE_THROWS_AS(degree_stats(view(small, 0), 0, 1), DimensionError);
}

TEST_CASE("edge_gamma examples", "[kernels]") {
    REQUIRE(edge_gamma(0.3, 0.4, 0) == Approx(0.3));
    REQUIRE(edge_gamma(0.3, 0.4, 1) == Approx(0.6));  // 0.3 + (1 - 0.3 - 0.4)
    REQUIRE(edge_gamma(0.3, 1.0, 1) == Approx(1e-6));
}

TEST_CASE("transitivity alpha/beta: zero exponents give thirds", "[kernels]") {
    const int p = 5;
    TransitivityKernel k(p);
    auto idx = k.index();
    auto th = ParameterSet::constant(idx, 0.0, 1.0, 1.0);
    th.set_eta(0, 0.7);
    th.set_eta(1, 0.9);
    auto s = testutil::random_series(p, 2, 0.5, 42);
    auto ctx = k.context(s, 1, 0, 1);
    auto ab = k.evaluator(th.values).ab(ctx);
    REQUIRE(ab.alpha == Approx(1.0 / 3.0));
    REQUIRE(ab.beta == Approx(0.7 * 0.9 / 3.0));
}

TEST_CASE("persistence alpha: fresh non-edge discounts by exp(-2a)", "[kernels]") {
    const int p = 3;
    PersistenceKernel k(p);
    auto idx = k.index();
    const double root_e = std::exp(0.5);
    SECTION("a > 0") {
        auto th = ParameterSet::constant(idx, 0.3, root_e, 0.5);
        EdgeContext c;
        c.i = 0;
        c.j = 1;
        c.x2 = 0;
        c.x3 = 0;  // alpha = e * exp(-1 - 2a) = exp(-2a)
        auto ab = k.evaluator(th.values).ab(c);
        REQUIRE(ab.alpha == Approx(std::exp(-2.0 * 0.3)));
    }
    SECTION("a = 0 clips at 1 - eps") {
        auto th = ParameterSet::constant(idx, 0.0, root_e, 0.5);
        EdgeContext c;
        c.i = 0;
        c.j = 1;
        c.x2 = 0;
        c.x3 = 0;
        auto ab = k.evaluator(th.values).ab(c);
        REQUIRE(ab.alpha == Approx(1.0 - 1e-6));
        REQUIRE(ab.alpha_clipped);
    }
}

TEST_CASE("degree-het alpha on empty previous snapshot", "[kernels]") {
    const int p = 6;
    DegreeHetKernel k(p);
    auto idx = k.index();
    std::vector<double> th(idx.q(), 0.5);
    th[0] = 0.2;  // a0
    th[1] = 0.4;  // a1
    th[2] = 0.3;  // b0
    th[3] = 0.6;  // b1
    for (int i = 0; i < p; ++i) {
        th[idx.xi_index(i)] = 0.8;
        th[idx.eta_index(i)] = 0.9;
    }
    auto s = SnapshotSeries::zeros(p, 2);
    auto ctx = k.context(s, 1, 0, 1);
    auto ab = k.evaluator(th).ab(ctx);
    // theta_stat = 1, varpi = exp(b0 + 2 b1)
    const double denom = 2.0 + std::exp(0.3 + 2.0 * 0.6);
    REQUIRE(ab.alpha == Approx(0.8 * 0.8 / denom));
}

TEST_CASE("global-ar gradient is the indicator pair", "[kernels]") {
    GlobalArKernel k(4);
    std::vector<double> th = {0.3, 0.4};
    EdgeContext c;
    c.i = 0;
    c.j = 1;
    double d[2];
    k.evaluator(th).gamma_grad(c, 0, d);
    REQUIRE(d[0] == 1.0);
    REQUIRE(d[1] == 0.0);
    k.evaluator(th).gamma_grad(c, 1, d);
    REQUIRE(d[0] == 0.0);
    REQUIRE(d[1] == -1.0);
    double h[4];
    k.evaluator(th).gamma_hess(c, 1, h);
    for (double v : h) REQUIRE(v == 0.0);
}

TEST_CASE("transitivity: dissolution transition has no xi dependence", "[kernels]") {
    TransitivityKernel k(6);
    Rng rng(5);
    auto th = testutil::random_theta(k, rng);
    auto s = testutil::random_series(6, 2, 0.5, 9);
    auto ctx = k.context(s, 1, 1, 4);
    double d[6];
    k.evaluator(th).gamma_grad(ctx, 1, d);
    REQUIRE(d[2] == 0.0);
    REQUIRE(d[3] == 0.0);
}

namespace {

template <class K>
void check_grad_hess_fd(const K& kernel, int reps, std::uint64_t seed) {
    constexpr int ns = K::slot_count;
    Rng rng(seed);
    const auto idx = kernel.index();
    int grad_checked = 0;
    for (int rep = 0; rep < reps; ++rep) {
        auto s = testutil::random_series(kernel.p(), K::order + 1, 0.2 + 0.6 * rng.uniform(),
                                         seed * 1000 + rep);
        auto th = testutil::random_theta(kernel, rng);
        const int i = static_cast<int>(rng.below(kernel.p()));
        int j = static_cast<int>(rng.below(kernel.p()));
        if (j == i) j = (j + 1) % kernel.p();
        const int a = std::min(i, j), b = std::max(i, j);
        auto ctx = kernel.context(s, K::order, a, b);
        const int x_prev = rng.bernoulli(0.5);

        bool clipped = false;
        double d[ns];
        const double g0 = kernel.evaluator(th).gamma_and_grad(ctx, x_prev, d, &clipped);
        if (clipped) continue;  // gradient of the clip is 0 by definition
        (void)g0;

        SlotList sl = idx.params_of_edge(a, b);
        for (int sidx = 0; sidx < sl.n; ++sidx) {
            const int l = sl[sidx];
            const double h = 1e-6 * std::max(1.0, std::fabs(th[l]));
            auto gamma_of = [&](const std::vector<double>& tv) {
                return kernel.evaluator(tv).gamma(ctx, x_prev);
            };
            const double fd = testutil::fd_derivative(gamma_of, th, l, h);
            REQUIRE(testutil::rel_err(d[sidx], fd) < 1e-6);
            ++grad_checked;
        }

        double hess[ns * ns];
        kernel_gamma_hess(kernel, th, ctx, x_prev, hess);
        for (int r = 0; r < sl.n; ++r)
            for (int c2 = 0; c2 < sl.n; ++c2)
                REQUIRE(std::fabs(hess[r * ns + c2] - hess[c2 * ns + r]) < 1e-10);
        // Hessian column vs FD of the gradient
        for (int sidx = 0; sidx < sl.n; ++sidx) {
            const int l = sl[sidx];
            const double h = 1e-5 * std::max(1.0, std::fabs(th[l]));
            auto th_p = th, th_m = th;
            th_p[l] += h;
            th_m[l] -= h;
            double dp[ns], dm[ns];
            kernel.evaluator(th_p).gamma_grad(ctx, x_prev, dp);
            kernel.evaluator(th_m).gamma_grad(ctx, x_prev, dm);
            for (int r = 0; r < sl.n; ++r) {
                const double fd = (dp[r] - dm[r]) / (2.0 * h);
                REQUIRE(testutil::rel_err(hess[r * ns + sidx], fd) < 1e-4);
            }
        }
    }
    REQUIRE(grad_checked > 0);
}

}  // namespace

TEST_CASE("gamma_grad and gamma_hess match finite differences", "[kernels]") {
    check_grad_hess_fd(TransitivityKernel(7), 60, 21);
    check_grad_hess_fd(TransitivityExtKernel(7), 60, 22);
    check_grad_hess_fd(DegreeHetKernel(7), 60, 23);
    check_grad_hess_fd(PersistenceKernel(7), 60, 24);
}

TEST_CASE("swapping i and j leaves alpha, beta, gamma unchanged", "[kernels]") {
    Rng rng(31);
    auto run = [&](auto kernel) {
        auto s = testutil::random_series(kernel.p(), decltype(kernel)::order + 1, 0.4,
                                         rng.next_u64());
        auto th = testutil::random_theta(kernel, rng);
        for (int rep = 0; rep < 20; ++rep) {
            int i = static_cast<int>(rng.below(kernel.p()));
            int j = static_cast<int>(rng.below(kernel.p()));
            if (i == j) continue;
            auto cij = kernel.context(s, decltype(kernel)::order, std::min(i, j), std::max(i, j));
            auto cji = cij;
            std::swap(cji.i, cji.j);
            std::swap(cji.d_i, cji.d_j);
            auto ev = kernel.evaluator(th);
            REQUIRE(ev.ab(cij).alpha == Approx(ev.ab(cji).alpha));
            REQUIRE(ev.ab(cij).beta == Approx(ev.ab(cji).beta));
        }
    };
    run(TransitivityKernel(6));
    run(DegreeHetKernel(6));
    run(PersistenceKernel(6));
}
