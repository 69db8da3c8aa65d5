// Acceptance suite: runs the numbered acceptance checks and prints one
// PASS/FAIL line per criterion. Exit status is the number of failures.
//
//   arnet_acceptance [--criteria 1,2,3]   (default: all)

#include <Eigen/Dense>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <sstream>

#include "arnet/compare.hpp"
#include "arnet/estimate.hpp"
#include "helpers.hpp"
#include "oracles.hpp"

using namespace arnet;

namespace {

struct Line {
    int id;
    bool pass;
    std::string detail;
};

std::vector<Line> results;

void report(int id, bool pass, const std::string& detail) {
    results.push_back({id, pass, detail});
    std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", id, detail.c_str());
    std::fflush(stdout);
}

std::string fmt3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// criteria 1, 2, 3, 10: replication studies of the transitivity model
// ---------------------------------------------------------------------------

ReplicationSummary transitivity_study(double a, double b, int n, int reps,
                                      std::uint64_t seed_base) {
    const int p = 50;
    TransitivityKernel kernel(p);
    auto truth = ParameterSet::constant(kernel.index(), 0.0, 0.8, 0.9);
    truth.values[0] = a;
    truth.values[1] = b;
    SimConfig sim;
    sim.p = p;
    sim.n = n;
    sim.burn_in = 200;
    EstimationConfig cfg;  // defaults: 9 starts, selection tau grid
    return run_replications(kernel, truth, sim, FitMethod::mle, cfg, reps, seed_base,
                            resolve_threads(0));
}

void run_rmae_group(const std::set<int>& wanted) {
    const bool need_a100 = wanted.count(1) || wanted.count(2) || wanted.count(10);
    const bool need_a200 = wanted.count(10);
    const bool need_b100 = wanted.count(3);
    ReplicationSummary a100, a200, b100;
    if (need_a100) a100 = transitivity_study(10.0, 10.0, 100, 20, 1000);
    if (need_a200) a200 = transitivity_study(10.0, 10.0, 200, 20, 2000);
    if (need_b100) b100 = transitivity_study(25.0, 15.0, 100, 20, 3000);

    if (wanted.count(1)) {
        const double init_a = a100.rmae_initial.value.at("a");
        const double imp_a = a100.rmae_improved.value.at("a");
        const double imp_xi = a100.rmae_improved.value.at("xi");
        const bool pass = imp_a <= 0.15 && imp_a <= init_a / 3.0 && imp_xi <= 0.15;
        report(1, pass,
               "rMAE reproduction (xi=0.8, eta=0.9, a=10, b=10, p=50, n=100, 20x9): "
               "initial a=" + fmt3(init_a) + ", improved a=" + fmt3(imp_a) +
               " (need <=0.15 and <= initial/3), improved xi=" + fmt3(imp_xi) +
               " (need <=0.15)");
    }
    if (wanted.count(2)) {
        const double cov_a = a100.coverage.at("a");
        const double cov_b = a100.coverage.at("b");
        const bool pass = cov_a >= 0.85 && cov_a <= 1.0 && cov_b >= 0.85 && cov_b <= 1.0;
        report(2, pass,
               "95% CI coverage over 20x9 fits: a=" + fmt3(cov_a) + ", b=" + fmt3(cov_b) +
               " (need within [0.85, 1.00])");
    }
    if (wanted.count(3)) {
        const double init_a = b100.rmae_initial.value.at("a");
        const double imp_a = b100.rmae_improved.value.at("a");
        const bool pass = imp_a <= 0.10 && init_a >= 0.2 && init_a <= 0.45;
        report(3, pass,
               "second setting (a=25, b=15): improved a=" + fmt3(imp_a) +
               " (need <=0.10), initial a=" + fmt3(init_a) + " (need in [0.2, 0.45])");
    }
    if (wanted.count(10)) {
        const double w100 = a100.ci_length.at("a");
        const double w200 = a200.ci_length.at("a");
        const double ratio = w200 / w100;
        const bool pass = ratio >= 0.6 && ratio <= 0.8;
        report(10, pass,
               "CI-width scaling for a when n doubles: " + fmt3(w200) + " / " + fmt3(w100) +
               " = " + fmt3(ratio) + " (need in [0.6, 0.8], theory ~0.707)");
    }
}

// ---------------------------------------------------------------------------
// criterion 4: persistence stationarity against the exact 8-state chain
// ---------------------------------------------------------------------------

void run_persistence_stationarity() {
    struct Setting {
        double xi, eta, a, b;
    };
    const Setting settings[5] = {{1.1, 1.2, 0.4, 0.3},
                                 {1.2, 1.1, 0.2, 0.5},
                                 {1.0, 1.0, 0.6, 0.6},
                                 {1.3, 0.9, 0.3, 0.2},
                                 {0.9, 1.3, 0.5, 0.4}};
    const int n = 20000, p = 3;
    bool all = true;
    std::string detail;
    for (int si = 0; si < 5; ++si) {
        const auto& st = settings[si];
        PersistenceKernel kernel(p);
        auto idx = kernel.index();
        std::vector<double> th(idx.q());
        th[0] = st.a;
        th[1] = st.b;
        for (int i = 0; i < p; ++i) {
            th[idx.xi_index(i)] = st.xi;
            th[idx.eta_index(i)] = st.eta;
        }
        SimConfig cfg;
        cfg.p = p;
        cfg.n = n;
        cfg.burn_in = 400;
        cfg.seed = 77000 + si;
        auto series = simulate(kernel, ParameterSet(idx, th), cfg);
        double freq = 0;
        for (int t = 0; t < n; ++t) freq += series.at(t, 0, 1);
        freq /= n;
        const double target =
            oracle::persistence_stationary_marginal(st.xi * st.xi, st.eta * st.eta, st.a, st.b);
        const double se = std::sqrt(target * (1.0 - target) / n);
        const bool ok = std::fabs(freq - target) < 3.0 * se;
        all = all && ok;
        if (si) detail += " ";
        detail += fmt3(std::fabs(freq - target) / se) + "se";
    }
    report(4, all, "persistence single-edge marginal vs the exact 8-state chain, 5 settings, "
                   "|deviation| = {" + detail + "} (need < 3 se each)");
}

// ---------------------------------------------------------------------------
// criterion 5: analytic scores and Jacobians against finite differences
// ---------------------------------------------------------------------------

template <class K>
bool grad_suite(const K& kernel, int draws, std::uint64_t seed, double& worst_g,
                double& worst_h) {
    Rng rng(seed);
    const auto idx = kernel.index();
    const int q = idx.q();
    bool ok = true;
    for (int d = 0; d < draws; ++d) {
        auto series =
            testutil::random_series(kernel.p(), K::order + 4, 0.25 + 0.5 * rng.uniform(),
                                    seed * 131 + d);
        Engine eng(kernel, series);
        auto th = testutil::random_theta(kernel, rng);
        const int l = static_cast<int>(rng.below(q));

        auto sc = eng.score(l, th);
        for (int trial = 0; trial < 2; ++trial) {
            const int m = static_cast<int>(rng.below(q));
            auto f = [&](const std::vector<double>& tv) { return eng.partial_loglik(l, tv); };
            const double fd =
                testutil::fd_derivative(f, th, m, 1e-6 * std::max(1.0, std::fabs(th[m])));
            const double err = testutil::rel_err(sc[m], fd);
            worst_g = std::max(worst_g, err);
            ok = ok && err < 1e-6;
        }
        if (d % 4 == 0) {  // Jacobian columns are costlier; spot-check every 4th draw
            auto h = eng.score_jacobian(l, th);
            const int c = static_cast<int>(rng.below(q));
            const double step = 1e-5 * std::max(1.0, std::fabs(th[c]));
            auto tp = th, tm = th;
            tp[c] += step;
            tm[c] -= step;
            auto sp = eng.score(l, tp);
            auto sm = eng.score(l, tm);
            for (int r = 0; r < q; ++r) {
                const double fd = (sp[r] - sm[r]) / (2.0 * step);
                const double err =
                    testutil::rel_err(h[static_cast<std::size_t>(r) * q + c], fd);
                worst_h = std::max(worst_h, err);
                ok = ok && err < 1e-4;
            }
        }
    }
    return ok;
}

void run_gradient_suite() {
    double worst_g = 0, worst_h = 0;
    bool ok = true;
    ok &= grad_suite(TransitivityKernel(6), 250, 501, worst_g, worst_h);
    ok &= grad_suite(TransitivityExtKernel(6), 250, 502, worst_g, worst_h);
    ok &= grad_suite(DegreeHetKernel(6), 250, 503, worst_g, worst_h);
    ok &= grad_suite(PersistenceKernel(6), 250, 504, worst_g, worst_h);
    std::ostringstream ss;
    ss << "score vs FD gradient and Jacobian vs FD score, 1000 draws over 4 kernels: "
       << "worst gradient rel err " << worst_g << " (<1e-6), worst Jacobian rel err " << worst_h
       << " (<1e-4)";
    report(5, ok, ss.str());
}

// ---------------------------------------------------------------------------
// criterion 6: LP against brute-force vertex enumeration
// ---------------------------------------------------------------------------

double lp_brute_force(const LpProblem& lp, bool& feasible) {
    const int ncons = lp.m + lp.n;
    double best = std::numeric_limits<double>::infinity();
    feasible = false;
    std::vector<int> comb;
    std::function<void(int, int)> rec = [&](int start, int depth) {
        if (depth == lp.n) {
            Eigen::MatrixXd M(lp.n, lp.n);
            Eigen::VectorXd rhs(lp.n);
            for (int r = 0; r < lp.n; ++r) {
                int c = comb[r];
                if (c < lp.m) {
                    for (int k = 0; k < lp.n; ++k) M(r, k) = lp.a[c * lp.n + k];
                    rhs(r) = lp.b[c];
                } else {
                    for (int k = 0; k < lp.n; ++k) M(r, k) = (k == c - lp.m) ? 1.0 : 0.0;
                    rhs(r) = 0.0;
                }
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
            if (!lu.isInvertible()) return;
            Eigen::VectorXd z = lu.solve(rhs);
            for (int k = 0; k < lp.n; ++k)
                if (z(k) < -1e-9) return;
            for (int r = 0; r < lp.m; ++r) {
                double acc = 0;
                for (int k = 0; k < lp.n; ++k) acc += lp.a[r * lp.n + k] * z(k);
                if (acc > lp.b[r] + 1e-9) return;
            }
            feasible = true;
            double obj = 0;
            for (int k = 0; k < lp.n; ++k) obj += lp.c[k] * z(k);
            best = std::min(best, obj);
            return;
        }
        for (int c = start; c < ncons; ++c) {
            comb.push_back(c);
            rec(c + 1, depth + 1);
            comb.pop_back();
        }
    };
    rec(0, 0);
    return best;
}

void run_lp_oracle() {
    Rng rng(606);
    int solved = 0;
    bool ok = true;
    double worst_obj = 0, worst_res = 0;
    for (int rep = 0; rep < 200; ++rep) {
        const int q = 1 + static_cast<int>(rng.below(3));
        std::vector<double> h(q * q);
        for (auto& v : h) v = 2.0 * rng.uniform() - 1.0;
        const int l = static_cast<int>(rng.below(q));
        const double tau = rng.uniform() * 0.8;
        auto r = solve_l1_projection(h, q, l, tau);

        LpProblem lp;
        lp.n = 2 * q;
        lp.m = 2 * q;
        lp.c.assign(lp.n, 1.0);
        lp.a.assign(static_cast<std::size_t>(lp.m) * lp.n, 0.0);
        lp.b.assign(lp.m, 0.0);
        for (int k = 0; k < q; ++k) {
            for (int r2 = 0; r2 < q; ++r2) {
                const double hrk = h[r2 * q + k];
                lp.a[k * lp.n + r2] = hrk;
                lp.a[k * lp.n + q + r2] = -hrk;
                lp.a[(q + k) * lp.n + r2] = -hrk;
                lp.a[(q + k) * lp.n + q + r2] = hrk;
            }
            lp.b[k] = tau + (k == l ? 1.0 : 0.0);
            lp.b[q + k] = tau - (k == l ? 1.0 : 0.0);
        }
        bool feasible = false;
        const double brute = lp_brute_force(lp, feasible);
        if (!feasible) {
            ok = ok && r.status == LpStatus::infeasible;
            continue;
        }
        ok = ok && r.status == LpStatus::optimal;
        if (r.status != LpStatus::optimal) continue;
        worst_obj = std::max(worst_obj, std::fabs(r.l1_norm - brute));
        worst_res = std::max(worst_res, r.residual_inf - tau);
        ok = ok && std::fabs(r.l1_norm - brute) <= 1e-8 && r.residual_inf <= tau + 1e-8;
        ++solved;
    }
    std::ostringstream ss;
    ss << "l1-projection LP vs vertex enumeration on 200 instances (" << solved
       << " feasible): worst objective gap " << worst_obj << " (<=1e-8), worst residual excess "
       << worst_res << " (<=1e-8)";
    report(6, ok, ss.str());
}

// ---------------------------------------------------------------------------
// criterion 7: node-parameter recovery inverts the forward row-sum map
// ---------------------------------------------------------------------------

void run_imom_inversion() {
    Rng rng(707);
    bool ok = true;
    double worst = 0;
    for (int rep = 0; rep < 100; ++rep) {
        const int p = 3 + static_cast<int>(rng.below(10));
        std::vector<double> xi(p), v(p, 0.0);
        for (auto& w : xi) w = 0.1 + 2.9 * rng.uniform();
        for (int i = 0; i < p; ++i)
            for (int j = 0; j < p; ++j)
                if (j != i) v[i] += xi[i] * xi[j];
        auto x = recover_locals(v);
        for (int i = 0; i < p; ++i) worst = std::max(worst, std::fabs(std::exp(x[i]) - xi[i]));
    }
    ok = worst < 1e-8;
    std::ostringstream ss;
    ss << "recover_locals inverts 100 random positive xi vectors (p in 3..12): worst error "
       << worst << " (<1e-8)";
    report(7, ok, ss.str());
}

// ---------------------------------------------------------------------------
// criterion 8: ROC AUC equals the pairwise concordance estimator
// ---------------------------------------------------------------------------

void run_auc_oracle() {
    Rng rng(808);
    bool ok = true;
    double worst = 0;
    int done = 0;
    while (done < 100) {
        const int n = 5 + static_cast<int>(rng.below(196));
        std::vector<double> sc(n);
        std::vector<int> y(n);
        int pos = 0;
        for (int i = 0; i < n; ++i) {
            sc[i] = std::round(rng.uniform() * 20) / 20.0;  // ties likely
            y[i] = rng.bernoulli(0.5);
            pos += y[i];
        }
        if (pos == 0 || pos == n) continue;
        const double auc = roc(sc, y).auc;
        const double conc = oracle::auc_concordance(sc, y);
        worst = std::max(worst, std::fabs(auc - conc));
        ++done;
    }
    ok = worst < 1e-10;
    std::ostringstream ss;
    ss << "trapezoid AUC vs concordance estimator on 100 instances: worst gap " << worst
       << " (<1e-10)";
    report(8, ok, ss.str());
}

// ---------------------------------------------------------------------------
// criterion 9: BIC prefers the transitivity AR model on its own data
// ---------------------------------------------------------------------------

void run_bic_ordering() {
    const int p = 50, n = 30, reps = 20;
    TransitivityKernel kernel(p);
    auto truth = ParameterSet::constant(kernel.index(), 0.0, 0.8, 0.9);
    truth.values[0] = 10.0;
    truth.values[1] = 10.0;
    std::vector<int> wins(reps, 0);
    parallel_for(reps, resolve_threads(0), [&](int rep) {
        SimConfig cfg;
        cfg.p = p;
        cfg.n = n;
        cfg.burn_in = 150;
        cfg.seed = 9000 + rep;
        auto s = simulate(kernel, truth, cfg);
        EstimationConfig ecfg;
        ecfg.init_grid = {0.7};
        ecfg.threads = 1;
        auto tar = fit_baseline(BaselineId::transitivity_ar, s, ecfg, FitMethod::mle);
        auto ear = fit_baseline(BaselineId::edgewise_ar, s);
        auto emn = fit_baseline(BaselineId::edgewise_mean, s);
        const double bt = information_criteria(tar, s).bic;
        wins[rep] = bt < information_criteria(ear, s).bic &&
                    bt < information_criteria(emn, s).bic;
    });
    int total = 0;
    for (int w : wins) total += w;
    const bool ok = total >= 18;
    std::ostringstream ss;
    ss << "BIC ranks transitivity-ar above edgewise-ar and edgewise-mean in " << total << "/"
       << reps << " replications (need >= 18)";
    report(9, ok, ss.str());
}

}  // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int a = 1; a < argc; ++a) {
        if (std::strcmp(argv[a], "--criteria") == 0 && a + 1 < argc) {
            std::stringstream ss(argv[++a]);
            std::string tok;
            while (std::getline(ss, tok, ',')) wanted.insert(std::stoi(tok));
        }
    }
    if (wanted.empty())
        for (int c = 1; c <= 10; ++c) wanted.insert(c);

    if (wanted.count(1) || wanted.count(2) || wanted.count(3) || wanted.count(10))
        run_rmae_group(wanted);
    if (wanted.count(4)) run_persistence_stationarity();
    if (wanted.count(5)) run_gradient_suite();
    if (wanted.count(6)) run_lp_oracle();
    if (wanted.count(7)) run_imom_inversion();
    if (wanted.count(8)) run_auc_oracle();
    if (wanted.count(9)) run_bic_ordering();

    int failures = 0;
    for (const auto& line : results) failures += !line.pass;
    return failures;
}
