// arnet: simulate, fit, diagnose, compare and forecast autoregressive
// network models with dependent edges.

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <json.hpp>

#include "arnet/compare.hpp"
#include "arnet/estimate.hpp"
#include "arnet/io.hpp"

using json = nlohmann::ordered_json;
using namespace arnet;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;
constexpr int kExitOptim = 4;

void require_keys(const json& obj, const std::string& where,
                  const std::vector<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end())
            throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
    }
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(path + ": invalid JSON: " + std::string(e.what()));
    }
    return j;
}

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open file for writing: " + path);
    out << body;
    if (!out) throw IoError("failed writing: " + path);
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// fills a parameter vector from the "params" object of a config
std::vector<double> params_from_json(KernelId id, int p, const json& pj) {
    ParameterIndex idx(id, p);
    std::vector<double> th(idx.q(), 0.0);
    auto scalar_or_vec = [&](const json& v, int count, int offset, const std::string& name) {
        if (v.is_number()) {
            for (int i = 0; i < count; ++i) th[offset + i] = v.get<double>();
        } else if (v.is_array()) {
            if (static_cast<int>(v.size()) != count)
                throw ConfigError("params." + name + ": expected " + std::to_string(count) +
                                  " values");
            for (int i = 0; i < count; ++i) th[offset + i] = v[i].get<double>();
        } else {
            throw ConfigError("params." + name + ": expected number or array");
        }
    };
    std::vector<std::string> globals;
    for (int g = 0; g < idx.n_global(); ++g) globals.push_back(idx.name(g));
    if (id == KernelId::edgewise_ar) {
        require_keys(pj, "params", {"alpha", "beta"});
        const int ne = pair_count(p);
        if (!pj.contains("alpha") || !pj.contains("beta"))
            throw ConfigError("params: edgewise_ar needs \"alpha\" and \"beta\"");
        std::vector<double> a(ne), b(ne);
        auto fill = [&](const json& v, std::vector<double>& dst, const char* nm) {
            if (v.is_number()) {
                std::fill(dst.begin(), dst.end(), v.get<double>());
            } else if (v.is_array() && static_cast<int>(v.size()) == ne) {
                for (int e = 0; e < ne; ++e) dst[e] = v[e].get<double>();
            } else {
                throw ConfigError(std::string("params.") + nm + ": expected number or array of " +
                                  std::to_string(ne));
            }
        };
        fill(pj["alpha"], a, "alpha");
        fill(pj["beta"], b, "beta");
        for (int e = 0; e < ne; ++e) {
            th[2 * e] = a[e];
            th[2 * e + 1] = b[e];
        }
        return th;
    }
    std::vector<std::string> allowed = globals;
    if (idx.layout() == LocalLayout::node_pair) {
        allowed.push_back("xi");
        allowed.push_back("eta");
    }
    require_keys(pj, "params", allowed);
    for (int g = 0; g < idx.n_global(); ++g) {
        if (!pj.contains(globals[g]))
            throw ConfigError("params: missing global parameter \"" + globals[g] + "\"");
        th[g] = pj[globals[g]].get<double>();
    }
    if (idx.layout() == LocalLayout::node_pair) {
        if (!pj.contains("xi") || !pj.contains("eta"))
            throw ConfigError("params: missing \"xi\" or \"eta\"");
        scalar_or_vec(pj["xi"], p, idx.xi_index(0), "xi");
        scalar_or_vec(pj["eta"], p, idx.eta_index(0), "eta");
    }
    return th;
}

struct SimSpec {
    KernelId model = KernelId::transitivity;
    SimConfig cfg;
    std::vector<double> theta;
    SeriesFormat format = SeriesFormat::matrix_text;
};

SimSpec parse_sim_config(const json& j, const std::string& where) {
    require_keys(j, where, {"seed", "model", "p", "n", "burn_in", "init", "params", "format"});
    SimSpec spec;
    for (const char* key : {"model", "p", "n", "params"})
        if (!j.contains(key))
            throw ConfigError(where + ": missing key \"" + std::string(key) + "\"");
    spec.model = kernel_from_string(j["model"].get<std::string>());
    spec.cfg.p = j["p"].get<int>();
    spec.cfg.n = j["n"].get<int>();
    spec.cfg.burn_in = j.value("burn_in", 200);
    spec.cfg.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("init")) {
        require_keys(j["init"], where + ".init", {"rule", "density"});
        const std::string rule = j["init"].value("rule", "erdos_renyi");
        if (rule == "empty") spec.cfg.init = SimConfig::Init::empty;
        else if (rule == "erdos_renyi") spec.cfg.init = SimConfig::Init::erdos_renyi;
        else throw ConfigError(where + ".init.rule: expected \"empty\" or \"erdos_renyi\"");
        spec.cfg.init_density = j["init"].value("density", 0.1);
    }
    if (j.contains("format")) spec.format = format_from_string(j["format"].get<std::string>());
    spec.theta = params_from_json(spec.model, spec.cfg.p, j["params"]);
    return spec;
}

EstimationConfig parse_estimation(const json& j, const std::string& where) {
    EstimationConfig cfg;
    require_keys(j, where,
                 {"init_grid", "r_tilde_local", "r_check_local", "r_tilde_global",
                  "r_check_global", "tau_grid", "ci_level", "stabilize_cycles",
                  "stabilize_sweeps", "refine_passes", "imom", "global_start"});
    if (j.contains("init_grid")) cfg.init_grid = j["init_grid"].get<std::vector<double>>();
    cfg.r_tilde_local = j.value("r_tilde_local", cfg.r_tilde_local);
    cfg.r_check_local = j.value("r_check_local", cfg.r_check_local);
    cfg.r_tilde_global = j.value("r_tilde_global", cfg.r_tilde_global);
    cfg.r_check_global = j.value("r_check_global", cfg.r_check_global);
    if (j.contains("tau_grid")) cfg.tau_grid = j["tau_grid"].get<std::vector<double>>();
    cfg.ci_level = j.value("ci_level", cfg.ci_level);
    cfg.stabilize_cycles = j.value("stabilize_cycles", cfg.stabilize_cycles);
    cfg.stabilize_sweeps = j.value("stabilize_sweeps", cfg.stabilize_sweeps);
    cfg.refine_passes = j.value("refine_passes", cfg.refine_passes);
    if (j.contains("global_start"))
        cfg.global_start = j["global_start"].get<std::vector<double>>();
    if (j.contains("imom")) {
        require_keys(j["imom"], where + ".imom", {"tol", "max_iter"});
        cfg.imom.tol = j["imom"].value("tol", cfg.imom.tol);
        cfg.imom.max_iter = j["imom"].value("max_iter", cfg.imom.max_iter);
    }
    if (cfg.tau_grid.empty()) throw ConfigError(where + ".tau_grid: must be nonempty");
    if (cfg.init_grid.empty()) throw ConfigError(where + ".init_grid: must be nonempty");
    return cfg;
}

json report_to_json(const FitReport& rep, const ParameterIndex& idx) {
    json out;
    out["kernel"] = to_string(rep.kernel);
    out["p"] = rep.p;
    out["n"] = rep.n;
    out["q"] = rep.q;
    out["loglik_initial"] = rep.loglik_initial;
    out["loglik_final"] = rep.loglik_final;
    out["delta_n"] = rep.delta;
    out["clip_count"] = rep.clip_count;
    out["lp_failures"] = rep.lp_failures;
    out["best_start"] = rep.best_start;
    out["start_loglik"] = rep.start_loglik;
    out["theta_tilde"] = rep.theta_tilde;
    out["theta_check"] = rep.theta_check;
    out["theta_hat"] = rep.theta_hat;
    json params = json::array();
    for (std::size_t l = 0; l < rep.params.size(); ++l) {
        const ParamFit& pf = rep.params[l];
        json pj;
        pj["name"] = pf.name.empty() ? idx.name(static_cast<int>(l)) : pf.name;
        pj["theta_tilde"] = pf.theta_tilde;
        pj["theta_check"] = pf.theta_check;
        pj["theta_hat"] = pf.theta_hat;
        pj["refined"] = pf.refined;
        pj["tau"] = pf.tau;
        pj["tau_mult"] = pf.tau_mult;
        pj["projection_residual"] = pf.audit;
        pj["zeta"] = pf.zeta;
        pj["se"] = pf.se;
        pj["ci_ok"] = pf.ci_ok;
        pj["ci_lo"] = pf.ci_lo;
        pj["ci_hi"] = pf.ci_hi;
        json phi = json::array();
        for (auto& [k, v] : pf.phi) phi.push_back(json::array({k, v}));
        pj["phi"] = phi;
        params.push_back(std::move(pj));
    }
    out["params"] = std::move(params);
    out["timing"] = {{"seconds", rep.seconds}};
    return out;
}

json rmae_to_json(const RmaeTable& t) {
    json j;
    for (auto& [k, v] : t.value) j[k] = v;
    return j;
}

void write_diagnostics(const DiagnosticsTable& d, const std::string& prefix) {
    std::string density = "t,density,running_mean\n";
    for (std::size_t t = 0; t < d.density.size(); ++t)
        density += std::to_string(t + 1) + "," + fmt(d.density[t]) + "," +
                   fmt(d.density_mean[t]) + "\n";
    write_text(prefix + "density.csv", density);

    std::string growth = "t,growth,running_mean\n";
    std::string diss = "t,dissolution,running_mean\n";
    for (std::size_t t = 0; t < d.growth.size(); ++t) {
        growth += std::to_string(t + 2) + "," + fmt(d.growth[t]) + "," + fmt(d.growth_mean[t]) +
                  "\n";
        diss += std::to_string(t + 2) + "," + fmt(d.dissolution[t]) + "," +
                fmt(d.dissolution_mean[t]) + "\n";
    }
    write_text(prefix + "growth.csv", growth);
    write_text(prefix + "dissolution.csv", diss);

    std::string ufreq = "common_neighbours,count,grown,ratio\n";
    for (const auto& row : d.u_table)
        ufreq += std::to_string(row.ell) + "," + std::to_string(row.count) + "," +
                 std::to_string(row.hits) + "," + fmt(row.ratio()) + "\n";
    write_text(prefix + "ufreq.csv", ufreq);

    std::string vfreq = "one_sided_neighbours,count,dissolved,ratio\n";
    for (const auto& row : d.v_table)
        vfreq += std::to_string(row.ell) + "," + std::to_string(row.count) + "," +
                 std::to_string(row.hits) + "," + fmt(row.ratio()) + "\n";
    write_text(prefix + "vfreq.csv", vfreq);
}

SnapshotSeries simulate_spec(const SimSpec& spec) {
    return dispatch_kernel(spec.model, spec.cfg.p, 1e-6, [&](auto kernel) {
        ParameterSet theta(kernel.index(), spec.theta);
        return simulate(kernel, theta, spec.cfg);
    });
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& config_path, const std::string& out_path,
                 std::string diag_prefix) {
    SimSpec spec = parse_sim_config(load_json(config_path), "config");
    SnapshotSeries series = simulate_spec(spec);
    save_series(series, out_path, spec.format);
    if (diag_prefix.empty()) {
        diag_prefix = out_path;
        const auto dot = diag_prefix.find_last_of('.');
        if (dot != std::string::npos) diag_prefix = diag_prefix.substr(0, dot);
        diag_prefix += "_";
    }
    write_diagnostics(diagnostics(series), diag_prefix);
    return 0;
}

int cmd_diagnose(const std::string& data_path, const std::string& out_prefix) {
    SnapshotSeries series = load_series(data_path, sniff_format(data_path));
    write_diagnostics(diagnostics(series), out_prefix);
    return 0;
}

struct FitArgs {
    std::string model, data, config, out, method = "mle";
    int threads = 0;
    int replications = 0;
    std::uint64_t seed_base = 0;
};

int cmd_fit(const FitArgs& args) {
    json cfgj = args.config.empty() ? json::object() : load_json(args.config);
    require_keys(cfgj, "config", {"estimation", "sim"});
    EstimationConfig cfg = cfgj.contains("estimation")
                               ? parse_estimation(cfgj["estimation"], "estimation")
                               : EstimationConfig{};
    cfg.threads = resolve_threads(args.threads);
    const FitMethod method = fit_method_from_string(args.method);

    if (args.replications > 0) {
        if (!cfgj.contains("sim"))
            throw ConfigError("config: replication mode needs a \"sim\" section with the truth");
        SimSpec spec = parse_sim_config(cfgj["sim"], "sim");
        if (!args.model.empty() && kernel_from_string(args.model) != spec.model)
            throw ConfigError("--model disagrees with sim.model");
        return dispatch_kernel(spec.model, spec.cfg.p, 1e-6, [&](auto kernel) {
            ParameterSet truth(kernel.index(), spec.theta);
            auto summary = run_replications(kernel, truth, spec.cfg, method, cfg,
                                            args.replications, args.seed_base, cfg.threads);
            json out;
            out["model"] = to_string(spec.model);
            out["replications"] = args.replications;
            out["seed_base"] = args.seed_base;
            out["rmae_initial"] = rmae_to_json(summary.rmae_initial);
            out["rmae_improved"] = rmae_to_json(summary.rmae_improved);
            json cov, len;
            for (auto& [k, v] : summary.coverage) cov[k] = v;
            for (auto& [k, v] : summary.ci_length) len[k] = v;
            out["ci_coverage"] = cov;
            out["ci_length"] = len;
            write_text(args.out + "_summary.json", out.dump(2) + "\n");
            for (int r = 0; r < args.replications; ++r) {
                const auto& rr = summary.per_rep[r];
                json rj;
                rj["replication"] = r;
                rj["seed"] = args.seed_base + static_cast<std::uint64_t>(r);
                rj["fits"] = rr.fits;
                rj["rmae_initial"] = rmae_to_json(rr.rmae_initial);
                rj["rmae_improved"] = rmae_to_json(rr.rmae_improved);
                json rc;
                for (auto& [k, v] : rr.covered) rc[k] = v;
                rj["ci_coverage"] = rc;
                char suffix[32];
                std::snprintf(suffix, sizeof suffix, "_rep%03d.json", r);
                write_text(args.out + suffix, rj.dump(2) + "\n");
            }
            return 0;
        });
    }

    if (args.data.empty()) throw ConfigError("--data is required unless --replications is set");
    if (args.model.empty()) throw ConfigError("--model is required");
    SnapshotSeries series = load_series(args.data, sniff_format(args.data));
    const KernelId model = kernel_from_string(args.model);
    return dispatch_kernel(model, series.p(), 1e-6, [&](auto kernel) {
        auto pipe = fit_pipeline(kernel, series, method, cfg);
        const FitReport& best = pipe.reports[pipe.best];
        json out = report_to_json(best, kernel.index());
        out["method"] = args.method;
        out["data"] = args.data;
        if (method == FitMethod::imom) {
            out["refined"] = false;  // moment estimates only; no projection stage
            out["imom_iterations"] = pipe.imom[pipe.best].iterations;
            out["imom_converged"] = pipe.imom[pipe.best].converged;
            out["imom_degenerate"] = pipe.imom[pipe.best].degenerate;
        }
        write_text(args.out, out.dump(2) + "\n");
        return 0;
    });
}

struct CompareArgs {
    std::string data, out, config;
    int split = 0;
    std::string steps = "1,2,3";
    int mc_paths = 200;
    std::uint64_t seed = 0;
    int threads = 0;
};

std::vector<int> parse_steps(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stoi(tok));
    }
    if (out.empty()) throw ConfigError("--steps: expected a comma-separated list");
    return out;
}

std::string roc_csv(const std::vector<std::pair<std::string, RocCurve>>& curves) {
    std::string body = "model,fpr,tpr\n";
    for (const auto& [name, curve] : curves)
        for (const auto& pt : curve.points)
            body += name + "," + fmt(pt.fpr) + "," + fmt(pt.tpr) + "\n";
    return body;
}

int cmd_compare(const CompareArgs& args) {
    SnapshotSeries series = load_series(args.data, sniff_format(args.data));
    const std::vector<int> steps = parse_steps(args.steps);
    if (args.split < 2 || args.split >= series.n())
        throw ConfigError("--split must lie in [2, n-1]");
    for (int s : steps)
        if (s < 1 || args.split + s > series.n())
            throw ConfigError("--steps: split + step exceeds the series length");
    SnapshotSeries train = series.slice(0, args.split);

    json cfgj = args.config.empty() ? json::object() : load_json(args.config);
    require_keys(cfgj, "config", {"estimation"});
    EstimationConfig ecfg = cfgj.contains("estimation")
                                ? parse_estimation(cfgj["estimation"], "estimation")
                                : EstimationConfig{};
    ecfg.init_grid = {0.7};  // single start keeps the comparison fast
    ecfg.threads = resolve_threads(args.threads);

    const std::vector<BaselineId> models = {BaselineId::transitivity_ar, BaselineId::global_ar,
                                            BaselineId::edgewise_ar, BaselineId::edgewise_mean,
                                            BaselineId::degree_mean};
    json out;
    out["data"] = args.data;
    out["split"] = args.split;
    out["steps"] = steps;
    json table = json::array();
    std::vector<BaselineFit> fits;
    for (BaselineId id : models) {
        BaselineFit bfit = fit_baseline(id, train, ecfg, FitMethod::mle);
        auto ic = information_criteria(bfit, train);
        json row;
        row["model"] = to_string(id);
        row["k"] = bfit.k;
        row["loglik"] = bfit.loglik;
        row["aic"] = ic.aic;
        row["bic"] = ic.bic;
        table.push_back(std::move(row));
        fits.push_back(std::move(bfit));
    }
    out["information_criteria"] = std::move(table);

    std::string stem = args.out;
    if (const auto dot = stem.find_last_of('.'); dot != std::string::npos)
        stem = stem.substr(0, dot);
    json auc;
    PairList pairs(series.p());
    for (int s : steps) {
        std::vector<std::pair<std::string, RocCurve>> curves;
        json auc_step;
        for (std::size_t mi = 0; mi < models.size(); ++mi) {
            auto probs = forecast(fits[mi], train, s, args.mc_paths, args.seed);
            auto curve = roc_snapshot(probs, series, args.split - 1 + s);
            auc_step[to_string(models[mi])] = curve.auc;
            curves.emplace_back(to_string(models[mi]), std::move(curve));
        }
        {
            // naive reference: the state of each edge in the last training snapshot
            std::vector<double> prev(pair_count(series.p()));
            for (int e = 0; e < pair_count(series.p()); ++e)
                prev[e] = train.at(train.n() - 1, pairs.i_of[e], pairs.j_of[e]);
            auto curve = roc_snapshot(prev, series, args.split - 1 + s);
            auc_step["previous_edge"] = curve.auc;
            curves.emplace_back("previous_edge", std::move(curve));
        }
        write_text(stem + "_roc_s" + std::to_string(s) + ".csv", roc_csv(curves));
        auc[std::to_string(s)] = std::move(auc_step);
    }
    out["auc"] = std::move(auc);
    write_text(args.out, out.dump(2) + "\n");
    return 0;
}

struct ForecastArgs {
    std::string data, model, out, config;
    int split = 0;
    std::string steps = "1";
    int mc_paths = 200;
    std::uint64_t seed = 0;
    int threads = 0;
};

int cmd_forecast(const ForecastArgs& args) {
    SnapshotSeries series = load_series(args.data, sniff_format(args.data));
    const std::vector<int> steps = parse_steps(args.steps);
    if (args.split < 2 || args.split >= series.n())
        throw ConfigError("--split must lie in [2, n-1]");
    SnapshotSeries train = series.slice(0, args.split);

    json cfgj = args.config.empty() ? json::object() : load_json(args.config);
    require_keys(cfgj, "config", {"estimation"});
    EstimationConfig ecfg = cfgj.contains("estimation")
                                ? parse_estimation(cfgj["estimation"], "estimation")
                                : EstimationConfig{};
    ecfg.init_grid = {0.7};
    ecfg.threads = resolve_threads(args.threads);

    BaselineId model = baseline_from_string(args.model);
    BaselineFit bfit = fit_baseline(model, train, ecfg, FitMethod::mle);
    PairList pairs(series.p());
    json auc;
    for (int s : steps) {
        if (args.split + s > series.n())
            throw ConfigError("--steps: split + step exceeds the series length");
        auto probs = forecast(bfit, train, s, args.mc_paths, args.seed);
        std::string body = "i,j,probability\n";
        for (int e = 0; e < pair_count(series.p()); ++e)
            body += std::to_string(pairs.i_of[e] + 1) + "," + std::to_string(pairs.j_of[e] + 1) +
                    "," + fmt(probs[e]) + "\n";
        write_text(args.out + "_s" + std::to_string(s) + ".csv", body);
        auto curve = roc_snapshot(probs, series, args.split - 1 + s);
        write_text(args.out + "_roc_s" + std::to_string(s) + ".csv",
                   roc_csv({{to_string(model), curve}}));
        auc[std::to_string(s)] = curve.auc;
    }
    json out;
    out["model"] = to_string(model);
    out["split"] = args.split;
    out["auc"] = std::move(auc);
    write_text(args.out + "_auc.json", out.dump(2) + "\n");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"autoregressive dynamic-network models with dependent edges"};
    app.require_subcommand(1);

    auto* sim = app.add_subcommand("simulate", "draw a snapshot series from a model");
    std::string sim_config, sim_out, sim_diag;
    sim->add_option("--config", sim_config, "simulation config (JSON)")->required();
    sim->add_option("--out", sim_out, "output series file")->required();
    sim->add_option("--diag-out", sim_diag, "prefix for diagnostics CSVs");

    auto* fit = app.add_subcommand("fit", "estimate model parameters");
    FitArgs fargs;
    fit->add_option("--model", fargs.model,
                    "kernel id: degree_het|persistence|transitivity|transitivity_ext|"
                    "global_ar|edgewise_ar");
    fit->add_option("--data", fargs.data, "input series file");
    fit->add_option("--config", fargs.config, "estimation config (JSON)");
    fit->add_option("--out", fargs.out, "output report (JSON), or prefix with --replications")
        ->required();
    fit->add_option("--method", fargs.method, "mle | imom | mle+imom-init");
    fit->add_option("--threads", fargs.threads, "worker threads (ARNET_THREADS overrides)");
    fit->add_option("--replications", fargs.replications,
                    "replication driver: simulate and fit this many series");
    fit->add_option("--seed-base", fargs.seed_base, "seed of replication 0");

    auto* diag = app.add_subcommand("diagnose", "density and transitivity diagnostics");
    std::string diag_data, diag_out;
    diag->add_option("--data", diag_data, "input series file")->required();
    diag->add_option("--out", diag_out, "output prefix for CSV tables")->required();

    auto* cmp = app.add_subcommand("compare", "baseline model comparison and forecasting");
    CompareArgs cargs;
    cmp->add_option("--data", cargs.data, "input series file")->required();
    cmp->add_option("--split", cargs.split, "train on snapshots 1..split")->required();
    cmp->add_option("--steps", cargs.steps, "forecast horizons, e.g. 1,2,3");
    cmp->add_option("--out", cargs.out, "output report (JSON)")->required();
    cmp->add_option("--config", cargs.config, "estimation config (JSON)");
    cmp->add_option("--mc-paths", cargs.mc_paths, "Monte-Carlo paths for dependent kernels");
    cmp->add_option("--seed", cargs.seed, "Monte-Carlo seed");
    cmp->add_option("--threads", cargs.threads, "worker threads");

    auto* fc = app.add_subcommand("forecast", "multi-step edge forecasts with ROC evaluation");
    ForecastArgs fcargs;
    fc->add_option("--data", fcargs.data, "input series file")->required();
    fc->add_option("--model", fcargs.model,
                   "transitivity_ar|global_ar|edgewise_ar|edgewise_mean|degree_mean")
        ->required();
    fc->add_option("--split", fcargs.split, "train on snapshots 1..split")->required();
    fc->add_option("--steps", fcargs.steps, "forecast horizons, e.g. 1,2,3");
    fc->add_option("--out", fcargs.out, "output prefix")->required();
    fc->add_option("--config", fcargs.config, "estimation config (JSON)");
    fc->add_option("--mc-paths", fcargs.mc_paths, "Monte-Carlo paths for dependent kernels");
    fc->add_option("--seed", fcargs.seed, "Monte-Carlo seed");
    fc->add_option("--threads", fcargs.threads, "worker threads");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return cmd_simulate(sim_config, sim_out, sim_diag);
        if (fit->parsed()) return cmd_fit(fargs);
        if (diag->parsed()) return cmd_diagnose(diag_data, diag_out);
        if (cmp->parsed()) return cmd_compare(cargs);
        if (fc->parsed()) return cmd_forecast(fcargs);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const ValueError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const EstimationError& e) {
        std::fprintf(stderr, "estimation failed: %s\n", e.what());
        return kExitOptim;
    } catch (const IoError& e) {
        std::fprintf(stderr, "i/o error: %s\n", e.what());
        return kExitIo;
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return kExitIo;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
