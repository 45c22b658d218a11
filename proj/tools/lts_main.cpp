#include "lts/core.hpp"
#include "lts/heuristics.hpp"
#include "lts/io.hpp"
#include "lts/solver.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

namespace {

using nlohmann::json;

lts::Method parse_method(const std::string& name) {
    static const std::map<std::string, lts::Method> table = {
        {"big-m", lts::Method::BigM},        {"conic", lts::Method::Conic},
        {"conic-plus", lts::Method::ConicPlus}, {"alt-opt", lts::Method::AltOpt},
        {"lad", lts::Method::Lad},           {"ls-l2", lts::Method::LsL2},
    };
    const auto it = table.find(name);
    if (it == table.end()) {
        throw CLI::ValidationError("--method", "unknown method '" + name + "'");
    }
    return it->second;
}

lts::InterceptMode parse_intercept(const std::string& name) {
    if (name == "zero") return lts::InterceptMode::Zero;
    if (name == "proxy") return lts::InterceptMode::Proxy;
    if (name == "reliable") return lts::InterceptMode::Reliable;
    throw CLI::ValidationError("--intercept", "unknown intercept mode '" + name + "'");
}

bool is_mio(lts::Method m) {
    return m == lts::Method::BigM || m == lts::Method::Conic || m == lts::Method::ConicPlus;
}

std::vector<lts::Index> discarded_indices(const lts::Vector& z) {
    std::vector<lts::Index> out;
    for (lts::Index i = 0; i < z.size(); ++i) {
        if (z(i) > 0.5) out.push_back(i);
    }
    return out;
}

struct RunResult {
    lts::Solution solution;
    std::string status = "optimal";
    double time_s = 0.0;
    double lower_bound = 0.0;
    double gap = 0.0;
    long nodes = 0;
    int alg1_iterations = 0;
    lts::Vector d_weights;
    bool mio = false;
};

RunResult run_method(const lts::SolveInstance& inst, const lts::ProblemSpec& spec,
                     bool parallel, bool warm_start, bool node_retune) {
    RunResult res;
    const auto t0 = std::chrono::steady_clock::now();
    if (is_mio(spec.method)) {
        lts::BnbParams params;
        params.formulation = spec.method;
        params.time_limit_s = spec.time_limit_s;
        params.gap_tol = spec.tol.gap_tol;
        params.integrality_tol = spec.tol.integrality_tol;
        params.big_m = spec.tol.big_m;
        params.parallel = parallel;
        params.warm_start = warm_start;
        params.node_retune = node_retune;
        const lts::SolveReport report = lts::solve_mio(inst, params);
        res.solution = report.incumbent;
        res.status = lts::status_name(report.status);
        res.lower_bound = report.lower_bound;
        res.gap = report.gap;
        res.nodes = report.nodes;
        res.alg1_iterations = report.alg1_iterations;
        res.d_weights = report.d_weights;
        res.mio = true;
    } else if (spec.method == lts::Method::AltOpt) {
        res.solution = lts::alt_opt(inst);
    } else if (spec.method == lts::Method::Lad) {
        bool warn = false;
        res.solution = lts::lad(inst, 1e-6, 10000, &warn);
        if (warn) res.status = "warning_numerical";
    } else {
        res.solution = lts::ls_l2(inst);
    }
    res.time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

int cmd_gen(lts::Index n, lts::Index m, double tau, std::uint64_t seed,
            const std::string& out_dir) {
    const auto [data, truth] = lts::generate_synthetic(n, m, tau, seed);
    std::filesystem::create_directories(out_dir);
    const auto dir = std::filesystem::path(out_dir);
    lts::write_csv((dir / "data.csv").string(), data);
    lts::write_truth_json((dir / "truth.json").string(), truth);
    std::cout << "wrote " << (dir / "data.csv").string() << " (" << m << "x" << n << ", "
              << truth.outlier_set.size() << " outliers) and " << (dir / "truth.json").string()
              << "\n";
    return 0;
}

struct SolveArgs {
    std::string data_path;
    std::string response = "y";
    std::string truth_path;
    std::string method = "conic-plus";
    std::string intercept = "zero";
    double lambda = 0.1;
    int budget = -1;
    double budget_frac = -1.0;
    double time_limit = 600.0;
    double big_m = 1000.0;
    std::uint64_t seed = 0;
    bool parallel = false;
    bool warm_start = false;
    bool node_retune = false;
};

int cmd_solve(const SolveArgs& args) {
    const lts::Dataset data = lts::read_csv(args.data_path, args.response);
    const lts::StandardizedInstance std_inst = lts::standardize(data);

    lts::ProblemSpec spec;
    spec.method = parse_method(args.method);
    spec.intercept_mode = parse_intercept(args.intercept);
    spec.lambda = args.lambda;
    spec.time_limit_s = args.time_limit;
    spec.seed = args.seed;
    spec.tol.big_m = args.big_m;
    if (args.budget >= 0 && args.budget_frac >= 0.0) {
        throw CLI::ValidationError("--budget", "give either --budget or --budget-frac");
    }
    if (args.budget_frac >= 0.0) {
        spec.budget = static_cast<int>(std::floor(args.budget_frac * data.rows()));
    } else {
        spec.budget = std::max(0, args.budget);
    }

    const lts::SolveInstance inst = lts::make_solve_instance(std_inst, spec);
    const RunResult run = run_method(inst, spec, args.parallel, args.warm_start,
                                     args.node_retune);

    const auto [x_orig, intercept_orig] = lts::unstandardize_solution(run.solution, std_inst);

    json out;
    out["method"] = args.method;
    out["status"] = run.status;
    out["objective"] = run.solution.objective;
    out["time_s"] = run.time_s;
    out["x"] = std::vector<double>(x_orig.data(), x_orig.data() + x_orig.size());
    out["intercept"] = intercept_orig;
    out["discarded_indices"] = discarded_indices(run.solution.z);
    if (run.mio) {
        out["lower_bound"] = run.lower_bound;
        out["gap"] = run.gap;
        out["nodes"] = run.nodes;
        if (spec.method == lts::Method::ConicPlus) {
            out["alg1_iterations"] = run.alg1_iterations;
            out["d_weights"] = std::vector<double>(run.d_weights.data(),
                                                   run.d_weights.data() + run.d_weights.size());
        }
    }
    if (!args.truth_path.empty()) {
        const lts::GroundTruth truth = lts::read_truth_json(args.truth_path);
        out["risk"] = lts::risk(x_orig, truth);
        const bool identifies = run.mio || spec.method == lts::Method::AltOpt;
        if (identifies && !truth.outlier_set.empty()) {
            out["recall"] = lts::recall(run.solution.z, truth);
        }
    }
    std::cout << out.dump(2) << "\n";
    return run.status == "warning_numerical" ? 3 : 0;
}

struct BenchRow {
    std::string dataset;
    std::string method;
    double lambda = 0.0;
    double budget_frac = 0.0;
    int budget = 0;
    std::string status;
    double objective = 0.0;
    double lower_bound = 0.0;
    double gap = 0.0;
    long nodes = 0;
    double time_s = 0.0;
    double quality_gap = 0.0;
    std::optional<double> risk;
    std::optional<double> recall;
    bool mio = false;
};

void emit_row(std::ostream& os, const std::string& kind, const BenchRow& r) {
    os << kind << ',' << r.dataset << ',' << r.method << ',' << r.lambda << ','
       << r.budget_frac << ',' << r.budget << ',' << r.status << ',' << r.objective << ','
       << (r.mio ? std::to_string(r.lower_bound) : "") << ','
       << (r.mio ? std::to_string(r.gap) : "") << ','
       << (r.mio ? std::to_string(r.nodes) : "") << ',' << r.time_s << ',' << r.quality_gap
       << ',' << (r.risk ? std::to_string(*r.risk) : "") << ','
       << (r.recall ? std::to_string(*r.recall) : "") << '\n';
}

int cmd_bench(const std::string& manifest_path, const std::string& out_path) {
    std::ifstream in(manifest_path);
    if (!in) throw lts::DataError("cannot open " + manifest_path);
    json manifest;
    in >> manifest;

    const double time_limit = manifest.value("time_limit_s", 600.0);
    const std::string intercept = manifest.value("intercept", "zero");
    const bool parallel = manifest.value("parallel", false);
    std::vector<double> lambdas = manifest.at("lambdas").get<std::vector<double>>();
    std::vector<double> fracs = manifest.at("budget_fracs").get<std::vector<double>>();
    std::vector<std::string> methods = manifest.at("methods").get<std::vector<std::string>>();

    std::ofstream file_out;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        file_out.open(out_path);
        if (!file_out) throw lts::DataError("cannot write " + out_path);
        os = &file_out;
    }
    *os << "kind,dataset,method,lambda,budget_frac,budget,status,objective,lower_bound,gap,"
           "nodes,time_s,quality_gap,risk,recall\n";

    std::vector<BenchRow> rows;
    for (const auto& ds : manifest.at("datasets")) {
        std::string name;
        lts::Dataset data;
        std::optional<lts::GroundTruth> truth;
        if (ds.contains("synthetic")) {
            const auto& s = ds.at("synthetic");
            auto [d, t] = lts::generate_synthetic(s.at("n").get<lts::Index>(),
                                                  s.at("m").get<lts::Index>(),
                                                  s.at("tau").get<double>(),
                                                  s.value("seed", 0ull));
            data = std::move(d);
            truth = std::move(t);
            name = ds.value("name", "synthetic");
        } else {
            name = ds.value("name", ds.at("path").get<std::string>());
            data = lts::read_csv(ds.at("path").get<std::string>(),
                                 ds.value("response", "y"));
            if (ds.contains("truth")) truth = lts::read_truth_json(ds.at("truth").get<std::string>());
        }
        const lts::StandardizedInstance std_inst = lts::standardize(data);

        for (const double lambda : lambdas) {
            for (const double frac : fracs) {
                std::vector<BenchRow> batch;
                double best_obj = std::numeric_limits<double>::infinity();
                for (const std::string& mname : methods) {
                    lts::ProblemSpec spec;
                    spec.method = parse_method(mname);
                    spec.intercept_mode = parse_intercept(intercept);
                    spec.lambda = lambda;
                    spec.budget = static_cast<int>(std::floor(frac * data.rows()));
                    spec.time_limit_s = time_limit;
                    BenchRow row;
                    row.dataset = name;
                    row.method = mname;
                    row.lambda = lambda;
                    row.budget_frac = frac;
                    row.budget = spec.budget;
                    try {
                        const lts::SolveInstance inst = lts::make_solve_instance(std_inst, spec);
                        const RunResult run = run_method(inst, spec, parallel, false, false);
                        row.status = run.status;
                        row.objective = run.solution.objective;
                        row.lower_bound = run.lower_bound;
                        // Time-outs count at the full limit; optimal runs count
                        // as gap zero.
                        row.gap = run.status == "optimal" ? 0.0 : run.gap;
                        row.nodes = run.nodes;
                        row.time_s = run.status == "time_limit" ? time_limit : run.time_s;
                        row.mio = run.mio;
                        if (truth) {
                            const auto [x_orig, ic] =
                                lts::unstandardize_solution(run.solution, std_inst);
                            row.risk = lts::risk(x_orig, *truth);
                            const bool identifies =
                                run.mio || spec.method == lts::Method::AltOpt;
                            if (identifies && !truth->outlier_set.empty()) {
                                row.recall = lts::recall(run.solution.z, *truth);
                            }
                        }
                        best_obj = std::min(best_obj, row.objective);
                    } catch (const std::exception& e) {
                        row.status = std::string("error: ") + e.what();
                    }
                    batch.push_back(std::move(row));
                }
                for (BenchRow& row : batch) {
                    if (row.status.rfind("error", 0) != 0) {
                        row.quality_gap =
                            (row.objective - best_obj) / std::max(best_obj, 1e-12);
                    }
                    emit_row(*os, "run", row);
                    rows.push_back(std::move(row));
                }
            }
        }
    }

    // Plain means per (dataset, method); time-outs already recorded at the limit.
    std::map<std::pair<std::string, std::string>, std::vector<const BenchRow*>> groups;
    for (const BenchRow& r : rows) {
        if (r.status.rfind("error", 0) == 0) continue;
        groups[{r.dataset, r.method}].push_back(&r);
    }
    for (const auto& [key, group] : groups) {
        BenchRow mean;
        mean.dataset = key.first;
        mean.method = key.second;
        mean.status = "mean_over_" + std::to_string(group.size());
        mean.mio = group.front()->mio;
        for (const BenchRow* r : group) {
            mean.time_s += r->time_s;
            mean.nodes += r->nodes;
            mean.gap += r->gap;
            mean.objective += r->objective;
            mean.quality_gap += r->quality_gap;
        }
        const double k = static_cast<double>(group.size());
        mean.time_s /= k;
        mean.nodes = static_cast<long>(static_cast<double>(mean.nodes) / k);
        mean.gap /= k;
        mean.objective /= k;
        mean.quality_gap /= k;
        emit_row(*os, "mean", mean);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Least trimmed squares robust regression: exact conic and big-M "
                 "mixed-integer solvers with baseline heuristics"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic instance");
    lts::Index gen_n = 2, gen_m = 100;
    double gen_tau = 0.1;
    std::uint64_t gen_seed = 0;
    std::string gen_out = ".";
    gen->add_option("-n", gen_n, "number of features")->required();
    gen->add_option("-m", gen_m, "number of observations")->required();
    gen->add_option("--tau", gen_tau, "outlier proportion in [0,1)");
    gen->add_option("--seed", gen_seed, "random seed");
    gen->add_option("-o,--output", gen_out, "output directory");

    // solve
    auto* solve = app.add_subcommand("solve", "solve one instance");
    SolveArgs sa;
    solve->add_option("--data", sa.data_path, "input CSV")->required();
    solve->add_option("--response", sa.response, "response column name");
    solve->add_option("--truth", sa.truth_path, "ground-truth JSON sidecar");
    solve->add_option("--method", sa.method,
                      "big-m | conic | conic-plus | alt-opt | lad | ls-l2");
    solve->add_option("--lambda", sa.lambda, "regularization weight");
    solve->add_option("--budget", sa.budget, "outlier budget (count)");
    solve->add_option("--budget-frac", sa.budget_frac, "outlier budget as a fraction of m");
    solve->add_option("--time-limit", sa.time_limit, "time limit in seconds");
    solve->add_option("--seed", sa.seed, "random seed");
    solve->add_option("--intercept", sa.intercept, "zero | proxy | reliable");
    solve->add_option("--M", sa.big_m, "big-M constant");
    solve->add_flag("--parallel", sa.parallel, "parallel tree search");
    solve->add_flag("--warm-start", sa.warm_start, "seed the incumbent with alt-opt");
    solve->add_flag("--node-retune", sa.node_retune, "re-tune weights inside subtrees");

    // bench
    auto* bench = app.add_subcommand("bench", "run a benchmark manifest");
    std::string bench_manifest, bench_out;
    bench->add_option("--manifest", bench_manifest, "manifest JSON")->required();
    bench->add_option("-o,--output", bench_out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
        if (gen->parsed()) return cmd_gen(gen_n, gen_m, gen_tau, gen_seed, gen_out);
        if (solve->parsed()) return cmd_solve(sa);
        if (bench->parsed()) return cmd_bench(bench_manifest, bench_out);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const lts::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const lts::PreconditionError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
