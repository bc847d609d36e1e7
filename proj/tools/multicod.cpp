// Command-line surface for the pipeline: generate candidates, train the
// selector, apply it to stored runs, and report aggregate metrics.
//
// Exit codes: 0 ok, 2 config error, 3 data error, 4 gateway error,
// 5 checkpoint error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "multicod/cod.hpp"
#include "multicod/core.hpp"
#include "multicod/gateway.hpp"
#include "multicod/http_provider.hpp"
#include "multicod/record.hpp"
#include "multicod/synth.hpp"
#include "multicod/trainer.hpp"
#include "multicod/vadn.hpp"

namespace {

using namespace multicod;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitGateway = 4;
constexpr int kExitCheckpoint = 5;

json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataMissing("cannot open " + path.string());
    return json::parse(in);
}

void write_json_file(const fs::path& path, const json& j, int indent = 2) {
    std::ofstream out(path);
    if (!out) throw DataMissing("cannot write " + path.string());
    out << j.dump(indent) << "\n";
}

// Effective configuration: file values overridden by CLI flags.
struct CliConfig {
    json raw = json::object();

    std::shared_ptr<Provider> make_provider(const std::string& override_name) const {
        const json prov = raw.value("provider", json::object());
        std::string type = override_name.empty() ? prov.value("type", "mock") : override_name;
        if (type == "mock") {
            const std::string script = prov.value("script", "");
            if (script.empty()) throw ConfigInvalid("mock provider requires provider.script");
            return std::make_shared<MockProvider>(
                MockProvider::script_from_json(load_json_file(script)));
        }
        if (type == "http") {
            HttpProviderConfig hc;
            hc.base_url = prov.value("base_url", "");
            hc.path = prov.value("path", "/v1/chat/completions");
            hc.model = prov.value("model", "");
            hc.api_key_env = prov.value("api_key_env", "");
            if (hc.base_url.empty()) throw ConfigInvalid("http provider requires provider.base_url");
            return std::make_shared<HttpProvider>(hc);
        }
        throw ConfigInvalid("unknown provider type: " + type);
    }
};

int run_generate(const CliConfig& cfg, const std::string& tasks_path,
                 const std::string& out_path, const std::string& run_id,
                 const std::string& provider_name, int k) {
    const json tasks_json = load_json_file(tasks_path);
    std::vector<Task> tasks = tasks_json.get<std::vector<Task>>();
    if (tasks.empty()) {
        std::cerr << "no tasks in " << tasks_path << "\n";
        return kExitData;
    }

    GatewayConfig gw_cfg;
    gw_cfg.backoff_base_seconds = cfg.raw.value("backoff_base_seconds", 0.5);
    LlmGateway gateway(cfg.make_provider(provider_name), gw_cfg);
    HashedEmbedder embedder;
    CostLedger ledger;

    GenerateOptions opt;
    opt.k = k;
    opt.diversity_threshold = cfg.raw.value("diversity_threshold", kDefaultDiversityThreshold);

    RunRecord record(out_path, run_id);
    record.write_manifest(json{{"k", k}, {"tasks", tasks_path}, {"config", cfg.raw}});
    const auto existing = record.existing_task_ids();

    int written = 0;
    for (const auto& task : tasks) {
        if (existing.count(task.id) != 0) continue;  // idempotent per (run_id, task)
        RunRow row = generate_for_task(task, gateway, embedder, ledger, opt);
        record.append(row);
        ++written;
    }
    std::cout << "generated " << written << " task rows -> " << out_path << "\n";
    return kExitOk;
}

std::vector<LabeledPool> pools_from_record(const std::string& record_path) {
    RunRecord record(record_path, "train");
    std::vector<LabeledPool> pools;
    std::vector<std::string> missing;
    for (const auto& row : record.load()) {
        LabeledPool pool;
        pool.task_id = row.task_id;
        pool.state.candidates = row.features;
        bool complete = !row.candidates.empty();
        for (const auto& cand : row.candidates) {
            if (!cand.execution) {
                complete = false;
                break;
            }
            pool.executions.push_back(*cand.execution);
            pool.adherences.push_back(cod_stats(cand.draft).adherence_rate);
        }
        if (!complete) {
            missing.push_back(row.task_id);
            continue;
        }
        pools.push_back(std::move(pool));
    }
    if (!missing.empty()) {
        std::string names;
        for (const auto& id : missing) names += " " + id;
        throw DataMissing("tasks lack execution results:" + names);
    }
    return pools;
}

int run_train(const CliConfig& cfg, const std::string& record_path,
              const std::string& synth_spec_path, const std::string& out_path,
              std::uint64_t seed, bool seed_set) {
    TrainConfig tc;
    if (cfg.raw.contains("train")) cfg.raw.at("train").get_to(tc);
    if (seed_set) tc.seed = seed;

    std::vector<LabeledPool> pools;
    if (!synth_spec_path.empty()) {
        SynthPoolSpec spec = load_json_file(synth_spec_path).get<SynthPoolSpec>();
        SynthPoolGenerator gen(spec);
        for (int t = 0; t < spec.n_tasks; ++t) pools.push_back(gen.labeled_pool(t));
    } else if (!record_path.empty()) {
        pools = pools_from_record(record_path);
    } else {
        throw ConfigInvalid("train needs --record or --synth");
    }

    TrainResult result = train(pools, tc);

    Checkpoint ckpt;
    ckpt.params = result.params;
    ckpt.opt = result.opt;
    ckpt.feature_stats = result.feature_stats;
    ckpt.normalize = tc.normalize;
    write_json_file(out_path, checkpoint_to_json(ckpt), /*indent=*/-1);

    fs::path report_path = out_path;
    report_path.replace_extension(".report.jsonl");
    std::ofstream rep(report_path);
    for (const auto& epoch : result.report.epochs) rep << json(epoch).dump() << "\n";
    fs::path summary_path = out_path;
    summary_path.replace_extension(".summary.json");
    write_json_file(summary_path,
                    json{{"epochs", tc.epochs},
                         {"final_mean_reward", result.report.final_mean_reward},
                         {"final_alpha", result.report.final_alpha},
                         {"n_pools", pools.size()}});

    std::cout << "trained " << tc.epochs << " epochs, final mean reward "
              << result.report.final_mean_reward << " -> " << out_path << "\n";
    return kExitOk;
}

// Runs the configured test runner for one candidate's code; exit 0 = pass.
ExecutionResult execute_with_runner(const std::string& runner, const std::string& code,
                                    const std::string& task_id) {
    const fs::path tmp = fs::temp_directory_path() /
                         ("multicod_" + task_id + "_" + std::to_string(std::rand()) + ".py");
    {
        std::ofstream out(tmp);
        out << code;
    }
    const std::string cmd = runner + " " + tmp.string();
    const int status = std::system(cmd.c_str());
    fs::remove(tmp);
    ExecutionResult result;
    result.passed = status == 0;
    result.tests_run = 1;
    if (!result.passed) result.failure_detail = "runner exited with status " + std::to_string(status);
    return result;
}

int run_select(const std::string& record_path, const std::string& checkpoint_path,
               const std::string& out_path, const std::string& runner) {
    Checkpoint ckpt = checkpoint_from_json(load_json_file(checkpoint_path));
    RunRecord input(record_path, "select");
    auto rows = input.load();

    RunRecord output(out_path.empty() ? record_path + ".selected.jsonl" : out_path, "select");
    if (fs::exists(output.rows_path())) fs::remove(output.rows_path());
    for (auto& row : rows) {
        select_for_row(row, ckpt);
        if (!runner.empty() && row.selected_index >= 0) {
            auto& cand = row.candidates[static_cast<std::size_t>(row.selected_index)];
            cand.execution = execute_with_runner(runner, cand.code, row.task_id);
        }
        output.append(row);
    }
    std::cout << "selected for " << rows.size() << " tasks -> " << output.rows_path().string()
              << "\n";
    return kExitOk;
}

int run_report(const std::string& record_path, const std::string& json_out) {
    RunRecord record(record_path, "report");
    const auto rows = record.load();
    const AggregateReport rep = aggregate_rows(rows);

    std::printf("tasks              %d\n", rep.n_tasks);
    std::printf("selected           %d\n", rep.n_selected);
    std::printf("executed           %d\n", rep.n_executed);
    std::printf("selection accuracy %.4f\n", rep.selection_accuracy);
    std::printf("mean reward        %.4f\n", rep.mean_reward);
    std::printf("tokens (best)      %lld\n", static_cast<long long>(rep.tokens_best));
    std::printf("tokens (all)       %lld\n", static_cast<long long>(rep.tokens_all));
    std::printf("seconds (best)     %.3f\n", rep.seconds_best);
    std::printf("seconds (parallel) %.3f\n", rep.seconds_parallel_wall);
    if (!json_out.empty()) write_json_file(json_out, json(rep));
    return kExitOk;
}

int run_features(const std::string& record_path) {
    RunRecord record(record_path, "features");
    json out = json::array();
    for (const auto& row : record.load()) {
        json entry = {{"task_id", row.task_id}, {"features", row.features}};
        json raw = json::array();
        for (const auto& cand : row.candidates) raw.push_back(cand.provenance.raw_features);
        entry["raw"] = raw;
        if (!row.features_scaled.empty()) entry["features_scaled"] = row.features_scaled;
        out.push_back(entry);
    }
    std::cout << out.dump(2) << "\n";
    return kExitOk;
}

int run_synth(const std::string& spec_path, const std::string& out_path, bool with_policies,
              std::uint64_t seed) {
    SynthPoolSpec spec = load_json_file(spec_path).get<SynthPoolSpec>();
    SynthPoolGenerator gen(spec);

    if (!out_path.empty()) {
        std::ofstream out(out_path);
        for (int t = 0; t < spec.n_tasks; ++t) {
            const LabeledPool pool = gen.labeled_pool(t);
            json row = {{"task_id", pool.task_id},
                        {"state", pool.state},
                        {"executions", pool.executions},
                        {"adherences", pool.adherences}};
            out << row.dump() << "\n";
        }
        std::cout << "wrote " << spec.n_tasks << " pools -> " << out_path << "\n";
    }

    if (with_policies) {
        std::vector<LabeledPool> pools;
        for (int t = 0; t < spec.n_tasks; ++t) pools.push_back(gen.labeled_pool(t));
        std::mt19937_64 rng(seed);
        json reports = json::array();
        std::cout << "policy,n_tasks,mean_reward,selection_accuracy,oracle_accuracy,regret\n";
        for (auto kind : {PolicyKind::random, PolicyKind::oracle, PolicyKind::shortest_code,
                          PolicyKind::best_adherence}) {
            const PolicyReport rep = run_policy(kind, pools, rng);
            reports.push_back(rep);
            std::printf("%s,%d,%.4f,%.4f,%.4f,%.4f\n", rep.policy.c_str(), rep.n_tasks,
                        rep.mean_reward, rep.selection_accuracy, rep.oracle_accuracy, rep.regret);
        }
        if (!out_path.empty()) {
            fs::path rp = out_path;
            rp.replace_extension(".policies.json");
            write_json_file(rp, reports);
        }
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-CoD: strategy-diverse candidate generation and learned selection"};
    app.require_subcommand(1);

    std::string config_path, run_id = "run", provider_name, checkpoint_path, out_path;
    std::string tasks_path, record_path, synth_spec_path, runner, json_out;
    std::uint64_t seed = 0;
    int k = 5;
    bool with_policies = false;

    auto* gen = app.add_subcommand("generate", "generate strategies, candidates, and features");
    gen->add_option("--config", config_path)->required();
    gen->add_option("--tasks", tasks_path)->required();
    gen->add_option("--out", out_path)->required();
    gen->add_option("--run-id", run_id);
    gen->add_option("--provider", provider_name);
    gen->add_option("--k", k);

    auto* tr = app.add_subcommand("train", "train the selector on records or synthetic pools");
    tr->add_option("--config", config_path);
    tr->add_option("--record", record_path);
    tr->add_option("--synth", synth_spec_path);
    tr->add_option("--out", out_path)->required();
    auto* seed_opt = tr->add_option("--seed", seed);

    auto* sel = app.add_subcommand("select", "apply a checkpoint to stored records");
    sel->add_option("--record", record_path)->required();
    sel->add_option("--checkpoint", checkpoint_path)->required();
    sel->add_option("--out", out_path);
    sel->add_option("--runner", runner);

    auto* rep = app.add_subcommand("report", "aggregate metrics over a record");
    rep->add_option("--record", record_path)->required();
    rep->add_option("--json", json_out);

    auto* feat = app.add_subcommand("features", "dump raw and scaled features");
    feat->add_option("--record", record_path)->required();

    auto* syn = app.add_subcommand("synth", "generate synthetic candidate pools");
    syn->add_option("--spec", synth_spec_path)->required();
    syn->add_option("--out", out_path);
    syn->add_flag("--policies", with_policies, "also run baseline policies");
    syn->add_option("--seed", seed);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitConfig;
    }

    try {
        CliConfig cfg;
        if (!config_path.empty()) cfg.raw = load_json_file(config_path);

        if (gen->parsed()) return run_generate(cfg, tasks_path, out_path, run_id, provider_name, k);
        if (tr->parsed()) {
            return run_train(cfg, record_path, synth_spec_path, out_path, seed,
                             seed_opt->count() > 0);
        }
        if (sel->parsed()) return run_select(record_path, checkpoint_path, out_path, runner);
        if (rep->parsed()) return run_report(record_path, json_out);
        if (feat->parsed()) return run_features(record_path);
        if (syn->parsed()) return run_synth(synth_spec_path, out_path, with_policies, seed);
    } catch (const ConfigInvalid& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const CheckpointMismatch& e) {
        std::cerr << "checkpoint error: " << e.what() << "\n";
        return kExitCheckpoint;
    } catch (const GatewayError& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitGateway;
    } catch (const MalformedStrategyJson& e) {
        std::cerr << "gateway error: " << e.what() << "\n";
        return kExitGateway;
    } catch (const DataMissing& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const json::exception& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitData;
    }
    return kExitOk;
}
