// hpart - hypergraph partitioning command line front end
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hyperpart/bench/bench.hpp"
#include "hyperpart/io/hmetis.hpp"
#include "hyperpart/pipeline/pipeline.hpp"
#include "json.hpp"

namespace {

using hyperpart::BlockId;
using hyperpart::ExperimentRecord;
using hyperpart::FileFormat;
using hyperpart::Hypergraph;
using hyperpart::PartitionResult;
using hyperpart::PipelineConfig;
using hyperpart::Preset;
using nlohmann::json;

struct CommonInput {
    std::string input;
    std::string format = "hmetis";
    Hypergraph load() const {
        return hyperpart::load_hypergraph(input, hyperpart::file_format_from_name(format));
    }
};

void add_format_option(CLI::App* cmd, CommonInput& in) {
    cmd->add_option("input", in.input, "hypergraph file")->required();
    cmd->add_option("--format", in.format, "input format: hmetis or metis")
        ->check(CLI::IsMember({"hmetis", "metis"}));
}

json report_to_json(const hyperpart::PartitionReport& rep) {
    json j;
    j["objective"] = rep.objective;
    j["cut"] = rep.cut;
    j["km1"] = rep.km1;
    j["soed"] = rep.soed;
    j["imbalance"] = rep.imbalance;
    j["balanced"] = rep.balanced;
    j["timed_out"] = rep.timed_out;
    j["levels"] = rep.levels;
    j["timings"] = {{"community", rep.timings.community},
                    {"coarsening", rep.timings.coarsening},
                    {"initial", rep.timings.initial},
                    {"refinement", rep.timings.refinement},
                    {"total", rep.timings.total}};
    json trace = json::array();
    for (const auto& level : rep.level_trace)
        trace.push_back({{"nodes", level.num_nodes}, {"objective", level.objective}});
    j["level_trace"] = trace;
    return j;
}

void print_report(const hyperpart::PartitionReport& rep) {
    std::cout << "objective   " << rep.objective << "\n"
              << "cut         " << rep.cut << "\n"
              << "km1         " << rep.km1 << "\n"
              << "soed        " << rep.soed << "\n"
              << "imbalance   " << rep.imbalance << "\n"
              << "balanced    " << (rep.balanced ? "yes" : "no") << "\n"
              << "levels      " << rep.levels << "\n"
              << "time        " << rep.timings.total << "s (community "
              << rep.timings.community << ", coarsening " << rep.timings.coarsening
              << ", initial " << rep.timings.initial << ", refinement "
              << rep.timings.refinement << ")\n";
    if (rep.timed_out) std::cout << "timed_out   yes\n";
}

std::vector<Preset> parse_presets(const std::vector<std::string>& names) {
    std::vector<Preset> presets;
    for (const auto& name : names) presets.push_back(hyperpart::preset_from_name(name));
    return presets;
}

// One path per line; blank lines and '%' comments are skipped.
std::vector<std::string> read_instance_list(const std::string& path) {
    std::ifstream in = hyperpart::open_input(path);
    std::vector<std::string> instances;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto i = line.find_first_not_of(" \t");
        if (i == std::string::npos || line[i] == '%') continue;
        instances.push_back(line.substr(i));
    }
    return instances;
}

std::vector<ExperimentRecord> load_records(const std::string& path) {
    std::ifstream in = hyperpart::open_input(path);
    return hyperpart::read_records_csv(in);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    return out;
}

int run_partition(const CommonInput& in, const PipelineConfig& cfg, const std::string& out_path,
                  const std::string& preset_name, bool as_json) {
    PipelineConfig resolved = cfg;
    resolved.preset = hyperpart::preset_from_name(preset_name);
    const Hypergraph h = in.load();
    const PartitionResult result = hyperpart::partition(h, resolved);
    if (!out_path.empty()) hyperpart::save_partition(result.partition, out_path);
    if (as_json) {
        json j = report_to_json(result.report);
        j["input"] = in.input;
        j["k"] = resolved.k;
        j["epsilon"] = resolved.epsilon;
        j["seed"] = resolved.seed;
        j["preset"] = preset_name;
        j["threads"] = resolved.threads;
        if (!out_path.empty()) j["partition_file"] = out_path;
        std::cout << j.dump(2) << "\n";
    } else {
        print_report(result.report);
    }
    return result.report.balanced ? 0 : 2;
}

int run_evaluate(const CommonInput& in, const std::string& part_path, std::int32_t k, double eps,
                 bool as_json) {
    const Hypergraph h = in.load();
    const std::vector<BlockId> part = hyperpart::load_partition(part_path, h.num_nodes());
    std::int32_t max_block = 0;
    for (BlockId b : part) max_block = std::max(max_block, b);
    if (k == 0) k = max_block + 1;
    if (max_block >= k)
        throw std::runtime_error("partition uses block " + std::to_string(max_block) +
                                 " but k is " + std::to_string(k));
    const auto rep = hyperpart::evaluate(h, part, k, eps);
    if (as_json) {
        json j;
        j["k"] = k;
        j["epsilon"] = eps;
        j["cut"] = rep.cut;
        j["km1"] = rep.km1;
        j["soed"] = rep.soed;
        j["imbalance"] = rep.imbalance;
        j["balanced"] = rep.balanced;
        std::cout << j.dump(2) << "\n";
    } else {
        std::cout << "k           " << k << "\n"
                  << "cut         " << rep.cut << "\n"
                  << "km1         " << rep.km1 << "\n"
                  << "soed        " << rep.soed << "\n"
                  << "imbalance   " << rep.imbalance << "\n"
                  << "balanced    " << (rep.balanced ? "yes" : "no") << "\n";
    }
    return rep.balanced ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multilevel hypergraph partitioner"};
    app.require_subcommand(1);

    // partition
    CommonInput part_in;
    PipelineConfig cfg;
    std::string part_preset = "default";
    std::string part_objective = "km1";
    std::string part_out;
    bool part_json = false;
    auto* partition_cmd = app.add_subcommand("partition", "partition a hypergraph");
    add_format_option(partition_cmd, part_in);
    partition_cmd->add_option("-k", cfg.k, "number of blocks")->required();
    partition_cmd->add_option("-e,--epsilon", cfg.epsilon, "imbalance tolerance");
    partition_cmd->add_option("--seed", cfg.seed, "random seed");
    partition_cmd->add_option("--preset", part_preset, "default, default-flows or deterministic")
        ->check(CLI::IsMember({"default", "default-flows", "deterministic"}));
    partition_cmd->add_option("--threads", cfg.threads, "worker threads");
    partition_cmd->add_option("--objective", part_objective, "reported metric: cut, km1 or soed")
        ->check(CLI::IsMember({"cut", "km1", "soed"}));
    partition_cmd->add_option("--contraction-limit", cfg.contraction_limit,
                              "coarsening stops at this many nodes (0: 160*k)");
    partition_cmd->add_option("--time-limit", cfg.time_limit_seconds,
                              "cooperative time limit in seconds (0: none)");
    partition_cmd->add_option("-o,--output", part_out, "partition output file");
    partition_cmd->add_flag("--json", part_json, "machine readable report");

    // evaluate
    CommonInput eval_in;
    std::string eval_part;
    std::int32_t eval_k = 0;
    double eval_eps = 0.03;
    bool eval_json = false;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate an existing partition");
    add_format_option(evaluate_cmd, eval_in);
    evaluate_cmd->add_option("-p,--partition", eval_part, "partition file")->required();
    evaluate_cmd->add_option("-k", eval_k, "number of blocks (0: infer from the file)");
    evaluate_cmd->add_option("-e,--epsilon", eval_eps, "imbalance tolerance");
    evaluate_cmd->add_flag("--json", eval_json, "machine readable report");

    // bench
    std::string bench_instances;
    hyperpart::BenchOptions bench;
    std::vector<std::string> bench_presets = {"default"};
    std::string bench_format = "hmetis";
    std::string bench_objective = "km1";
    std::string bench_out;
    std::string bench_manifest;
    auto* bench_cmd = app.add_subcommand("bench", "run a benchmark sweep");
    bench_cmd->add_option("--instances", bench_instances, "file listing one instance per line")
        ->required();
    bench_cmd->add_option("--format", bench_format, "instance format: hmetis or metis")
        ->check(CLI::IsMember({"hmetis", "metis"}));
    bench_cmd->add_option("-k", bench.ks, "block counts")->required()->delimiter(',');
    bench_cmd->add_option("--seeds", bench.seeds, "seeds")->required()->delimiter(',');
    bench_cmd->add_option("--presets", bench_presets, "presets to compare")->delimiter(',');
    bench_cmd->add_option("-e,--epsilon", bench.epsilon, "imbalance tolerance");
    bench_cmd->add_option("--threads", bench.threads, "worker threads per run");
    bench_cmd->add_option("--time-limit", bench.time_limit, "seconds per run (0: none)");
    bench_cmd->add_option("--objective", bench_objective, "recorded metric")
        ->check(CLI::IsMember({"cut", "km1", "soed"}));
    bench_cmd->add_option("-o,--output", bench_out, "results csv")->required();
    bench_cmd->add_option("--manifest", bench_manifest, "json run manifest");

    // profile
    std::string profile_results;
    std::vector<double> profile_taus;
    std::string profile_out;
    auto* profile_cmd =
        app.add_subcommand("profile", "performance profile from a results csv");
    profile_cmd->add_option("results", profile_results, "results csv")->required();
    profile_cmd->add_option("--taus", profile_taus, "quality ratios to sample")->delimiter(',');
    profile_cmd->add_option("-o,--output", profile_out, "output csv (default: stdout)");

    // effectiveness
    std::string eff_results;
    std::string eff_a, eff_b;
    int eff_samples = 10;
    std::uint64_t eff_seed = 0;
    std::string eff_out;
    auto* eff_cmd = app.add_subcommand(
        "effectiveness", "virtual time-matched instances comparing two presets");
    eff_cmd->add_option("results", eff_results, "results csv")->required();
    eff_cmd->add_option("-A", eff_a, "first preset name")->required();
    eff_cmd->add_option("-B", eff_b, "second preset name")->required();
    eff_cmd->add_option("--samples", eff_samples, "virtual instances per real instance");
    eff_cmd->add_option("--seed", eff_seed, "sampling seed");
    eff_cmd->add_option("-o,--output", eff_out, "output csv (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (partition_cmd->parsed()) {
            cfg.objective = hyperpart::objective_from_name(part_objective);
            return run_partition(part_in, cfg, part_out, part_preset, part_json);
        }
        if (evaluate_cmd->parsed())
            return run_evaluate(eval_in, eval_part, eval_k, eval_eps, eval_json);
        if (bench_cmd->parsed()) {
            bench.instances = read_instance_list(bench_instances);
            bench.format = hyperpart::file_format_from_name(bench_format);
            bench.presets = parse_presets(bench_presets);
            bench.objective = hyperpart::objective_from_name(bench_objective);
            const auto records = hyperpart::run_benchmark(bench, &std::cout);
            auto out = open_output(bench_out);
            hyperpart::write_records_csv(records, out);
            if (!bench_manifest.empty()) {
                json manifest;
                manifest["instances"] = bench.instances;
                manifest["format"] = bench_format;
                manifest["ks"] = bench.ks;
                manifest["seeds"] = bench.seeds;
                manifest["presets"] = bench_presets;
                manifest["epsilon"] = bench.epsilon;
                manifest["threads"] = bench.threads;
                manifest["time_limit"] = bench.time_limit;
                manifest["objective"] = bench_objective;
                manifest["records"] = records.size();
                manifest["results_csv"] = bench_out;
                auto mout = open_output(bench_manifest);
                mout << manifest.dump(2) << "\n";
            }
            std::cout << "wrote " << records.size() << " records to " << bench_out << "\n";
            return 0;
        }
        if (profile_cmd->parsed()) {
            const auto records = load_records(profile_results);
            const auto profile = profile_taus.empty()
                                     ? hyperpart::performance_profile(records)
                                     : hyperpart::performance_profile(records, profile_taus);
            std::ofstream file;
            if (!profile_out.empty()) file = open_output(profile_out);
            std::ostream& out = profile_out.empty() ? std::cout : file;
            out << "preset,tau,fraction\n";
            for (const auto& series : profile)
                for (const auto& p : series.points)
                    out << series.preset << ',' << p.tau << ',' << p.fraction << '\n';
            return 0;
        }
        if (eff_cmd->parsed()) {
            const auto records = load_records(eff_results);
            std::map<std::string, std::vector<ExperimentRecord>> by_instance_a, by_instance_b;
            for (const auto& r : records) {
                if (r.preset == eff_a) by_instance_a[hyperpart::instance_key(r)].push_back(r);
                if (r.preset == eff_b) by_instance_b[hyperpart::instance_key(r)].push_back(r);
            }
            std::ofstream file;
            if (!eff_out.empty()) file = open_output(eff_out);
            std::ostream& out = eff_out.empty() ? std::cout : file;
            out << "instance,sample,a_objective,b_objective,a_runs,b_runs\n";
            hyperpart::Rng rng(hyperpart::seed_with(eff_seed, 0xeffe));
            for (const auto& [inst, runs_a] : by_instance_a) {
                const auto it = by_instance_b.find(inst);
                if (it == by_instance_b.end())
                    throw std::runtime_error("preset " + eff_b + " has no runs for " + inst);
                const auto samples =
                    hyperpart::effectiveness_samples(runs_a, it->second, eff_samples, rng);
                for (std::size_t s = 0; s < samples.size(); ++s)
                    out << inst << ',' << s << ',' << samples[s].a_objective << ','
                        << samples[s].b_objective << ',' << samples[s].a_runs << ','
                        << samples[s].b_runs << '\n';
            }
            return 0;
        }
    } catch (const hyperpart::InfeasibleBalanceError& e) {
        std::cerr << "error: balance infeasible: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
