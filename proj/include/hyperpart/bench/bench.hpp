// bench.hpp - experiment records, performance profiles, effectiveness tests, aggregation
#ifndef HYPERPART_BENCH_BENCH_HPP
#define HYPERPART_BENCH_BENCH_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "../io/hmetis.hpp"
#include "../pipeline/pipeline.hpp"
#include "../types.hpp"
#include "../util/random.hpp"

namespace hyperpart {

struct ExperimentRecord {
    std::string instance;
    std::int32_t k = 2;
    std::uint64_t seed = 0;
    std::string preset;
    int threads = 1;
    Weight objective = 0;
    double imbalance = 0.0;
    double time_seconds = 0.0;
    bool feasible = true;  // balanced within tolerance and inside the time limit
};

// A profile and aggregation instance is the (file, k) combination; different
// block counts on the same file are separate optimization problems.
inline std::string instance_key(const ExperimentRecord& r) {
    return r.instance + "|k=" + std::to_string(r.k);
}

inline constexpr const char* kRecordCsvHeader =
    "instance,k,seed,preset,threads,objective,imbalance,time_seconds,feasible";

inline void write_records_csv(std::span<const ExperimentRecord> records, std::ostream& out) {
    out << kRecordCsvHeader << '\n';
    for (const auto& r : records) {
        if (r.instance.find(',') != std::string::npos || r.preset.find(',') != std::string::npos)
            throw std::invalid_argument("instance and preset names must not contain commas");
        out << r.instance << ',' << r.k << ',' << r.seed << ',' << r.preset << ',' << r.threads
            << ',' << r.objective << ',' << std::setprecision(17) << r.imbalance << ','
            << r.time_seconds << ',' << (r.feasible ? 1 : 0) << '\n';
    }
}

inline std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(in, line)) throw ParseError(1, "missing csv header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kRecordCsvHeader)
        throw ParseError(line_no, std::string("csv header must be '") + kRecordCsvHeader + "'");
    std::vector<ExperimentRecord> records;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::istringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 9) throw ParseError(line_no, "expected 9 csv fields");
        try {
            ExperimentRecord r;
            r.instance = fields[0];
            r.k = static_cast<std::int32_t>(std::stol(fields[1]));
            r.seed = std::stoull(fields[2]);
            r.preset = fields[3];
            r.threads = std::stoi(fields[4]);
            r.objective = std::stoll(fields[5]);
            r.imbalance = std::stod(fields[6]);
            r.time_seconds = std::stod(fields[7]);
            r.feasible = std::stoi(fields[8]) != 0;
            records.push_back(std::move(r));
        } catch (const std::exception&) {
            throw ParseError(line_no, "malformed csv row");
        }
    }
    return records;
}

struct ProfilePoint {
    double tau = 1.0;
    double fraction = 0.0;
};

struct ProfileSeries {
    std::string preset;
    std::vector<ProfilePoint> points;
};

inline std::vector<double> default_profile_taus() {
    return {1.0, 1.01, 1.02, 1.05, 1.1, 1.2, 1.5, 2.0, 5.0, 10.0, 100.0};
}

// Fraction of instances on which each preset's quality is within a factor tau
// of the best preset, per sampled tau. Per (preset, instance) the quality is
// the mean objective over seeds; an instance with any infeasible run counts
// as infeasible for that preset and is never covered at any finite tau. Every
// preset must have at least one record per instance.
inline std::vector<ProfileSeries> performance_profile(
    std::span<const ExperimentRecord> records, std::vector<double> taus = default_profile_taus()) {
    struct Cell {
        double sum = 0.0;
        int count = 0;
        bool infeasible = false;
    };
    std::map<std::string, std::map<std::string, Cell>> by_preset;  // preset -> instance -> cell
    std::set<std::string> instances;
    for (const auto& r : records) {
        Cell& c = by_preset[r.preset][instance_key(r)];
        c.sum += static_cast<double>(r.objective);
        ++c.count;
        c.infeasible |= !r.feasible;
        instances.insert(instance_key(r));
    }
    if (by_preset.empty()) return {};
    for (const auto& [preset, cells] : by_preset)
        for (const auto& inst : instances)
            if (!cells.count(inst))
                throw std::invalid_argument("preset " + preset + " has no record for " + inst);

    std::map<std::string, double> best;  // instance -> best feasible mean
    for (const auto& [preset, cells] : by_preset)
        for (const auto& [inst, cell] : cells) {
            if (cell.infeasible) continue;
            const double mean = cell.sum / cell.count;
            auto it = best.find(inst);
            if (it == best.end() || mean < it->second) best[inst] = mean;
        }

    std::sort(taus.begin(), taus.end());
    std::vector<ProfileSeries> result;
    for (const auto& [preset, cells] : by_preset) {
        ProfileSeries series;
        series.preset = preset;
        for (const double tau : taus) {
            std::size_t covered = 0;
            for (const auto& [inst, cell] : cells) {
                if (cell.infeasible) continue;
                const auto it = best.find(inst);
                if (it == best.end()) continue;
                const double mean = cell.sum / cell.count;
                // Integer objectives are at least 1 apart; the slack only
                // absorbs floating-point noise in tau * best.
                if (mean <= tau * it->second + 1e-9 * std::max(1.0, it->second)) ++covered;
            }
            series.points.push_back(
                {tau, static_cast<double>(covered) / static_cast<double>(instances.size())});
        }
        result.push_back(std::move(series));
    }
    return result;
}

struct VirtualInstance {
    Weight a_objective = 0;
    Weight b_objective = 0;
    int a_runs = 0;
    int b_runs = 0;
};

// One virtual instance for an effectiveness comparison: sample one run per
// side, then give the faster side more sampled runs (without replacement)
// until its accumulated time reaches the slower side's; the run crossing the
// budget is accepted with probability (budget - accumulated) / its own time.
// Each side reports the minimum objective among its sampled runs; infeasible
// runs spend their time but can never supply the minimum.
inline VirtualInstance effectiveness_test_sample(std::span<const ExperimentRecord> a,
                                                 std::span<const ExperimentRecord> b, Rng& rng) {
    if (a.empty() || b.empty())
        throw std::invalid_argument("effectiveness sample needs runs on both sides");
    for (const auto& r : a)
        if (r.time_seconds < 0.0) throw std::invalid_argument("negative run time");
    for (const auto& r : b)
        if (r.time_seconds < 0.0) throw std::invalid_argument("negative run time");

    auto order = [&](std::size_t n) {
        std::vector<std::size_t> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        return idx;
    };
    const auto ia = order(a.size());
    const auto ib = order(b.size());

    auto quality = [](const ExperimentRecord& r) {
        return r.feasible ? r.objective : std::numeric_limits<Weight>::max();
    };

    VirtualInstance v;
    v.a_objective = quality(a[ia[0]]);
    v.b_objective = quality(b[ib[0]]);
    v.a_runs = 1;
    v.b_runs = 1;
    double sum_a = a[ia[0]].time_seconds;
    double sum_b = b[ib[0]].time_seconds;

    auto fill = [&](std::span<const ExperimentRecord> runs, const std::vector<std::size_t>& idx,
                    double& sum, double budget, Weight& best, int& count) {
        for (std::size_t next = 1; next < idx.size(); ++next) {
            const ExperimentRecord& r = runs[idx[next]];
            const double t = r.time_seconds;
            if (sum + t <= budget) {
                sum += t;
                best = std::min(best, quality(r));
                ++count;
                continue;
            }
            const double p = t > 0.0 ? (budget - sum) / t : 1.0;
            if (std::uniform_real_distribution<double>(0.0, 1.0)(rng) < p) {
                sum += t;
                best = std::min(best, quality(r));
                ++count;
            }
            break;
        }
    };
    if (sum_a < sum_b)
        fill(a, ia, sum_a, sum_b, v.a_objective, v.a_runs);
    else if (sum_b < sum_a)
        fill(b, ib, sum_b, sum_a, v.b_objective, v.b_runs);
    return v;
}

inline std::vector<VirtualInstance> effectiveness_samples(std::span<const ExperimentRecord> a,
                                                          std::span<const ExperimentRecord> b,
                                                          int count, Rng& rng) {
    std::vector<VirtualInstance> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) out.push_back(effectiveness_test_sample(a, b, rng));
    return out;
}

struct InstanceQuality {
    std::string preset;
    std::string instance;  // instance key, including the block count
    double mean_objective = 0.0;
    int runs = 0;
};

struct AggregateSummary {
    double geomean_time = 0.0;  // over all records; with a limit, timeouts contribute the limit
    std::vector<InstanceQuality> per_instance;  // sorted by (preset, instance)
};

inline AggregateSummary aggregate(std::span<const ExperimentRecord> records,
                                  double time_limit = 0.0) {
    AggregateSummary summary;
    if (records.empty()) return summary;
    double log_sum = 0.0;
    std::map<std::pair<std::string, std::string>, std::pair<double, int>> quality;
    for (const auto& r : records) {
        double t = r.time_seconds;
        if (time_limit > 0.0 && t > time_limit) t = time_limit;
        log_sum += std::log(std::max(t, 1e-12));
        auto& q = quality[{r.preset, instance_key(r)}];
        q.first += static_cast<double>(r.objective);
        ++q.second;
    }
    summary.geomean_time = std::exp(log_sum / static_cast<double>(records.size()));
    for (const auto& [key, q] : quality)
        summary.per_instance.push_back(
            {key.first, key.second, q.first / q.second, q.second});
    return summary;
}

struct BenchOptions {
    std::vector<std::string> instances;
    FileFormat format = FileFormat::kHmetis;
    std::vector<std::int32_t> ks;
    std::vector<std::uint64_t> seeds;
    std::vector<Preset> presets;
    double epsilon = 0.03;
    Objective objective = Objective::kKm1;
    int threads = 1;
    double time_limit = 0.0;  // 0: none
};

// Runs every (instance, preset, k, seed) combination sequentially and records
// one row each; a run whose balance is infeasible or that exceeds the time
// limit is recorded as infeasible rather than aborting the sweep.
inline std::vector<ExperimentRecord> run_benchmark(const BenchOptions& opt,
                                                   std::ostream* progress = nullptr) {
    std::vector<ExperimentRecord> records;
    const std::size_t total =
        opt.instances.size() * opt.ks.size() * opt.seeds.size() * opt.presets.size();
    std::size_t done = 0;
    for (const auto& path : opt.instances) {
        const Hypergraph h = load_hypergraph(path, opt.format);
        for (const Preset preset : opt.presets)
            for (const std::int32_t k : opt.ks)
                for (const std::uint64_t seed : opt.seeds) {
                    PipelineConfig cfg;
                    cfg.k = k;
                    cfg.epsilon = opt.epsilon;
                    cfg.seed = seed;
                    cfg.preset = preset;
                    cfg.objective = opt.objective;
                    cfg.threads = opt.threads;
                    cfg.time_limit_seconds = opt.time_limit;

                    ExperimentRecord rec;
                    rec.instance = path;
                    rec.k = k;
                    rec.seed = seed;
                    rec.preset = preset_name(preset);
                    rec.threads = opt.threads;
                    const auto t0 = std::chrono::steady_clock::now();
                    try {
                        const PartitionResult r = partition(h, cfg);
                        rec.objective = r.report.objective;
                        rec.imbalance = r.report.imbalance;
                        rec.feasible = r.report.balanced && !r.report.timed_out;
                    } catch (const InfeasibleBalanceError&) {
                        rec.feasible = false;
                    }
                    rec.time_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                            .count();
                    if (opt.time_limit > 0.0 && rec.time_seconds > opt.time_limit)
                        rec.feasible = false;
                    records.push_back(rec);
                    if (progress != nullptr)
                        *progress << '[' << ++done << '/' << total << "] " << path << " k=" << k
                                  << " seed=" << seed << " preset=" << rec.preset
                                  << (rec.feasible ? " objective=" : " infeasible objective=")
                                  << rec.objective << " time=" << std::fixed
                                  << std::setprecision(3) << rec.time_seconds << "s\n"
                                  << std::defaultfloat;
                }
    }
    return records;
}

}  // namespace hyperpart

#endif
