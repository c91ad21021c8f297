#include "isolock/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "isolock/errors.hpp"

namespace isolock {

namespace {

std::vector<InitRecord> merged_init_timeline(const WorkloadTrace& a, const WorkloadTrace& b) {
    std::vector<InitRecord> merged;
    merged.reserve(a.init_records.size() + b.init_records.size());
    merged.insert(merged.end(), a.init_records.begin(), a.init_records.end());
    merged.insert(merged.end(), b.init_records.begin(), b.init_records.end());
    std::sort(merged.begin(), merged.end(), [](const InitRecord& x, const InitRecord& y) {
        return std::tie(x.timestamp_ns, x.lock_addr) < std::tie(y.timestamp_ns, y.lock_addr);
    });
    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
    return merged;
}

std::set<LockInstance> acquired_instances(const WorkloadTrace& t,
                                          std::span<const InitRecord> inits) {
    std::set<LockInstance> out;
    for (const auto& ev : t.events) out.insert(instance_of(ev, inits));
    return out;
}

}  // namespace

SharingReport shared_private(const WorkloadTrace& a, const WorkloadTrace& b) {
    if (a.run_index != b.run_index)
        throw SessionMismatch("run_index " + std::to_string(a.run_index) + " vs " +
                              std::to_string(b.run_index));

    const auto inits = merged_init_timeline(a, b);
    const auto set_a = acquired_instances(a, inits);
    const auto set_b = acquired_instances(b, inits);

    SharingReport report;
    report.workload_a = a.workload_id;
    report.workload_b = b.workload_id;
    report.run_index = a.run_index;
    std::set_intersection(
        set_a.begin(), set_a.end(), set_b.begin(), set_b.end(),
        std::inserter(report.shared_instances, report.shared_instances.end()));
    std::set_difference(set_a.begin(), set_a.end(), report.shared_instances.begin(),
                        report.shared_instances.end(),
                        std::inserter(report.private_a, report.private_a.end()));
    std::set_difference(set_b.begin(), set_b.end(), report.shared_instances.begin(),
                        report.shared_instances.end(),
                        std::inserter(report.private_b, report.private_b.end()));
    report.shared_count_avg = static_cast<double>(report.shared_instances.size());

    double rate = 0.0;
    for (const auto* t : {&a, &b}) {
        for (const auto& ev : t->events) {
            if (report.shared_instances.count(instance_of(ev, inits)))
                rate += static_cast<double>(ev.acquire_count) / t->duration_s;
        }
    }
    report.cumulative_shared_rate = rate;
    return report;
}

double average_shared_count(const std::vector<SharingReport>& reports) {
    if (reports.empty()) throw EmptyInput("no sharing reports");
    double sum = 0.0;
    for (const auto& r : reports) sum += static_cast<double>(r.shared_instances.size());
    return sum / static_cast<double>(reports.size());
}

std::vector<LockRate> lock_rates(const WorkloadTrace& trace, const KeyOf& key_of) {
    if (trace.duration_s <= 0.0) throw InvalidMeta("duration_s must be > 0");
    std::map<LockKey, std::uint64_t> counts;
    for (const auto& ev : trace.events) counts[key_of(ev)] += ev.acquire_count;
    std::vector<LockRate> out;
    out.reserve(counts.size());
    for (const auto& [key, count] : counts) {
        LockRate r;
        r.key = key;
        r.acquire_count = count;
        r.duration_s = trace.duration_s;
        r.rate = static_cast<double>(count) / trace.duration_s;
        out.push_back(std::move(r));
    }
    return out;
}

double cumulative_rate(const std::vector<LockRate>& rates,
                       const std::optional<std::set<LockKey>>& restrict_to) {
    double sum = 0.0;
    for (const auto& r : rates) {
        if (restrict_to && !restrict_to->count(r.key)) continue;
        sum += r.rate;
    }
    return sum;
}

std::string subsystem_of(const std::string& file, const SubsystemOptions& opts) {
    const auto slash = file.find('/');
    const std::string first = slash == std::string::npos ? file : file.substr(0, slash);
    if (first.empty()) throw UnmappablePath(file);
    auto it = opts.overrides.find(first);
    if (it != opts.overrides.end()) return it->second;
    return first;
}

std::vector<SubsystemRollup> subsystem_rollup(const std::vector<LockRate>& rates,
                                              const SubsystemOptions& opts) {
    std::map<std::string, SubsystemRollup> by_subsystem;
    for (const auto& r : rates) {
        const auto subsystem = subsystem_of(r.key.file, opts);
        auto& rollup = by_subsystem[subsystem];
        rollup.subsystem = subsystem;
        rollup.cumulative_rate += r.rate;
        rollup.lock_keys.insert(r.key);
    }
    std::vector<SubsystemRollup> out;
    out.reserve(by_subsystem.size());
    for (auto& [_, rollup] : by_subsystem) out.push_back(std::move(rollup));
    return out;
}

IsolationScore isolation_score(const WorkloadTrace& a, const WorkloadTrace& b,
                               const KeyOf& key_of) {
    std::uint64_t total = 0;
    for (const auto& ev : a.events) total += ev.acquire_count;
    if (total == 0) throw EmptyTrace("workload " + a.workload_id + " has no acquisitions");

    const auto report = shared_private(a, b);
    const auto inits = merged_init_timeline(a, b);

    IsolationScore score;
    std::uint64_t shared_acquisitions = 0;
    for (const auto& ev : a.events) {
        if (!report.shared_instances.count(instance_of(ev, inits))) continue;
        shared_acquisitions += ev.acquire_count;
        score.per_subsystem[subsystem_of(key_of(ev).file)] +=
            static_cast<double>(ev.acquire_count) / static_cast<double>(total);
    }
    score.p_shared = static_cast<double>(shared_acquisitions) / static_cast<double>(total);
    return score;
}

double round2(double v) { return std::floor(v * 100.0 + 0.5) / 100.0; }

}  // namespace isolock
