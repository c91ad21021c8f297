#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "isolock/types.hpp"

namespace isolock {

struct SharingReport {
    std::string workload_a;
    std::string workload_b;
    std::uint32_t run_index = 0;
    std::set<LockInstance> shared_instances;
    std::set<LockInstance> private_a;
    std::set<LockInstance> private_b;
    // Per-run this is just |shared_instances|; multi-run summaries come
    // from average_shared_count.
    double shared_count_avg = 0.0;
    double cumulative_shared_rate = 0.0;  // acquisitions/second, both directions
};

struct LockRate {
    LockKey key;
    double rate = 0.0;  // acquisitions/second
    std::uint64_t acquire_count = 0;
    double duration_s = 0.0;
};

struct SubsystemRollup {
    std::string subsystem;
    double cumulative_rate = 0.0;
    std::set<LockKey> lock_keys;
};

struct IsolationScore {
    double p_shared = 0.0;  // in [0,1]
    std::map<std::string, double> per_subsystem;
};

using KeyOf = std::function<LockKey(const LockEvent&)>;

// Classifies instances acquired by both workloads as shared. Generations
// are computed against the merged init timeline of both traces, so a
// reused address split by a re-initialization is never reported shared.
SharingReport shared_private(const WorkloadTrace& a, const WorkloadTrace& b);

double average_shared_count(const std::vector<SharingReport>& reports);

std::vector<LockRate> lock_rates(const WorkloadTrace& trace, const KeyOf& key_of);

double cumulative_rate(const std::vector<LockRate>& rates,
                       const std::optional<std::set<LockKey>>& restrict_to = std::nullopt);

struct SubsystemOptions {
    // Header paths don't start with a subsystem directory; map them
    // explicitly. Keyed by first path component.
    std::map<std::string, std::string> overrides = {{"include", "kernel"}};
};

std::vector<SubsystemRollup> subsystem_rollup(const std::vector<LockRate>& rates,
                                              const SubsystemOptions& opts = {});

std::string subsystem_of(const std::string& file, const SubsystemOptions& opts = {});

// Directional: a's exposure to b.
IsolationScore isolation_score(const WorkloadTrace& a, const WorkloadTrace& b,
                               const KeyOf& key_of);

// Reporting convention: round half-up to 2 decimals at presentation only.
double round2(double v);

}  // namespace isolock
