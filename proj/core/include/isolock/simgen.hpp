#pragma once

#include <filesystem>
#include <iosfwd>
#include <set>
#include <string>
#include <vector>

#include "isolock/analysis.hpp"
#include "isolock/types.hpp"

namespace isolock {

struct DistSpec {
    enum class Kind { Constant, Uniform, Exponential };
    Kind kind = Kind::Constant;
    double a = 0.0;  // constant value / uniform lo / exponential mean, in ns
    double b = 0.0;  // uniform hi

    static DistSpec constant(double ns) { return {Kind::Constant, ns, 0.0}; }
    static DistSpec uniform(double lo_ns, double hi_ns) { return {Kind::Uniform, lo_ns, hi_ns}; }
    static DistSpec exponential(double mean_ns) { return {Kind::Exponential, mean_ns, 0.0}; }
};

enum class SharingModel { Private, SharedGlobal, IncidentalHash };

struct LockModel {
    std::string name;
    SharingModel sharing = SharingModel::Private;
    int hash_buckets = 1;  // incidental only
    DistSpec hold_time_ns = DistSpec::constant(1000.0);
    LockKey key;            // synthetic function/file for subsystem attribution
    std::string primitive;  // defaults from key.lock_class when empty
    std::vector<double> reinit_times_s;  // re-initializations (generation splits)
};

struct LockUse {
    std::string model;
    int acquisitions_per_op = 1;
};

struct WorkloadProfile {
    std::string name;
    int ops_per_iter = 1;
    std::vector<LockUse> locks_per_op;
    DistSpec think_time_ns = DistSpec::constant(1000.0);
};

struct SimConfig {
    std::uint64_t seed = 0;
    double duration_s = 1.0;
    WorkloadProfile worker;
    WorkloadProfile trasher;
    int trasher_count = 0;
    // Virtual-time analogue of the ten-minute trasher cadence; desk runs
    // shrink it freely since the clock is simulated.
    double trasher_start_interval_s = 600.0;
    std::vector<LockModel> lock_models;
    // Per-workload resource id for incidental bucket hashing; defaults to
    // the workload index.
    std::vector<std::uint64_t> resource_ids;

    void validate() const;
    int workload_count() const { return 1 + trasher_count; }
    std::uint64_t resource_id(int workload_index) const;
};

SimConfig load_sim_config(std::istream& in);
SimConfig load_sim_config(const std::filesystem::path& path);

struct PerfInterval {
    int interval_index = 0;
    double t_start_s = 0.0;
    std::uint64_t worker_ops = 0;
    double mean_latency_ns = 0.0;
    int active_trashers = 0;
};

struct PerfTimeline {
    std::vector<PerfInterval> intervals;
    std::uint64_t total_worker_ops = 0;
};

struct SimResult {
    std::vector<WorkloadTrace> traces;  // index 0 = worker
    PerfTimeline timeline;
};

// Single-threaded discrete-event run; a pure function of the config.
// Every lock is a FIFO queue.
SimResult simulate(const SimConfig& config);

struct EmitResult {
    std::vector<std::filesystem::path> trace_files;
    std::vector<std::filesystem::path> stack_files;
    std::filesystem::path timeline_csv;
};

EmitResult emit_traces(const SimResult& result, const std::filesystem::path& out_dir);

struct PairSharing {
    std::string workload_a;
    std::string workload_b;
    std::set<LockKey> shared;
    std::set<LockKey> private_a;
    std::set<LockKey> private_b;
};

// Analytic expectation, straight from the sharing declarations: shared
// globals overlap when both workloads run in a common generation epoch,
// incidental buckets collide by resource-id hash, private locks never
// collide. One entry per unordered workload pair.
std::vector<PairSharing> ground_truth_sharing(const SimConfig& config);

// Maps events in emitted traces back to stable keys (bucket-suffixed
// names included) so instance-level reports can be compared against
// ground truth.
KeyOf key_resolver(const SimConfig& config);

std::string workload_label(int workload_index);

}  // namespace isolock
