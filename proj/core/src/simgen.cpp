#include "isolock/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <memory>
#include <queue>
#include <random>

#include <json.hpp>

#include "isolock/errors.hpp"
#include "isolock/ingest.hpp"

namespace isolock {

namespace {

constexpr std::uint64_t kAddrModelStride = 0x100000;
constexpr std::uint64_t kAddrInstanceStride = 0x1000;
constexpr std::uint64_t kAddrBase = 0xffff900000000000ull;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Portable sampling on top of mt19937_64; std::*_distribution is not
// bit-stable across standard libraries.
struct Rng {
    std::mt19937_64 gen;
    explicit Rng(std::uint64_t seed) : gen(seed) {}
    double unit() { return static_cast<double>(gen() >> 11) * 0x1.0p-53; }
};

double sample_ns(const DistSpec& d, Rng& rng) {
    switch (d.kind) {
        case DistSpec::Kind::Constant: return d.a;
        case DistSpec::Kind::Uniform: return d.a + rng.unit() * (d.b - d.a);
        case DistSpec::Kind::Exponential: return -d.a * std::log1p(-rng.unit());
    }
    return 0.0;
}

std::string default_primitive(LockClass c) {
    switch (c) {
        case LockClass::Spinlock: return "_raw_spin_lock";
        case LockClass::Rwlock: return "_raw_write_lock";
        case LockClass::Mutex: return "mutex_lock";
        case LockClass::Semaphore: return "down_write";
    }
    return "_raw_spin_lock";
}

std::string bucket_name(const std::string& base, int bucket) {
    return base + "[" + std::to_string(bucket) + "]";
}

void validate_dist(const DistSpec& d, const std::string& what) {
    if (d.a < 0.0 || d.b < 0.0) throw ConfigError(what + ": negative duration");
    if (d.kind == DistSpec::Kind::Uniform && d.b < d.a)
        throw ConfigError(what + ": uniform hi < lo");
}

}  // namespace

std::uint64_t SimConfig::resource_id(int workload_index) const {
    if (static_cast<std::size_t>(workload_index) < resource_ids.size())
        return resource_ids[workload_index];
    return static_cast<std::uint64_t>(workload_index);
}

void SimConfig::validate() const {
    if (duration_s <= 0.0) throw ConfigError("duration_s must be > 0");
    if (trasher_count < 0) throw ConfigError("trasher_count must be >= 0");
    if (trasher_start_interval_s <= 0.0)
        throw ConfigError("trasher_start_interval_s must be > 0");
    if (lock_models.empty()) throw ConfigError("no lock models declared");

    std::set<std::string> names;
    for (const auto& model : lock_models) {
        if (model.name.empty()) throw ConfigError("lock model with empty name");
        if (!names.insert(model.name).second)
            throw ConfigError("duplicate lock model \"" + model.name + "\"");
        if (model.hash_buckets < 1)
            throw ConfigError("lock model \"" + model.name + "\": hash_buckets must be >= 1");
        validate_dist(model.hold_time_ns, "lock model \"" + model.name + "\" hold time");
        if (!model.primitive.empty() &&
            classify_primitive(model.primitive) != model.key.lock_class)
            throw ConfigError("lock model \"" + model.name +
                              "\": primitive does not match lock class");
        for (double t : model.reinit_times_s)
            if (t < 0.0)
                throw ConfigError("lock model \"" + model.name + "\": negative reinit time");
    }

    auto check_profile = [&](const WorkloadProfile& p, const char* role) {
        if (p.locks_per_op.empty())
            throw ConfigError(std::string(role) + " profile has empty locks_per_op");
        if (p.ops_per_iter < 1)
            throw ConfigError(std::string(role) + " profile: ops_per_iter must be >= 1");
        validate_dist(p.think_time_ns, std::string(role) + " think time");
        for (const auto& use : p.locks_per_op) {
            if (!names.count(use.model))
                throw ConfigError(std::string(role) + " profile references unknown lock model \"" +
                                  use.model + "\"");
            if (use.acquisitions_per_op < 1)
                throw ConfigError(std::string(role) + " profile: acquisitions must be >= 1");
        }
    };
    check_profile(worker, "worker");
    if (trasher_count > 0) check_profile(trasher, "trasher");
}

std::string workload_label(int workload_index) {
    return workload_index == 0 ? "worker" : "trasher" + std::to_string(workload_index);
}

namespace {

struct SimLock {
    std::uint64_t addr = 0;
    int model_index = 0;
    std::string lock_name;
    bool busy = false;
    std::deque<int> waiters;
};

struct AggKey {
    std::uint64_t addr;
    std::uint64_t stack_id;
    std::uint32_t epoch;
    auto operator<=>(const AggKey&) const = default;
};

struct Agg {
    std::uint64_t count = 0;
    std::uint64_t hold_ns = 0;
    std::uint64_t first_seen_ns = ~0ull;
    int model_index = 0;
};

struct WState {
    const WorkloadProfile* profile = nullptr;
    Rng rng;
    int iter_op = 0;
    std::size_t use_idx = 0;
    int rep = 0;
    std::uint64_t op_start = 0;
    bool need_op_start = true;
    bool done = false;
    std::map<AggKey, Agg> acquisitions;

    explicit WState(std::uint64_t seed) : rng(seed) {}
};

enum class EvKind { Resume, Release };

struct Ev {
    std::uint64_t t;
    std::uint64_t seq;
    EvKind kind;
    int workload;
    int lock = -1;
};

struct EvLater {
    bool operator()(const Ev& a, const Ev& b) const {
        return std::tie(a.t, a.seq) > std::tie(b.t, b.seq);
    }
};

class Simulation {
public:
    explicit Simulation(const SimConfig& config) : cfg_(config) {
        cfg_.validate();
        duration_ns_ = to_ns(cfg_.duration_s);
        interval_ns_ = to_ns(cfg_.trasher_start_interval_s);
        build_locks();
        for (int w = 0; w < cfg_.workload_count(); ++w) {
            states_.emplace_back(splitmix64(cfg_.seed ^ splitmix64(w)));
            states_.back().profile = w == 0 ? &cfg_.worker : &cfg_.trasher;
        }
    }

    SimResult run() {
        for (int w = 0; w < cfg_.workload_count(); ++w)
            push({start_ns(w), seq_++, EvKind::Resume, w});
        while (!heap_.empty()) {
            Ev ev = heap_.top();
            heap_.pop();
            if (ev.kind == EvKind::Resume) {
                step(ev.workload, ev.t);
            } else {
                release(ev.lock, ev.workload, ev.t);
            }
        }
        return collect();
    }

private:
    static std::uint64_t to_ns(double s) {
        return static_cast<std::uint64_t>(std::llround(s * 1e9));
    }

    std::uint64_t start_ns(int w) const {
        return w == 0 ? 0 : static_cast<std::uint64_t>(w) * interval_ns_;
    }

    void push(Ev ev) { heap_.push(ev); }

    void build_locks() {
        model_primitive_.resize(cfg_.lock_models.size());
        model_reinit_ns_.resize(cfg_.lock_models.size());
        lock_for_.assign(cfg_.lock_models.size(),
                         std::vector<int>(cfg_.workload_count(), -1));
        for (std::size_t m = 0; m < cfg_.lock_models.size(); ++m) {
            const LockModel& model = cfg_.lock_models[m];
            model_primitive_[m] = model.primitive.empty()
                                      ? default_primitive(model.key.lock_class)
                                      : model.primitive;
            for (double t : model.reinit_times_s) model_reinit_ns_[m].push_back(to_ns(t));
            std::sort(model_reinit_ns_[m].begin(), model_reinit_ns_[m].end());

            const std::uint64_t base = kAddrBase + m * kAddrModelStride;
            auto make_lock = [&](std::uint64_t addr, const std::string& name) {
                locks_.push_back({addr, static_cast<int>(m), name});
                return static_cast<int>(locks_.size() - 1);
            };
            switch (model.sharing) {
                case SharingModel::SharedGlobal: {
                    const int idx = make_lock(base, model.name);
                    for (int w = 0; w < cfg_.workload_count(); ++w) lock_for_[m][w] = idx;
                    break;
                }
                case SharingModel::IncidentalHash: {
                    std::vector<int> by_bucket(model.hash_buckets);
                    for (int b = 0; b < model.hash_buckets; ++b)
                        by_bucket[b] = make_lock(base + (b + 1) * kAddrInstanceStride,
                                                 bucket_name(model.name, b));
                    for (int w = 0; w < cfg_.workload_count(); ++w) {
                        const int b = static_cast<int>(cfg_.resource_id(w) %
                                                       model.hash_buckets);
                        lock_for_[m][w] = by_bucket[b];
                    }
                    break;
                }
                case SharingModel::Private: {
                    for (int w = 0; w < cfg_.workload_count(); ++w)
                        lock_for_[m][w] =
                            make_lock(base + (w + 1) * kAddrInstanceStride, model.name);
                    break;
                }
            }
        }
        model_index_by_name_.clear();
        for (std::size_t m = 0; m < cfg_.lock_models.size(); ++m)
            model_index_by_name_[cfg_.lock_models[m].name] = static_cast<int>(m);
    }

    std::uint32_t epoch_of(int model_index, std::uint64_t t) const {
        const auto& reinits = model_reinit_ns_[model_index];
        return static_cast<std::uint32_t>(
            std::upper_bound(reinits.begin(), reinits.end(), t) - reinits.begin());
    }

    void record_acquisition(int w, SimLock& lock, std::uint64_t t, std::uint64_t hold) {
        const auto stack_id = static_cast<std::uint64_t>(lock.model_index + 1);
        AggKey key{lock.addr, stack_id, epoch_of(lock.model_index, t)};
        Agg& agg = states_[w].acquisitions[key];
        agg.count += 1;
        agg.hold_ns += hold;
        agg.first_seen_ns = std::min(agg.first_seen_ns, t);
        agg.model_index = lock.model_index;
    }

    void grant(int w, int lock_idx, std::uint64_t t) {
        SimLock& lock = locks_[lock_idx];
        lock.busy = true;
        const auto hold = static_cast<std::uint64_t>(std::llround(sample_ns(
            cfg_.lock_models[lock.model_index].hold_time_ns, states_[w].rng)));
        record_acquisition(w, lock, t, hold);
        push({t + hold, seq_++, EvKind::Release, w, lock_idx});
    }

    // Next pending acquisition for w, starting a new op if needed.
    void step(int w, std::uint64_t t) {
        WState& st = states_[w];
        if (st.done) return;
        if (t >= duration_ns_) {
            st.done = true;
            return;
        }
        if (st.need_op_start) {
            st.op_start = t;
            st.need_op_start = false;
        }
        const LockUse& use = st.profile->locks_per_op[st.use_idx];
        const int lock_idx = lock_for_[model_index_by_name_.at(use.model)][w];
        SimLock& lock = locks_[lock_idx];
        if (lock.busy) {
            lock.waiters.push_back(w);  // FIFO; granted on release
        } else {
            grant(w, lock_idx, t);
        }
    }

    void release(int lock_idx, int w, std::uint64_t t) {
        SimLock& lock = locks_[lock_idx];
        if (!lock.waiters.empty()) {
            const int next = lock.waiters.front();
            lock.waiters.pop_front();
            grant(next, lock_idx, t);
        } else {
            lock.busy = false;
        }
        after_acquisition(w, t);
    }

    void after_acquisition(int w, std::uint64_t t) {
        WState& st = states_[w];
        const LockUse& use = st.profile->locks_per_op[st.use_idx];
        if (++st.rep < use.acquisitions_per_op) {
            step(w, t);
            return;
        }
        st.rep = 0;
        if (++st.use_idx < st.profile->locks_per_op.size()) {
            step(w, t);
            return;
        }
        st.use_idx = 0;
        complete_op(w, t);
    }

    void complete_op(int w, std::uint64_t t) {
        WState& st = states_[w];
        if (w == 0) worker_ops_.push_back({t, t - st.op_start});
        if (++st.iter_op < st.profile->ops_per_iter) {
            st.op_start = t;
            step(w, t);
            return;
        }
        st.iter_op = 0;
        st.need_op_start = true;
        const auto think = static_cast<std::uint64_t>(
            std::llround(sample_ns(st.profile->think_time_ns, st.rng)));
        push({t + think, seq_++, EvKind::Resume, w});
    }

    SimResult collect() {
        SimResult result;

        std::vector<InitRecord> inits;
        for (std::size_t m = 0; m < cfg_.lock_models.size(); ++m) {
            for (const auto& lock : locks_) {
                if (lock.model_index != static_cast<int>(m)) continue;
                for (std::uint64_t t : model_reinit_ns_[m]) inits.push_back({lock.addr, t});
            }
        }
        std::sort(inits.begin(), inits.end(), [](const InitRecord& a, const InitRecord& b) {
            return std::tie(a.timestamp_ns, a.lock_addr) < std::tie(b.timestamp_ns, b.lock_addr);
        });

        std::map<std::uint64_t, std::string> name_by_addr;
        for (const auto& lock : locks_) name_by_addr[lock.addr] = lock.lock_name;

        for (int w = 0; w < cfg_.workload_count(); ++w) {
            WorkloadTrace trace;
            trace.workload_id = workload_label(w);
            trace.platform = Platform::Synthetic;
            trace.run_index = 0;
            trace.duration_s = cfg_.duration_s;
            trace.init_records = inits;
            std::set<int> used_models;
            for (const auto& [key, agg] : states_[w].acquisitions) {
                const LockModel& model = cfg_.lock_models[agg.model_index];
                LockEvent ev;
                ev.pid = 1000 + w;
                ev.tid = 1000 + w;
                ev.lock_addr = key.addr;
                ev.lock_name = name_by_addr.at(key.addr);
                ev.lock_class = model.key.lock_class;
                ev.primitive = model_primitive_[agg.model_index];
                ev.stack_id = key.stack_id;
                ev.acquire_count = agg.count;
                ev.total_hold_ns = agg.hold_ns;
                ev.first_seen_ns = agg.first_seen_ns;
                ev.process_name = trace.workload_id;
                trace.events.push_back(std::move(ev));
                used_models.insert(agg.model_index);
            }
            std::sort(trace.events.begin(), trace.events.end(),
                      [](const LockEvent& a, const LockEvent& b) {
                          return std::tie(a.first_seen_ns, a.lock_addr, a.stack_id) <
                                 std::tie(b.first_seen_ns, b.lock_addr, b.stack_id);
                      });
            for (int m : used_models) {
                StackTrace st;
                st.stack_id = static_cast<std::uint64_t>(m + 1);
                st.frames = {model_primitive_[m], cfg_.lock_models[m].key.function,
                             states_[w].profile->name + "_loop"};
                trace.stacks.emplace(st.stack_id, std::move(st));
            }
            result.traces.push_back(std::move(trace));
        }

        result.timeline = build_timeline();
        return result;
    }

    PerfTimeline build_timeline() const {
        PerfTimeline timeline;
        const int n_intervals = std::max<int>(
            1, static_cast<int>((duration_ns_ + interval_ns_ - 1) / interval_ns_));
        std::vector<std::uint64_t> ops(n_intervals, 0);
        std::vector<double> latency_sum(n_intervals, 0.0);
        for (const auto& [t, latency] : worker_ops_) {
            const int idx = std::min<int>(n_intervals - 1,
                                          static_cast<int>(t / interval_ns_));
            ops[idx] += 1;
            latency_sum[idx] += static_cast<double>(latency);
            timeline.total_worker_ops += 1;
        }
        for (int i = 0; i < n_intervals; ++i) {
            PerfInterval iv;
            iv.interval_index = i;
            iv.t_start_s = static_cast<double>(i) * cfg_.trasher_start_interval_s;
            iv.worker_ops = ops[i];
            iv.mean_latency_ns = ops[i] ? latency_sum[i] / static_cast<double>(ops[i]) : 0.0;
            iv.active_trashers = std::min(cfg_.trasher_count, i);
            timeline.intervals.push_back(iv);
        }
        return timeline;
    }

    SimConfig cfg_;
    std::uint64_t duration_ns_ = 0;
    std::uint64_t interval_ns_ = 0;
    std::uint64_t seq_ = 0;
    std::vector<SimLock> locks_;
    std::vector<std::vector<int>> lock_for_;  // [model][workload] -> lock index
    std::vector<std::string> model_primitive_;
    std::vector<std::vector<std::uint64_t>> model_reinit_ns_;
    std::map<std::string, int> model_index_by_name_;
    std::vector<WState> states_;
    std::vector<std::pair<std::uint64_t, std::uint64_t>> worker_ops_;  // (end, latency)
    std::priority_queue<Ev, std::vector<Ev>, EvLater> heap_;
};

}  // namespace

SimResult simulate(const SimConfig& config) { return Simulation(config).run(); }

EmitResult emit_traces(const SimResult& result, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    EmitResult out;
    for (const auto& trace : result.traces) {
        const auto trace_path = out_dir / (trace.workload_id + ".trace.jsonl");
        const auto stack_path = out_dir / (trace.workload_id + ".stacks.tsv");
        {
            std::ofstream f(trace_path);
            if (!f) throw IoError("cannot write " + trace_path.string());
            write_trace(f, trace.events, trace.init_records);
            if (!f.good()) throw IoError("write failed: " + trace_path.string());
        }
        {
            std::ofstream f(stack_path);
            if (!f) throw IoError("cannot write " + stack_path.string());
            write_stacks(f, trace.stacks);
            if (!f.good()) throw IoError("write failed: " + stack_path.string());
        }
        out.trace_files.push_back(trace_path);
        out.stack_files.push_back(stack_path);
    }

    out.timeline_csv = out_dir / "timeline.csv";
    std::ofstream f(out.timeline_csv);
    if (!f) throw IoError("cannot write " + out.timeline_csv.string());
    f << "interval_index,t_start_s,worker_ops,mean_latency_ns,active_trashers\n";
    char buf[128];
    for (const auto& iv : result.timeline.intervals) {
        std::snprintf(buf, sizeof(buf), "%d,%.6f,%llu,%.3f,%d\n", iv.interval_index,
                      iv.t_start_s, static_cast<unsigned long long>(iv.worker_ops),
                      iv.mean_latency_ns, iv.active_trashers);
        f << buf;
    }
    if (!f.good()) throw IoError("write failed: " + out.timeline_csv.string());
    return out;
}

namespace {

LockKey model_key(const LockModel& model, const std::string& name) {
    LockKey key = model.key;
    key.lock_name = name;
    return key;
}

// Generation epochs of a model that a workload's active window overlaps.
std::set<std::uint32_t> active_epochs(const SimConfig& cfg, const LockModel& model,
                                      int workload) {
    const double start =
        workload == 0 ? 0.0 : workload * cfg.trasher_start_interval_s;
    const double end = cfg.duration_s;
    std::set<std::uint32_t> epochs;
    if (start >= end) return epochs;
    std::vector<double> bounds{0.0};
    for (double t : model.reinit_times_s) bounds.push_back(t);
    std::sort(bounds.begin(), bounds.end());
    bounds.push_back(end);
    for (std::size_t e = 0; e + 1 < bounds.size(); ++e) {
        if (std::max(start, bounds[e]) < std::min(end, bounds[e + 1]))
            epochs.insert(static_cast<std::uint32_t>(e));
    }
    return epochs;
}

}  // namespace

std::vector<PairSharing> ground_truth_sharing(const SimConfig& config) {
    config.validate();
    const int n = config.workload_count();

    auto uses_model = [&](int w, const std::string& name) {
        const WorkloadProfile& p = w == 0 ? config.worker : config.trasher;
        for (const auto& use : p.locks_per_op)
            if (use.model == name) return true;
        return false;
    };

    std::vector<PairSharing> out;
    for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
            PairSharing pair;
            pair.workload_a = workload_label(i);
            pair.workload_b = workload_label(j);
            for (const auto& model : config.lock_models) {
                const bool used_i = uses_model(i, model.name);
                const bool used_j = uses_model(j, model.name);
                if (!used_i && !used_j) continue;

                auto name_for = [&](int w) {
                    if (model.sharing != SharingModel::IncidentalHash) return model.name;
                    return bucket_name(model.name, static_cast<int>(config.resource_id(w) %
                                                                    model.hash_buckets));
                };
                if (used_i && !used_j) {
                    if (!active_epochs(config, model, i).empty())
                        pair.private_a.insert(model_key(model, name_for(i)));
                    continue;
                }
                if (used_j && !used_i) {
                    if (!active_epochs(config, model, j).empty())
                        pair.private_b.insert(model_key(model, name_for(j)));
                    continue;
                }

                const auto epochs_i = active_epochs(config, model, i);
                const auto epochs_j = active_epochs(config, model, j);
                const bool collide =
                    model.sharing == SharingModel::SharedGlobal ||
                    (model.sharing == SharingModel::IncidentalHash &&
                     name_for(i) == name_for(j));
                if (model.sharing == SharingModel::Private || !collide) {
                    if (!epochs_i.empty()) pair.private_a.insert(model_key(model, name_for(i)));
                    if (!epochs_j.empty()) pair.private_b.insert(model_key(model, name_for(j)));
                    continue;
                }

                std::set<std::uint32_t> common;
                std::set_intersection(epochs_i.begin(), epochs_i.end(), epochs_j.begin(),
                                      epochs_j.end(), std::inserter(common, common.end()));
                const LockKey key = model_key(model, name_for(i));
                if (!common.empty()) pair.shared.insert(key);
                if (std::any_of(epochs_i.begin(), epochs_i.end(),
                                [&](std::uint32_t e) { return !common.count(e); }))
                    pair.private_a.insert(key);
                if (std::any_of(epochs_j.begin(), epochs_j.end(),
                                [&](std::uint32_t e) { return !common.count(e); }))
                    pair.private_b.insert(key);
            }
            out.push_back(std::move(pair));
        }
    }
    return out;
}

KeyOf key_resolver(const SimConfig& config) {
    auto table = std::make_shared<std::map<std::string, LockKey>>();
    for (const auto& model : config.lock_models) {
        if (model.sharing == SharingModel::IncidentalHash) {
            for (int b = 0; b < model.hash_buckets; ++b) {
                const auto name = bucket_name(model.name, b);
                table->emplace(name, model_key(model, name));
            }
        } else {
            table->emplace(model.name, model_key(model, model.name));
        }
    }
    return [table](const LockEvent& ev) {
        auto it = table->find(ev.lock_name);
        if (it == table->end())
            throw Error("event lock \"" + ev.lock_name + "\" matches no lock model");
        return it->second;
    };
}

namespace {

using nlohmann::json;

DistSpec parse_dist(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ConfigError(ctx + ": distribution must be an object");
    const std::string kind = j.value("kind", "");
    if (kind == "constant") return DistSpec::constant(j.value("ns", 0.0));
    if (kind == "uniform")
        return DistSpec::uniform(j.value("lo_ns", 0.0), j.value("hi_ns", 0.0));
    if (kind == "exponential") return DistSpec::exponential(j.value("mean_ns", 0.0));
    throw ConfigError(ctx + ": unknown distribution kind \"" + kind + "\"");
}

WorkloadProfile parse_profile(const json& j, const std::string& ctx) {
    if (!j.is_object()) throw ConfigError(ctx + ": profile must be an object");
    WorkloadProfile p;
    p.name = j.value("name", ctx);
    p.ops_per_iter = j.value("ops_per_iter", 1);
    if (j.contains("think_time_ns")) p.think_time_ns = parse_dist(j.at("think_time_ns"), ctx);
    for (const auto& u : j.value("locks_per_op", json::array())) {
        LockUse use;
        use.model = u.value("model", "");
        use.acquisitions_per_op = u.value("acquisitions", 1);
        p.locks_per_op.push_back(std::move(use));
    }
    return p;
}

}  // namespace

SimConfig load_sim_config(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError(e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");

    SimConfig cfg;
    cfg.seed = doc.value("seed", std::uint64_t{0});
    cfg.duration_s = doc.value("duration_s", 0.0);
    cfg.trasher_count = doc.value("trasher_count", 0);
    cfg.trasher_start_interval_s = doc.value("trasher_start_interval_s", 600.0);
    if (doc.contains("worker")) cfg.worker = parse_profile(doc.at("worker"), "worker");
    if (doc.contains("trasher")) cfg.trasher = parse_profile(doc.at("trasher"), "trasher");
    for (const auto& r : doc.value("resource_ids", json::array()))
        cfg.resource_ids.push_back(r.get<std::uint64_t>());
    for (const auto& m : doc.value("lock_models", json::array())) {
        LockModel model;
        model.name = m.value("name", "");
        const std::string sharing = m.value("sharing", "private");
        if (sharing == "private") {
            model.sharing = SharingModel::Private;
        } else if (sharing == "shared_global") {
            model.sharing = SharingModel::SharedGlobal;
        } else if (sharing == "incidental_hash") {
            model.sharing = SharingModel::IncidentalHash;
        } else {
            throw ConfigError("lock model \"" + model.name + "\": unknown sharing \"" +
                              sharing + "\"");
        }
        model.hash_buckets = m.value("hash_buckets", 1);
        if (m.contains("hold_time_ns"))
            model.hold_time_ns = parse_dist(m.at("hold_time_ns"), model.name);
        model.key.lock_name = model.name;
        model.key.lock_class = lock_class_from_name(m.value("class", "spinlock"));
        model.key.function = m.value("function", "acquire_" + model.name);
        model.key.file = m.value("file", "kernel/synthetic.c");
        model.primitive = m.value("primitive", "");
        for (const auto& t : m.value("reinit_times_s", json::array()))
            model.reinit_times_s.push_back(t.get<double>());
        cfg.lock_models.push_back(std::move(model));
    }
    cfg.validate();
    return cfg;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open sim config " + path.string());
    return load_sim_config(in);
}

}  // namespace isolock
