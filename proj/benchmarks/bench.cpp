#include <benchmark/benchmark.h>

#include <algorithm>
#include <random>

#include "isolock/analysis.hpp"
#include "isolock/simgen.hpp"
#include "isolock/staticmap.hpp"

using namespace isolock;

namespace {

WorkloadTrace synthetic_trace(const std::string& id, int n_events, std::uint64_t seed) {
    std::mt19937_64 g(seed);
    WorkloadTrace t;
    t.workload_id = id;
    t.platform = Platform::Synthetic;
    t.duration_s = 30.0;
    t.stacks[1] = {1, {"_raw_spin_lock", "do_work", "main_loop"}};
    for (int i = 0; i < n_events; ++i) {
        LockEvent ev;
        ev.pid = 1;
        ev.tid = 1;
        ev.lock_addr = 0x1000 + g() % (n_events / 2 + 1);
        ev.lock_name = "l";
        ev.lock_class = LockClass::Spinlock;
        ev.primitive = "_raw_spin_lock";
        ev.stack_id = 1;
        ev.acquire_count = 1 + g() % 100;
        ev.first_seen_ns = g() % 1000000;
        t.events.push_back(std::move(ev));
    }
    for (int i = 0; i < n_events / 20; ++i)
        t.init_records.push_back({0x1000 + g() % (n_events / 2 + 1), g() % 1000000});
    std::sort(t.init_records.begin(), t.init_records.end(),
              [](const InitRecord& a, const InitRecord& b) {
                  return a.timestamp_ns < b.timestamp_ns;
              });
    return t;
}

void BM_SharedPrivate(benchmark::State& state) {
    const auto a = synthetic_trace("a", static_cast<int>(state.range(0)), 1);
    const auto b = synthetic_trace("b", static_cast<int>(state.range(0)), 2);
    for (auto _ : state) benchmark::DoNotOptimize(shared_private(a, b));
    state.SetItemsProcessed(state.iterations() * state.range(0) * 2);
}
BENCHMARK(BM_SharedPrivate)->Arg(1000)->Arg(10000)->Arg(100000);

CodeFacts chain_facts(int depth) {
    CodeFacts facts;
    for (int i = 0; i <= depth; ++i) {
        const std::string fn = "f" + std::to_string(i);
        facts.symbols.push_back({fn, SymbolKind::Function, "fs/x.c", 1, 10, {}});
        if (i < depth)
            facts.calls.push_back({fn, "f" + std::to_string(i + 1), "fs/x.c", 2});
    }
    facts.lock_uses.push_back(
        {"f" + std::to_string(depth), "fs/x.c", 5, "&s->deep", "_raw_spin_lock", false});
    facts.build_indexes();
    facts.validate();
    return facts;
}

void BM_ResolveStack(benchmark::State& state) {
    const int depth = static_cast<int>(state.range(0));
    const auto facts = chain_facts(depth);
    const StackTrace stack{1, {"f0"}};
    for (auto _ : state)
        benchmark::DoNotOptimize(
            resolve_stack(stack, "deep", "_raw_spin_lock", facts, depth));
}
BENCHMARK(BM_ResolveStack)->Arg(2)->Arg(4)->Arg(6);

void BM_Simulate(benchmark::State& state) {
    SimConfig cfg;
    cfg.seed = 11;
    cfg.duration_s = 0.0005 * static_cast<double>(state.range(0));
    cfg.trasher_start_interval_s = 0.0001;
    cfg.trasher_count = 3;
    LockModel shared;
    shared.name = "shared";
    shared.sharing = SharingModel::SharedGlobal;
    shared.hold_time_ns = DistSpec::constant(1000.0);
    shared.key = {"shared", "acquire_shared", "kernel/synthetic.c", LockClass::Spinlock};
    cfg.lock_models = {shared};
    cfg.worker.name = "worker";
    cfg.worker.locks_per_op = {{"shared", 1}};
    cfg.worker.think_time_ns = DistSpec::constant(2000.0);
    cfg.trasher = cfg.worker;
    cfg.trasher.name = "trasher";
    for (auto _ : state) benchmark::DoNotOptimize(simulate(cfg));
}
BENCHMARK(BM_Simulate)->Arg(1)->Arg(4);

}  // namespace

BENCHMARK_MAIN();
