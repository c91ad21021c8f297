#include <doctest.h>

#include <algorithm>
#include <random>

#include "isolock/analysis.hpp"
#include "isolock/errors.hpp"

using namespace isolock;

namespace {

LockEvent simple_event(std::uint64_t addr, std::uint64_t count = 1,
                       std::uint64_t t = 0, const std::string& name = "l") {
    LockEvent ev;
    ev.lock_addr = addr;
    ev.lock_name = name;
    ev.lock_class = LockClass::Spinlock;
    ev.primitive = "_raw_spin_lock";
    ev.stack_id = 1;
    ev.acquire_count = count;
    ev.first_seen_ns = t;
    return ev;
}

WorkloadTrace trace_of(const std::string& id, std::vector<LockEvent> events,
                       double duration_s = 1.0, std::vector<InitRecord> inits = {}) {
    WorkloadTrace t;
    t.workload_id = id;
    t.platform = Platform::Synthetic;
    t.duration_s = duration_s;
    t.events = std::move(events);
    t.init_records = std::move(inits);
    t.stacks[1] = {1, {"_raw_spin_lock", "f", "g"}};
    return t;
}

// Independent oracle: brute-force intersection over (addr, generation)
// pairs computed against the concatenated init list.
std::set<LockInstance> oracle_shared(const WorkloadTrace& a, const WorkloadTrace& b) {
    std::vector<InitRecord> inits = a.init_records;
    inits.insert(inits.end(), b.init_records.begin(), b.init_records.end());
    std::sort(inits.begin(), inits.end(), [](const InitRecord& x, const InitRecord& y) {
        return std::tie(x.timestamp_ns, x.lock_addr) < std::tie(y.timestamp_ns, y.lock_addr);
    });
    inits.erase(std::unique(inits.begin(), inits.end()), inits.end());
    std::set<LockInstance> shared;
    for (const auto& ea : a.events) {
        for (const auto& eb : b.events) {
            const auto ia = instance_of(ea, inits);
            if (ia == instance_of(eb, inits)) shared.insert(ia);
        }
    }
    return shared;
}

KeyOf name_key = [](const LockEvent& ev) {
    return LockKey{ev.lock_name, "f", "kernel/synthetic.c", ev.lock_class};
};

}  // namespace

TEST_CASE("shared_private classifies by address") {
    const auto a = trace_of("a", {simple_event(0xA), simple_event(0xB)});
    const auto b = trace_of("b", {simple_event(0xB), simple_event(0xC)});
    const auto report = shared_private(a, b);
    CHECK(report.shared_instances == std::set<LockInstance>{{0xB, 0}});
    CHECK(report.private_a == std::set<LockInstance>{{0xA, 0}});
    CHECK(report.private_b == std::set<LockInstance>{{0xC, 0}});
}

TEST_CASE("disjoint address sets share nothing") {
    const auto a = trace_of("a", {simple_event(0x1)});
    const auto b = trace_of("b", {simple_event(0x2)});
    CHECK(shared_private(a, b).shared_instances.empty());
}

TEST_CASE("an init record between uses splits the instance") {
    const auto a = trace_of("a", {simple_event(0xA, 1, 10)});
    const auto b =
        trace_of("b", {simple_event(0xA, 1, 50)}, 1.0, {{0xA, 20}});
    const auto report = shared_private(a, b);
    CHECK(report.shared_instances.empty());
    CHECK(report.private_a == std::set<LockInstance>{{0xA, 0}});
    CHECK(report.private_b == std::set<LockInstance>{{0xA, 1}});
    CHECK(report.shared_instances == oracle_shared(a, b));
}

TEST_CASE("shared_private requires matching run indexes") {
    auto a = trace_of("a", {});
    auto b = trace_of("b", {});
    b.run_index = 1;
    CHECK_THROWS_AS(shared_private(a, b), SessionMismatch);
}

TEST_CASE("shared_private matches the brute-force oracle on random sessions") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 100; ++trial) {
        auto random_trace = [&](const std::string& id) {
            std::vector<LockEvent> events;
            const int n = 1 + static_cast<int>(rng() % 6);
            for (int i = 0; i < n; ++i)
                events.push_back(simple_event(rng() % 5, 1, rng() % 100));
            std::vector<InitRecord> inits;
            const int k = static_cast<int>(rng() % 3);
            for (int i = 0; i < k; ++i) inits.push_back({rng() % 5, rng() % 100});
            std::sort(inits.begin(), inits.end());
            return trace_of(id, std::move(events), 1.0, std::move(inits));
        };
        const auto a = random_trace("a");
        const auto b = random_trace("b");
        const auto report = shared_private(a, b);
        CHECK(report.shared_instances == oracle_shared(a, b));
        // Symmetry and partitioning.
        const auto reverse = shared_private(b, a);
        CHECK(report.shared_instances == reverse.shared_instances);
        for (const auto& inst : report.private_a)
            CHECK(report.shared_instances.count(inst) == 0);
        for (const auto& inst : report.private_b)
            CHECK(report.shared_instances.count(inst) == 0);
    }
}

TEST_CASE("average_shared_count follows the reporting convention") {
    auto report_with = [](std::size_t n) {
        SharingReport r;
        for (std::size_t i = 0; i < n; ++i) r.shared_instances.insert({i + 1, 0});
        return r;
    };
    SUBCASE("fractional average 0.33") {
        const std::vector<SharingReport> runs{report_with(0), report_with(0), report_with(1)};
        CHECK(round2(average_shared_count(runs)) == doctest::Approx(0.33));
    }
    SUBCASE("constant runs") {
        const std::vector<SharingReport> runs{report_with(4), report_with(4), report_with(4)};
        CHECK(average_shared_count(runs) == doctest::Approx(4.0));
    }
    SUBCASE("15.67 average") {
        const std::vector<SharingReport> runs{report_with(15), report_with(16),
                                              report_with(16)};
        CHECK(round2(average_shared_count(runs)) == doctest::Approx(15.67));
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(average_shared_count({}), EmptyInput);
    }
}

TEST_CASE("lock_rates divides acquire count by duration") {
    SUBCASE("single key") {
        const auto t = trace_of("a", {simple_event(0xA, 610)}, 1.0);
        const auto rates = lock_rates(t, name_key);
        REQUIRE(rates.size() == 1);
        CHECK(rates[0].rate == doctest::Approx(610.0));
    }
    SUBCASE("no events") {
        CHECK(lock_rates(trace_of("a", {}), name_key).empty());
    }
    SUBCASE("counts summed per key") {
        const auto t =
            trace_of("a", {simple_event(0xA, 3), simple_event(0xB, 7)}, 5.0);
        const auto rates = lock_rates(t, name_key);
        REQUIRE(rates.size() == 1);  // same lock name, same key
        CHECK(rates[0].rate == doctest::Approx(2.0));
    }
}

TEST_CASE("cumulative_rate") {
    auto rate = [](const std::string& name, double r) {
        return LockRate{{name, "f", "fs/x.c", LockClass::Spinlock}, r, 0, 1.0};
    };
    SUBCASE("simple sums") {
        CHECK(cumulative_rate({rate("a", 226.0)}) == doctest::Approx(226.0));
        CHECK(cumulative_rate({}) == doctest::Approx(0.0));
        CHECK(cumulative_rate({rate("a", 1.5), rate("b", 2.5), rate("c", 6.0)}) ==
              doctest::Approx(10.0));
    }
    SUBCASE("restriction to a key set") {
        const std::vector<LockRate> rates{rate("a", 1.0), rate("b", 2.0)};
        std::set<LockKey> only_a{rates[0].key};
        CHECK(cumulative_rate(rates, only_a) == doctest::Approx(1.0));
    }
    SUBCASE("additivity over a partition") {
        std::mt19937_64 rng(3);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<LockRate> rates;
            std::set<LockKey> part;
            for (int i = 0; i < 10; ++i) {
                auto r = rate("k" + std::to_string(i),
                              static_cast<double>(rng() % 1000) / 7.0);
                if (rng() % 2) part.insert(r.key);
                rates.push_back(std::move(r));
            }
            std::set<LockKey> rest;
            for (const auto& r : rates)
                if (!part.count(r.key)) rest.insert(r.key);
            CHECK(cumulative_rate(rates, part) + cumulative_rate(rates, rest) ==
                  doctest::Approx(cumulative_rate(rates)));
        }
    }
}

TEST_CASE("subsystem_rollup groups by first path component") {
    CHECK(subsystem_of("fs/ext4/ext4.h") == "fs");
    CHECK(subsystem_of("mm/page_alloc.c") == "mm");
    CHECK(subsystem_of("include/linux/fs.h") == "kernel");
    CHECK_THROWS_AS(subsystem_of(""), UnmappablePath);

    auto rate = [](const std::string& file, double r) {
        return LockRate{{"l_" + file, "f", file, LockClass::Spinlock}, r, 0, 1.0};
    };
    const auto rollups = subsystem_rollup(
        {rate("fs/a.c", 1.0), rate("fs/b.c", 2.0), rate("mm/c.c", 4.0)});
    REQUIRE(rollups.size() == 2);
    CHECK(rollups[0].subsystem == "fs");
    CHECK(rollups[0].cumulative_rate == doctest::Approx(3.0));
    CHECK(rollups[1].subsystem == "mm");
    CHECK(rollups[1].cumulative_rate == doctest::Approx(4.0));
}

TEST_CASE("isolation_score") {
    SUBCASE("no sharing means zero exposure") {
        const auto a = trace_of("a", {simple_event(0x1, 5)});
        const auto b = trace_of("b", {simple_event(0x2, 5)});
        CHECK(isolation_score(a, b, name_key).p_shared == doctest::Approx(0.0));
    }
    SUBCASE("full sharing means full exposure") {
        const auto a = trace_of("a", {simple_event(0x1, 5)});
        const auto b = trace_of("b", {simple_event(0x1, 2)});
        CHECK(isolation_score(a, b, name_key).p_shared == doctest::Approx(1.0));
    }
    SUBCASE("2 shared of 5 total") {
        const auto a = trace_of("a", {simple_event(0x1, 2), simple_event(0x2, 3)});
        const auto b = trace_of("b", {simple_event(0x1, 1)});
        const auto score = isolation_score(a, b, name_key);
        CHECK(score.p_shared == doctest::Approx(0.4));
        CHECK(score.per_subsystem.at("kernel") == doctest::Approx(0.4));
    }
    SUBCASE("empty trace") {
        const auto a = trace_of("a", {});
        const auto b = trace_of("b", {simple_event(0x1)});
        CHECK_THROWS_AS(isolation_score(a, b, name_key), EmptyTrace);
    }
    SUBCASE("scaling acquire counts leaves p_shared unchanged") {
        auto a = trace_of("a", {simple_event(0x1, 2), simple_event(0x2, 3)});
        const auto b = trace_of("b", {simple_event(0x1, 1)});
        const double before = isolation_score(a, b, name_key).p_shared;
        for (auto& ev : a.events) ev.acquire_count *= 7;
        CHECK(isolation_score(a, b, name_key).p_shared == doctest::Approx(before));
    }
}
