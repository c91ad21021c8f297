#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "isolock/errors.hpp"

namespace isolock {

enum class LockClass { Spinlock, Rwlock, Mutex, Semaphore };

const char* lock_class_name(LockClass c);
LockClass lock_class_from_name(const std::string& name);

// Maps a probed kernel primitive (e.g. "_raw_spin_lock_irqsave") to its
// lock class. Throws UnknownPrimitive for anything outside the probe set.
LockClass classify_primitive(const std::string& primitive_name);

bool is_known_primitive(const std::string& primitive_name);

// One aggregated acquisition record: same pid, lock address and stack,
// counts summed.
struct LockEvent {
    std::int64_t pid = 0;
    std::int64_t tid = 0;
    std::uint64_t lock_addr = 0;
    std::string lock_name;
    LockClass lock_class = LockClass::Spinlock;
    std::string primitive;
    std::uint64_t stack_id = 0;
    std::uint64_t acquire_count = 1;
    std::uint64_t total_hold_ns = 0;
    std::uint64_t first_seen_ns = 0;  // ns since session start
    std::string process_name;

    bool operator==(const LockEvent&) const = default;
};

struct StackTrace {
    std::uint64_t stack_id = 0;
    // Innermost frame (acquisition point) first.
    std::vector<std::string> frames;

    bool operator==(const StackTrace&) const = default;
};

// Runtime identity of a lock: an address plus the number of times that
// address has been re-initialized before this use.
struct LockInstance {
    std::uint64_t lock_addr = 0;
    std::uint32_t generation = 0;

    auto operator<=>(const LockInstance&) const = default;
};

// Stable cross-run identity.
struct LockKey {
    std::string lock_name;
    std::string function;
    std::string file;
    LockClass lock_class = LockClass::Spinlock;

    auto operator<=>(const LockKey&) const = default;
};

struct InitRecord {
    std::uint64_t lock_addr = 0;
    std::uint64_t timestamp_ns = 0;

    auto operator<=>(const InitRecord&) const = default;
};

enum class Platform { Host, Runc, Runsc, Fc, Synthetic };

const char* platform_name(Platform p);
Platform platform_from_name(const std::string& name);

struct WorkloadTrace {
    std::string workload_id;
    Platform platform = Platform::Synthetic;
    std::uint32_t run_index = 0;
    double duration_s = 0.0;
    std::vector<LockEvent> events;
    std::map<std::uint64_t, StackTrace> stacks;
    std::vector<InitRecord> init_records;  // sorted by timestamp
};

// Generation = number of init records at the event's address with
// timestamp <= the event's first-seen time. init_records must be sorted.
LockInstance instance_of(const LockEvent& event, std::span<const InitRecord> init_records);

std::uint32_t generation_at(std::uint64_t lock_addr, std::uint64_t t_ns,
                            std::span<const InitRecord> init_records);

}  // namespace isolock
