#include "isolock/types.hpp"

#include <algorithm>
#include <unordered_map>

namespace isolock {

namespace {

const std::unordered_map<std::string, LockClass>& primitive_table() {
    static const std::unordered_map<std::string, LockClass> table = {
        // spinlocks
        {"_raw_spin_lock", LockClass::Spinlock},
        {"_raw_spin_lock_irqsave", LockClass::Spinlock},
        {"_raw_spin_lock_irq", LockClass::Spinlock},
        {"_raw_spin_lock_bh", LockClass::Spinlock},
        {"_raw_spin_trylock", LockClass::Spinlock},
        {"_raw_spin_trylock_bh", LockClass::Spinlock},
        {"_raw_spin_lock_nested", LockClass::Spinlock},
        {"_raw_spin_lock_irqsave_nested", LockClass::Spinlock},
        // reader-writer locks
        {"_raw_read_lock", LockClass::Rwlock},
        {"_raw_write_lock", LockClass::Rwlock},
        {"_raw_read_lock_bh", LockClass::Rwlock},
        {"_raw_write_lock_bh", LockClass::Rwlock},
        {"_raw_read_lock_irq", LockClass::Rwlock},
        {"_raw_write_lock_irq", LockClass::Rwlock},
        {"_raw_read_lock_irqsave", LockClass::Rwlock},
        {"_raw_write_lock_irqsave", LockClass::Rwlock},
        {"_raw_read_trylock", LockClass::Rwlock},
        {"_raw_write_trylock", LockClass::Rwlock},
        {"_raw_write_lock_nested", LockClass::Rwlock},
        // mutexes
        {"mutex_lock_nested", LockClass::Mutex},
        {"mutex_lock", LockClass::Mutex},
        {"rt_mutex_lock_nested", LockClass::Mutex},
        {"rt_mutex_lock", LockClass::Mutex},
        {"mutex_trylock", LockClass::Mutex},
        {"rt_mutex_trylock", LockClass::Mutex},
        {"mutex_lock_interruptible_nested", LockClass::Mutex},
        // semaphores
        {"down_read", LockClass::Semaphore},
        {"down_write", LockClass::Semaphore},
        {"down_read_trylock", LockClass::Semaphore},
        {"down_write_trylock", LockClass::Semaphore},
        {"down_read_nested", LockClass::Semaphore},
        {"down_write_nested", LockClass::Semaphore},
        {"down_read_killable", LockClass::Semaphore},
        {"down_write_killable", LockClass::Semaphore},
        {"down_read_killable_nested", LockClass::Semaphore},
        {"down_write_killable_nested", LockClass::Semaphore},
        {"down_read_interruptible", LockClass::Semaphore},
    };
    return table;
}

}  // namespace

const char* lock_class_name(LockClass c) {
    switch (c) {
        case LockClass::Spinlock: return "spinlock";
        case LockClass::Rwlock: return "rwlock";
        case LockClass::Mutex: return "mutex";
        case LockClass::Semaphore: return "semaphore";
    }
    return "?";
}

LockClass lock_class_from_name(const std::string& name) {
    if (name == "spinlock") return LockClass::Spinlock;
    if (name == "rwlock") return LockClass::Rwlock;
    if (name == "mutex") return LockClass::Mutex;
    if (name == "semaphore") return LockClass::Semaphore;
    throw Error("unknown lock class: " + name);
}

LockClass classify_primitive(const std::string& primitive_name) {
    const auto& table = primitive_table();
    auto it = table.find(primitive_name);
    if (it == table.end()) throw UnknownPrimitive(primitive_name);
    return it->second;
}

bool is_known_primitive(const std::string& primitive_name) {
    return primitive_table().count(primitive_name) > 0;
}

const char* platform_name(Platform p) {
    switch (p) {
        case Platform::Host: return "host";
        case Platform::Runc: return "runc";
        case Platform::Runsc: return "runsc";
        case Platform::Fc: return "fc";
        case Platform::Synthetic: return "synthetic";
    }
    return "?";
}

Platform platform_from_name(const std::string& name) {
    if (name == "host") return Platform::Host;
    if (name == "runc") return Platform::Runc;
    if (name == "runsc") return Platform::Runsc;
    if (name == "fc") return Platform::Fc;
    if (name == "synthetic") return Platform::Synthetic;
    throw Error("unknown platform: " + name);
}

std::uint32_t generation_at(std::uint64_t lock_addr, std::uint64_t t_ns,
                            std::span<const InitRecord> init_records) {
    std::uint32_t gen = 0;
    for (const auto& rec : init_records) {
        if (rec.timestamp_ns > t_ns) break;
        if (rec.lock_addr == lock_addr) ++gen;
    }
    return gen;
}

LockInstance instance_of(const LockEvent& event, std::span<const InitRecord> init_records) {
    return {event.lock_addr, generation_at(event.lock_addr, event.first_seen_ns, init_records)};
}

}  // namespace isolock
