#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "isolock/types.hpp"

namespace isolock {

struct FilterSpec {
    std::optional<std::set<std::int64_t>> pid_allowlist;
    std::optional<std::set<std::string>> process_name_allowlist;
    // Substring match against every frame; interrupt entry symbols carry
    // suffixes in real traces, so exact match would miss them.
    std::set<std::string> interrupt_frame_denylist = default_interrupt_denylist();

    static std::set<std::string> default_interrupt_denylist() {
        return {"__softirqentry_text_start", "hrtimer_interrupt"};
    }
};

struct WorkloadMeta {
    std::string workload_id;
    Platform platform = Platform::Synthetic;
    std::uint32_t run_index = 0;
    double duration_s = 0.0;
};

struct ParsedTrace {
    std::vector<LockEvent> events;
    std::vector<InitRecord> init_records;  // sorted by timestamp
    std::vector<std::string> warnings;     // unknown record kinds, one per line
};

ParsedTrace parse_trace_records(std::istream& in);
ParsedTrace parse_trace_records(const std::filesystem::path& path);

// Lock events only; init records and warnings dropped.
std::vector<LockEvent> parse_trace(const std::filesystem::path& path);

std::map<std::uint64_t, StackTrace> parse_stacks(std::istream& in);
std::map<std::uint64_t, StackTrace> parse_stacks(const std::filesystem::path& path);

std::vector<LockEvent> filter_events(const std::vector<LockEvent>& events,
                                     const std::map<std::uint64_t, StackTrace>& stacks,
                                     const FilterSpec& spec);

WorkloadTrace load_workload(const std::filesystem::path& trace_path,
                            const std::filesystem::path& stack_path,
                            const WorkloadMeta& meta, const FilterSpec& spec);

// Serialization (canonical interchange; the simulator emits through these
// as well so round-trips are byte-stable).
void write_trace(std::ostream& out, const std::vector<LockEvent>& events,
                 const std::vector<InitRecord>& init_records);
void write_stacks(std::ostream& out, const std::map<std::uint64_t, StackTrace>& stacks);

}  // namespace isolock
