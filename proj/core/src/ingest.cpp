#include "isolock/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include <json.hpp>

namespace isolock {

namespace {

using nlohmann::json;

std::uint64_t parse_hex_addr(const json& j, std::size_t line_no) {
    if (!j.is_string()) throw ParseError(line_no, "\"addr\" must be a hex string");
    const std::string s = j.get<std::string>();
    if (s.size() < 3 || s[0] != '0' || (s[1] != 'x' && s[1] != 'X'))
        throw ParseError(line_no, "\"addr\" must start with 0x");
    std::uint64_t v = 0;
    const auto res = std::from_chars(s.data() + 2, s.data() + s.size(), v, 16);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ParseError(line_no, "bad hex address: " + s);
    return v;
}

template <typename T>
T require(const json& rec, const char* key, std::size_t line_no) {
    auto it = rec.find(key);
    if (it == rec.end())
        throw ParseError(line_no, std::string("missing field \"") + key + "\"");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw ParseError(line_no, std::string("bad type for field \"") + key + "\"");
    }
}

LockEvent parse_lock_record(const json& rec, std::size_t line_no) {
    LockEvent ev;
    ev.pid = require<std::int64_t>(rec, "pid", line_no);
    ev.tid = require<std::int64_t>(rec, "tid", line_no);
    if (!rec.contains("addr")) throw ParseError(line_no, "missing field \"addr\"");
    ev.lock_addr = parse_hex_addr(rec.at("addr"), line_no);
    ev.lock_name = require<std::string>(rec, "name", line_no);
    ev.lock_class = lock_class_from_name(require<std::string>(rec, "class", line_no));
    ev.primitive = require<std::string>(rec, "primitive", line_no);
    if (!is_known_primitive(ev.primitive) || classify_primitive(ev.primitive) != ev.lock_class)
        throw ParseError(line_no,
                         "primitive \"" + ev.primitive + "\" is not a probed " +
                             lock_class_name(ev.lock_class) + " primitive");
    const auto count = require<std::int64_t>(rec, "count", line_no);
    if (count < 1) throw ParseError(line_no, "\"count\" must be >= 1");
    ev.acquire_count = static_cast<std::uint64_t>(count);
    const auto hold = require<std::int64_t>(rec, "hold_ns", line_no);
    if (hold < 0) throw ParseError(line_no, "\"hold_ns\" must be >= 0");
    ev.total_hold_ns = static_cast<std::uint64_t>(hold);
    const auto t = require<std::int64_t>(rec, "t_ns", line_no);
    if (t < 0) throw ParseError(line_no, "\"t_ns\" must be >= 0");
    ev.first_seen_ns = static_cast<std::uint64_t>(t);
    ev.process_name = require<std::string>(rec, "process", line_no);
    ev.stack_id = static_cast<std::uint64_t>(require<std::int64_t>(rec, "stack", line_no));
    return ev;
}

}  // namespace

ParsedTrace parse_trace_records(std::istream& in) {
    ParsedTrace out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, e.what());
        }
        if (!rec.is_object()) throw ParseError(line_no, "record is not an object");
        const std::string kind = require<std::string>(rec, "kind", line_no);
        if (kind == "lock") {
            out.events.push_back(parse_lock_record(rec, line_no));
        } else if (kind == "init") {
            InitRecord ir;
            if (!rec.contains("addr")) throw ParseError(line_no, "missing field \"addr\"");
            ir.lock_addr = parse_hex_addr(rec.at("addr"), line_no);
            const auto t = require<std::int64_t>(rec, "t_ns", line_no);
            if (t < 0) throw ParseError(line_no, "\"t_ns\" must be >= 0");
            ir.timestamp_ns = static_cast<std::uint64_t>(t);
            out.init_records.push_back(ir);
        } else {
            // Unknown kinds are tolerated so tracer extensions don't break
            // old analyzers.
            out.warnings.push_back("line " + std::to_string(line_no) +
                                   ": skipping unknown record kind \"" + kind + "\"");
        }
    }
    std::sort(out.init_records.begin(), out.init_records.end(),
              [](const InitRecord& a, const InitRecord& b) {
                  return std::tie(a.timestamp_ns, a.lock_addr) <
                         std::tie(b.timestamp_ns, b.lock_addr);
              });
    return out;
}

ParsedTrace parse_trace_records(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open trace file " + path.string());
    return parse_trace_records(in);
}

std::vector<LockEvent> parse_trace(const std::filesystem::path& path) {
    return parse_trace_records(path).events;
}

std::map<std::uint64_t, StackTrace> parse_stacks(std::istream& in) {
    std::map<std::uint64_t, StackTrace> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw ParseError(line_no, "expected \"<stack_id>\\t<frames>\"");
        std::uint64_t id = 0;
        const auto res = std::from_chars(line.data(), line.data() + tab, id);
        if (res.ec != std::errc{} || res.ptr != line.data() + tab)
            throw ParseError(line_no, "bad stack id");
        StackTrace st;
        st.stack_id = id;
        std::string frames = line.substr(tab + 1);
        std::size_t pos = 0;
        while (pos <= frames.size()) {
            const auto sep = frames.find(';', pos);
            const std::string frame =
                frames.substr(pos, sep == std::string::npos ? std::string::npos : sep - pos);
            if (frame.empty()) throw ParseError(line_no, "empty stack frame");
            st.frames.push_back(frame);
            if (sep == std::string::npos) break;
            pos = sep + 1;
        }
        if (st.frames.empty()) throw ParseError(line_no, "stack has no frames");
        if (!out.emplace(id, std::move(st)).second) throw DuplicateStackId(id);
    }
    return out;
}

std::map<std::uint64_t, StackTrace> parse_stacks(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open stack file " + path.string());
    return parse_stacks(in);
}

std::vector<LockEvent> filter_events(const std::vector<LockEvent>& events,
                                     const std::map<std::uint64_t, StackTrace>& stacks,
                                     const FilterSpec& spec) {
    std::vector<LockEvent> out;
    out.reserve(events.size());
    for (const auto& ev : events) {
        if (spec.pid_allowlist && !spec.pid_allowlist->count(ev.pid)) continue;
        if (spec.process_name_allowlist &&
            !spec.process_name_allowlist->count(ev.process_name))
            continue;
        auto it = stacks.find(ev.stack_id);
        if (it == stacks.end()) throw MissingStack(ev.stack_id);
        bool interrupt = false;
        for (const auto& frame : it->second.frames) {
            for (const auto& deny : spec.interrupt_frame_denylist) {
                if (frame.find(deny) != std::string::npos) {
                    interrupt = true;
                    break;
                }
            }
            if (interrupt) break;
        }
        if (!interrupt) out.push_back(ev);
    }
    return out;
}

WorkloadTrace load_workload(const std::filesystem::path& trace_path,
                            const std::filesystem::path& stack_path,
                            const WorkloadMeta& meta, const FilterSpec& spec) {
    if (meta.duration_s <= 0.0) throw InvalidMeta("duration_s must be > 0");
    if (meta.workload_id.empty()) throw InvalidMeta("workload_id must be non-empty");

    auto parsed = parse_trace_records(trace_path);
    auto stacks = parse_stacks(stack_path);

    WorkloadTrace trace;
    trace.workload_id = meta.workload_id;
    trace.platform = meta.platform;
    trace.run_index = meta.run_index;
    trace.duration_s = meta.duration_s;
    trace.init_records = std::move(parsed.init_records);

    // Aggregate duplicate rows. The key includes the init-record epoch so
    // rows from different generations of a reused address never merge; a
    // merged first_seen would silently move acquisitions to an older
    // generation.
    std::map<std::tuple<std::int64_t, std::uint64_t, std::uint64_t, std::uint32_t>, std::size_t>
        index;
    std::vector<LockEvent> merged;
    for (auto& ev : parsed.events) {
        const auto epoch = generation_at(ev.lock_addr, ev.first_seen_ns, trace.init_records);
        const auto key = std::make_tuple(ev.pid, ev.lock_addr, ev.stack_id, epoch);
        auto it = index.find(key);
        if (it == index.end()) {
            index.emplace(key, merged.size());
            merged.push_back(std::move(ev));
        } else {
            LockEvent& dst = merged[it->second];
            dst.acquire_count += ev.acquire_count;
            dst.total_hold_ns += ev.total_hold_ns;
            dst.first_seen_ns = std::min(dst.first_seen_ns, ev.first_seen_ns);
        }
    }

    trace.events = filter_events(merged, stacks, spec);
    trace.stacks = std::move(stacks);
    return trace;
}

void write_trace(std::ostream& out, const std::vector<LockEvent>& events,
                 const std::vector<InitRecord>& init_records) {
    char addr_buf[32];
    for (const auto& ir : init_records) {
        std::snprintf(addr_buf, sizeof(addr_buf), "0x%llx",
                      static_cast<unsigned long long>(ir.lock_addr));
        nlohmann::ordered_json rec{{"kind", "init"}, {"addr", addr_buf}, {"t_ns", ir.timestamp_ns}};
        out << rec.dump() << '\n';
    }
    for (const auto& ev : events) {
        std::snprintf(addr_buf, sizeof(addr_buf), "0x%llx",
                      static_cast<unsigned long long>(ev.lock_addr));
        nlohmann::ordered_json rec{{"kind", "lock"},
                                   {"pid", ev.pid},
                                   {"tid", ev.tid},
                                   {"addr", addr_buf},
                                   {"name", ev.lock_name},
                                   {"class", lock_class_name(ev.lock_class)},
                                   {"primitive", ev.primitive},
                                   {"count", ev.acquire_count},
                                   {"hold_ns", ev.total_hold_ns},
                                   {"t_ns", ev.first_seen_ns},
                                   {"process", ev.process_name},
                                   {"stack", ev.stack_id}};
        out << rec.dump() << '\n';
    }
}

void write_stacks(std::ostream& out, const std::map<std::uint64_t, StackTrace>& stacks) {
    for (const auto& [id, st] : stacks) {
        out << id << '\t';
        for (std::size_t i = 0; i < st.frames.size(); ++i) {
            if (i) out << ';';
            out << st.frames[i];
        }
        out << '\n';
    }
}

}  // namespace isolock
