#include "isolock/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "isolock/csv.hpp"
#include "isolock/errors.hpp"

namespace isolock {

namespace {

using nlohmann::json;

FilterSpec parse_filter(const json& j) {
    FilterSpec spec;
    if (j.contains("pid_allowlist")) {
        std::set<std::int64_t> pids;
        for (const auto& p : j.at("pid_allowlist")) pids.insert(p.get<std::int64_t>());
        spec.pid_allowlist = std::move(pids);
    }
    if (j.contains("process_allowlist")) {
        std::set<std::string> names;
        for (const auto& p : j.at("process_allowlist")) names.insert(p.get<std::string>());
        spec.process_name_allowlist = std::move(names);
    }
    if (j.contains("interrupt_denylist")) {
        spec.interrupt_frame_denylist.clear();
        for (const auto& d : j.at("interrupt_denylist"))
            spec.interrupt_frame_denylist.insert(d.get<std::string>());
    }
    return spec;
}

std::uint64_t fnv1a64(const std::string& data) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string file_digest(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return "unavailable";
    std::ostringstream buf;
    buf << in.rdbuf();
    char hex[32];
    std::snprintf(hex, sizeof(hex), "fnv1a64:%016llx",
                  static_cast<unsigned long long>(fnv1a64(buf.str())));
    return hex;
}

std::vector<WorkloadTrace> load_runs(const SessionManifest& manifest,
                                     const WorkloadSpec& spec) {
    std::vector<WorkloadTrace> traces;
    for (std::size_t run = 0; run < spec.runs.size(); ++run) {
        WorkloadMeta meta;
        meta.workload_id = spec.id;
        meta.platform = spec.platform;
        meta.run_index = static_cast<std::uint32_t>(run);
        meta.duration_s = spec.runs[run].duration_s;
        traces.push_back(
            load_workload(spec.runs[run].trace, spec.runs[run].stacks, meta, manifest.filter));
    }
    return traces;
}

// Resolution cache: one lookup per distinct (stack, name, primitive).
class KeyResolver {
public:
    KeyResolver(const CodeFacts* facts, int max_depth)
        : facts_(facts), max_depth_(max_depth) {}

    LockKey key_for(const LockEvent& ev, const std::map<std::uint64_t, StackTrace>& stacks) {
        const auto& stack = stacks.at(ev.stack_id);
        LockKey key;
        key.lock_name = ev.lock_name;
        key.lock_class = ev.lock_class;
        key.function = stack.frames.front();
        key.file = "unknown";
        if (!facts_) return key;

        const auto cache_key = std::make_tuple(ev.stack_id, ev.lock_name, ev.primitive);
        auto it = cache_.find(cache_key);
        if (it == cache_.end()) {
            std::optional<LockUseSite> site;
            try {
                site = resolve_stack(stack, ev.lock_name, ev.primitive, *facts_, max_depth_);
            } catch (const NotResolved&) {
            }
            it = cache_.emplace(cache_key, std::move(site)).first;
        }
        if (it->second) {
            key.function = it->second->function;
            key.file = it->second->file;
        }
        return key;
    }

    const std::optional<LockUseSite>* cached_site(std::uint64_t stack_id,
                                                  const std::string& name,
                                                  const std::string& primitive) const {
        auto it = cache_.find(std::make_tuple(stack_id, name, primitive));
        return it == cache_.end() ? nullptr : &it->second;
    }

private:
    const CodeFacts* facts_;
    int max_depth_;
    std::map<std::tuple<std::uint64_t, std::string, std::string>,
             std::optional<LockUseSite>>
        cache_;
};

void write_metadata(const std::filesystem::path& out,
                    const SessionManifest& manifest,
                    const std::map<std::string, std::string>& options) {
    nlohmann::ordered_json meta;
    meta["tool_version"] = kToolVersion;
    meta["manifest"] = manifest.source_path.string();
    meta["manifest_digest"] = file_digest(manifest.source_path);
    meta["options"] = options;
    std::ofstream f(out);
    if (!f) throw IoError("cannot write " + out.string());
    f << meta.dump(2) << '\n';
}

}  // namespace

SessionManifest load_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open manifest " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("manifest: ") + e.what());
    }

    SessionManifest manifest;
    manifest.source_path = path;
    const auto base = path.parent_path();
    auto resolve_path = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    const Platform default_platform =
        platform_from_name(doc.value("platform", std::string("host")));
    if (doc.contains("filter")) manifest.filter = parse_filter(doc.at("filter"));
    if (doc.contains("code_facts")) {
        manifest.code_facts = resolve_path(doc.at("code_facts").get<std::string>());
        if (!std::filesystem::exists(*manifest.code_facts))
            throw SchemaError("manifest: code_facts file does not exist: " +
                              manifest.code_facts->string());
    }

    for (const auto& w : doc.value("workloads", json::array())) {
        WorkloadSpec spec;
        spec.id = w.value("id", "");
        if (spec.id.empty()) throw SchemaError("manifest: workload without id");
        spec.platform = w.contains("platform")
                            ? platform_from_name(w.at("platform").get<std::string>())
                            : default_platform;
        for (const auto& r : w.value("runs", json::array())) {
            RunSpec run;
            run.trace = resolve_path(r.value("trace", ""));
            run.stacks = resolve_path(r.value("stacks", ""));
            run.duration_s = r.value("duration_s", 0.0);
            for (const auto& p : {run.trace, run.stacks})
                if (!std::filesystem::exists(p))
                    throw SchemaError("manifest: file does not exist: " + p.string());
            spec.runs.push_back(std::move(run));
        }
        if (spec.runs.empty())
            throw SchemaError("manifest: workload \"" + spec.id + "\" has no runs");
        manifest.workloads.push_back(std::move(spec));
    }
    if (manifest.workloads.empty()) throw SchemaError("manifest: no workloads");
    return manifest;
}

AnalyzeOutput run_analyze(const SessionManifest& manifest,
                          const std::filesystem::path& out_dir,
                          const AnalyzeOptions& opts) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    std::optional<CodeFacts> facts;
    if (manifest.code_facts) facts = load_code_facts(*manifest.code_facts);
    KeyResolver resolver(facts ? &*facts : nullptr, opts.max_depth);

    std::vector<std::vector<WorkloadTrace>> all_runs;
    for (const auto& spec : manifest.workloads) all_runs.push_back(load_runs(manifest, spec));

    AnalyzeOutput out;
    out.sharing_csv = out_dir / "sharing.csv";
    out.rates_csv = out_dir / "rates.csv";
    out.subsystems_csv = out_dir / "subsystems.csv";
    out.score_csv = out_dir / "score.csv";
    out.metadata_json = out_dir / "metadata.json";

    std::ofstream sharing(out.sharing_csv);
    csv::write_row(sharing, {"workload_a", "workload_b", "run", "shared_count",
                             "avg_shared_count", "cumulative_shared_rate"});
    std::ofstream score(out.score_csv);
    csv::write_row(score, {"pair", "p_shared"});

    // Per-key rates summed across workloads and runs, optionally shared-only.
    std::map<LockKey, double> rate_by_key;
    if (opts.restrict_to == RateRestriction::All) {
        for (const auto& runs : all_runs) {
            for (const auto& trace : runs) {
                auto key_of = [&](const LockEvent& ev) {
                    return resolver.key_for(ev, trace.stacks);
                };
                for (const auto& rate : lock_rates(trace, key_of))
                    rate_by_key[rate.key] += rate.rate;
            }
        }
    }

    for (std::size_t a = 0; a < all_runs.size(); ++a) {
        for (std::size_t b = a + 1; b < all_runs.size(); ++b) {
            const std::size_t n_runs = std::min(all_runs[a].size(), all_runs[b].size());
            std::vector<SharingReport> reports;
            double rate_sum = 0.0;
            double p_ab_sum = 0.0, p_ba_sum = 0.0;
            for (std::size_t run = 0; run < n_runs; ++run) {
                const WorkloadTrace& ta = all_runs[a][run];
                const WorkloadTrace& tb = all_runs[b][run];
                auto report = shared_private(ta, tb);
                rate_sum += report.cumulative_shared_rate;

                auto key_of = [&](const WorkloadTrace& t) {
                    return [&resolver, &t](const LockEvent& ev) {
                        return resolver.key_for(ev, t.stacks);
                    };
                };
                if (opts.restrict_to == RateRestriction::Shared) {
                    // Restrict to events on shared instances (Table-5 style).
                    std::vector<InitRecord> merged = ta.init_records;
                    merged.insert(merged.end(), tb.init_records.begin(),
                                  tb.init_records.end());
                    std::sort(merged.begin(), merged.end());
                    merged.erase(std::unique(merged.begin(), merged.end()), merged.end());
                    for (const auto* t : {&ta, &tb}) {
                        for (const auto& ev : t->events) {
                            if (report.shared_instances.count(instance_of(ev, merged)))
                                rate_by_key[resolver.key_for(ev, t->stacks)] +=
                                    static_cast<double>(ev.acquire_count) / t->duration_s;
                        }
                    }
                }

                try {
                    p_ab_sum += isolation_score(ta, tb, key_of(ta)).p_shared;
                    p_ba_sum += isolation_score(tb, ta, key_of(tb)).p_shared;
                } catch (const EmptyTrace&) {
                    // Zero-acquisition runs contribute nothing to the mean.
                }
                reports.push_back(std::move(report));
            }
            const double avg = reports.empty() ? 0.0 : average_shared_count(reports);
            for (std::size_t run = 0; run < reports.size(); ++run) {
                csv::write_row(sharing,
                               {reports[run].workload_a, reports[run].workload_b,
                                std::to_string(run),
                                std::to_string(reports[run].shared_instances.size()),
                                csv::format_double(round2(avg)),
                                csv::format_double(rate_sum)});
            }
            if (n_runs) {
                const auto dn = static_cast<double>(n_runs);
                csv::write_row(score, {manifest.workloads[a].id + "->" +
                                           manifest.workloads[b].id,
                                       csv::format_double(p_ab_sum / dn)});
                csv::write_row(score, {manifest.workloads[b].id + "->" +
                                           manifest.workloads[a].id,
                                       csv::format_double(p_ba_sum / dn)});
            }
        }
    }

    std::ofstream rates(out.rates_csv);
    csv::write_row(rates, {"lock_name", "function", "file", "class", "rate"});
    std::vector<LockRate> rate_list;
    for (const auto& [key, rate] : rate_by_key) {
        csv::write_row(rates, {key.lock_name, key.function, key.file,
                               lock_class_name(key.lock_class), csv::format_double(rate)});
        rate_list.push_back({key, rate, 0, 0.0});
    }

    std::ofstream subsystems(out.subsystems_csv);
    csv::write_row(subsystems, {"subsystem", "cumulative_rate"});
    for (const auto& rollup : subsystem_rollup(rate_list))
        csv::write_row(subsystems,
                       {rollup.subsystem, csv::format_double(rollup.cumulative_rate)});

    write_metadata(out.metadata_json, manifest,
                   {{"command", "analyze"},
                    {"restrict",
                     opts.restrict_to == RateRestriction::Shared ? "shared" : "all"},
                    {"max_depth", std::to_string(opts.max_depth)}});
    return out;
}

ResolveOutput run_resolve(const SessionManifest& manifest,
                          const std::filesystem::path& code_facts_path,
                          const std::filesystem::path& out_dir, int max_depth) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    const CodeFacts facts = load_code_facts(code_facts_path);
    KeyResolver resolver(&facts, max_depth);

    ResolveOutput out;
    out.mapping_csv = out_dir / "mapping.csv";
    out.rates_csv = out_dir / "rates.csv";

    std::map<LockKey, double> rate_by_key;
    std::map<LockKey, ObjectMapping> mapping_by_key;

    for (const auto& spec : manifest.workloads) {
        for (const auto& trace : load_runs(manifest, spec)) {
            for (const auto& ev : trace.events) {
                const LockKey key = resolver.key_for(ev, trace.stacks);
                rate_by_key[key] +=
                    static_cast<double>(ev.acquire_count) / trace.duration_s;
                if (mapping_by_key.count(key)) continue;
                const auto* site =
                    resolver.cached_site(ev.stack_id, ev.lock_name, ev.primitive);
                if (site && *site) {
                    mapping_by_key.emplace(key, map_lock_to_object(key, **site, facts));
                } else {
                    ObjectMapping unresolved;
                    unresolved.key = key;
                    mapping_by_key.emplace(key, std::move(unresolved));
                }
            }
        }
    }
    if (mapping_by_key.empty()) throw EmptyInput("no locks to map");

    std::ofstream mapping(out.mapping_csv);
    csv::write_row(mapping, {"lock_name", "function", "file", "object_name", "confidence"});
    for (const auto& [key, m] : mapping_by_key) {
        csv::write_row(mapping, {key.lock_name, key.function, key.file,
                                 m.object_name.value_or(""), confidence_name(m.confidence)});
        out.mappings.push_back(m);
    }

    std::ofstream rates(out.rates_csv);
    csv::write_row(rates, {"lock_name", "function", "file", "class", "rate"});
    for (const auto& [key, rate] : rate_by_key)
        csv::write_row(rates, {key.lock_name, key.function, key.file,
                               lock_class_name(key.lock_class), csv::format_double(rate)});

    out.coverage = mapping_coverage(out.mappings);
    out.coverage_with_globals = coverage_with_globals(out.mappings);
    return out;
}

std::string render_report(const std::filesystem::path& analyze_dir) {
    std::ostringstream out;
    for (const char* name : {"sharing.csv", "subsystems.csv", "score.csv"}) {
        const auto path = analyze_dir / name;
        std::ifstream in(path);
        if (!in) throw IoError("cannot open " + path.string());
        out << "== " << name << " ==\n";
        for (const auto& row : csv::read(in)) {
            for (std::size_t i = 0; i < row.size(); ++i)
                out << (i ? "  " : "") << row[i];
            out << '\n';
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace isolock
