#include "isolock/staticmap.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "isolock/errors.hpp"

namespace isolock {

namespace {

using nlohmann::json;

SymbolKind symbol_kind_from_name(const std::string& name) {
    if (name == "function") return SymbolKind::Function;
    if (name == "record") return SymbolKind::Record;
    if (name == "global_variable") return SymbolKind::GlobalVariable;
    throw SchemaError("unknown symbol kind: " + name);
}

template <typename T>
T require(const json& obj, const char* key, const char* ctx) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw SchemaError(std::string(ctx) + ": missing field \"" + key + "\"");
    try {
        return it->get<T>();
    } catch (const json::exception&) {
        throw SchemaError(std::string(ctx) + ": bad type for field \"" + key + "\"");
    }
}

}  // namespace

void CodeFacts::build_indexes() {
    outgoing.clear();
    sites_by_function.clear();
    function_names.clear();
    for (const auto& sym : symbols)
        if (sym.kind == SymbolKind::Function) function_names.insert(sym.name);
    for (const auto& edge : calls) outgoing[edge.caller].push_back(&edge);
    for (const auto& site : lock_uses) sites_by_function[site.function].push_back(&site);
}

void CodeFacts::validate() const {
    for (const auto& sym : symbols)
        if (sym.start_line > sym.end_line)
            throw SchemaError("symbol " + sym.name + ": start_line > end_line");
    for (const auto& name : wrappers)
        if (!function_names.count(name)) throw DanglingReference("wrapper", name);
    for (const auto& name : globals)
        if (!lock_definitions.count(name)) throw DanglingReference("global", name);
    for (const auto& site : lock_uses)
        if (!is_known_primitive(site.primitive))
            throw SchemaError("lock use in " + site.function + " has unknown primitive \"" +
                              site.primitive + "\"");
}

CodeFacts load_code_facts(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw SchemaError(e.what());
    }
    if (!doc.is_object()) throw SchemaError("bundle must be a JSON object");

    CodeFacts facts;
    for (const auto& j : doc.value("symbols", json::array())) {
        SymbolRecord sym;
        sym.name = require<std::string>(j, "name", "symbol");
        sym.kind = symbol_kind_from_name(require<std::string>(j, "kind", "symbol"));
        sym.file = require<std::string>(j, "file", "symbol");
        sym.start_line = require<int>(j, "start_line", "symbol");
        sym.end_line = require<int>(j, "end_line", "symbol");
        if (j.contains("type") && !j.at("type").is_null())
            sym.type_name = j.at("type").get<std::string>();
        facts.symbols.push_back(std::move(sym));
    }
    for (const auto& j : doc.value("calls", json::array())) {
        CallEdge edge;
        edge.caller = require<std::string>(j, "caller", "call");
        edge.callee = require<std::string>(j, "callee", "call");
        edge.site_file = require<std::string>(j, "file", "call");
        edge.site_line = require<int>(j, "line", "call");
        facts.calls.push_back(std::move(edge));
    }
    for (const auto& j : doc.value("lock_uses", json::array())) {
        LockUseSite site;
        site.function = require<std::string>(j, "function", "lock_use");
        site.file = require<std::string>(j, "file", "lock_use");
        site.line = require<int>(j, "line", "lock_use");
        site.lock_expr = require<std::string>(j, "lock_expr", "lock_use");
        site.primitive = require<std::string>(j, "primitive", "lock_use");
        site.param_like = j.value("param_like", false);
        facts.lock_uses.push_back(std::move(site));
    }
    for (const auto& j : doc.value("wrappers", json::array()))
        facts.wrappers.insert(j.get<std::string>());
    for (const auto& j : doc.value("globals", json::array()))
        facts.globals.insert(j.get<std::string>());
    for (const auto& j : doc.value("lock_definitions", json::array())) {
        LockDefinition def;
        def.name = require<std::string>(j, "name", "lock_definition");
        def.file = require<std::string>(j, "file", "lock_definition");
        def.line = require<int>(j, "line", "lock_definition");
        facts.lock_definitions.emplace(def.name, std::move(def));
    }

    facts.build_indexes();
    facts.validate();
    return facts;
}

CodeFacts load_code_facts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open code-facts bundle " + path.string());
    return load_code_facts(in);
}

std::string normalize_lock_name(const std::string& expr) {
    std::string s;
    s.reserve(expr.size());
    for (char c : expr)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    while (!s.empty() && (s.front() == '&' || s.front() == '*')) s.erase(s.begin());
    // Keep only the final member of a dereference chain.
    for (const char* sep : {"->", "."}) {
        const auto pos = s.rfind(sep);
        if (pos != std::string::npos) s = s.substr(pos + std::strlen(sep));
    }
    // Drop an array subscript: "locks[i]" -> "locks".
    const auto bracket = s.find('[');
    if (bracket != std::string::npos) s = s.substr(0, bracket);
    return s;
}

LockUseSite resolve_stack(const StackTrace& stack, const std::string& lock_name,
                          const std::string& primitive, const CodeFacts& facts,
                          int max_depth) {
    if (stack.frames.empty()) throw NotResolved("empty stack");
    if (max_depth < 1) throw NotResolved("max_depth must be >= 1");

    const std::string target = normalize_lock_name(lock_name);

    auto matching_site = [&](const std::string& function) -> const LockUseSite* {
        auto it = facts.sites_by_function.find(function);
        if (it == facts.sites_by_function.end()) return nullptr;
        const LockUseSite* best = nullptr;
        for (const LockUseSite* site : it->second) {
            if (site->primitive != primitive) continue;
            if (normalize_lock_name(site->lock_expr) != target) continue;
            if (!best || std::tie(site->file, site->line) < std::tie(best->file, best->line))
                best = site;
        }
        return best;
    };

    // BFS starts at the innermost recorded frame; the truncated part of the
    // stack lies below it along outgoing call edges.
    std::set<std::string> visited{stack.frames.front()};
    std::vector<std::string> frontier{stack.frames.front()};
    for (int depth = 0; depth <= max_depth && !frontier.empty(); ++depth) {
        const LockUseSite* best = nullptr;
        for (const auto& fn : frontier) {
            const LockUseSite* site = matching_site(fn);
            if (site &&
                (!best || std::tie(site->file, site->line) < std::tie(best->file, best->line)))
                best = site;
        }
        if (best) return *best;

        std::vector<std::string> next;
        for (const auto& fn : frontier) {
            if (facts.wrappers.count(fn)) continue;  // stop condition
            auto it = facts.outgoing.find(fn);
            if (it == facts.outgoing.end()) continue;
            for (const CallEdge* edge : it->second)
                if (visited.insert(edge->callee).second) next.push_back(edge->callee);
        }
        frontier = std::move(next);
    }
    throw NotResolved("no matching acquisition site for \"" + lock_name + "\" via " +
                      primitive + " within depth " + std::to_string(max_depth));
}

namespace {

// Innermost record whose line range contains the definition.
const SymbolRecord* containing_record(const CodeFacts& facts, const std::string& file,
                                      int line) {
    const SymbolRecord* best = nullptr;
    for (const auto& sym : facts.symbols) {
        if (sym.kind != SymbolKind::Record) continue;
        if (sym.file != file || line < sym.start_line || line > sym.end_line) continue;
        if (!best || sym.start_line > best->start_line) best = &sym;
    }
    return best;
}

}  // namespace

const char* confidence_name(MapConfidence c) {
    switch (c) {
        case MapConfidence::Direct: return "direct";
        case MapConfidence::ViaDefinition: return "via_definition";
        case MapConfidence::Unresolved: return "unresolved";
    }
    return "?";
}

ObjectMapping map_lock_to_object(const LockKey& key, const LockUseSite& site,
                                 const CodeFacts& facts, const ResolveOptions& opts) {
    ObjectMapping mapping;
    mapping.key = key;

    const std::string name = normalize_lock_name(key.lock_name);
    const bool generic =
        opts.generic_names.count(name) > 0 || facts.lock_definitions.count(name) > 1;

    std::string lookup = name;
    MapConfidence on_hit = MapConfidence::Direct;
    if (generic) {
        // Ambiguous by name; fall back to the expression at the resolved
        // acquisition site.
        lookup = normalize_lock_name(site.lock_expr);
        on_hit = MapConfidence::ViaDefinition;
        if (facts.lock_definitions.count(lookup) != 1) return mapping;
    }

    auto range = facts.lock_definitions.equal_range(lookup);
    if (range.first == range.second) return mapping;
    const LockDefinition& def = range.first->second;

    mapping.is_global = facts.globals.count(lookup) > 0;
    if (const SymbolRecord* rec = containing_record(facts, def.file, def.line)) {
        mapping.object_name = rec->name;
        mapping.confidence = on_hit;
    }
    return mapping;
}

double mapping_coverage(const std::vector<ObjectMapping>& mappings) {
    if (mappings.empty()) throw EmptyInput("no object mappings");
    std::size_t mapped = 0;
    for (const auto& m : mappings)
        if (m.confidence != MapConfidence::Unresolved) ++mapped;
    return static_cast<double>(mapped) / static_cast<double>(mappings.size());
}

double coverage_with_globals(const std::vector<ObjectMapping>& mappings) {
    if (mappings.empty()) throw EmptyInput("no object mappings");
    std::size_t mapped = 0;
    for (const auto& m : mappings)
        if (m.confidence != MapConfidence::Unresolved || m.is_global) ++mapped;
    return static_cast<double>(mapped) / static_cast<double>(mappings.size());
}

std::set<std::string> detect_wrappers(const CodeFacts& facts) {
    std::set<std::string> out;
    for (const auto& site : facts.lock_uses)
        if (site.param_like) out.insert(site.function);
    return out;
}

}  // namespace isolock
