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

enum class SymbolKind { Function, Record, GlobalVariable };

struct SymbolRecord {
    std::string name;
    SymbolKind kind = SymbolKind::Function;
    std::string file;
    int start_line = 0;
    int end_line = 0;
    std::optional<std::string> type_name;
};

struct CallEdge {
    std::string caller;
    std::string callee;
    std::string site_file;
    int site_line = 0;
};

struct LockUseSite {
    std::string function;
    std::string file;
    int line = 0;
    std::string lock_expr;  // as written, e.g. "&fs->lock"
    std::string primitive;
    bool param_like = false;  // acquires on a formal parameter

    auto operator<=>(const LockUseSite&) const = default;
};

struct LockDefinition {
    std::string name;
    std::string file;
    int line = 0;
};

struct CodeFacts {
    std::vector<SymbolRecord> symbols;
    std::vector<CallEdge> calls;
    std::vector<LockUseSite> lock_uses;
    std::set<std::string> wrappers;
    std::set<std::string> globals;
    std::multimap<std::string, LockDefinition> lock_definitions;

    // Derived indexes, built on load.
    std::map<std::string, std::vector<const CallEdge*>> outgoing;
    std::map<std::string, std::vector<const LockUseSite*>> sites_by_function;
    std::set<std::string> function_names;

    void build_indexes();
    void validate() const;
};

CodeFacts load_code_facts(std::istream& in);
CodeFacts load_code_facts(const std::filesystem::path& path);

enum class MapConfidence { Direct, ViaDefinition, Unresolved };

const char* confidence_name(MapConfidence c);

struct ObjectMapping {
    LockKey key;
    std::optional<std::string> object_name;  // present iff confidence != Unresolved
    MapConfidence confidence = MapConfidence::Unresolved;
    bool is_global = false;  // global lock: counted separately in coverage
};

struct ResolveOptions {
    // Stacks truncate a few levels short of the true site; 6 bounds the
    // search while leaving headroom.
    int max_depth = 6;
    std::set<std::string> generic_names = {"lock", "s_lock", "i_lock"};
};

// Normalizes a lock expression to the final member name:
// "&journal->j_state_lock" -> "j_state_lock".
std::string normalize_lock_name(const std::string& expr);

// BFS over outgoing call edges starting at the stack's innermost recorded
// frame. Wrapper functions are never expanded. Ties at equal depth break
// by (file, line).
LockUseSite resolve_stack(const StackTrace& stack, const std::string& lock_name,
                          const std::string& primitive, const CodeFacts& facts,
                          int max_depth);

ObjectMapping map_lock_to_object(const LockKey& key, const LockUseSite& site,
                                 const CodeFacts& facts, const ResolveOptions& opts = {});

// Fraction of mappings with a resolved object. Globals with no containing
// record are excluded from the numerator here; coverage_with_globals
// counts them as mapped.
double mapping_coverage(const std::vector<ObjectMapping>& mappings);
double coverage_with_globals(const std::vector<ObjectMapping>& mappings);

std::set<std::string> detect_wrappers(const CodeFacts& facts);

}  // namespace isolock
