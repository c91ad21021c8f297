#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <sstream>

#include "isolock/staticmap.hpp"

using namespace isolock;

namespace {

const std::filesystem::path kFixtures = ISOLOCK_FIXTURE_DIR;

StackTrace stack_of(std::vector<std::string> frames) {
    StackTrace st;
    st.stack_id = 1;
    st.frames = std::move(frames);
    return st;
}

// A small synthetic graph: entry -> a -> b -> c, with sites at a and c.
CodeFacts graph_facts() {
    CodeFacts facts;
    for (const char* fn : {"entry", "a", "b", "c", "wrap"})
        facts.symbols.push_back({fn, SymbolKind::Function, "fs/x.c", 1, 10, {}});
    facts.calls = {
        {"entry", "a", "fs/x.c", 2},
        {"a", "b", "fs/x.c", 3},
        {"b", "c", "fs/x.c", 4},
        {"entry", "wrap", "fs/x.c", 5},
        {"wrap", "c", "fs/x.c", 6},
    };
    facts.lock_uses = {
        {"a", "fs/x.c", 30, "&s->lk", "_raw_spin_lock", false},
        {"c", "fs/x.c", 50, "&s->deep_lk", "_raw_spin_lock", false},
    };
    facts.build_indexes();
    facts.validate();
    return facts;
}

// Exhaustive oracle: enumerate every function reachable within max_depth
// edges (wrappers not expanded) and pick the minimum-depth matching site,
// ties by (file, line).
std::optional<LockUseSite> dfs_oracle(const StackTrace& stack, const std::string& name,
                                      const std::string& primitive, const CodeFacts& facts,
                                      int max_depth) {
    std::map<std::string, int> depth_of;
    std::function<void(const std::string&, int)> walk = [&](const std::string& fn, int d) {
        auto it = depth_of.find(fn);
        if (it != depth_of.end() && it->second <= d) return;
        depth_of[fn] = d;
        if (d >= max_depth || facts.wrappers.count(fn)) return;
        auto out = facts.outgoing.find(fn);
        if (out == facts.outgoing.end()) return;
        for (const CallEdge* edge : out->second) walk(edge->callee, d + 1);
    };
    walk(stack.frames.front(), 0);

    const std::string target = normalize_lock_name(name);
    std::optional<LockUseSite> best;
    int best_depth = max_depth + 1;
    for (const auto& site : facts.lock_uses) {
        auto it = depth_of.find(site.function);
        if (it == depth_of.end()) continue;
        if (site.primitive != primitive || normalize_lock_name(site.lock_expr) != target)
            continue;
        if (it->second < best_depth ||
            (it->second == best_depth &&
             std::tie(site.file, site.line) < std::tie(best->file, best->line))) {
            best = site;
            best_depth = it->second;
        }
    }
    return best;
}

}  // namespace

TEST_CASE("normalize_lock_name") {
    CHECK(normalize_lock_name("&journal->j_state_lock") == "j_state_lock");
    CHECK(normalize_lock_name("&fs->lock") == "lock");
    CHECK(normalize_lock_name("sb.s_lock") == "s_lock");
    CHECK(normalize_lock_name("locks[i]") == "locks");
    CHECK(normalize_lock_name(" & ei -> i_data_sem ") == "i_data_sem");
    CHECK(normalize_lock_name("tasklist_lock") == "tasklist_lock");
}

TEST_CASE("load_code_facts") {
    SUBCASE("bundled fixture loads and indexes") {
        const auto facts = load_code_facts(kFixtures / "ext4_facts.json");
        CHECK(facts.function_names.count("ext4_map_blocks") == 1);
        CHECK(facts.outgoing.at("ext4_file_read_iter").size() == 1);
        CHECK(facts.lock_definitions.count("i_data_sem") == 1);
    }
    SUBCASE("empty object is valid") {
        std::istringstream in("{}");
        CHECK(load_code_facts(in).symbols.empty());
    }
    SUBCASE("wrapper naming an unknown function") {
        std::istringstream in(R"({"wrappers":["ghost"]})");
        CHECK_THROWS_AS(load_code_facts(in), DanglingReference);
    }
    SUBCASE("global without a definition") {
        std::istringstream in(R"({"globals":["ghost_lock"]})");
        CHECK_THROWS_AS(load_code_facts(in), DanglingReference);
    }
    SUBCASE("malformed symbol") {
        std::istringstream in(R"({"symbols":[{"name":"x"}]})");
        CHECK_THROWS_AS(load_code_facts(in), SchemaError);
    }
    SUBCASE("not json") {
        std::istringstream in("not json");
        CHECK_THROWS_AS(load_code_facts(in), SchemaError);
    }
}

TEST_CASE("resolve_stack") {
    const auto facts = graph_facts();
    SUBCASE("depth 0: site in the recorded frame itself") {
        const auto site = resolve_stack(stack_of({"a", "entry"}), "lk",
                                        "_raw_spin_lock", facts, 6);
        CHECK(site.function == "a");
        CHECK(site.line == 30);
    }
    SUBCASE("depth 2: truncated stack, site two calls below") {
        const auto site = resolve_stack(stack_of({"a", "entry"}), "deep_lk",
                                        "_raw_spin_lock", facts, 6);
        CHECK(site.function == "c");
    }
    SUBCASE("depth bound is respected") {
        CHECK_THROWS_AS(resolve_stack(stack_of({"a", "entry"}), "deep_lk",
                                      "_raw_spin_lock", facts, 1),
                        NotResolved);
    }
    SUBCASE("wrappers are never expanded") {
        auto wrapped = facts;
        // Reaching c only through wrap must fail when wrap is a wrapper.
        wrapped.calls = {{"entry", "wrap", "fs/x.c", 5}, {"wrap", "c", "fs/x.c", 6}};
        wrapped.wrappers = {"wrap"};
        wrapped.build_indexes();
        CHECK_THROWS_AS(resolve_stack(stack_of({"entry"}), "deep_lk", "_raw_spin_lock",
                                      wrapped, 6),
                        NotResolved);
        // Removing the wrapper flag changes the result.
        wrapped.wrappers.clear();
        wrapped.build_indexes();
        const auto site =
            resolve_stack(stack_of({"entry"}), "deep_lk", "_raw_spin_lock", wrapped, 6);
        CHECK(site.function == "c");
    }
    SUBCASE("unknown lock name") {
        CHECK_THROWS_AS(resolve_stack(stack_of({"a"}), "ghost", "_raw_spin_lock", facts, 6),
                        NotResolved);
    }
    SUBCASE("matches the exhaustive oracle") {
        for (const char* start : {"entry", "a", "b", "c", "wrap"}) {
            for (const char* name : {"lk", "deep_lk"}) {
                const auto oracle =
                    dfs_oracle(stack_of({start}), name, "_raw_spin_lock", facts, 6);
                if (oracle) {
                    const auto got =
                        resolve_stack(stack_of({start}), name, "_raw_spin_lock", facts, 6);
                    CHECK(got == *oracle);
                } else {
                    CHECK_THROWS_AS(
                        resolve_stack(stack_of({start}), name, "_raw_spin_lock", facts, 6),
                        NotResolved);
                }
            }
        }
    }
    SUBCASE("deterministic across repeated calls") {
        const auto first = resolve_stack(stack_of({"entry"}), "deep_lk",
                                         "_raw_spin_lock", facts, 6);
        for (int i = 0; i < 10; ++i)
            CHECK(resolve_stack(stack_of({"entry"}), "deep_lk", "_raw_spin_lock", facts, 6) ==
                  first);
    }
}

TEST_CASE("map_lock_to_object on the ext4 fixture") {
    const auto facts = load_code_facts(kFixtures / "ext4_facts.json");
    SUBCASE("member lock maps to its containing record") {
        const auto site = resolve_stack(stack_of({"ext4_file_read_iter"}), "i_data_sem",
                                        "down_read", facts, 6);
        LockKey key{"&ei->i_data_sem", site.function, site.file, LockClass::Semaphore};
        const auto mapping = map_lock_to_object(key, site, facts);
        REQUIRE(mapping.object_name.has_value());
        CHECK(*mapping.object_name == "ext4_inode_info");
        CHECK(mapping.confidence == MapConfidence::Direct);
    }
    SUBCASE("journal state lock maps through jbd2") {
        const auto site = resolve_stack(stack_of({"jbd2_journal_start"}), "j_state_lock",
                                        "_raw_write_lock", facts, 6);
        LockKey key{"&journal->j_state_lock", site.function, site.file, LockClass::Rwlock};
        const auto mapping = map_lock_to_object(key, site, facts);
        REQUIRE(mapping.object_name.has_value());
        CHECK(*mapping.object_name == "journal_s");
    }
    SUBCASE("file-scope global has no containing record") {
        const auto site = resolve_stack(stack_of({"release_task"}), "tasklist_lock",
                                        "_raw_write_lock_irq", facts, 6);
        LockKey key{"tasklist_lock", site.function, site.file, LockClass::Rwlock};
        const auto mapping = map_lock_to_object(key, site, facts);
        CHECK(mapping.confidence == MapConfidence::Unresolved);
        CHECK(mapping.is_global);
    }
    SUBCASE("definition outside every record range stays unresolved") {
        auto edited = facts;
        for (auto& [name, def] : edited.lock_definitions)
            if (name == "i_data_sem") def.line = 5000;
        const LockUseSite site{"ext4_map_blocks", "fs/ext4/inode.c", 530,
                               "&ei->i_data_sem", "down_read", false};
        LockKey key{"&ei->i_data_sem", site.function, site.file, LockClass::Semaphore};
        CHECK(map_lock_to_object(key, site, edited).confidence ==
              MapConfidence::Unresolved);
    }
}

TEST_CASE("generic names fall back to the site expression") {
    CodeFacts facts;
    facts.symbols = {
        {"fs_struct", SymbolKind::Record, "include/fs_struct.h", 5, 20, {}},
        {"use_fs", SymbolKind::Function, "fs/fs_struct.c", 1, 40, {}},
    };
    facts.lock_uses = {{"use_fs", "fs/fs_struct.c", 12, "&fs->lock", "_raw_spin_lock", false}};
    facts.lock_definitions.emplace("lock",
                                   LockDefinition{"lock", "include/fs_struct.h", 10});
    facts.build_indexes();
    facts.validate();

    LockKey key{"&fs->lock", "use_fs", "fs/fs_struct.c", LockClass::Spinlock};
    const auto mapping = map_lock_to_object(key, facts.lock_uses[0], facts);
    REQUIRE(mapping.object_name.has_value());
    CHECK(*mapping.object_name == "fs_struct");
    CHECK(mapping.confidence == MapConfidence::ViaDefinition);

    // A second definition of the same generic name makes it ambiguous.
    auto ambiguous = facts;
    ambiguous.lock_definitions.emplace("lock", LockDefinition{"lock", "mm/other.h", 3});
    CHECK(map_lock_to_object(key, facts.lock_uses[0], ambiguous).confidence ==
          MapConfidence::Unresolved);
}

TEST_CASE("mapping_coverage") {
    auto mapped = [] {
        ObjectMapping m;
        m.object_name = "obj";
        m.confidence = MapConfidence::Direct;
        return m;
    };
    SUBCASE("3 of 4") {
        std::vector<ObjectMapping> ms{mapped(), mapped(), mapped(), ObjectMapping{}};
        CHECK(mapping_coverage(ms) == doctest::Approx(0.75));
    }
    SUBCASE("globals counted only in the second numerator") {
        ObjectMapping g;
        g.is_global = true;
        std::vector<ObjectMapping> ms{mapped(), g};
        CHECK(mapping_coverage(ms) == doctest::Approx(0.5));
        CHECK(coverage_with_globals(ms) == doctest::Approx(1.0));
    }
    SUBCASE("empty input") {
        CHECK_THROWS_AS(mapping_coverage({}), EmptyInput);
    }
    SUBCASE("invariant under permutation") {
        std::vector<ObjectMapping> ms;
        for (int i = 0; i < 20; ++i)
            ms.push_back(i % 3 ? mapped() : ObjectMapping{});
        const double before = mapping_coverage(ms);
        std::mt19937_64 rng(5);
        std::shuffle(ms.begin(), ms.end(), rng);
        CHECK(mapping_coverage(ms) == doctest::Approx(before));
    }
}

TEST_CASE("detect_wrappers flags parameter-receiving acquirers") {
    const auto facts = load_code_facts(kFixtures / "ext4_facts.json");
    const auto wrappers = detect_wrappers(facts);
    CHECK(wrappers.count("ext4_lock_group") == 1);
    // Functions acquiring on their own members are not wrappers.
    CHECK(wrappers.count("ext4_map_blocks") == 0);
    CHECK(wrappers.count("start_this_handle") == 0);
}
