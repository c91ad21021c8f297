#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "isolock/report.hpp"
#include "isolock/simgen.hpp"

namespace {

int cmd_analyze(const std::string& manifest_path, const std::string& out_dir,
                const std::string& restrict_mode, int max_depth) {
    const auto manifest = isolock::load_manifest(manifest_path);
    isolock::AnalyzeOptions opts;
    opts.restrict_to = restrict_mode == "all" ? isolock::RateRestriction::All
                                              : isolock::RateRestriction::Shared;
    opts.max_depth = max_depth;
    const auto out = isolock::run_analyze(manifest, out_dir, opts);
    std::cout << "wrote " << out.sharing_csv.string() << '\n'
              << "wrote " << out.rates_csv.string() << '\n'
              << "wrote " << out.subsystems_csv.string() << '\n'
              << "wrote " << out.score_csv.string() << '\n';
    return 0;
}

int cmd_resolve(const std::string& manifest_path, const std::string& code_facts,
                const std::string& out_dir, int max_depth) {
    const auto manifest = isolock::load_manifest(manifest_path);
    std::filesystem::path facts_path = code_facts;
    if (facts_path.empty()) {
        if (!manifest.code_facts)
            throw isolock::ConfigError("no code-facts bundle: pass --code-facts or set it "
                                       "in the manifest");
        facts_path = *manifest.code_facts;
    }
    const auto out = isolock::run_resolve(manifest, facts_path, out_dir, max_depth);
    std::cout << "wrote " << out.mapping_csv.string() << '\n'
              << "wrote " << out.rates_csv.string() << '\n';
    std::printf("mapping_coverage %.3f (with globals %.3f)\n", out.coverage,
                out.coverage_with_globals);
    return 0;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir,
                 long long seed_override, bool has_seed) {
    auto config = isolock::load_sim_config(config_path);
    if (has_seed) config.seed = static_cast<std::uint64_t>(seed_override);
    const auto result = isolock::simulate(config);
    const auto emitted = isolock::emit_traces(result, out_dir);
    for (const auto& p : emitted.trace_files) std::cout << "wrote " << p.string() << '\n';
    for (const auto& p : emitted.stack_files) std::cout << "wrote " << p.string() << '\n';
    std::cout << "wrote " << emitted.timeline_csv.string() << '\n';
    return 0;
}

int cmd_report(const std::string& analyze_dir) {
    std::cout << isolock::render_report(analyze_dir);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Kernel lock trace isolation analyzer"};
    app.require_subcommand(1);

    std::string manifest_path, out_dir = "out", code_facts, restrict_mode = "shared";
    std::string config_path, analyze_dir;
    int max_depth = 6;
    long long seed_override = 0;

    auto* analyze = app.add_subcommand("analyze", "Sharing, rates and isolation reports");
    analyze->add_option("--manifest", manifest_path, "Session manifest (JSON)")->required();
    analyze->add_option("--out", out_dir, "Output directory");
    analyze->add_option("--restrict", restrict_mode, "Cumulative-rate scope")
        ->check(CLI::IsMember({"shared", "all"}));
    analyze->add_option("--max-depth", max_depth, "Stack resolution BFS depth");

    auto* resolve = app.add_subcommand("resolve", "Stack resolution and object mapping");
    resolve->add_option("--manifest", manifest_path, "Session manifest (JSON)")->required();
    resolve->add_option("--code-facts", code_facts, "Code-facts bundle (JSON)");
    resolve->add_option("--out", out_dir, "Output directory");
    resolve->add_option("--max-depth", max_depth, "Stack resolution BFS depth");

    auto* simulate = app.add_subcommand("simulate", "Deterministic contention simulator");
    simulate->add_option("--config", config_path, "Simulation config (JSON)")->required();
    simulate->add_option("--out", out_dir, "Output directory");
    auto* seed_opt = simulate->add_option("--seed", seed_override, "Override config seed");

    auto* report = app.add_subcommand("report", "Summarize a previous analyze output");
    report->add_option("--dir", analyze_dir, "Analyze output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(analyze))
            return cmd_analyze(manifest_path, out_dir, restrict_mode, max_depth);
        if (app.got_subcommand(resolve))
            return cmd_resolve(manifest_path, code_facts, out_dir, max_depth);
        if (app.got_subcommand(simulate))
            return cmd_simulate(config_path, out_dir, seed_override, !seed_opt->empty());
        if (app.got_subcommand(report)) return cmd_report(analyze_dir);
    } catch (const isolock::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
