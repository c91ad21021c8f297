#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "isolock/analysis.hpp"
#include "isolock/ingest.hpp"
#include "isolock/staticmap.hpp"

namespace isolock {

inline constexpr const char* kToolVersion = "0.1.0";

struct RunSpec {
    std::filesystem::path trace;
    std::filesystem::path stacks;
    double duration_s = 0.0;
};

struct WorkloadSpec {
    std::string id;
    Platform platform = Platform::Host;
    std::vector<RunSpec> runs;
};

struct SessionManifest {
    std::vector<WorkloadSpec> workloads;
    FilterSpec filter;
    std::optional<std::filesystem::path> code_facts;
    std::filesystem::path source_path;  // for the provenance sidecar
};

// Validates that every referenced file exists and each workload has at
// least one run.
SessionManifest load_manifest(const std::filesystem::path& path);

enum class RateRestriction { Shared, All };

struct AnalyzeOptions {
    RateRestriction restrict_to = RateRestriction::Shared;
    int max_depth = 6;
};

struct AnalyzeOutput {
    std::filesystem::path sharing_csv;
    std::filesystem::path rates_csv;
    std::filesystem::path subsystems_csv;
    std::filesystem::path score_csv;
    std::filesystem::path metadata_json;
};

AnalyzeOutput run_analyze(const SessionManifest& manifest,
                          const std::filesystem::path& out_dir,
                          const AnalyzeOptions& opts = {});

struct ResolveOutput {
    std::filesystem::path mapping_csv;
    std::filesystem::path rates_csv;
    double coverage = 0.0;
    double coverage_with_globals = 0.0;
    std::vector<ObjectMapping> mappings;
};

ResolveOutput run_resolve(const SessionManifest& manifest,
                          const std::filesystem::path& code_facts_path,
                          const std::filesystem::path& out_dir, int max_depth = 6);

// Human-readable summary of a previous analyze output directory.
std::string render_report(const std::filesystem::path& analyze_dir);

}  // namespace isolock
