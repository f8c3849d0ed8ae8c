#pragma once

#include <map>
#include <string>
#include <vector>

#include "aidx/config.hpp"
#include "aidx/corpus.hpp"
#include "aidx/index.hpp"

namespace aidx::pipeline {

/// `ticker,cik` mapping between price series and filers.
std::map<std::string, corpus::Cik> load_universe(const std::filesystem::path& path);

/// Parses the configured scheme list ("aii,saii,taii05,taii5x"; a custom
/// discount spells as "taii<alpha>", e.g. "taii2.5").
std::vector<index::IndexSpec> configured_index_specs(const PipelineConfig& config);

/// Stage entry points. Each one reads its inputs from the locations in the
/// config, writes its artifacts under `out_dir`, and throws on failure.
/// Artifacts are byte-deterministic for fixed inputs, config and seed.
void run_ingest(const PipelineConfig& config);
void run_score(const PipelineConfig& config);
void run_build_index(const PipelineConfig& config);
void run_event_study(const PipelineConfig& config);
void run_regress(const PipelineConfig& config);
void run_report(const PipelineConfig& config);

}  // namespace aidx::pipeline
