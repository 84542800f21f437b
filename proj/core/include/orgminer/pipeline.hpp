#pragma once
// End-to-end batch run: ingest -> prep -> reduce -> cluster -> trees ->
// rules -> report bundle, plus scoring new records against a bundle.

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "orgminer/cluster.hpp"
#include "orgminer/dataset.hpp"
#include "orgminer/prep.hpp"
#include "orgminer/reduce.hpp"
#include "orgminer/rules.hpp"
#include "orgminer/trees.hpp"

namespace orgminer {

struct PipelineConfig {
    std::filesystem::path dataPath;
    std::filesystem::path codebookPath;
    std::filesystem::path outDir;
    std::uint64_t seed = 0;

    double maxMissingFraction = 0.5;
    double zThreshold = 3.5;
    double theta = 0.4;
    std::size_t kMin = 2;
    std::size_t kMax = 15;
    std::size_t restarts = 10;
    double liftFactor = 1.5;
    TreeParams treeParams;
    std::size_t folds = 5;
    RuleParams ruleParams;
    std::size_t discretizeBins = 4;

    // Tunables only; paths and seed stay on the struct.
    static PipelineConfig fromJsonText(const std::string& text);
    static PipelineConfig load(const std::filesystem::path& path);
    std::string settingsJson() const;  // knob echo for the manifest
};

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct ReportBundle {
    PrepReport prep;
    ReductionReport reduction;
    KSelection selection;
    Clustering kmedoidsResult;
    double kmeansVsKmedoidsAri = 0.0;
    ClusterProfile profiles;
    ComparisonTable comparison;
    Tree tree;
    RuleSet rules;
    LinkedReport linked;
    std::vector<StageTiming> timings;
    std::map<std::string, std::string> fileHashes;  // bundle file -> sha256
    std::filesystem::path outDir;
};

// Runs every stage, writing each report as its stage completes; a stage
// failure still writes the manifest for the files emitted so far.
ReportBundle runPipeline(const PipelineConfig& config);

struct ScoreResult {
    std::string predictedCluster;
    std::vector<Rule> matchedRules;  // confidence-1.0 rules the record satisfies
};

ScoreResult scoreNewRecord(const std::filesystem::path& bundleDir,
                           const std::string& recordCsv);

} // namespace orgminer
