// Command-line front end: the full pipeline, each stage on its own, a
// synthetic-data generator, and scoring against an emitted bundle.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "orgminer/cluster.hpp"
#include "orgminer/dataset.hpp"
#include "orgminer/pipeline.hpp"
#include "orgminer/prep.hpp"
#include "orgminer/reduce.hpp"
#include "orgminer/rules.hpp"
#include "orgminer/sha256.hpp"
#include "orgminer/synth.hpp"
#include "orgminer/trees.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
    std::string data;
    std::string codebook;
    std::string config;
    std::string out;
    std::uint64_t seed = 0;
    bool seedGiven = false;
};

void addIoFlags(CLI::App* cmd, CommonFlags& flags, bool configRequired) {
    cmd->add_option("--data", flags.data, "input data CSV")->required();
    cmd->add_option("--codebook", flags.codebook, "codebook JSON")->required();
    auto* config = cmd->add_option("--config", flags.config, "pipeline config JSON");
    if (configRequired) config->required();
    cmd->add_option("--out", flags.out, "output directory")->required();
    cmd->add_option("--seed", flags.seed, "seed override")
        ->each([&flags](const std::string&) { flags.seedGiven = true; });
}

orgminer::PipelineConfig resolveConfig(const CommonFlags& flags) {
    orgminer::PipelineConfig config;
    if (!flags.config.empty()) config = orgminer::PipelineConfig::load(flags.config);
    config.dataPath = flags.data;
    config.codebookPath = flags.codebook;
    config.outDir = flags.out;
    if (flags.seedGiven) config.seed = flags.seed;
    return config;
}

void writeTextFile(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw orgminer::Error(orgminer::ErrorCode::IoError, "cannot write " + path.string());
    }
}

std::string readTextFile(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw orgminer::Error(orgminer::ErrorCode::IoError, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

orgminer::Dataset ingest(const CommonFlags& flags) {
    const orgminer::Codebook codebook = orgminer::loadCodebook(flags.codebook);
    return orgminer::ingestCsv(flags.data, codebook);
}

int runPipelineCmd(const CommonFlags& flags) {
    const orgminer::PipelineConfig config = resolveConfig(flags);
    const orgminer::ReportBundle bundle = orgminer::runPipeline(config);
    std::cout << "pipeline complete: " << bundle.fileHashes.size() + 1
              << " files in " << bundle.outDir.string() << "\n";
    for (const auto& timing : bundle.timings) {
        std::cout << "  " << timing.stage << ": " << timing.seconds << " s\n";
    }
    return 0;
}

int runSynthCmd(const std::string& out, std::uint64_t seed, std::size_t rows,
                std::size_t groups, std::size_t signatureAttrs, double noise) {
    orgminer::SynthSpec spec;
    spec.seed = seed;
    spec.nRows = rows;
    spec.nGroups = groups;
    spec.signatureAttributesPerGroup = signatureAttrs;
    spec.noiseRate = noise;
    const auto [dataset, truth] = orgminer::generate(spec);
    fs::create_directories(out);
    orgminer::writeCsv(dataset, fs::path(out) / "data.csv");
    orgminer::writeCodebook(dataset.codebook(), fs::path(out) / "codebook.json");
    writeTextFile(fs::path(out) / "ground_truth.json", truth.toJson());
    std::cout << "synthetic dataset: " << dataset.rowCount() << " rows, "
              << dataset.columnCount() << " columns, " << groups << " planted groups -> "
              << out << "\n";
    return 0;
}

int runPrepCmd(const CommonFlags& flags) {
    const orgminer::PipelineConfig config = resolveConfig(flags);
    const orgminer::Dataset raw = ingest(flags);
    const orgminer::DropResult drop = orgminer::dropIncomplete(raw, config.maxMissingFraction);
    const orgminer::ImputeResult imputed = orgminer::impute(drop.dataset);
    orgminer::PrepReport report;
    report.rowsBefore = raw.rowCount();
    report.droppedRows = drop.droppedRows;
    report.imputations = imputed.edits;
    report.outliers = orgminer::outlierScan(imputed.dataset, config.zThreshold);
    fs::create_directories(flags.out);
    writeTextFile(fs::path(flags.out) / "prep_report.json", report.toJson());
    orgminer::writeCsv(imputed.dataset, fs::path(flags.out) / "prepped.csv");
    std::cout << "prep: dropped " << report.droppedRows.size() << " rows, imputed "
              << report.imputations.size() << " cells -> " << flags.out << "\n";
    return 0;
}

int runReduceCmd(const CommonFlags& flags) {
    const orgminer::PipelineConfig config = resolveConfig(flags);
    const orgminer::Dataset data = ingest(flags);
    const orgminer::AssociationMatrix matrix = orgminer::associationMatrix(data);
    const orgminer::ReductionReport report = orgminer::pruneRedundant(matrix, config.theta);
    const orgminer::Dataset reduced = orgminer::applyReduction(data, report);
    fs::create_directories(flags.out);
    writeTextFile(fs::path(flags.out) / "association_matrix.json", matrix.toJson());
    writeTextFile(fs::path(flags.out) / "reduction_report.json", report.toJson());
    orgminer::writeCsv(reduced, fs::path(flags.out) / "reduced.csv");
    orgminer::writeCodebook(reduced.codebook(), fs::path(flags.out) / "reduced_codebook.json");
    std::cout << "reduce: dropped " << report.drops.size() << " of "
              << data.columnCount() << " attributes -> " << flags.out << "\n";
    return 0;
}

int runClusterCmd(const CommonFlags& flags) {
    const orgminer::PipelineConfig config = resolveConfig(flags);
    const orgminer::Dataset data = ingest(flags);
    const orgminer::FeatureMatrix features = orgminer::encode(data);
    const std::size_t kMax = std::min(config.kMax, data.rowCount());
    const orgminer::KSelection selection =
        orgminer::selectK(features, config.kMin, kMax, config.seed, config.restarts);
    const orgminer::Clustering medoids =
        orgminer::kmedoids(features, selection.bestK, config.seed);
    const double ari =
        orgminer::adjustedRandIndex(selection.best.assignment, medoids.assignment);
    const orgminer::ClusterProfile profiles =
        orgminer::profileClusters(data, selection.best, config.liftFactor);
    fs::create_directories(flags.out);
    writeTextFile(fs::path(flags.out) / "clustering_report.json",
                  orgminer::clusteringReportJson(selection, selection.best, medoids, ari,
                                                 profiles));
    std::cout << "cluster: chose k = " << selection.bestK << " -> " << flags.out << "\n";
    return 0;
}

int runTreesCmd(const CommonFlags& flags, const std::string& target) {
    const orgminer::PipelineConfig config = resolveConfig(flags);
    const orgminer::Dataset data = ingest(flags);
    const orgminer::ComparisonTable comparison = orgminer::compareAlgorithms(
        data, target, config.treeParams, config.seed, config.folds);
    orgminer::TreeAlgorithm chosen = orgminer::TreeAlgorithm::Cart;
    for (orgminer::TreeAlgorithm algorithm :
         {orgminer::TreeAlgorithm::Cart, orgminer::TreeAlgorithm::GainRatio,
          orgminer::TreeAlgorithm::Chaid}) {
        if (orgminer::treeAlgorithmDisplayName(algorithm) == comparison.bestAlgorithm) {
            chosen = algorithm;
        }
    }
    const orgminer::Tree tree =
        orgminer::growTree(data, target, chosen, config.treeParams, config.seed);
    fs::create_directories(flags.out);
    nlohmann::ordered_json doc;
    doc["comparison"] = nlohmann::ordered_json::parse(comparison.toJson());
    doc["comparison_text"] = comparison.renderText();
    doc["chosen_algorithm"] = orgminer::treeAlgorithmName(chosen);
    doc["tree"] = nlohmann::ordered_json::parse(tree.toJson());
    doc["tree_text"] = tree.renderText();
    writeTextFile(fs::path(flags.out) / "trees_report.json", doc.dump(2) + "\n");
    std::cout << comparison.renderText();
    std::cout << "trees: best " << comparison.bestAlgorithm << " -> " << flags.out << "\n";
    return 0;
}

int runRulesCmd(const CommonFlags& flags, const std::string& target) {
    const orgminer::PipelineConfig config = resolveConfig(flags);
    const orgminer::Dataset data = ingest(flags);
    const orgminer::Discretization disc =
        orgminer::discretizeNumerics(data, config.discretizeBins);
    const orgminer::RuleSet rules =
        orgminer::gri(disc.dataset, target, config.ruleParams);
    fs::create_directories(flags.out);
    writeTextFile(fs::path(flags.out) / "rules_report.json", rules.toJson());
    std::cout << "rules: " << rules.rules.size() << " rules for " << target << " -> "
              << flags.out << "\n";
    return 0;
}

int runScoreCmd(const std::string& bundle, const std::string& record) {
    const orgminer::ScoreResult result =
        orgminer::scoreNewRecord(bundle, readTextFile(record));
    nlohmann::ordered_json doc;
    doc["predicted_cluster"] = result.predictedCluster;
    doc["matched_rules"] = nlohmann::ordered_json::array();
    for (const orgminer::Rule& rule : result.matchedRules) {
        doc["matched_rules"].push_back(orgminer::ruleText(rule));
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"orgminer: informal-organization mining over questionnaire data"};
    app.require_subcommand(1);

    CommonFlags pipelineFlags;
    auto* pipelineCmd = app.add_subcommand("pipeline", "run every stage and emit the bundle");
    addIoFlags(pipelineCmd, pipelineFlags, /*configRequired=*/true);

    std::string synthOut;
    std::uint64_t synthSeed = 0;
    std::size_t synthRows = 210, synthGroups = 9, synthSignatureAttrs = 4;
    double synthNoise = 0.05;
    auto* synthCmd = app.add_subcommand("synth", "generate a planted synthetic dataset");
    synthCmd->add_option("--out", synthOut, "output directory")->required();
    synthCmd->add_option("--seed", synthSeed, "generator seed");
    synthCmd->add_option("--rows", synthRows, "row count");
    synthCmd->add_option("--groups", synthGroups, "planted group count");
    synthCmd->add_option("--signature-attrs", synthSignatureAttrs,
                         "signature attributes per group");
    synthCmd->add_option("--noise", synthNoise, "signature noise rate");

    CommonFlags prepFlags, reduceFlags, clusterFlags, treesFlags, rulesFlags;
    auto* prepCmd = app.add_subcommand("prep", "drop sparse rows, impute, flag outliers");
    addIoFlags(prepCmd, prepFlags, false);
    auto* reduceCmd = app.add_subcommand("reduce", "drop redundant attributes");
    addIoFlags(reduceCmd, reduceFlags, false);
    auto* clusterCmd = app.add_subcommand("cluster", "select k and profile clusters");
    addIoFlags(clusterCmd, clusterFlags, false);
    auto* treesCmd = app.add_subcommand("trees", "compare tree algorithms, grow the best");
    addIoFlags(treesCmd, treesFlags, false);
    std::string treesTarget = "cluster";
    treesCmd->add_option("--target", treesTarget, "target attribute");
    auto* rulesCmd = app.add_subcommand("rules", "mine association rules");
    addIoFlags(rulesCmd, rulesFlags, false);
    std::string rulesTarget = "cluster";
    rulesCmd->add_option("--target", rulesTarget, "consequent attribute");

    std::string scoreBundle, scoreRecord;
    auto* scoreCmd = app.add_subcommand("score", "score a new record against a bundle");
    scoreCmd->add_option("--bundle", scoreBundle, "pipeline output directory")->required();
    scoreCmd->add_option("--record", scoreRecord, "single-record CSV file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(pipelineCmd)) return runPipelineCmd(pipelineFlags);
        if (app.got_subcommand(synthCmd)) {
            return runSynthCmd(synthOut, synthSeed, synthRows, synthGroups,
                               synthSignatureAttrs, synthNoise);
        }
        if (app.got_subcommand(prepCmd)) return runPrepCmd(prepFlags);
        if (app.got_subcommand(reduceCmd)) return runReduceCmd(reduceFlags);
        if (app.got_subcommand(clusterCmd)) return runClusterCmd(clusterFlags);
        if (app.got_subcommand(treesCmd)) return runTreesCmd(treesFlags, treesTarget);
        if (app.got_subcommand(rulesCmd)) return runRulesCmd(rulesFlags, rulesTarget);
        if (app.got_subcommand(scoreCmd)) return runScoreCmd(scoreBundle, scoreRecord);
    } catch (const orgminer::Error& e) {
        std::cerr << "orgminer: error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "orgminer: error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
