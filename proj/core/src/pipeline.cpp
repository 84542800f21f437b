#include "orgminer/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "json.hpp"
#include "orgminer/sha256.hpp"
#include "orgminer/synth.hpp"

namespace orgminer {

namespace {

namespace fs = std::filesystem;

void checkKeys(const nlohmann::json& obj, const std::vector<std::string>& allowed,
               const std::string& context) {
    for (const auto& [key, value] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
            throw Error(ErrorCode::ParseError, "unknown config key " + context + key);
        }
    }
}

std::string readFileOrThrow(const fs::path& path, ErrorCode code) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(code, "cannot read " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

void writeBundleFile(ReportBundle& bundle, const fs::path& dir, const std::string& name,
                     const std::string& content) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write " + path.string());
    }
    bundle.fileHashes[name] = sha256Hex(content);
}

void writeManifest(ReportBundle& bundle, const PipelineConfig& config) {
    nlohmann::ordered_json doc;
    doc["files"] = nlohmann::ordered_json::object();
    for (const auto& [name, hash] : bundle.fileHashes) doc["files"][name] = hash;
    doc["timings"] = nlohmann::ordered_json::array();
    for (const auto& timing : bundle.timings) {
        doc["timings"].push_back({{"stage", timing.stage}, {"seconds", timing.seconds}});
    }
    doc["settings"] = nlohmann::ordered_json::parse(config.settingsJson());
    std::ofstream out(config.outDir / "manifest.json", std::ios::binary);
    out << doc.dump(2) << "\n";
}

double pickNumber(const nlohmann::json& obj, const char* key, double fallback) {
    return obj.contains(key) ? obj.at(key).get<double>() : fallback;
}

std::size_t pickSize(const nlohmann::json& obj, const char* key, std::size_t fallback) {
    return obj.contains(key) ? obj.at(key).get<std::size_t>() : fallback;
}

// Numbered drop lines shared by the reduction report and the summary.
std::string droppedFactorLine(std::size_t ordinal, const AttributeDrop& drop) {
    char line[256];
    std::snprintf(line, sizeof(line), "%zu. %s - correlated with %s (correlation=%.3f)",
                  ordinal, drop.dropped.c_str(), drop.retained.c_str(), drop.score);
    return line;
}

std::string summaryMarkdown(const ReportBundle& bundle, const PipelineConfig& config,
                            std::size_t columnsBefore) {
    std::string md = "# Informal organization mining report\n\n";

    md += "## Data preparation\n\n";
    md += "- rows before preparation: " + std::to_string(bundle.prep.rowsBefore) + "\n";
    md += "- rows dropped for excessive missingness: " +
          std::to_string(bundle.prep.droppedRows.size()) + "\n";
    md += "- cells imputed: " + std::to_string(bundle.prep.imputations.size()) + "\n";
    md += "- numeric outliers flagged (robust z > " + formatNumber(bundle.prep.outliers.zThreshold) +
          "): " + std::to_string(bundle.prep.outliers.flags.size()) + "\n\n";

    md += "## Attribute reduction\n\n";
    md += "Association threshold: " + formatNumber(bundle.reduction.threshold) + "\n\n";
    if (bundle.reduction.drops.empty()) {
        md += "No attribute pair reached the threshold; nothing was dropped.\n\n";
    } else {
        for (size_t i = 0; i < bundle.reduction.drops.size(); ++i) {
            md += droppedFactorLine(i + 1, bundle.reduction.drops[i]) + "\n";
        }
        md += "\n";
    }
    md += "Retained " + std::to_string(bundle.reduction.survivors.size()) + " of " +
          std::to_string(columnsBefore) + " attributes.\n\n";

    md += "## Cluster selection\n\n";
    md += "| k | silhouette | WCSS |\n| --- | --- | --- |\n";
    for (const auto& row : bundle.selection.table) {
        char silhouetteText[32], wcssText[32];
        std::snprintf(silhouetteText, sizeof(silhouetteText), "%.4f", row.silhouette);
        std::snprintf(wcssText, sizeof(wcssText), "%.2f", row.wcss);
        md += "| " + std::to_string(row.k) + " | " + silhouetteText + " | " + wcssText + " |\n";
    }
    char ariText[32];
    std::snprintf(ariText, sizeof(ariText), "%.4f", bundle.kmeansVsKmedoidsAri);
    md += "\nChosen k = " + std::to_string(bundle.selection.bestK) +
          " (best silhouette). K-means vs K-medoids agreement (ARI): " + ariText + "\n\n";

    md += "## Cluster profiles\n\n";
    md += clusterNarrativesMarkdown(bundle.profiles);
    md += "\n";

    md += "## Decision tree comparison\n\n";
    md += bundle.comparison.renderMarkdown();
    md += "\nBest algorithm: " + bundle.comparison.bestAlgorithm + ". The chosen tree has " +
          std::to_string(bundle.tree.leafCount()) + " leaves; its root splits on " +
          (bundle.tree.rootAttribute().empty() ? std::string("nothing (single leaf)")
                                               : bundle.tree.rootAttribute()) +
          ".\n\n";

    md += "## Association rules\n\n";
    md += std::to_string(bundle.rules.rules.size()) + " rules at confidence >= " +
          formatNumber(config.ruleParams.minConfidence) + " and support >= " +
          formatNumber(config.ruleParams.minSupport) + ", targeting cluster membership.\n\n";
    md += bundle.linked.renderMarkdown();
    return md;
}

std::string modelJson(const ReportBundle& bundle, const Codebook& originalCodebook,
                      const ImputeStats& stats, const Discretization& disc,
                      std::size_t discretizeBins) {
    nlohmann::ordered_json doc;
    doc["target"] = bundle.tree.target;
    doc["codebook"] = nlohmann::ordered_json::parse(codebookToJsonText(originalCodebook));
    nlohmann::ordered_json impute = nlohmann::ordered_json::array();
    for (size_t i = 0; i < stats.columns.size(); ++i) {
        impute.push_back({{"column", stats.columns[i]},
                          {"value", formatValue(stats.replacements[i])}});
    }
    doc["impute"] = std::move(impute);
    nlohmann::ordered_json dropped = nlohmann::ordered_json::array();
    for (const auto& drop : bundle.reduction.drops) dropped.push_back(drop.dropped);
    doc["dropped_columns"] = std::move(dropped);
    doc["tree"] = nlohmann::ordered_json::parse(bundle.tree.toJson());
    nlohmann::ordered_json discDoc;
    discDoc["bins"] = discretizeBins;
    discDoc["edges"] = disc.edges;
    discDoc["labels"] = disc.labels;
    doc["discretize"] = std::move(discDoc);
    doc["rules"] = nlohmann::ordered_json::parse(bundle.rules.toJson())["rules"];
    return doc.dump(2) + "\n";
}

} // namespace

PipelineConfig PipelineConfig::fromJsonText(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    if (!doc.is_object()) {
        throw Error(ErrorCode::ParseError, "config: top level must be an object");
    }
    PipelineConfig config;
    try {
        checkKeys(doc, {"seed", "prep", "reduce", "cluster", "trees", "rules",
                        "discretize_bins"},
                  "");
        config.seed = pickSize(doc, "seed", config.seed);
        if (doc.contains("prep")) {
            const auto& prep = doc.at("prep");
            checkKeys(prep, {"max_missing_fraction", "z_threshold"}, "prep.");
            config.maxMissingFraction =
                pickNumber(prep, "max_missing_fraction", config.maxMissingFraction);
            config.zThreshold = pickNumber(prep, "z_threshold", config.zThreshold);
        }
        if (doc.contains("reduce")) {
            const auto& reduce = doc.at("reduce");
            checkKeys(reduce, {"theta"}, "reduce.");
            config.theta = pickNumber(reduce, "theta", config.theta);
        }
        if (doc.contains("cluster")) {
            const auto& cluster = doc.at("cluster");
            checkKeys(cluster, {"k_min", "k_max", "restarts", "lift_factor"}, "cluster.");
            config.kMin = pickSize(cluster, "k_min", config.kMin);
            config.kMax = pickSize(cluster, "k_max", config.kMax);
            config.restarts = pickSize(cluster, "restarts", config.restarts);
            config.liftFactor = pickNumber(cluster, "lift_factor", config.liftFactor);
        }
        if (doc.contains("trees")) {
            const auto& trees = doc.at("trees");
            checkKeys(trees, {"max_depth", "min_node_size", "chaid_alpha", "pruning", "folds"},
                      "trees.");
            config.treeParams.maxDepth = pickSize(trees, "max_depth", config.treeParams.maxDepth);
            config.treeParams.minNodeSize =
                pickSize(trees, "min_node_size", config.treeParams.minNodeSize);
            config.treeParams.chaidAlpha =
                pickNumber(trees, "chaid_alpha", config.treeParams.chaidAlpha);
            if (trees.contains("pruning")) {
                config.treeParams.pruning = trees.at("pruning").get<bool>();
            }
            config.folds = pickSize(trees, "folds", config.folds);
        }
        if (doc.contains("rules")) {
            const auto& rules = doc.at("rules");
            checkKeys(rules,
                      {"min_support", "min_confidence", "max_antecedent_len", "top_n",
                       "beam_width"},
                      "rules.");
            config.ruleParams.minSupport =
                pickNumber(rules, "min_support", config.ruleParams.minSupport);
            config.ruleParams.minConfidence =
                pickNumber(rules, "min_confidence", config.ruleParams.minConfidence);
            config.ruleParams.maxAntecedentLen =
                pickSize(rules, "max_antecedent_len", config.ruleParams.maxAntecedentLen);
            config.ruleParams.topN = pickSize(rules, "top_n", config.ruleParams.topN);
            config.ruleParams.beamWidth =
                pickSize(rules, "beam_width", config.ruleParams.beamWidth);
        }
        config.discretizeBins = pickSize(doc, "discretize_bins", config.discretizeBins);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
    }
    return config;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
    return fromJsonText(readFileOrThrow(path, ErrorCode::IoError));
}

std::string PipelineConfig::settingsJson() const {
    nlohmann::ordered_json doc;
    doc["seed"] = seed;
    doc["prep"] = {{"max_missing_fraction", maxMissingFraction}, {"z_threshold", zThreshold}};
    doc["reduce"] = {{"theta", theta}};
    doc["cluster"] = {{"k_min", kMin},
                      {"k_max", kMax},
                      {"restarts", restarts},
                      {"lift_factor", liftFactor}};
    doc["trees"] = {{"max_depth", treeParams.maxDepth},
                    {"min_node_size", treeParams.minNodeSize},
                    {"chaid_alpha", treeParams.chaidAlpha},
                    {"pruning", treeParams.pruning},
                    {"folds", folds}};
    doc["rules"] = {{"min_support", ruleParams.minSupport},
                    {"min_confidence", ruleParams.minConfidence},
                    {"max_antecedent_len", ruleParams.maxAntecedentLen},
                    {"top_n", ruleParams.topN},
                    {"beam_width", ruleParams.beamWidth}};
    doc["discretize_bins"] = discretizeBins;
    return doc.dump(2) + "\n";
}

ReportBundle runPipeline(const PipelineConfig& config) {
    ReportBundle bundle;
    bundle.outDir = config.outDir;
    fs::create_directories(config.outDir);

    auto runStage = [&](const std::string& name, auto&& body) {
        const auto start = std::chrono::steady_clock::now();
        auto recordTiming = [&]() {
            const std::chrono::duration<double> elapsed =
                std::chrono::steady_clock::now() - start;
            bundle.timings.push_back({name, elapsed.count()});
        };
        try {
            body();
        } catch (const std::exception& e) {
            recordTiming();
            try {
                writeManifest(bundle, config);
            } catch (...) {
                // The abort diagnostic matters more than a manifest write error.
            }
            throw Error(ErrorCode::StageFailure, "stage " + name + ": " + e.what());
        }
        recordTiming();
    };

    std::optional<Dataset> raw;
    runStage("ingest", [&] {
        const Codebook codebook = loadCodebook(config.codebookPath);
        raw = ingestCsv(config.dataPath, codebook);
    });

    std::optional<Dataset> prepped;
    ImputeStats imputeStats;
    runStage("prep", [&] {
        DropResult drop = dropIncomplete(*raw, config.maxMissingFraction);
        imputeStats = computeImputeStats(drop.dataset);
        ImputeResult imputed = imputeWithStats(drop.dataset, imputeStats);
        bundle.prep.rowsBefore = raw->rowCount();
        bundle.prep.droppedRows = drop.droppedRows;
        bundle.prep.imputations = imputed.edits;
        bundle.prep.outliers = outlierScan(imputed.dataset, config.zThreshold);
        prepped = std::move(imputed.dataset);
        writeBundleFile(bundle, config.outDir, "prep_report.json", bundle.prep.toJson());
    });

    std::optional<Dataset> reduced;
    runStage("reduce", [&] {
        const AssociationMatrix matrix = associationMatrix(*prepped);
        bundle.reduction = pruneRedundant(matrix, config.theta);
        reduced = applyReduction(*prepped, bundle.reduction);
        writeBundleFile(bundle, config.outDir, "reduction_report.json",
                        bundle.reduction.toJson());
    });

    std::optional<Dataset> labeled;
    runStage("cluster", [&] {
        const FeatureMatrix features = encode(*reduced);
        const std::size_t kMax = std::min(config.kMax, reduced->rowCount());
        bundle.selection = selectK(features, config.kMin, kMax, config.seed, config.restarts);
        bundle.kmedoidsResult = kmedoids(features, bundle.selection.bestK, config.seed);
        bundle.kmeansVsKmedoidsAri = adjustedRandIndex(bundle.selection.best.assignment,
                                                       bundle.kmedoidsResult.assignment);
        bundle.profiles = profileClusters(*reduced, bundle.selection.best, config.liftFactor);
        writeBundleFile(bundle, config.outDir, "clustering_report.json",
                        clusteringReportJson(bundle.selection, bundle.selection.best,
                                             bundle.kmedoidsResult, bundle.kmeansVsKmedoidsAri,
                                             bundle.profiles));

        if (reduced->codebook().indexOf("cluster")) {
            throw Error(ErrorCode::SchemaMismatch,
                        "input already has a cluster attribute; rename it before mining");
        }
        std::vector<std::string> labels;
        for (size_t c = 0; c < bundle.selection.bestK; ++c) {
            labels.push_back(clusterCategoryName(c));
        }
        const Codebook labeledCodebook = reduced->codebook().withAttributeAppended(
            AttributeSpec{"cluster", AttributeKind::Categorical, labels,
                          AttributeGroup::General});
        std::vector<std::vector<Value>> rows;
        rows.reserve(reduced->rowCount());
        for (size_t r = 0; r < reduced->rowCount(); ++r) {
            std::vector<Value> row = reduced->row(r);
            row.push_back(Value::category(
                clusterCategoryName(bundle.selection.best.assignment[r])));
            rows.push_back(std::move(row));
        }
        labeled = Dataset(labeledCodebook, std::move(rows));
    });

    runStage("trees", [&] {
        bundle.comparison = compareAlgorithms(*labeled, "cluster", config.treeParams,
                                              config.seed, config.folds);
        TreeAlgorithm chosen = TreeAlgorithm::Cart;
        for (TreeAlgorithm algorithm :
             {TreeAlgorithm::Cart, TreeAlgorithm::GainRatio, TreeAlgorithm::Chaid}) {
            if (treeAlgorithmDisplayName(algorithm) == bundle.comparison.bestAlgorithm) {
                chosen = algorithm;
            }
        }
        bundle.tree = growTree(*labeled, "cluster", chosen, config.treeParams, config.seed);
        nlohmann::ordered_json doc;
        doc["comparison"] = nlohmann::ordered_json::parse(bundle.comparison.toJson());
        doc["comparison_text"] = bundle.comparison.renderText();
        doc["chosen_algorithm"] = treeAlgorithmName(bundle.tree.algorithm);
        doc["tree"] = nlohmann::ordered_json::parse(bundle.tree.toJson());
        doc["tree_text"] = bundle.tree.renderText();
        writeBundleFile(bundle, config.outDir, "trees_report.json", doc.dump(2) + "\n");
    });

    std::optional<Discretization> disc;
    runStage("rules", [&] {
        disc = discretizeNumerics(*labeled, config.discretizeBins);
        bundle.rules = gri(disc->dataset, "cluster", config.ruleParams);
        bundle.linked = linkRulesToClusters(bundle.rules, bundle.profiles);
        nlohmann::ordered_json doc;
        doc["params"] = nlohmann::ordered_json::parse(config.settingsJson())["rules"];
        doc["ruleset"] = nlohmann::ordered_json::parse(bundle.rules.toJson());
        doc["linked"] = nlohmann::ordered_json::array();
        for (const auto& row : bundle.linked.rows) {
            doc["linked"].push_back({{"rule", row.ruleText}, {"results", row.resultText}});
        }
        writeBundleFile(bundle, config.outDir, "rules_report.json", doc.dump(2) + "\n");
    });

    runStage("report", [&] {
        writeBundleFile(bundle, config.outDir, "summary.md",
                        summaryMarkdown(bundle, config, prepped->columnCount()));
        writeBundleFile(bundle, config.outDir, "model.json",
                        modelJson(bundle, raw->codebook(), imputeStats, *disc,
                                  config.discretizeBins));
        writeManifest(bundle, config);
    });
    return bundle;
}

ScoreResult scoreNewRecord(const std::filesystem::path& bundleDir,
                           const std::string& recordCsv) {
    nlohmann::json model;
    try {
        model = nlohmann::json::parse(readFileOrThrow(bundleDir / "model.json",
                                                      ErrorCode::BundleIncomplete));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BundleIncomplete, std::string("model.json: ") + e.what());
    }

    Tree tree;
    std::map<std::string, std::vector<double>> edges;
    std::map<std::string, std::vector<std::string>> labels;
    std::vector<Rule> exactRules;
    std::optional<Codebook> codebook;
    ImputeStats stats;
    std::vector<std::string> droppedColumns;
    try {
        codebook = codebookFromJsonText(model.at("codebook").dump());
        for (const auto& entry : model.at("impute")) {
            const std::string column = entry.at("column").get<std::string>();
            const std::string text = entry.at("value").get<std::string>();
            const size_t col = codebook->requireIndexOf(column);
            stats.columns.push_back(column);
            stats.replacements.push_back(codebook->at(col).isNumeric()
                                             ? Value::number(std::stod(text))
                                             : Value::category(text));
        }
        droppedColumns = model.at("dropped_columns").get<std::vector<std::string>>();
        tree = Tree::fromJson(model.at("tree").dump());
        const auto& disc = model.at("discretize");
        edges = disc.at("edges").get<std::map<std::string, std::vector<double>>>();
        labels = disc.at("labels").get<std::map<std::string, std::vector<std::string>>>();
        for (const auto& entry : model.at("rules")) {
            Rule rule;
            for (const auto& item : entry.at("antecedent")) {
                rule.antecedent.push_back(Item{item.at("attribute").get<std::string>(),
                                               item.at("value").get<std::string>()});
            }
            rule.consequent = Item{entry.at("consequent").at("attribute").get<std::string>(),
                                   entry.at("consequent").at("value").get<std::string>()};
            rule.support = entry.at("support").get<double>();
            rule.confidence = entry.at("confidence").get<double>();
            rule.jMeasure = entry.at("j_measure").get<double>();
            rule.coverCount = entry.at("cover_count").get<std::size_t>();
            exactRules.push_back(std::move(rule));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BundleIncomplete, std::string("model.json: ") + e.what());
    }

    std::optional<Dataset> record;
    try {
        record = datasetFromCsvText(recordCsv, *codebook);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::HeaderMismatch) {
            throw Error(ErrorCode::SchemaMismatch, e.what());
        }
        throw;
    }
    if (record->rowCount() != 1) {
        throw Error(ErrorCode::SchemaMismatch, "scoring expects exactly one record");
    }

    const ImputeResult imputed = imputeWithStats(*record, stats);
    ReductionReport reduction;
    for (const std::string& name : droppedColumns) {
        reduction.drops.push_back(AttributeDrop{name, "", 0.0});
    }
    const Dataset reduced = applyReduction(imputed.dataset, reduction);

    ScoreResult result;
    result.predictedCluster = predictRecord(tree, reduced.codebook(), reduced.row(0));

    auto itemSatisfied = [&](const Item& item) {
        const auto col = reduced.codebook().indexOf(item.attribute);
        if (!col) return false;
        const Value& v = reduced.at(0, *col);
        if (v.isMissing()) return false;
        const auto e = edges.find(item.attribute);
        if (e != edges.end()) {
            if (v.kind() != Value::Kind::Number) return false;
            return labels.at(item.attribute)[discretizeBinIndex(e->second, v.number())] ==
                   item.value;
        }
        return v.kind() == Value::Kind::Category && v.category() == item.value;
    };
    for (const Rule& rule : exactRules) {
        if (rule.confidence < 1.0) continue;
        bool all = true;
        for (const Item& item : rule.antecedent) {
            if (!itemSatisfied(item)) {
                all = false;
                break;
            }
        }
        if (all) result.matchedRules.push_back(rule);
    }
    return result;
}

} // namespace orgminer
