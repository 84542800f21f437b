#pragma once
// Decision-tree induction: CART, a C4.5-family gain-ratio tree, and
// CHAID, plus the cross-validated accuracy comparison harness.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "orgminer/dataset.hpp"

namespace orgminer {

enum class TreeAlgorithm { Cart, GainRatio, Chaid };

std::string treeAlgorithmName(TreeAlgorithm algorithm);         // cart | gain_ratio | chaid
std::string treeAlgorithmDisplayName(TreeAlgorithm algorithm);  // CART | C5.0 | CHAID
TreeAlgorithm parseTreeAlgorithm(const std::string& name);

struct TreeParams {
    std::size_t maxDepth = 10;
    std::size_t minNodeSize = 5;
    double chaidAlpha = 0.05;
    bool pruning = true;
};

enum class SplitKind { None, NumericThreshold, CategoryGroups };

struct TreeNode {
    bool leaf = true;
    std::string label;                      // majority class
    std::vector<std::size_t> classCounts;   // aligned with Tree::classes
    std::size_t trainingCount = 0;

    SplitKind splitKind = SplitKind::None;
    std::string attribute;
    double threshold = 0.0;                 // x <= threshold routes to child 0
    std::vector<std::vector<std::string>> childCategories;  // per-child category sets
    std::size_t majorityChild = 0;          // unseen-category routing
    std::vector<TreeNode> children;
};

struct Tree {
    TreeAlgorithm algorithm = TreeAlgorithm::Cart;
    std::string target;
    std::vector<std::string> classes;       // target categories, codebook order
    std::map<std::string, std::vector<double>> numericBinEdges;  // CHAID tree-wide bins
    TreeNode root;

    std::size_t leafCount() const;
    std::string rootAttribute() const;      // empty when the root is a leaf
    std::string toJson() const;
    static Tree fromJson(const std::string& text);
    std::string renderText() const;
};

struct ComparisonRow {
    std::string algorithm;
    double accuracyPercent = 0.0;
};

struct ComparisonTable {
    std::vector<ComparisonRow> rows;
    std::string bestAlgorithm;

    std::string renderText() const;      // "Decision tree" | "Accuracy" layout
    std::string renderMarkdown() const;
    std::string toJson() const;
};

// 1 - sum of squared class probabilities.
double gini(const std::vector<std::size_t>& classCounts);

// Information gain over split info, log base 2; 0 when split info is 0.
double gainRatio(const std::vector<std::size_t>& parentCounts,
                 const std::vector<std::vector<std::size_t>>& childCounts);

Tree growTree(const Dataset& dataset, const std::string& target, TreeAlgorithm algorithm,
              const TreeParams& params = {}, std::uint64_t seed = 0);

std::string predictRecord(const Tree& tree, const Codebook& codebook,
                          const std::vector<Value>& record);
std::string predict(const Tree& tree, const Dataset& dataset, std::size_t row);
double evaluate(const Tree& tree, const Dataset& test, const std::string& target);

Dataset selectRows(const Dataset& dataset, const std::vector<std::size_t>& rows);

struct StratifiedSplit {
    std::vector<std::size_t> trainRows;
    std::vector<std::size_t> testRows;
};

StratifiedSplit stratifiedSplit(const Dataset& dataset, const std::string& target,
                                double trainFraction, std::uint64_t seed);

// Stratified k-fold cross-validation, pooled accuracy per algorithm.
ComparisonTable compareAlgorithms(const Dataset& dataset, const std::string& target,
                                  const TreeParams& params, std::uint64_t seed,
                                  std::size_t folds = 5);

} // namespace orgminer
