#pragma once
// Association mining over categorical records: Apriori frequent itemsets
// and beam-searched single-consequent rules, with an exhaustive oracle.

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "orgminer/cluster.hpp"
#include "orgminer/dataset.hpp"

namespace orgminer {

struct Item {
    std::string attribute;
    std::string value;

    bool operator==(const Item& other) const {
        return attribute == other.attribute && value == other.value;
    }
};

struct FrequentItemset {
    std::vector<Item> items;   // one item per attribute, attribute order
    std::size_t count = 0;
    double support = 0.0;
};

struct Rule {
    std::vector<Item> antecedent;  // attributes distinct, attribute order
    Item consequent;
    double support = 0.0;          // support of antecedent plus consequent
    double confidence = 0.0;
    double jMeasure = 0.0;
    std::size_t coverCount = 0;    // rows matching antecedent plus consequent
};

struct RuleParams {
    double minSupport = 0.02;
    double minConfidence = 1.0;
    std::size_t maxAntecedentLen = 3;
    std::size_t topN = 100;
    std::size_t beamWidth = 50;
};

struct RuleSet {
    std::vector<Rule> rules;

    std::string toJson() const;
};

// "Their <attribute> is <value> and their ..." sentence for a rule.
std::string ruleText(const Rule& rule);

struct LinkedRule {
    std::string ruleText;
    std::string resultText;
};

struct LinkedReport {
    std::vector<LinkedRule> rows;

    std::string renderMarkdown() const;  // "Rule" | "Results" table
};

// Numeric columns recoded as labeled quantile bins; other columns pass
// through. Bin edges are upper bounds of all bins but the last.
struct Discretization {
    Dataset dataset;
    std::map<std::string, std::vector<double>> edges;
    std::map<std::string, std::vector<std::string>> labels;
};

Discretization discretizeNumerics(const Dataset& dataset, std::size_t bins = 4);
std::size_t discretizeBinIndex(const std::vector<double>& edges, double value);
std::vector<std::string> discretizeBinLabels(const std::vector<double>& edges);

// Level-wise frequent-itemset mining with downward-closure pruning over
// the observed items of every non-numeric column.
std::vector<FrequentItemset> apriori(const Dataset& dataset, double minSupport);

// Beam search specializing antecedents one item at a time, ranked by
// J-measure during search and by (confidence desc, support desc, length
// asc, lexicographic) in the final ranking.
RuleSet gri(const Dataset& dataset, const std::string& consequentAttribute,
            const RuleParams& params = {});

// Exhaustive antecedent enumeration with the same filtering and ranking.
RuleSet bruteForceRules(const Dataset& dataset, const std::string& consequentAttribute,
                        const RuleParams& params = {});

LinkedReport linkRulesToClusters(const RuleSet& rules, const ClusterProfile& profiles);

} // namespace orgminer
