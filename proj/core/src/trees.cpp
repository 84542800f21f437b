#include "orgminer/trees.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <set>

#include "json.hpp"
#include "orgminer/rng.hpp"
#include "orgminer/stats.hpp"

namespace orgminer {

namespace {

constexpr size_t kCartExhaustiveCategoryCap = 12;
constexpr size_t kChaidQuantileBins = 4;

struct ColumnView {
    bool threshold = false;             // numeric column split by thresholds
    std::vector<double> nums;           // per-row numeric values
    std::vector<size_t> codes;          // per-row category/bin code
    std::vector<std::string> codeNames; // code -> label
};

struct GrowContext {
    const Dataset& data;
    const TreeParams& params;
    TreeAlgorithm algorithm;
    size_t targetCol = 0;
    size_t nClasses = 0;
    std::vector<size_t> classOf;
    std::vector<ColumnView> columns;
    std::map<std::string, std::vector<double>> numericBinEdges;
};

std::vector<std::string> binLabelsForEdges(const std::vector<double>& edges) {
    if (edges.empty()) return {"all"};
    std::vector<std::string> labels;
    labels.push_back("<= " + formatNumber(edges.front()));
    for (size_t i = 1; i < edges.size(); ++i) {
        labels.push_back("(" + formatNumber(edges[i - 1]) + ", " + formatNumber(edges[i]) + "]");
    }
    labels.push_back("> " + formatNumber(edges.back()));
    return labels;
}

size_t binIndexForValue(const std::vector<double>& edges, double value) {
    return static_cast<size_t>(
        std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

std::vector<double> quantileEdges(std::vector<double> values, size_t bins) {
    std::sort(values.begin(), values.end());
    std::vector<double> edges;
    const size_t n = values.size();
    for (size_t i = 1; i < bins; ++i) {
        const double e = values[(i * n) / bins];
        if (e < values.back() && (edges.empty() || e > edges.back())) edges.push_back(e);
    }
    return edges;
}

double entropy(const std::vector<size_t>& counts, size_t total) {
    double h = 0.0;
    for (size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        h -= p * std::log2(p);
    }
    return h;
}

GrowContext buildContext(const Dataset& dataset, const std::string& target,
                         TreeAlgorithm algorithm, const TreeParams& params) {
    const Codebook& cb = dataset.codebook();
    const auto targetIdx = cb.indexOf(target);
    if (!targetIdx) {
        throw Error(ErrorCode::TargetMissing, "target attribute " + target + " not found");
    }
    const AttributeSpec& targetSpec = cb.at(*targetIdx);
    if (targetSpec.isNumeric()) {
        throw Error(ErrorCode::TargetNotCategorical, target);
    }
    if (dataset.rowCount() == 0) {
        throw Error(ErrorCode::TooFewRows, "cannot grow a tree on an empty dataset");
    }
    GrowContext ctx{dataset, params, algorithm};
    ctx.targetCol = *targetIdx;
    ctx.nClasses = targetSpec.categories.size();
    const size_t n = dataset.rowCount();
    ctx.classOf.resize(n);
    for (size_t r = 0; r < n; ++r) {
        const Value& v = dataset.at(r, ctx.targetCol);
        if (v.isMissing()) {
            throw Error(ErrorCode::IncompleteData, "tree growth requires a complete dataset");
        }
        ctx.classOf[r] = static_cast<size_t>(targetSpec.categoryIndex(v.category()));
    }

    ctx.columns.resize(cb.size());
    for (size_t c = 0; c < cb.size(); ++c) {
        if (c == ctx.targetCol) continue;
        const AttributeSpec& spec = cb.at(c);
        ColumnView& col = ctx.columns[c];
        for (size_t r = 0; r < n; ++r) {
            if (dataset.at(r, c).isMissing()) {
                throw Error(ErrorCode::IncompleteData, "tree growth requires a complete dataset");
            }
        }
        if (spec.isNumeric()) {
            std::vector<double> values(n);
            for (size_t r = 0; r < n; ++r) values[r] = dataset.at(r, c).number();
            if (algorithm == TreeAlgorithm::Chaid) {
                // Tree-wide quantile bins; edges are kept for prediction.
                const std::vector<double> edges = quantileEdges(values, kChaidQuantileBins);
                col.codeNames = binLabelsForEdges(edges);
                col.codes.resize(n);
                for (size_t r = 0; r < n; ++r) col.codes[r] = binIndexForValue(edges, values[r]);
                ctx.numericBinEdges[spec.name] = edges;
            } else {
                col.threshold = true;
                col.nums = std::move(values);
            }
        } else {
            col.codeNames = spec.categories;
            col.codes.resize(n);
            for (size_t r = 0; r < n; ++r) {
                col.codes[r] = static_cast<size_t>(
                    spec.categoryIndex(dataset.at(r, c).category()));
            }
        }
    }
    return ctx;
}

std::vector<size_t> classCounts(const GrowContext& ctx, const std::vector<size_t>& rows) {
    std::vector<size_t> counts(ctx.nClasses, 0);
    for (size_t r : rows) ++counts[ctx.classOf[r]];
    return counts;
}

size_t majorityIndex(const std::vector<size_t>& counts) {
    size_t best = 0;
    for (size_t i = 1; i < counts.size(); ++i) {
        if (counts[i] > counts[best]) best = i;
    }
    return best;
}

struct SplitChoice {
    bool valid = false;
    double score = -std::numeric_limits<double>::max();
    size_t column = 0;
    SplitKind kind = SplitKind::None;
    double threshold = 0.0;
    std::vector<std::vector<size_t>> groups;  // CategoryGroups: codes per child
};

// Shared numeric-threshold sweep; calls scorer with left-side class
// counts and sizes for every boundary between distinct sorted values.
template <typename Scorer>
void sweepThresholds(const GrowContext& ctx, const std::vector<size_t>& rows, size_t col,
                     Scorer&& scorer) {
    const ColumnView& view = ctx.columns[col];
    std::vector<std::pair<double, size_t>> ordered;
    ordered.reserve(rows.size());
    for (size_t r : rows) ordered.push_back({view.nums[r], ctx.classOf[r]});
    std::sort(ordered.begin(), ordered.end());
    std::vector<size_t> leftCounts(ctx.nClasses, 0);
    for (size_t i = 0; i + 1 < ordered.size(); ++i) {
        ++leftCounts[ordered[i].second];
        if (ordered[i].first == ordered[i + 1].first) continue;
        const double threshold = ordered[i].first + 0.5 * (ordered[i + 1].first - ordered[i].first);
        scorer(threshold, leftCounts, i + 1);
    }
}

// Per-code class counts for the codes present at this node, in code order.
struct CodeStats {
    std::vector<size_t> codes;                 // present codes, ascending
    std::vector<std::vector<size_t>> counts;   // per present code
    std::vector<size_t> sizes;
};

CodeStats codeStats(const GrowContext& ctx, const std::vector<size_t>& rows, size_t col) {
    const ColumnView& view = ctx.columns[col];
    std::map<size_t, size_t> slotOf;
    CodeStats stats;
    for (size_t r : rows) {
        const size_t code = view.codes[r];
        auto [it, inserted] = slotOf.emplace(code, stats.codes.size());
        if (inserted) {
            stats.codes.push_back(code);
            stats.counts.emplace_back(ctx.nClasses, 0);
            stats.sizes.push_back(0);
        }
        ++stats.counts[it->second][ctx.classOf[r]];
        ++stats.sizes[it->second];
    }
    // std::map iteration gave first-seen slots; reorder ascending by code.
    std::vector<size_t> order(stats.codes.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return stats.codes[a] < stats.codes[b]; });
    CodeStats sorted;
    for (size_t i : order) {
        sorted.codes.push_back(stats.codes[i]);
        sorted.counts.push_back(std::move(stats.counts[i]));
        sorted.sizes.push_back(stats.sizes[i]);
    }
    return sorted;
}

double giniOf(const std::vector<size_t>& counts, size_t total) {
    double sum = 0.0;
    for (size_t c : counts) {
        const double p = static_cast<double>(c) / static_cast<double>(total);
        sum += p * p;
    }
    return 1.0 - sum;
}

SplitChoice bestCartSplit(const GrowContext& ctx, const std::vector<size_t>& rows,
                          const std::vector<size_t>& parentCounts) {
    const size_t n = rows.size();
    const double parentGini = giniOf(parentCounts, n);
    SplitChoice best;

    auto considerSubset = [&](size_t col, const CodeStats& stats,
                              const std::vector<size_t>& leftSlots) {
        std::vector<size_t> leftCounts(ctx.nClasses, 0);
        size_t nLeft = 0;
        for (size_t slot : leftSlots) {
            for (size_t k = 0; k < ctx.nClasses; ++k) leftCounts[k] += stats.counts[slot][k];
            nLeft += stats.sizes[slot];
        }
        const size_t nRight = n - nLeft;
        if (nLeft == 0 || nRight == 0) return;
        std::vector<size_t> rightCounts(ctx.nClasses, 0);
        for (size_t k = 0; k < ctx.nClasses; ++k) rightCounts[k] = parentCounts[k] - leftCounts[k];
        const double decrease =
            parentGini - (static_cast<double>(nLeft) / n) * giniOf(leftCounts, nLeft) -
            (static_cast<double>(nRight) / n) * giniOf(rightCounts, nRight);
        if (decrease > best.score) {
            best.valid = true;
            best.score = decrease;
            best.column = col;
            best.kind = SplitKind::CategoryGroups;
            std::vector<size_t> leftCodes, rightCodes;
            std::set<size_t> inLeft(leftSlots.begin(), leftSlots.end());
            for (size_t slot = 0; slot < stats.codes.size(); ++slot) {
                (inLeft.count(slot) ? leftCodes : rightCodes).push_back(stats.codes[slot]);
            }
            best.groups = {std::move(leftCodes), std::move(rightCodes)};
        }
    };

    for (size_t col = 0; col < ctx.columns.size(); ++col) {
        if (col == ctx.targetCol) continue;
        const ColumnView& view = ctx.columns[col];
        if (view.threshold) {
            sweepThresholds(ctx, rows, col,
                            [&](double threshold, const std::vector<size_t>& leftCounts,
                                size_t nLeft) {
                                const size_t nRight = n - nLeft;
                                std::vector<size_t> rightCounts(ctx.nClasses, 0);
                                for (size_t k = 0; k < ctx.nClasses; ++k) {
                                    rightCounts[k] = parentCounts[k] - leftCounts[k];
                                }
                                const double decrease =
                                    parentGini -
                                    (static_cast<double>(nLeft) / n) * giniOf(leftCounts, nLeft) -
                                    (static_cast<double>(nRight) / n) *
                                        giniOf(rightCounts, nRight);
                                if (decrease > best.score) {
                                    best.valid = true;
                                    best.score = decrease;
                                    best.column = col;
                                    best.kind = SplitKind::NumericThreshold;
                                    best.threshold = threshold;
                                    best.groups.clear();
                                }
                            });
            continue;
        }
        const CodeStats stats = codeStats(ctx, rows, col);
        const size_t m = stats.codes.size();
        if (m < 2) continue;
        if (ctx.nClasses == 2) {
            // Ordered-category scan: sort by P(class 0 | code), take prefixes.
            std::vector<size_t> order(m);
            for (size_t i = 0; i < m; ++i) order[i] = i;
            std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                const double pa = static_cast<double>(stats.counts[a][0]) / stats.sizes[a];
                const double pb = static_cast<double>(stats.counts[b][0]) / stats.sizes[b];
                if (pa != pb) return pa < pb;
                return stats.codes[a] < stats.codes[b];
            });
            std::vector<size_t> prefix;
            for (size_t i = 0; i + 1 < m; ++i) {
                prefix.push_back(order[i]);
                considerSubset(col, stats, prefix);
            }
        } else if (m <= kCartExhaustiveCategoryCap) {
            // All subsets containing the first code cover each split once.
            const size_t restBits = m - 1;
            const size_t full = (static_cast<size_t>(1) << restBits) - 1;
            for (size_t mask = 0; mask < full; ++mask) {
                std::vector<size_t> left = {0};
                for (size_t b = 0; b < restBits; ++b) {
                    if (mask & (static_cast<size_t>(1) << b)) left.push_back(b + 1);
                }
                considerSubset(col, stats, left);
            }
        } else {
            // One-vs-rest orderings per class.
            for (size_t k = 0; k < ctx.nClasses; ++k) {
                std::vector<size_t> order(m);
                for (size_t i = 0; i < m; ++i) order[i] = i;
                std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                    const double pa = static_cast<double>(stats.counts[a][k]) / stats.sizes[a];
                    const double pb = static_cast<double>(stats.counts[b][k]) / stats.sizes[b];
                    if (pa != pb) return pa > pb;
                    return stats.codes[a] < stats.codes[b];
                });
                std::vector<size_t> prefix;
                for (size_t i = 0; i + 1 < m; ++i) {
                    prefix.push_back(order[i]);
                    considerSubset(col, stats, prefix);
                }
            }
        }
    }
    return best;
}

SplitChoice bestGainRatioSplit(const GrowContext& ctx, const std::vector<size_t>& rows,
                               const std::vector<size_t>& parentCounts) {
    const size_t n = rows.size();
    const double parentEntropy = entropy(parentCounts, n);
    SplitChoice best;

    auto ratioFor = [&](const std::vector<std::vector<size_t>>& children,
                        const std::vector<size_t>& sizes) {
        double gain = parentEntropy;
        double splitInfo = 0.0;
        for (size_t i = 0; i < children.size(); ++i) {
            if (sizes[i] == 0) continue;
            const double w = static_cast<double>(sizes[i]) / static_cast<double>(n);
            gain -= w * entropy(children[i], sizes[i]);
            splitInfo -= w * std::log2(w);
        }
        if (splitInfo <= 0.0) return 0.0;
        return std::max(0.0, gain / splitInfo);
    };

    for (size_t col = 0; col < ctx.columns.size(); ++col) {
        if (col == ctx.targetCol) continue;
        const ColumnView& view = ctx.columns[col];
        if (view.threshold) {
            sweepThresholds(
                ctx, rows, col,
                [&](double threshold, const std::vector<size_t>& leftCounts, size_t nLeft) {
                    std::vector<size_t> rightCounts(ctx.nClasses, 0);
                    for (size_t k = 0; k < ctx.nClasses; ++k) {
                        rightCounts[k] = parentCounts[k] - leftCounts[k];
                    }
                    const double score =
                        ratioFor({leftCounts, rightCounts}, {nLeft, n - nLeft});
                    if (score > best.score) {
                        best.valid = true;
                        best.score = score;
                        best.column = col;
                        best.kind = SplitKind::NumericThreshold;
                        best.threshold = threshold;
                        best.groups.clear();
                    }
                });
            continue;
        }
        const CodeStats stats = codeStats(ctx, rows, col);
        if (stats.codes.size() < 2) continue;
        const double score = ratioFor(stats.counts, stats.sizes);
        if (score > best.score) {
            best.valid = true;
            best.score = score;
            best.column = col;
            best.kind = SplitKind::CategoryGroups;
            best.groups.clear();
            for (size_t code : stats.codes) best.groups.push_back({code});
        }
    }
    return best;
}

// Chi-square p-value over class-count rows with all-zero columns removed;
// tables too degenerate to test count as indistinguishable (p = 1).
double compactedPValue(const std::vector<std::vector<size_t>>& rows) {
    const size_t k = rows.empty() ? 0 : rows[0].size();
    std::vector<size_t> keep;
    for (size_t c = 0; c < k; ++c) {
        size_t sum = 0;
        for (const auto& row : rows) sum += row[c];
        if (sum > 0) keep.push_back(c);
    }
    if (rows.size() < 2 || keep.size() < 2) return 1.0;
    std::vector<std::vector<double>> table;
    for (const auto& row : rows) {
        std::vector<double> out;
        size_t sum = 0;
        for (size_t c : keep) {
            out.push_back(static_cast<double>(row[c]));
            sum += row[c];
        }
        if (sum == 0) return 1.0;
        table.push_back(std::move(out));
    }
    return stats::chiSquare(table).pValue;
}

SplitChoice bestChaidSplit(const GrowContext& ctx, const std::vector<size_t>& rows) {
    SplitChoice best;
    double bestAdjusted = std::numeric_limits<double>::max();

    for (size_t col = 0; col < ctx.columns.size(); ++col) {
        if (col == ctx.targetCol) continue;
        const CodeStats stats = codeStats(ctx, rows, col);
        const size_t c0 = stats.codes.size();
        if (c0 < 2) continue;

        std::vector<std::vector<size_t>> groupCodes;
        std::vector<std::vector<size_t>> groupCounts;
        for (size_t i = 0; i < c0; ++i) {
            groupCodes.push_back({stats.codes[i]});
            groupCounts.push_back(stats.counts[i]);
        }

        // Merge the least-distinguishable pair while it is insignificant.
        while (groupCodes.size() > 2) {
            double maxP = -1.0;
            size_t mi = 0, mj = 0;
            for (size_t i = 0; i < groupCodes.size(); ++i) {
                for (size_t j = i + 1; j < groupCodes.size(); ++j) {
                    const double p = compactedPValue({groupCounts[i], groupCounts[j]});
                    if (p > maxP) {
                        maxP = p;
                        mi = i;
                        mj = j;
                    }
                }
            }
            if (maxP <= ctx.params.chaidAlpha) break;
            for (size_t code : groupCodes[mj]) groupCodes[mi].push_back(code);
            for (size_t k = 0; k < ctx.nClasses; ++k) groupCounts[mi][k] += groupCounts[mj][k];
            groupCodes.erase(groupCodes.begin() + static_cast<long>(mj));
            groupCounts.erase(groupCounts.begin() + static_cast<long>(mj));
        }

        const size_t g = groupCodes.size();
        if (g < 2) continue;
        const double p = compactedPValue(groupCounts);
        const double adjusted = std::min(1.0, p * stats::stirling2(c0, g));
        if (adjusted <= ctx.params.chaidAlpha && adjusted < bestAdjusted) {
            bestAdjusted = adjusted;
            best.valid = true;
            best.score = -adjusted;
            best.column = col;
            best.kind = SplitKind::CategoryGroups;
            best.groups = groupCodes;
            for (auto& group : best.groups) std::sort(group.begin(), group.end());
        }
    }
    return best;
}

TreeNode growNode(const GrowContext& ctx, const std::vector<size_t>& rows, size_t depth) {
    TreeNode node;
    node.classCounts = classCounts(ctx, rows);
    node.trainingCount = rows.size();
    const Codebook& cb = ctx.data.codebook();
    const AttributeSpec& targetSpec = cb.at(ctx.targetCol);
    node.label = targetSpec.categories[majorityIndex(node.classCounts)];

    const bool pure = *std::max_element(node.classCounts.begin(), node.classCounts.end()) ==
                      rows.size();
    if (pure || depth >= ctx.params.maxDepth || rows.size() < ctx.params.minNodeSize) {
        return node;
    }

    SplitChoice choice;
    switch (ctx.algorithm) {
        case TreeAlgorithm::Cart:
            choice = bestCartSplit(ctx, rows, node.classCounts);
            break;
        case TreeAlgorithm::GainRatio:
            choice = bestGainRatioSplit(ctx, rows, node.classCounts);
            break;
        case TreeAlgorithm::Chaid:
            choice = bestChaidSplit(ctx, rows);
            break;
    }
    if (!choice.valid) return node;

    const ColumnView& view = ctx.columns[choice.column];
    std::vector<std::vector<size_t>> childRows;
    if (choice.kind == SplitKind::NumericThreshold) {
        childRows.assign(2, {});
        for (size_t r : rows) {
            childRows[view.nums[r] <= choice.threshold ? 0 : 1].push_back(r);
        }
    } else {
        std::map<size_t, size_t> childOfCode;
        for (size_t child = 0; child < choice.groups.size(); ++child) {
            for (size_t code : choice.groups[child]) childOfCode[code] = child;
        }
        childRows.assign(choice.groups.size(), {});
        for (size_t r : rows) childRows[childOfCode.at(view.codes[r])].push_back(r);
    }

    node.leaf = false;
    node.splitKind = choice.kind;
    node.attribute = cb.at(choice.column).name;
    node.threshold = choice.threshold;
    if (choice.kind == SplitKind::CategoryGroups) {
        for (const auto& group : choice.groups) {
            std::vector<std::string> names;
            for (size_t code : group) names.push_back(view.codeNames[code]);
            node.childCategories.push_back(std::move(names));
        }
    }
    for (const auto& rowsOfChild : childRows) {
        node.children.push_back(growNode(ctx, rowsOfChild, depth + 1));
    }
    size_t largest = 0;
    for (size_t i = 1; i < node.children.size(); ++i) {
        if (node.children[i].trainingCount > node.children[largest].trainingCount) largest = i;
    }
    node.majorityChild = largest;
    return node;
}

size_t nodeErrors(const TreeNode& node) {
    return node.trainingCount - *std::max_element(node.classCounts.begin(),
                                                  node.classCounts.end());
}

void makeLeaf(TreeNode& node) {
    node.leaf = true;
    node.splitKind = SplitKind::None;
    node.attribute.clear();
    node.childCategories.clear();
    node.children.clear();
    node.majorityChild = 0;
}

// Cost-complexity pruning at alpha = 0: collapse subtrees that do not
// reduce training error.
size_t pruneZeroGain(TreeNode& node) {
    if (node.leaf) return nodeErrors(node);
    size_t subtree = 0;
    for (TreeNode& child : node.children) subtree += pruneZeroGain(child);
    if (nodeErrors(node) <= subtree) {
        makeLeaf(node);
        return nodeErrors(node);
    }
    return subtree;
}

// Pessimistic error pruning with a half-count continuity correction.
double prunePessimistic(TreeNode& node) {
    if (node.leaf) return static_cast<double>(nodeErrors(node)) + 0.5;
    double subtree = 0.0;
    for (TreeNode& child : node.children) subtree += prunePessimistic(child);
    const double own = static_cast<double>(nodeErrors(node)) + 0.5;
    if (own <= subtree) {
        makeLeaf(node);
        return own;
    }
    return subtree;
}

size_t countLeaves(const TreeNode& node) {
    if (node.leaf) return 1;
    size_t total = 0;
    for (const TreeNode& child : node.children) total += countLeaves(child);
    return total;
}

nlohmann::ordered_json nodeToJson(const TreeNode& node) {
    nlohmann::ordered_json doc;
    doc["label"] = node.label;
    doc["counts"] = node.classCounts;
    doc["n"] = node.trainingCount;
    if (node.leaf) {
        doc["type"] = "leaf";
        return doc;
    }
    doc["type"] = "split";
    doc["attribute"] = node.attribute;
    if (node.splitKind == SplitKind::NumericThreshold) {
        doc["kind"] = "threshold";
        doc["threshold"] = node.threshold;
    } else {
        doc["kind"] = "groups";
        doc["child_categories"] = node.childCategories;
    }
    doc["majority_child"] = node.majorityChild;
    nlohmann::ordered_json children = nlohmann::ordered_json::array();
    for (const TreeNode& child : node.children) children.push_back(nodeToJson(child));
    doc["children"] = std::move(children);
    return doc;
}

TreeNode nodeFromJson(const nlohmann::json& doc) {
    TreeNode node;
    node.label = doc.at("label").get<std::string>();
    node.classCounts = doc.at("counts").get<std::vector<size_t>>();
    node.trainingCount = doc.at("n").get<size_t>();
    if (doc.at("type") == "leaf") return node;
    node.leaf = false;
    node.attribute = doc.at("attribute").get<std::string>();
    if (doc.at("kind") == "threshold") {
        node.splitKind = SplitKind::NumericThreshold;
        node.threshold = doc.at("threshold").get<double>();
    } else {
        node.splitKind = SplitKind::CategoryGroups;
        node.childCategories = doc.at("child_categories").get<std::vector<std::vector<std::string>>>();
    }
    node.majorityChild = doc.at("majority_child").get<size_t>();
    for (const auto& child : doc.at("children")) node.children.push_back(nodeFromJson(child));
    return node;
}

std::string conditionText(const TreeNode& node, size_t child) {
    if (node.splitKind == SplitKind::NumericThreshold) {
        return node.attribute + (child == 0 ? " <= " : " > ") + formatNumber(node.threshold);
    }
    const auto& cats = node.childCategories[child];
    if (cats.size() == 1) return node.attribute + " = " + cats[0];
    std::string text = node.attribute + " in {";
    for (size_t i = 0; i < cats.size(); ++i) {
        if (i > 0) text += ", ";
        text += cats[i];
    }
    return text + "}";
}

void renderNode(const TreeNode& node, size_t indent, std::string& out) {
    const std::string pad(indent * 2, ' ');
    if (node.leaf) {
        out += pad + "-> " + node.label + " (" + std::to_string(node.trainingCount) + ")\n";
        return;
    }
    for (size_t i = 0; i < node.children.size(); ++i) {
        const TreeNode& child = node.children[i];
        if (child.leaf) {
            out += pad + conditionText(node, i) + ": " + child.label + " (" +
                   std::to_string(child.trainingCount) + ")\n";
        } else {
            out += pad + conditionText(node, i) + ":\n";
            renderNode(child, indent + 1, out);
        }
    }
}

} // namespace

std::string treeAlgorithmName(TreeAlgorithm algorithm) {
    switch (algorithm) {
        case TreeAlgorithm::Cart: return "cart";
        case TreeAlgorithm::GainRatio: return "gain_ratio";
        case TreeAlgorithm::Chaid: return "chaid";
    }
    return "cart";
}

std::string treeAlgorithmDisplayName(TreeAlgorithm algorithm) {
    switch (algorithm) {
        case TreeAlgorithm::Cart: return "CART";
        case TreeAlgorithm::GainRatio: return "C5.0";
        case TreeAlgorithm::Chaid: return "CHAID";
    }
    return "CART";
}

TreeAlgorithm parseTreeAlgorithm(const std::string& name) {
    if (name == "cart" || name == "CART") return TreeAlgorithm::Cart;
    if (name == "gain_ratio" || name == "c5.0" || name == "C5.0") return TreeAlgorithm::GainRatio;
    if (name == "chaid" || name == "CHAID") return TreeAlgorithm::Chaid;
    throw Error(ErrorCode::ParseError, "unknown tree algorithm: " + name);
}

double gini(const std::vector<size_t>& classCounts) {
    size_t total = 0;
    for (size_t c : classCounts) total += c;
    if (total == 0) {
        throw Error(ErrorCode::EmptyNode, "gini needs at least one record");
    }
    return giniOf(classCounts, total);
}

double gainRatio(const std::vector<size_t>& parentCounts,
                 const std::vector<std::vector<size_t>>& childCounts) {
    size_t parentTotal = 0;
    for (size_t c : parentCounts) parentTotal += c;
    std::vector<size_t> sum(parentCounts.size(), 0);
    std::vector<size_t> sizes;
    for (const auto& child : childCounts) {
        if (child.size() != parentCounts.size()) {
            throw Error(ErrorCode::NonPartition, "child class vectors must match the parent");
        }
        size_t childTotal = 0;
        for (size_t k = 0; k < child.size(); ++k) {
            sum[k] += child[k];
            childTotal += child[k];
        }
        sizes.push_back(childTotal);
    }
    if (sum != parentCounts) {
        throw Error(ErrorCode::NonPartition, "children must partition the parent counts");
    }
    double gain = entropy(parentCounts, parentTotal);
    double splitInfo = 0.0;
    for (size_t i = 0; i < childCounts.size(); ++i) {
        if (sizes[i] == 0) continue;
        const double w = static_cast<double>(sizes[i]) / static_cast<double>(parentTotal);
        gain -= w * entropy(childCounts[i], sizes[i]);
        splitInfo -= w * std::log2(w);
    }
    if (splitInfo <= 0.0) return 0.0;
    return std::max(0.0, gain / splitInfo);
}

Tree growTree(const Dataset& dataset, const std::string& target, TreeAlgorithm algorithm,
              const TreeParams& params, std::uint64_t seed) {
    (void)seed;  // growth is deterministic; the seed is interface parity
    GrowContext ctx = buildContext(dataset, target, algorithm, params);
    Tree tree;
    tree.algorithm = algorithm;
    tree.target = target;
    tree.classes = dataset.codebook().at(ctx.targetCol).categories;
    tree.numericBinEdges = ctx.numericBinEdges;
    std::vector<size_t> rows(dataset.rowCount());
    for (size_t r = 0; r < rows.size(); ++r) rows[r] = r;
    tree.root = growNode(ctx, rows, 0);
    if (params.pruning) {
        if (algorithm == TreeAlgorithm::Cart) pruneZeroGain(tree.root);
        if (algorithm == TreeAlgorithm::GainRatio) prunePessimistic(tree.root);
        // CHAID pruning is its own significance stopping rule.
    }
    return tree;
}

std::string predictRecord(const Tree& tree, const Codebook& codebook,
                          const std::vector<Value>& record) {
    if (record.size() != codebook.size()) {
        throw Error(ErrorCode::SchemaMismatch, "record width does not match the codebook");
    }
    const TreeNode* node = &tree.root;
    while (!node->leaf) {
        const auto col = codebook.indexOf(node->attribute);
        if (!col) {
            throw Error(ErrorCode::SchemaMismatch,
                        "record lacks split attribute " + node->attribute);
        }
        const Value& v = record[*col];
        size_t child = node->majorityChild;
        if (!v.isMissing()) {
            if (node->splitKind == SplitKind::NumericThreshold) {
                if (v.kind() != Value::Kind::Number) {
                    throw Error(ErrorCode::SchemaMismatch,
                                "attribute " + node->attribute + " must be numeric");
                }
                child = v.number() <= node->threshold ? 0 : 1;
            } else {
                std::string label;
                const auto binIt = tree.numericBinEdges.find(node->attribute);
                if (binIt != tree.numericBinEdges.end()) {
                    if (v.kind() != Value::Kind::Number) {
                        throw Error(ErrorCode::SchemaMismatch,
                                    "attribute " + node->attribute + " must be numeric");
                    }
                    label = binLabelsForEdges(binIt->second)[binIndexForValue(binIt->second,
                                                                              v.number())];
                } else {
                    if (v.kind() != Value::Kind::Category) {
                        throw Error(ErrorCode::SchemaMismatch,
                                    "attribute " + node->attribute + " must be categorical");
                    }
                    label = v.category();
                }
                bool found = false;
                for (size_t i = 0; i < node->childCategories.size() && !found; ++i) {
                    for (const auto& cat : node->childCategories[i]) {
                        if (cat == label) {
                            child = i;
                            found = true;
                            break;
                        }
                    }
                }
            }
        }
        node = &node->children[child];
    }
    return node->label;
}

std::string predict(const Tree& tree, const Dataset& dataset, std::size_t row) {
    return predictRecord(tree, dataset.codebook(), dataset.row(row));
}

double evaluate(const Tree& tree, const Dataset& test, const std::string& target) {
    if (test.rowCount() == 0) {
        throw Error(ErrorCode::EmptyTestSet, "evaluation needs at least one record");
    }
    const size_t targetCol = test.codebook().requireIndexOf(target);
    size_t correct = 0;
    for (size_t r = 0; r < test.rowCount(); ++r) {
        if (predict(tree, test, r) == test.at(r, targetCol).category()) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(test.rowCount());
}

Dataset selectRows(const Dataset& dataset, const std::vector<std::size_t>& rows) {
    std::vector<std::vector<Value>> out;
    out.reserve(rows.size());
    for (size_t r : rows) out.push_back(dataset.row(r));
    return Dataset(dataset.codebook(), std::move(out));
}

StratifiedSplit stratifiedSplit(const Dataset& dataset, const std::string& target,
                                double trainFraction, std::uint64_t seed) {
    const size_t targetCol = dataset.codebook().requireIndexOf(target);
    std::map<std::string, std::vector<size_t>> byClass;
    for (size_t r = 0; r < dataset.rowCount(); ++r) {
        byClass[dataset.at(r, targetCol).category()].push_back(r);
    }
    std::mt19937_64 gen(seed);
    StratifiedSplit split;
    for (auto& [cls, rows] : byClass) {
        rng::shuffle(rows, gen);
        const size_t take = static_cast<size_t>(
            std::ceil(trainFraction * static_cast<double>(rows.size())));
        for (size_t i = 0; i < rows.size(); ++i) {
            (i < take ? split.trainRows : split.testRows).push_back(rows[i]);
        }
    }
    std::sort(split.trainRows.begin(), split.trainRows.end());
    std::sort(split.testRows.begin(), split.testRows.end());
    return split;
}

ComparisonTable compareAlgorithms(const Dataset& dataset, const std::string& target,
                                  const TreeParams& params, std::uint64_t seed,
                                  std::size_t folds) {
    const size_t n = dataset.rowCount();
    if (folds < 2 || folds > n) {
        throw Error(ErrorCode::TooFewRows, "fold count must lie in [2, n]");
    }
    const size_t targetCol = dataset.codebook().requireIndexOf(target);

    std::map<std::string, std::vector<size_t>> byClass;
    for (size_t r = 0; r < n; ++r) byClass[dataset.at(r, targetCol).category()].push_back(r);
    std::mt19937_64 gen(seed);
    std::vector<std::vector<size_t>> foldRows(folds);
    for (auto& [cls, rows] : byClass) {
        rng::shuffle(rows, gen);
        for (size_t i = 0; i < rows.size(); ++i) foldRows[i % folds].push_back(rows[i]);
    }
    for (auto& rows : foldRows) std::sort(rows.begin(), rows.end());

    ComparisonTable table;
    double bestAccuracy = -1.0;
    for (TreeAlgorithm algorithm :
         {TreeAlgorithm::Cart, TreeAlgorithm::GainRatio, TreeAlgorithm::Chaid}) {
        size_t correct = 0, tested = 0;
        for (size_t f = 0; f < folds; ++f) {
            if (foldRows[f].empty()) continue;
            std::vector<size_t> trainRows;
            for (size_t other = 0; other < folds; ++other) {
                if (other == f) continue;
                trainRows.insert(trainRows.end(), foldRows[other].begin(), foldRows[other].end());
            }
            std::sort(trainRows.begin(), trainRows.end());
            const Dataset train = selectRows(dataset, trainRows);
            const Tree tree = growTree(train, target, algorithm, params, seed);
            for (size_t r : foldRows[f]) {
                if (predictRecord(tree, dataset.codebook(), dataset.row(r)) ==
                    dataset.at(r, targetCol).category()) {
                    ++correct;
                }
                ++tested;
            }
        }
        const double percent =
            tested == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(tested);
        table.rows.push_back({treeAlgorithmDisplayName(algorithm), percent});
        if (percent > bestAccuracy) {
            bestAccuracy = percent;
            table.bestAlgorithm = treeAlgorithmDisplayName(algorithm);
        }
    }
    return table;
}

std::size_t Tree::leafCount() const { return countLeaves(root); }

std::string Tree::rootAttribute() const { return root.leaf ? "" : root.attribute; }

std::string Tree::toJson() const {
    nlohmann::ordered_json doc;
    doc["algorithm"] = treeAlgorithmName(algorithm);
    doc["target"] = target;
    doc["classes"] = classes;
    doc["numeric_bin_edges"] = numericBinEdges;
    doc["leaf_count"] = leafCount();
    doc["root_attribute"] = rootAttribute();
    doc["root"] = nodeToJson(root);
    return doc.dump(2) + "\n";
}

Tree Tree::fromJson(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("tree json: ") + e.what());
    }
    Tree tree;
    try {
        tree.algorithm = parseTreeAlgorithm(doc.at("algorithm").get<std::string>());
        tree.target = doc.at("target").get<std::string>();
        tree.classes = doc.at("classes").get<std::vector<std::string>>();
        tree.numericBinEdges =
            doc.at("numeric_bin_edges").get<std::map<std::string, std::vector<double>>>();
        tree.root = nodeFromJson(doc.at("root"));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("tree json: ") + e.what());
    }
    return tree;
}

std::string Tree::renderText() const {
    std::string out = treeAlgorithmDisplayName(algorithm) + " tree for " + target + "\n";
    renderNode(root, 0, out);
    return out;
}

std::string ComparisonTable::renderText() const {
    size_t width = std::string("Decision tree").size();
    for (const auto& row : rows) width = std::max(width, row.algorithm.size());
    std::string out = "Decision tree";
    out.append(width - std::string("Decision tree").size(), ' ');
    out += " | Accuracy\n";
    out += std::string(width, '-') + " | --------\n";
    for (const auto& row : rows) {
        char acc[32];
        std::snprintf(acc, sizeof(acc), "%.2f%%", row.accuracyPercent);
        out += row.algorithm;
        out.append(width - row.algorithm.size(), ' ');
        out += " | ";
        out += acc;
        out += "\n";
    }
    return out;
}

std::string ComparisonTable::renderMarkdown() const {
    std::string out = "| Decision tree | Accuracy |\n| --- | --- |\n";
    for (const auto& row : rows) {
        char acc[32];
        std::snprintf(acc, sizeof(acc), "%.2f%%", row.accuracyPercent);
        out += "| " + row.algorithm + " | " + acc + " |\n";
    }
    return out;
}

std::string ComparisonTable::toJson() const {
    nlohmann::ordered_json doc;
    doc["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : rows) {
        nlohmann::ordered_json entry;
        entry["algorithm"] = row.algorithm;
        entry["accuracy_percent"] = row.accuracyPercent;
        doc["rows"].push_back(std::move(entry));
    }
    doc["best_algorithm"] = bestAlgorithm;
    return doc.dump(2) + "\n";
}

} // namespace orgminer
