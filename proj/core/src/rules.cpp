#include "orgminer/rules.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"

namespace orgminer {

namespace {

constexpr double kEps = 1e-12;
constexpr std::size_t kBruteForceGuard = 2000000;

// Observed (column, category) items of every non-numeric column, ids
// grouped by column in codebook order.
struct ItemUniverse {
    std::vector<size_t> itemColumn;            // itemId -> dataset column
    std::vector<std::string> itemValue;        // itemId -> category
    std::vector<size_t> slotOfColumn;          // dataset column -> row slot
    std::vector<std::vector<size_t>> rowItems; // per row, itemId per slot
    std::vector<size_t> itemCount;             // itemId -> row count

    size_t items() const { return itemColumn.size(); }
};

constexpr size_t kNoSlot = static_cast<size_t>(-1);

ItemUniverse buildUniverse(const Dataset& dataset) {
    const Codebook& cb = dataset.codebook();
    const size_t n = dataset.rowCount();
    ItemUniverse u;
    u.slotOfColumn.assign(cb.size(), kNoSlot);
    std::vector<std::vector<size_t>> idOfCat(cb.size());
    for (size_t c = 0; c < cb.size(); ++c) {
        const AttributeSpec& spec = cb.at(c);
        if (spec.isNumeric()) continue;
        std::vector<bool> seen(spec.categories.size(), false);
        for (size_t r = 0; r < n; ++r) {
            const Value& v = dataset.at(r, c);
            if (v.isMissing()) {
                throw Error(ErrorCode::IncompleteData, "rule mining requires complete data");
            }
            seen[static_cast<size_t>(spec.categoryIndex(v.category()))] = true;
        }
        u.slotOfColumn[c] = 0;  // marks the column as minable; slot set below
        idOfCat[c].assign(spec.categories.size(), kNoSlot);
        for (size_t cat = 0; cat < spec.categories.size(); ++cat) {
            if (!seen[cat]) continue;
            idOfCat[c][cat] = u.items();
            u.itemColumn.push_back(c);
            u.itemValue.push_back(spec.categories[cat]);
        }
    }
    size_t slots = 0;
    for (size_t c = 0; c < cb.size(); ++c) {
        if (u.slotOfColumn[c] != kNoSlot) u.slotOfColumn[c] = slots++;
    }
    u.rowItems.assign(n, std::vector<size_t>(slots, kNoSlot));
    u.itemCount.assign(u.items(), 0);
    for (size_t r = 0; r < n; ++r) {
        for (size_t c = 0; c < cb.size(); ++c) {
            const size_t slot = u.slotOfColumn[c];
            if (slot == kNoSlot) continue;
            const AttributeSpec& spec = cb.at(c);
            const size_t cat =
                static_cast<size_t>(spec.categoryIndex(dataset.at(r, c).category()));
            const size_t id = idOfCat[c][cat];
            u.rowItems[r][slot] = id;
            ++u.itemCount[id];
        }
    }
    return u;
}

bool rowHasItem(const ItemUniverse& u, size_t row, size_t item) {
    return u.rowItems[row][u.slotOfColumn[u.itemColumn[item]]] == item;
}

size_t countItemset(const ItemUniverse& u, const std::vector<size_t>& items, size_t n) {
    size_t count = 0;
    for (size_t r = 0; r < n; ++r) {
        bool all = true;
        for (size_t item : items) {
            if (!rowHasItem(u, r, item)) {
                all = false;
                break;
            }
        }
        if (all) ++count;
    }
    return count;
}

Item makeItem(const ItemUniverse& u, const Dataset& dataset, size_t id) {
    return Item{dataset.codebook().at(u.itemColumn[id]).name, u.itemValue[id]};
}

double jMeasure(double pA, double pCgivenA, double pC) {
    double j = 0.0;
    if (pCgivenA > 0.0) j += pCgivenA * std::log2(pCgivenA / pC);
    const double q = 1.0 - pCgivenA;
    if (q > 0.0) j += q * std::log2(q / (1.0 - pC));
    return std::max(0.0, pA * j);
}

bool rankBefore(const Rule& a, const Rule& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.support != b.support) return a.support > b.support;
    if (a.antecedent.size() != b.antecedent.size()) {
        return a.antecedent.size() < b.antecedent.size();
    }
    for (size_t i = 0; i < a.antecedent.size(); ++i) {
        const Item& x = a.antecedent[i];
        const Item& y = b.antecedent[i];
        if (x.attribute != y.attribute) return x.attribute < y.attribute;
        if (x.value != y.value) return x.value < y.value;
    }
    if (a.consequent.attribute != b.consequent.attribute) {
        return a.consequent.attribute < b.consequent.attribute;
    }
    return a.consequent.value < b.consequent.value;
}

void rankAndTruncate(RuleSet& set, size_t topN) {
    std::sort(set.rules.begin(), set.rules.end(), rankBefore);
    if (set.rules.size() > topN) set.rules.resize(topN);
}

size_t checkConsequent(const Dataset& dataset, const std::string& attribute) {
    const size_t col = dataset.codebook().requireIndexOf(attribute);
    if (dataset.codebook().at(col).isNumeric()) {
        throw Error(ErrorCode::ConsequentNotCategorical, attribute);
    }
    return col;
}

// Observed consequent item ids in category order.
std::vector<size_t> consequentItems(const ItemUniverse& u, size_t consequentCol) {
    std::vector<size_t> ids;
    for (size_t id = 0; id < u.items(); ++id) {
        if (u.itemColumn[id] == consequentCol) ids.push_back(id);
    }
    return ids;
}

Rule makeRule(const ItemUniverse& u, const Dataset& dataset,
              const std::vector<size_t>& antecedent, size_t consequentItem, size_t countA,
              size_t countAC, size_t n) {
    Rule rule;
    for (size_t id : antecedent) rule.antecedent.push_back(makeItem(u, dataset, id));
    rule.consequent = makeItem(u, dataset, consequentItem);
    rule.support = static_cast<double>(countAC) / static_cast<double>(n);
    rule.confidence = static_cast<double>(countAC) / static_cast<double>(countA);
    const double pA = static_cast<double>(countA) / static_cast<double>(n);
    const double pC =
        static_cast<double>(u.itemCount[consequentItem]) / static_cast<double>(n);
    rule.jMeasure = jMeasure(pA, rule.confidence, pC);
    rule.coverCount = countAC;
    return rule;
}

} // namespace

std::vector<FrequentItemset> apriori(const Dataset& dataset, double minSupport) {
    const size_t n = dataset.rowCount();
    if (n == 0) return {};
    const ItemUniverse u = buildUniverse(dataset);
    const double nReal = static_cast<double>(n);
    auto frequent = [&](size_t count) {
        return count >= 1 && static_cast<double>(count) / nReal + kEps >= minSupport;
    };

    std::vector<FrequentItemset> out;
    auto emit = [&](const std::vector<size_t>& ids, size_t count) {
        FrequentItemset set;
        for (size_t id : ids) set.items.push_back(makeItem(u, dataset, id));
        set.count = count;
        set.support = static_cast<double>(count) / nReal;
        out.push_back(std::move(set));
    };

    std::vector<std::vector<size_t>> level;
    for (size_t id = 0; id < u.items(); ++id) {
        if (frequent(u.itemCount[id])) {
            emit({id}, u.itemCount[id]);
            level.push_back({id});
        }
    }

    std::set<std::vector<size_t>> knownFrequent(level.begin(), level.end());
    while (level.size() > 1) {
        std::vector<std::vector<size_t>> next;
        std::set<std::vector<size_t>> nextKnown;
        for (size_t i = 0; i < level.size(); ++i) {
            for (size_t j = i + 1; j < level.size(); ++j) {
                if (!std::equal(level[i].begin(), level[i].end() - 1, level[j].begin())) {
                    continue;
                }
                const size_t a = level[i].back();
                const size_t b = level[j].back();
                if (u.itemColumn[a] == u.itemColumn[b]) continue;
                std::vector<size_t> candidate = level[i];
                candidate.push_back(b);
                bool closed = true;
                std::vector<size_t> subset(candidate.begin() + 1, candidate.end());
                for (size_t drop = 0; closed && drop < candidate.size(); ++drop) {
                    if (!knownFrequent.count(subset)) closed = false;
                    if (drop < subset.size()) subset[drop] = candidate[drop];
                }
                if (!closed) continue;
                const size_t count = countItemset(u, candidate, n);
                if (!frequent(count)) continue;
                emit(candidate, count);
                nextKnown.insert(candidate);
                next.push_back(std::move(candidate));
            }
        }
        knownFrequent = std::move(nextKnown);
        level = std::move(next);
    }
    return out;
}

RuleSet gri(const Dataset& dataset, const std::string& consequentAttribute,
            const RuleParams& params) {
    const size_t consequentCol = checkConsequent(dataset, consequentAttribute);
    const size_t n = dataset.rowCount();
    RuleSet out;
    if (n == 0 || params.maxAntecedentLen == 0) return out;
    const ItemUniverse u = buildUniverse(dataset);
    const double nReal = static_cast<double>(n);

    struct Candidate {
        std::vector<size_t> items;
        size_t countA = 0;
        size_t countAC = 0;
        double j = 0.0;
    };

    for (size_t cItem : consequentItems(u, consequentCol)) {
        const double pC = static_cast<double>(u.itemCount[cItem]) / nReal;

        auto evaluate = [&](std::vector<size_t> items) -> Candidate {
            Candidate cand;
            cand.items = std::move(items);
            for (size_t r = 0; r < n; ++r) {
                bool all = true;
                for (size_t item : cand.items) {
                    if (!rowHasItem(u, r, item)) {
                        all = false;
                        break;
                    }
                }
                if (!all) continue;
                ++cand.countA;
                if (rowHasItem(u, r, cItem)) ++cand.countAC;
            }
            if (cand.countA > 0) {
                const double pA = static_cast<double>(cand.countA) / nReal;
                const double conf =
                    static_cast<double>(cand.countAC) / static_cast<double>(cand.countA);
                cand.j = jMeasure(pA, conf, pC);
            }
            return cand;
        };

        auto keep = [&](const Candidate& cand) {
            return cand.countA > 0 &&
                   static_cast<double>(cand.countAC) / nReal + kEps >= params.minSupport;
        };
        auto tryEmit = [&](const Candidate& cand) {
            const double conf =
                static_cast<double>(cand.countAC) / static_cast<double>(cand.countA);
            if (conf + kEps >= params.minConfidence) {
                out.rules.push_back(makeRule(u, dataset, cand.items, cItem, cand.countA,
                                             cand.countAC, n));
            }
        };

        std::vector<Candidate> beam;
        for (size_t id = 0; id < u.items(); ++id) {
            if (u.itemColumn[id] == consequentCol) continue;
            Candidate cand = evaluate({id});
            if (!keep(cand)) continue;
            tryEmit(cand);
            beam.push_back(std::move(cand));
        }

        for (size_t len = 2; len <= params.maxAntecedentLen; ++len) {
            std::sort(beam.begin(), beam.end(), [](const Candidate& a, const Candidate& b) {
                if (a.j != b.j) return a.j > b.j;
                return a.items < b.items;
            });
            if (beam.size() > params.beamWidth) beam.resize(params.beamWidth);
            std::vector<Candidate> next;
            for (const Candidate& parent : beam) {
                // Specialize with later-column items only, so each
                // antecedent is built exactly once.
                const size_t lastColumn = u.itemColumn[parent.items.back()];
                for (size_t id = 0; id < u.items(); ++id) {
                    const size_t col = u.itemColumn[id];
                    if (col <= lastColumn || col == consequentCol) continue;
                    std::vector<size_t> items = parent.items;
                    items.push_back(id);
                    Candidate cand = evaluate(std::move(items));
                    if (!keep(cand)) continue;
                    tryEmit(cand);
                    next.push_back(std::move(cand));
                }
            }
            beam = std::move(next);
            if (beam.empty()) break;
        }
    }
    rankAndTruncate(out, params.topN);
    return out;
}

RuleSet bruteForceRules(const Dataset& dataset, const std::string& consequentAttribute,
                        const RuleParams& params) {
    const size_t consequentCol = checkConsequent(dataset, consequentAttribute);
    const size_t n = dataset.rowCount();
    RuleSet out;
    if (n == 0 || params.maxAntecedentLen == 0) return out;
    const ItemUniverse u = buildUniverse(dataset);
    const double nReal = static_cast<double>(n);
    const std::vector<size_t> cItems = consequentItems(u, consequentCol);

    size_t enumerated = 0;
    std::vector<size_t> stack;
    auto visit = [&](auto&& self, size_t firstId) -> void {
        for (size_t id = firstId; id < u.items(); ++id) {
            const size_t col = u.itemColumn[id];
            if (col == consequentCol) continue;
            if (!stack.empty() && col <= u.itemColumn[stack.back()]) continue;
            stack.push_back(id);
            if (++enumerated > kBruteForceGuard) {
                throw Error(ErrorCode::SearchSpaceTooLarge,
                            "antecedent space exceeds the exhaustive-search guard");
            }
            size_t countA = 0;
            std::vector<size_t> countAC(cItems.size(), 0);
            for (size_t r = 0; r < n; ++r) {
                bool all = true;
                for (size_t item : stack) {
                    if (!rowHasItem(u, r, item)) {
                        all = false;
                        break;
                    }
                }
                if (!all) continue;
                ++countA;
                for (size_t ci = 0; ci < cItems.size(); ++ci) {
                    if (rowHasItem(u, r, cItems[ci])) ++countAC[ci];
                }
            }
            if (countA > 0) {
                for (size_t ci = 0; ci < cItems.size(); ++ci) {
                    const double support = static_cast<double>(countAC[ci]) / nReal;
                    const double conf =
                        static_cast<double>(countAC[ci]) / static_cast<double>(countA);
                    if (support + kEps >= params.minSupport &&
                        conf + kEps >= params.minConfidence) {
                        out.rules.push_back(
                            makeRule(u, dataset, stack, cItems[ci], countA, countAC[ci], n));
                    }
                }
            }
            if (stack.size() < params.maxAntecedentLen) self(self, id + 1);
            stack.pop_back();
        }
    };
    visit(visit, 0);
    rankAndTruncate(out, params.topN);
    return out;
}

std::string ruleText(const Rule& rule) {
    std::string text;
    for (size_t i = 0; i < rule.antecedent.size(); ++i) {
        if (i > 0) text += " and ";
        text += "their " + rule.antecedent[i].attribute + " is " + rule.antecedent[i].value;
    }
    if (text.empty()) return "any record";
    text[0] = 'T';
    return text;
}

LinkedReport linkRulesToClusters(const RuleSet& rules, const ClusterProfile& profiles) {
    std::map<std::string, std::pair<size_t, std::string>> byValue;
    for (const auto& cluster : profiles.clusters) {
        byValue[clusterCategoryName(cluster.label)] = {cluster.label + 1, cluster.narrative};
    }
    LinkedReport report;
    for (const Rule& rule : rules.rules) {
        const auto it = byValue.find(rule.consequent.value);
        if (it == byValue.end()) {
            throw Error(ErrorCode::UnknownCluster,
                        "rule consequent " + rule.consequent.value + " has no profile");
        }
        report.rows.push_back({ruleText(rule), "They are in cluster " +
                                                   std::to_string(it->second.first) + ". " +
                                                   it->second.second});
    }
    return report;
}

std::string LinkedReport::renderMarkdown() const {
    std::string out = "| Rule | Results |\n| --- | --- |\n";
    for (const auto& row : rows) {
        out += "| " + row.ruleText + " | " + row.resultText + " |\n";
    }
    return out;
}

std::string RuleSet::toJson() const {
    nlohmann::ordered_json doc;
    doc["rule_count"] = rules.size();
    doc["rules"] = nlohmann::ordered_json::array();
    for (const Rule& rule : rules) {
        nlohmann::ordered_json entry;
        entry["antecedent"] = nlohmann::ordered_json::array();
        for (const Item& item : rule.antecedent) {
            entry["antecedent"].push_back({{"attribute", item.attribute},
                                           {"value", item.value}});
        }
        entry["consequent"] = {{"attribute", rule.consequent.attribute},
                               {"value", rule.consequent.value}};
        entry["support"] = rule.support;
        entry["confidence"] = rule.confidence;
        entry["j_measure"] = rule.jMeasure;
        entry["cover_count"] = rule.coverCount;
        entry["text"] = ruleText(rule);
        doc["rules"].push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

std::size_t discretizeBinIndex(const std::vector<double>& edges, double value) {
    return static_cast<size_t>(
        std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

std::vector<std::string> discretizeBinLabels(const std::vector<double>& edges) {
    if (edges.empty()) return {"all"};
    std::vector<std::string> labels;
    labels.push_back("up to " + formatNumber(edges.front()));
    for (size_t i = 1; i < edges.size(); ++i) {
        labels.push_back(formatNumber(edges[i - 1]) + " to " + formatNumber(edges[i]));
    }
    labels.push_back("over " + formatNumber(edges.back()));
    return labels;
}

Discretization discretizeNumerics(const Dataset& dataset, std::size_t bins) {
    const Codebook& cb = dataset.codebook();
    const size_t n = dataset.rowCount();
    std::map<std::string, std::vector<double>> edgesOf;
    std::map<std::string, std::vector<std::string>> labelsOf;
    std::vector<AttributeSpec> specs;
    for (size_t c = 0; c < cb.size(); ++c) {
        const AttributeSpec& spec = cb.at(c);
        if (!spec.isNumeric()) {
            specs.push_back(spec);
            continue;
        }
        std::vector<double> values;
        for (size_t r = 0; r < n; ++r) {
            const Value& v = dataset.at(r, c);
            if (!v.isMissing()) values.push_back(v.number());
        }
        std::vector<double> edges;
        if (!values.empty() && bins > 1) {
            std::sort(values.begin(), values.end());
            for (size_t i = 1; i < bins; ++i) {
                const double e = values[(i * values.size()) / bins];
                if (e < values.back() && (edges.empty() || e > edges.back())) {
                    edges.push_back(e);
                }
            }
        }
        const std::vector<std::string> labels = discretizeBinLabels(edges);
        specs.push_back(AttributeSpec{spec.name, AttributeKind::Categorical, labels,
                                      spec.group});
        edgesOf[spec.name] = std::move(edges);
        labelsOf[spec.name] = labels;
    }
    Codebook binned(std::move(specs));
    std::vector<std::vector<Value>> rows;
    rows.reserve(n);
    for (size_t r = 0; r < n; ++r) {
        std::vector<Value> row;
        row.reserve(cb.size());
        for (size_t c = 0; c < cb.size(); ++c) {
            const Value& v = dataset.at(r, c);
            const AttributeSpec& spec = cb.at(c);
            if (!spec.isNumeric() || v.isMissing()) {
                row.push_back(v);
                continue;
            }
            const auto& edges = edgesOf.at(spec.name);
            const auto& labels = labelsOf.at(spec.name);
            row.push_back(Value::category(labels[discretizeBinIndex(edges, v.number())]));
        }
        rows.push_back(std::move(row));
    }
    return Discretization{Dataset(std::move(binned), std::move(rows)), std::move(edgesOf),
                          std::move(labelsOf)};
}

} // namespace orgminer
