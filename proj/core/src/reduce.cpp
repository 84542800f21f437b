#include "orgminer/reduce.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "json.hpp"
#include "orgminer/stats.hpp"

namespace orgminer {

namespace {

void requireComplete(const Dataset& dataset) {
    for (size_t r = 0; r < dataset.rowCount(); ++r) {
        for (size_t c = 0; c < dataset.columnCount(); ++c) {
            if (dataset.at(r, c).isMissing()) {
                throw Error(ErrorCode::IncompleteData,
                            "association requires a complete dataset; run imputation first");
            }
        }
    }
}

// Distinct observed values, as category strings or formatted numbers.
std::vector<std::string> observedValues(const Dataset& dataset, size_t col) {
    std::map<std::string, size_t> seen;
    std::vector<std::string> order;
    for (size_t r = 0; r < dataset.rowCount(); ++r) {
        const std::string key = formatValue(dataset.at(r, col));
        if (seen.emplace(key, order.size()).second) order.push_back(key);
    }
    return order;
}

double absPearson(const Dataset& d, size_t a, size_t b) {
    const size_t n = d.rowCount();
    double meanA = 0.0, meanB = 0.0;
    for (size_t r = 0; r < n; ++r) {
        meanA += d.at(r, a).number();
        meanB += d.at(r, b).number();
    }
    meanA /= static_cast<double>(n);
    meanB /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (size_t r = 0; r < n; ++r) {
        const double da = d.at(r, a).number() - meanA;
        const double db = d.at(r, b).number() - meanB;
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return std::min(1.0, std::abs(sxy / std::sqrt(sxx * syy)));
}

double cramersV(const Dataset& d, size_t a, size_t b) {
    std::map<std::string, size_t> catA, catB;
    for (size_t r = 0; r < d.rowCount(); ++r) {
        catA.emplace(d.at(r, a).category(), catA.size());
        catB.emplace(d.at(r, b).category(), catB.size());
    }
    if (catA.size() < 2 || catB.size() < 2) return 0.0;
    std::vector<std::vector<double>> table(catA.size(), std::vector<double>(catB.size(), 0.0));
    for (size_t r = 0; r < d.rowCount(); ++r) {
        table[catA[d.at(r, a).category()]][catB[d.at(r, b).category()]] += 1.0;
    }
    const double chi2 = stats::chiSquare(table).statistic;
    const double n = static_cast<double>(d.rowCount());
    const double minDim = static_cast<double>(std::min(catA.size(), catB.size()) - 1);
    return std::min(1.0, std::sqrt(chi2 / (n * minDim)));
}

// Correlation ratio: square root of the between-group variance fraction.
double correlationRatio(const Dataset& d, size_t numericCol, size_t catCol) {
    std::map<std::string, std::pair<double, size_t>> groups;  // sum, count
    double total = 0.0;
    const size_t n = d.rowCount();
    for (size_t r = 0; r < n; ++r) {
        const double y = d.at(r, numericCol).number();
        auto& g = groups[d.at(r, catCol).category()];
        g.first += y;
        g.second += 1;
        total += y;
    }
    const double grandMean = total / static_cast<double>(n);
    double ssTotal = 0.0;
    for (size_t r = 0; r < n; ++r) {
        const double dv = d.at(r, numericCol).number() - grandMean;
        ssTotal += dv * dv;
    }
    if (ssTotal <= 0.0 || groups.size() < 2) return 0.0;
    double ssBetween = 0.0;
    for (const auto& [cat, g] : groups) {
        const double groupMean = g.first / static_cast<double>(g.second);
        const double dv = groupMean - grandMean;
        ssBetween += static_cast<double>(g.second) * dv * dv;
    }
    return std::min(1.0, std::sqrt(ssBetween / ssTotal));
}

} // namespace

std::string measureTagName(MeasureTag tag) {
    switch (tag) {
        case MeasureTag::Pearson: return "pearson";
        case MeasureTag::CramersV: return "cramers_v";
        case MeasureTag::CorrelationRatio: return "correlation_ratio";
    }
    return "pearson";
}

AssociationMatrix associationMatrix(const Dataset& dataset) {
    requireComplete(dataset);
    if (dataset.rowCount() < 2) {
        throw Error(ErrorCode::TooFewRows, "association needs at least two rows");
    }
    const Codebook& cb = dataset.codebook();
    const size_t p = cb.size();
    AssociationMatrix m;
    m.attributes.reserve(p);
    for (size_t c = 0; c < p; ++c) m.attributes.push_back(cb.at(c).name);
    m.scores.assign(p, std::vector<double>(p, 0.0));
    m.measures.assign(p, std::vector<MeasureTag>(p, MeasureTag::Pearson));

    std::vector<bool> constant(p, false);
    for (size_t c = 0; c < p; ++c) {
        if (observedValues(dataset, c).size() < 2) {
            constant[c] = true;
            m.constantColumns.push_back(cb.at(c).name);
        }
    }

    for (size_t i = 0; i < p; ++i) {
        m.scores[i][i] = 1.0;
        const bool numI = cb.at(i).isNumeric();
        m.measures[i][i] = numI ? MeasureTag::Pearson : MeasureTag::CramersV;
        for (size_t j = i + 1; j < p; ++j) {
            const bool numJ = cb.at(j).isNumeric();
            MeasureTag tag;
            double score = 0.0;
            if (numI && numJ) {
                tag = MeasureTag::Pearson;
                if (!constant[i] && !constant[j]) score = absPearson(dataset, i, j);
            } else if (!numI && !numJ) {
                tag = MeasureTag::CramersV;
                if (!constant[i] && !constant[j]) score = cramersV(dataset, i, j);
            } else {
                tag = MeasureTag::CorrelationRatio;
                const size_t numericCol = numI ? i : j;
                const size_t catCol = numI ? j : i;
                if (!constant[i] && !constant[j]) score = correlationRatio(dataset, numericCol, catCol);
            }
            m.scores[i][j] = m.scores[j][i] = score;
            m.measures[i][j] = m.measures[j][i] = tag;
        }
    }
    return m;
}

ReductionReport pruneRedundant(const AssociationMatrix& matrix, double threshold) {
    const size_t p = matrix.size();
    struct Pair {
        double score;
        size_t i, j;
    };
    std::vector<Pair> pairs;
    for (size_t i = 0; i < p; ++i) {
        for (size_t j = i + 1; j < p; ++j) {
            if (matrix.scores[i][j] >= threshold) pairs.push_back({matrix.scores[i][j], i, j});
        }
    }
    std::sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.i != b.i) return a.i < b.i;
        return a.j < b.j;
    });

    std::vector<bool> alive(p, true);
    ReductionReport report;
    report.threshold = threshold;
    auto meanAssociation = [&](size_t x) {
        double sum = 0.0;
        size_t count = 0;
        for (size_t k = 0; k < p; ++k) {
            if (k == x || !alive[k]) continue;
            sum += matrix.scores[x][k];
            ++count;
        }
        return count == 0 ? 0.0 : sum / static_cast<double>(count);
    };
    for (const Pair& pr : pairs) {
        if (!alive[pr.i] || !alive[pr.j]) continue;
        const double meanI = meanAssociation(pr.i);
        const double meanJ = meanAssociation(pr.j);
        size_t victim, partner;
        if (meanI > meanJ) {
            victim = pr.i;
            partner = pr.j;
        } else {
            // Ties drop the later attribute in codebook order.
            victim = pr.j;
            partner = pr.i;
        }
        alive[victim] = false;
        report.drops.push_back({matrix.attributes[victim], matrix.attributes[partner], pr.score});
    }
    for (size_t k = 0; k < p; ++k) {
        if (alive[k]) report.survivors.push_back(matrix.attributes[k]);
    }
    return report;
}

Dataset applyReduction(const Dataset& dataset, const ReductionReport& report) {
    const Codebook& cb = dataset.codebook();
    std::vector<std::string> dropNames;
    for (const auto& drop : report.drops) dropNames.push_back(drop.dropped);
    for (const auto& name : dropNames) {
        cb.requireIndexOf(name);
    }
    Codebook reducedCb = cb.withColumnsDropped(dropNames);
    std::vector<size_t> keep;
    for (size_t c = 0; c < cb.size(); ++c) {
        if (std::find(dropNames.begin(), dropNames.end(), cb.at(c).name) == dropNames.end()) {
            keep.push_back(c);
        }
    }
    std::vector<std::vector<Value>> rows;
    rows.reserve(dataset.rowCount());
    for (size_t r = 0; r < dataset.rowCount(); ++r) {
        std::vector<Value> row;
        row.reserve(keep.size());
        for (size_t c : keep) row.push_back(dataset.at(r, c));
        rows.push_back(std::move(row));
    }
    return Dataset(std::move(reducedCb), std::move(rows));
}

std::string AssociationMatrix::toJson() const {
    nlohmann::ordered_json doc;
    doc["attributes"] = attributes;
    doc["scores"] = scores;
    nlohmann::ordered_json tags = nlohmann::ordered_json::array();
    for (const auto& row : measures) {
        nlohmann::ordered_json tagRow = nlohmann::ordered_json::array();
        for (MeasureTag t : row) tagRow.push_back(measureTagName(t));
        tags.push_back(std::move(tagRow));
    }
    doc["measures"] = std::move(tags);
    doc["constant_columns"] = constantColumns;
    return doc.dump(2) + "\n";
}

std::string ReductionReport::toJson() const {
    nlohmann::ordered_json doc;
    doc["threshold"] = threshold;
    doc["drops"] = nlohmann::ordered_json::array();
    for (const auto& drop : drops) {
        nlohmann::ordered_json entry;
        entry["dropped"] = drop.dropped;
        entry["retained_partner"] = drop.retained;
        entry["score"] = drop.score;
        doc["drops"].push_back(std::move(entry));
    }
    doc["survivors"] = survivors;
    nlohmann::ordered_json deleted = nlohmann::ordered_json::array();
    for (size_t i = 0; i < drops.size(); ++i) {
        char line[256];
        std::snprintf(line, sizeof(line), "%zu. %s - correlated with %s (correlation=%.3f)",
                      i + 1, drops[i].dropped.c_str(), drops[i].retained.c_str(), drops[i].score);
        deleted.push_back(std::string(line));
    }
    doc["deleted_similar_factors"] = std::move(deleted);
    return doc.dump(2) + "\n";
}

} // namespace orgminer
