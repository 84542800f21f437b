#include "orgminer/prep.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "json.hpp"

namespace orgminer {

namespace {

// 1/Phi^-1(3/4), the consistency constant for MAD-based scale estimates.
constexpr double kMadScale = 1.4826;

double median(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const size_t n = values.size();
    if (n == 0) return 0.0;
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

} // namespace

DropResult dropIncomplete(const Dataset& dataset, double maxMissingFraction) {
    const size_t cols = dataset.columnCount();
    std::vector<std::vector<Value>> kept;
    std::vector<size_t> dropped;
    for (size_t r = 0; r < dataset.rowCount(); ++r) {
        size_t missing = 0;
        for (size_t c = 0; c < cols; ++c) {
            if (dataset.at(r, c).isMissing()) ++missing;
        }
        const double fraction = static_cast<double>(missing) / static_cast<double>(cols);
        if (fraction > maxMissingFraction) {
            dropped.push_back(r);
        } else {
            kept.push_back(dataset.row(r));
        }
    }
    return DropResult{Dataset(dataset.codebook(), std::move(kept)), std::move(dropped)};
}

ImputeStats computeImputeStats(const Dataset& dataset) {
    ImputeStats stats;
    const Codebook& cb = dataset.codebook();
    for (size_t c = 0; c < cb.size(); ++c) {
        const AttributeSpec& spec = cb.at(c);
        stats.columns.push_back(spec.name);
        if (spec.isNumeric()) {
            double sum = 0.0;
            size_t count = 0;
            for (size_t r = 0; r < dataset.rowCount(); ++r) {
                const Value& v = dataset.at(r, c);
                if (!v.isMissing()) {
                    sum += v.number();
                    ++count;
                }
            }
            if (count == 0) {
                throw Error(ErrorCode::AllMissingColumn, spec.name);
            }
            stats.replacements.push_back(Value::number(sum / static_cast<double>(count)));
        } else {
            std::map<std::string, size_t> counts;
            for (size_t r = 0; r < dataset.rowCount(); ++r) {
                const Value& v = dataset.at(r, c);
                if (!v.isMissing()) ++counts[v.category()];
            }
            if (counts.empty()) {
                throw Error(ErrorCode::AllMissingColumn, spec.name);
            }
            // std::map iterates categories in lexicographic order, so the
            // first maximal entry is the tie-break winner.
            std::string mode;
            size_t best = 0;
            for (const auto& [category, count] : counts) {
                if (count > best) {
                    best = count;
                    mode = category;
                }
            }
            stats.replacements.push_back(Value::category(mode));
        }
    }
    return stats;
}

ImputeResult imputeWithStats(const Dataset& dataset, const ImputeStats& stats) {
    const Codebook& cb = dataset.codebook();
    if (stats.columns.size() != cb.size()) {
        throw Error(ErrorCode::SchemaMismatch, "imputation statistics do not match the codebook");
    }
    for (size_t c = 0; c < cb.size(); ++c) {
        if (stats.columns[c] != cb.at(c).name) {
            throw Error(ErrorCode::SchemaMismatch,
                        "imputation statistics column " + stats.columns[c] +
                            " does not match attribute " + cb.at(c).name);
        }
    }
    std::vector<std::vector<Value>> rows = dataset.rows();
    std::vector<CellEdit> edits;
    for (size_t r = 0; r < rows.size(); ++r) {
        for (size_t c = 0; c < rows[r].size(); ++c) {
            if (rows[r][c].isMissing()) {
                rows[r][c] = stats.replacements[c];
                edits.push_back(CellEdit{r, cb.at(c).name, stats.replacements[c]});
            }
        }
    }
    return ImputeResult{Dataset(cb, std::move(rows)), std::move(edits)};
}

ImputeResult impute(const Dataset& dataset, const ImputePolicy&) {
    return imputeWithStats(dataset, computeImputeStats(dataset));
}

OutlierReport outlierScan(const Dataset& dataset, double zThreshold) {
    OutlierReport report;
    report.zThreshold = zThreshold;
    const Codebook& cb = dataset.codebook();
    for (size_t c = 0; c < cb.size(); ++c) {
        if (!cb.at(c).isNumeric()) continue;
        std::vector<double> values;
        std::vector<size_t> rowsOf;
        for (size_t r = 0; r < dataset.rowCount(); ++r) {
            const Value& v = dataset.at(r, c);
            if (!v.isMissing()) {
                values.push_back(v.number());
                rowsOf.push_back(r);
            }
        }
        if (values.empty()) continue;
        const double med = median(values);
        std::vector<double> deviations;
        deviations.reserve(values.size());
        for (double x : values) deviations.push_back(std::abs(x - med));
        const double mad = median(deviations);
        if (mad == 0.0) {
            report.madZeroColumns.push_back(cb.at(c).name);
            continue;
        }
        const double scale = kMadScale * mad;
        for (size_t i = 0; i < values.size(); ++i) {
            const double z = std::abs(values[i] - med) / scale;
            if (z > zThreshold) {
                report.flags.push_back(OutlierFlag{cb.at(c).name, rowsOf[i], values[i], z});
            }
        }
    }
    return report;
}

std::string PrepReport::toJson() const {
    nlohmann::ordered_json doc;
    doc["rows_before"] = rowsBefore;
    doc["rows_dropped"] = droppedRows;
    doc["rows_after"] = rowsBefore - droppedRows.size();
    doc["imputations"] = nlohmann::ordered_json::array();
    for (const auto& edit : imputations) {
        nlohmann::ordered_json entry;
        entry["row"] = edit.row;
        entry["column"] = edit.column;
        entry["value"] = formatValue(edit.imputedValue);
        doc["imputations"].push_back(std::move(entry));
    }
    nlohmann::ordered_json outlierDoc;
    outlierDoc["z_threshold"] = outliers.zThreshold;
    outlierDoc["flags"] = nlohmann::ordered_json::array();
    for (const auto& flag : outliers.flags) {
        nlohmann::ordered_json entry;
        entry["column"] = flag.column;
        entry["row"] = flag.row;
        entry["value"] = flag.value;
        entry["robust_z"] = flag.robustZ;
        outlierDoc["flags"].push_back(std::move(entry));
    }
    outlierDoc["mad_zero_columns"] = outliers.madZeroColumns;
    outlierDoc["outliers_found"] = !outliers.flags.empty();
    doc["outlier_scan"] = std::move(outlierDoc);
    return doc.dump(2) + "\n";
}

} // namespace orgminer
