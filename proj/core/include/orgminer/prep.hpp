#pragma once

#include "orgminer/dataset.hpp"

#include <string>
#include <vector>

namespace orgminer {

/// Fixed imputation policy: mode for non-numeric columns, mean for numeric,
/// mode ties broken by the lexicographically smallest category.
struct ImputePolicy {};  // mode/mean rules are fixed; reserved for tunables

struct DropResult {
    Dataset dataset;
    std::vector<size_t> droppedRows; // indices into the input dataset
};

struct CellEdit {
    size_t row = 0;
    std::string column;
    Value imputedValue;
};

struct ImputeResult {
    Dataset dataset;
    std::vector<CellEdit> edits;
};

struct OutlierFlag {
    std::string column;
    size_t row = 0;
    double value = 0.0;
    double robustZ = 0.0;
};

struct OutlierReport {
    double zThreshold = 3.5;
    std::vector<OutlierFlag> flags;
    std::vector<std::string> madZeroColumns; // scanned but skipped

    bool empty() const { return flags.empty(); }
};

struct PrepReport {
    size_t rowsBefore = 0;
    std::vector<size_t> droppedRows;
    std::vector<CellEdit> imputations;
    OutlierReport outliers;

    std::string toJson() const;
};

/// Per-column statistics the imputation uses; serializable so a scoring
/// bundle can impute new records with the training data's statistics.
struct ImputeStats {
    std::vector<std::string> columns;
    std::vector<Value> replacements; // mode or mean, aligned with columns
};

DropResult dropIncomplete(const Dataset& dataset, double maxMissingFraction);
ImputeStats computeImputeStats(const Dataset& dataset);
ImputeResult impute(const Dataset& dataset, const ImputePolicy& policy = {});
ImputeResult imputeWithStats(const Dataset& dataset, const ImputeStats& stats);
OutlierReport outlierScan(const Dataset& dataset, double zThreshold = 3.5);

} // namespace orgminer
