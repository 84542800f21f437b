#pragma once
// Pairwise association over mixed-type attributes and redundancy pruning.

#include <string>
#include <vector>

#include "orgminer/dataset.hpp"

namespace orgminer {

enum class MeasureTag { Pearson, CramersV, CorrelationRatio };

std::string measureTagName(MeasureTag tag);

struct AssociationMatrix {
    std::vector<std::string> attributes;
    std::vector<std::vector<double>> scores;     // symmetric, unit diagonal
    std::vector<std::vector<MeasureTag>> measures;
    std::vector<std::string> constantColumns;    // zero variance, scored 0 everywhere

    std::size_t size() const { return attributes.size(); }
    double at(std::size_t i, std::size_t j) const { return scores[i][j]; }
    std::string toJson() const;
};

struct AttributeDrop {
    std::string dropped;
    std::string retained;
    double score = 0.0;
};

struct ReductionReport {
    double threshold = 0.4;
    std::vector<AttributeDrop> drops;
    std::vector<std::string> survivors;   // codebook order

    std::string toJson() const;
};

// |Pearson r| for numeric pairs, Cramer's V for categorical pairs, the
// correlation ratio for mixed pairs. Requires a complete dataset.
AssociationMatrix associationMatrix(const Dataset& dataset);

// Greedy pass over pairs in descending score order; within a surviving
// pair at or above the threshold, the attribute with the larger mean
// association to the other survivors is dropped.
ReductionReport pruneRedundant(const AssociationMatrix& matrix, double threshold = 0.4);

Dataset applyReduction(const Dataset& dataset, const ReductionReport& report);

} // namespace orgminer
