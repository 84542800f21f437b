#pragma once
// Synthetic questionnaire generator with planted groups and planted
// redundant attribute pairs, plus ground-truth metrics.

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "orgminer/dataset.hpp"

namespace orgminer {

struct RedundantPairSpec {
    std::string source;       // existing attribute to copy
    std::string name;         // appended attribute name
    double targetAssociation; // calibrated to ±0.05
};

struct SynthSpec {
    std::size_t nRows = 210;
    std::size_t nGroups = 9;
    Codebook codebook;        // base attributes; defaults to defaultSynthCodebook()
    std::size_t signatureAttributesPerGroup = 4;
    double noiseRate = 0.05;
    std::vector<RedundantPairSpec> redundantPairs;  // defaults to defaultRedundantPairs()
    std::map<std::string, std::pair<long, long>> numericRanges;  // inclusive integer ranges
    std::uint64_t seed = 0;

    SynthSpec();
};

struct PlantedPair {
    std::string source;
    std::string derived;
    double target = 0.0;
    double achieved = 0.0;
    std::size_t rerandomizedCells = 0;
};

struct GroundTruth {
    std::vector<std::size_t> groupOf;                       // per row
    std::vector<std::vector<std::pair<std::string, std::string>>> signatures;  // per group
    std::vector<PlantedPair> pairs;

    std::string toJson() const;
};

Codebook defaultSynthCodebook();
std::vector<RedundantPairSpec> defaultRedundantPairs();

// Deterministic generation: round-robin group labels, signature values
// with per-cell noise flips, skewed global draws elsewhere, and derived
// columns calibrated by re-randomizing copied cells.
std::pair<Dataset, GroundTruth> generate(const SynthSpec& spec);

// Standard pair-counting adjusted Rand index.
double adjustedRandIndex(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

} // namespace orgminer
