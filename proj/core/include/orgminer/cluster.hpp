#pragma once
// Feature encoding, K-means and K-medoids, k selection, cluster profiling.

#include <cstdint>
#include <string>
#include <vector>

#include "orgminer/dataset.hpp"

namespace orgminer {

struct FeatureOrigin {
    std::string attribute;
    std::string category;   // empty for numeric/ordinal features
};

struct FeatureMatrix {
    std::vector<std::string> featureNames;
    std::vector<FeatureOrigin> origins;
    std::vector<std::vector<double>> values;      // n rows, p features
    std::vector<std::string> constantNumericColumns;

    std::size_t rowCount() const { return values.size(); }
    std::size_t featureCount() const { return featureNames.size(); }
};

struct Clustering {
    std::size_t k = 0;
    std::vector<std::size_t> assignment;          // per-row label in [0, k)
    std::vector<std::vector<double>> centroids;   // k-means centers
    std::vector<std::size_t> medoids;             // k-medoids row indices
    double wcss = 0.0;
    std::size_t iterations = 0;
    std::vector<double> wcssTrace;                // non-increasing
};

struct KSelection {
    struct Row {
        std::size_t k;
        double silhouette;
        double wcss;
    };
    std::size_t bestK = 0;
    std::vector<Row> table;
    Clustering best;                              // clustering behind bestK
};

struct AttributeProfile {
    std::string attribute;
    std::string dominantValue;
    double prevalence = 0.0;        // within-cluster share of the dominant value
    double globalPrevalence = 0.0;
    double lift = 0.0;
    bool distinguishing = false;
};

struct ClusterProfile {
    struct Cluster {
        std::size_t label = 0;
        std::size_t size = 0;
        std::vector<AttributeProfile> attributes;       // codebook order
        std::vector<AttributeProfile> distinguishing;   // lift descending
        std::string narrative;
    };
    double liftFactor = 1.5;
    std::vector<Cluster> clusters;
};

// Category name used for cluster labels when they become a dataset
// attribute; one-based to match the narrative numbering.
inline std::string clusterCategoryName(std::size_t label) {
    return "cluster_" + std::to_string(label + 1);
}

// One-hot categorical blocks, 0/1 binaries, rank-scaled ordinals,
// min-max scaled numerics. Requires a complete dataset.
FeatureMatrix encode(const Dataset& dataset);

// Lloyd's algorithm with k-means++ seeding; empty clusters are reseeded
// to the point farthest from the stale center.
Clustering kmeans(const FeatureMatrix& features, std::size_t k, std::uint64_t seed,
                  std::size_t maxIter = 100);

// PAM: greedy BUILD, then SWAP until no improving exchange.
Clustering kmedoids(const FeatureMatrix& features, std::size_t k, std::uint64_t seed);

// Mean silhouette over all points, Euclidean distances; singleton
// clusters score 0 by convention.
double silhouette(const FeatureMatrix& features, const Clustering& clustering);

// Best-of-restarts k-means per k, scored by silhouette; ties prefer
// the smaller k.
KSelection selectK(const FeatureMatrix& features, std::size_t kMin, std::size_t kMax,
                   std::uint64_t seed, std::size_t restarts = 10);

ClusterProfile profileClusters(const Dataset& dataset, const Clustering& clustering,
                               double liftFactor = 1.5);

// Report assembly: selection table, assignments, profiles, narratives.
std::string clusteringReportJson(const KSelection& selection, const Clustering& kmeansResult,
                                 const Clustering& kmedoidsResult, double crossAri,
                                 const ClusterProfile& profile);
std::string clusterNarrativesMarkdown(const ClusterProfile& profile);

} // namespace orgminer
