#include "orgminer/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

#include "json.hpp"
#include "orgminer/rng.hpp"

namespace orgminer {

namespace {

double squaredDistance(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum;
}

std::vector<std::vector<double>> kmeansppSeed(const FeatureMatrix& features, size_t k,
                                              std::mt19937_64& gen) {
    const size_t n = features.rowCount();
    std::vector<std::vector<double>> centers;
    centers.reserve(k);
    centers.push_back(features.values[rng::nextIndex(gen, n)]);
    std::vector<double> dist2(n, 0.0);
    while (centers.size() < k) {
        double total = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (const auto& c : centers) {
                best = std::min(best, squaredDistance(features.values[i], c));
            }
            dist2[i] = best;
            total += best;
        }
        size_t pick;
        if (total <= 0.0) {
            pick = rng::nextIndex(gen, n);
        } else {
            const double u = rng::nextUnit(gen) * total;
            double acc = 0.0;
            pick = n - 1;
            for (size_t i = 0; i < n; ++i) {
                acc += dist2[i];
                if (u < acc) {
                    pick = i;
                    break;
                }
            }
        }
        centers.push_back(features.values[pick]);
    }
    return centers;
}

void requireK(size_t k, size_t n) {
    if (k == 0 || k > n) {
        throw Error(ErrorCode::KExceedsN, "k must be in [1, n]");
    }
}

} // namespace

FeatureMatrix encode(const Dataset& dataset) {
    const Codebook& cb = dataset.codebook();
    const size_t n = dataset.rowCount();
    FeatureMatrix fm;
    fm.values.assign(n, {});

    for (size_t c = 0; c < cb.size(); ++c) {
        const AttributeSpec& spec = cb.at(c);
        for (size_t r = 0; r < n; ++r) {
            if (dataset.at(r, c).isMissing()) {
                throw Error(ErrorCode::IncompleteData,
                            "encoding requires a complete dataset; run imputation first");
            }
        }
        switch (spec.kind) {
            case AttributeKind::Categorical: {
                for (const auto& cat : spec.categories) {
                    fm.featureNames.push_back(spec.name + "=" + cat);
                    fm.origins.push_back({spec.name, cat});
                }
                for (size_t r = 0; r < n; ++r) {
                    const std::string& v = dataset.at(r, c).category();
                    for (const auto& cat : spec.categories) {
                        fm.values[r].push_back(cat == v ? 1.0 : 0.0);
                    }
                }
                break;
            }
            case AttributeKind::Binary: {
                fm.featureNames.push_back(spec.name + "=" + spec.categories[1]);
                fm.origins.push_back({spec.name, spec.categories[1]});
                for (size_t r = 0; r < n; ++r) {
                    fm.values[r].push_back(
                        dataset.at(r, c).category() == spec.categories[1] ? 1.0 : 0.0);
                }
                break;
            }
            case AttributeKind::Ordinal: {
                fm.featureNames.push_back(spec.name);
                fm.origins.push_back({spec.name, ""});
                const double denom = static_cast<double>(spec.categories.size() - 1);
                for (size_t r = 0; r < n; ++r) {
                    const size_t rank = spec.categoryIndex(dataset.at(r, c).category());
                    fm.values[r].push_back(static_cast<double>(rank) / denom);
                }
                break;
            }
            case AttributeKind::Numeric: {
                fm.featureNames.push_back(spec.name);
                fm.origins.push_back({spec.name, ""});
                double lo = std::numeric_limits<double>::max();
                double hi = std::numeric_limits<double>::lowest();
                for (size_t r = 0; r < n; ++r) {
                    lo = std::min(lo, dataset.at(r, c).number());
                    hi = std::max(hi, dataset.at(r, c).number());
                }
                if (hi <= lo) {
                    fm.constantNumericColumns.push_back(spec.name);
                    for (size_t r = 0; r < n; ++r) fm.values[r].push_back(0.5);
                } else {
                    for (size_t r = 0; r < n; ++r) {
                        fm.values[r].push_back((dataset.at(r, c).number() - lo) / (hi - lo));
                    }
                }
                break;
            }
        }
    }
    return fm;
}

Clustering kmeans(const FeatureMatrix& features, size_t k, std::uint64_t seed, size_t maxIter) {
    const size_t n = features.rowCount();
    requireK(k, n);
    std::mt19937_64 gen(seed);
    std::vector<std::vector<double>> centers = kmeansppSeed(features, k, gen);

    Clustering result;
    result.k = k;
    result.assignment.assign(n, 0);
    std::vector<size_t> previous(n, k);  // sentinel forces at least one pass

    for (size_t iter = 0; iter < maxIter; ++iter) {
        // Assignment step; ties go to the lowest center index.
        for (size_t i = 0; i < n; ++i) {
            size_t best = 0;
            double bestDist = squaredDistance(features.values[i], centers[0]);
            for (size_t c = 1; c < k; ++c) {
                const double d = squaredDistance(features.values[i], centers[c]);
                if (d < bestDist) {
                    bestDist = d;
                    best = c;
                }
            }
            result.assignment[i] = best;
        }

        // Empty-cluster repair: reseed to the point farthest from the
        // stale center, excluding points already claimed as reseeds.
        std::vector<size_t> sizes(k, 0);
        for (size_t label : result.assignment) ++sizes[label];
        std::vector<bool> claimed(n, false);
        for (size_t c = 0; c < k; ++c) {
            if (sizes[c] > 0) continue;
            size_t farthest = n;
            double farDist = -1.0;
            for (size_t i = 0; i < n; ++i) {
                if (claimed[i] || sizes[result.assignment[i]] <= 1) continue;
                const double d = squaredDistance(features.values[i], centers[c]);
                if (d > farDist) {
                    farDist = d;
                    farthest = i;
                }
            }
            if (farthest == n) continue;
            claimed[farthest] = true;
            --sizes[result.assignment[farthest]];
            result.assignment[farthest] = c;
            ++sizes[c];
            centers[c] = features.values[farthest];
        }

        double wcss = 0.0;
        for (size_t i = 0; i < n; ++i) {
            wcss += squaredDistance(features.values[i], centers[result.assignment[i]]);
        }
        result.wcssTrace.push_back(wcss);
        result.iterations = iter + 1;

        if (result.assignment == previous) break;
        previous = result.assignment;

        // Update step.
        const size_t p = features.featureCount();
        std::vector<std::vector<double>> sums(k, std::vector<double>(p, 0.0));
        for (size_t i = 0; i < n; ++i) {
            const auto& row = features.values[i];
            auto& acc = sums[result.assignment[i]];
            for (size_t f = 0; f < p; ++f) acc[f] += row[f];
        }
        for (size_t c = 0; c < k; ++c) {
            if (sizes[c] == 0) continue;
            for (size_t f = 0; f < p; ++f) sums[c][f] /= static_cast<double>(sizes[c]);
            centers[c] = std::move(sums[c]);
        }
    }

    result.centroids = std::move(centers);
    // Final WCSS against the converged centroids.
    double wcss = 0.0;
    for (size_t i = 0; i < n; ++i) {
        wcss += squaredDistance(features.values[i], result.centroids[result.assignment[i]]);
    }
    result.wcss = wcss;
    return result;
}

Clustering kmedoids(const FeatureMatrix& features, size_t k, std::uint64_t seed) {
    (void)seed;  // PAM is deterministic; the seed is interface parity.
    const size_t n = features.rowCount();
    requireK(k, n);

    auto dissim = [&](size_t a, size_t b) {
        return squaredDistance(features.values[a], features.values[b]);
    };

    // BUILD: start with the 1-medoid optimum, then greedy additions.
    std::vector<size_t> medoids;
    std::vector<bool> isMedoid(n, false);
    {
        size_t best = 0;
        double bestCost = std::numeric_limits<double>::max();
        for (size_t m = 0; m < n; ++m) {
            double cost = 0.0;
            for (size_t i = 0; i < n; ++i) cost += dissim(i, m);
            if (cost < bestCost) {
                bestCost = cost;
                best = m;
            }
        }
        medoids.push_back(best);
        isMedoid[best] = true;
    }
    std::vector<double> nearest(n);
    auto refreshNearest = [&]() {
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (size_t m : medoids) best = std::min(best, dissim(i, m));
            nearest[i] = best;
        }
    };
    refreshNearest();
    while (medoids.size() < k) {
        size_t best = n;
        double bestGain = -1.0;
        for (size_t cand = 0; cand < n; ++cand) {
            if (isMedoid[cand]) continue;
            double gain = 0.0;
            for (size_t i = 0; i < n; ++i) {
                const double d = dissim(i, cand);
                if (d < nearest[i]) gain += nearest[i] - d;
            }
            if (gain > bestGain) {
                bestGain = gain;
                best = cand;
            }
        }
        medoids.push_back(best);
        isMedoid[best] = true;
        refreshNearest();
    }

    // SWAP: steepest-descent exchanges until fixpoint.
    auto totalCost = [&]() {
        double cost = 0.0;
        for (size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            for (size_t m : medoids) best = std::min(best, dissim(i, m));
            cost += best;
        }
        return cost;
    };
    double currentCost = totalCost();
    for (;;) {
        double bestDelta = -1e-12;
        size_t bestSlot = 0, bestCand = n;
        for (size_t slot = 0; slot < medoids.size(); ++slot) {
            const size_t old = medoids[slot];
            for (size_t cand = 0; cand < n; ++cand) {
                if (isMedoid[cand]) continue;
                medoids[slot] = cand;
                const double cost = totalCost();
                medoids[slot] = old;
                const double delta = cost - currentCost;
                if (delta < bestDelta) {
                    bestDelta = delta;
                    bestSlot = slot;
                    bestCand = cand;
                }
            }
        }
        if (bestCand == n) break;
        isMedoid[medoids[bestSlot]] = false;
        medoids[bestSlot] = bestCand;
        isMedoid[bestCand] = true;
        currentCost += bestDelta;
    }

    Clustering result;
    result.k = k;
    result.medoids = medoids;
    result.assignment.assign(n, 0);
    double cost = 0.0;
    for (size_t i = 0; i < n; ++i) {
        size_t best = 0;
        double bestDist = dissim(i, medoids[0]);
        for (size_t m = 1; m < medoids.size(); ++m) {
            const double d = dissim(i, medoids[m]);
            if (d < bestDist) {
                bestDist = d;
                best = m;
            }
        }
        result.assignment[i] = best;
        cost += bestDist;
    }
    result.wcss = cost;
    result.wcssTrace.push_back(cost);
    result.iterations = 1;
    return result;
}

double silhouette(const FeatureMatrix& features, const Clustering& clustering) {
    const size_t n = features.rowCount();
    if (clustering.k < 2) {
        throw Error(ErrorCode::SingleCluster, "silhouette needs at least two clusters");
    }
    std::vector<size_t> sizes(clustering.k, 0);
    for (size_t label : clustering.assignment) ++sizes[label];

    double total = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const size_t own = clustering.assignment[i];
        if (sizes[own] <= 1) continue;  // singleton scores 0
        std::vector<double> meanDist(clustering.k, 0.0);
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            meanDist[clustering.assignment[j]] +=
                std::sqrt(squaredDistance(features.values[i], features.values[j]));
        }
        const double a = meanDist[own] / static_cast<double>(sizes[own] - 1);
        double b = std::numeric_limits<double>::max();
        for (size_t c = 0; c < clustering.k; ++c) {
            if (c == own || sizes[c] == 0) continue;
            b = std::min(b, meanDist[c] / static_cast<double>(sizes[c]));
        }
        const double denom = std::max(a, b);
        if (denom > 0.0) total += (b - a) / denom;
    }
    return total / static_cast<double>(n);
}

KSelection selectK(const FeatureMatrix& features, size_t kMin, size_t kMax, std::uint64_t seed,
                   size_t restarts) {
    const size_t n = features.rowCount();
    if (kMin < 2 || kMax < kMin || kMax > n) {
        throw Error(ErrorCode::KExceedsN, "k range must lie within [2, n]");
    }
    std::mt19937_64 master(seed);
    KSelection sel;
    double bestScore = -std::numeric_limits<double>::max();
    for (size_t k = kMin; k <= kMax; ++k) {
        Clustering bestRun;
        double bestWcss = std::numeric_limits<double>::max();
        for (size_t r = 0; r < restarts; ++r) {
            const std::uint64_t runSeed = master();
            Clustering run = kmeans(features, k, runSeed);
            if (run.wcss < bestWcss) {
                bestWcss = run.wcss;
                bestRun = std::move(run);
            }
        }
        const double score = silhouette(features, bestRun);
        sel.table.push_back({k, score, bestRun.wcss});
        if (score > bestScore) {
            bestScore = score;
            sel.bestK = k;
            sel.best = std::move(bestRun);
        }
    }
    return sel;
}

ClusterProfile profileClusters(const Dataset& dataset, const Clustering& clustering,
                               double liftFactor) {
    const size_t n = dataset.rowCount();
    if (clustering.assignment.size() != n) {
        throw Error(ErrorCode::LengthMismatch, "assignment length must equal row count");
    }
    const Codebook& cb = dataset.codebook();
    ClusterProfile profile;
    profile.liftFactor = liftFactor;

    // Global prevalence per formatted value, per attribute.
    std::vector<std::map<std::string, size_t>> globalCounts(cb.size());
    for (size_t c = 0; c < cb.size(); ++c) {
        for (size_t r = 0; r < n; ++r) {
            ++globalCounts[c][formatValue(dataset.at(r, c))];
        }
    }

    for (size_t label = 0; label < clustering.k; ++label) {
        ClusterProfile::Cluster cluster;
        cluster.label = label;
        std::vector<size_t> members;
        for (size_t r = 0; r < n; ++r) {
            if (clustering.assignment[r] == label) members.push_back(r);
        }
        cluster.size = members.size();
        if (members.empty()) {
            cluster.narrative = "Cluster " + std::to_string(label + 1) + " (0 members): empty.";
            profile.clusters.push_back(std::move(cluster));
            continue;
        }
        for (size_t c = 0; c < cb.size(); ++c) {
            std::map<std::string, size_t> counts;
            for (size_t r : members) ++counts[formatValue(dataset.at(r, c))];
            std::string dominant;
            size_t best = 0;
            for (const auto& [value, count] : counts) {
                if (count > best) {
                    best = count;
                    dominant = value;
                }
            }
            AttributeProfile ap;
            ap.attribute = cb.at(c).name;
            ap.dominantValue = dominant;
            ap.prevalence = static_cast<double>(best) / static_cast<double>(members.size());
            ap.globalPrevalence =
                static_cast<double>(globalCounts[c][dominant]) / static_cast<double>(n);
            ap.lift = ap.globalPrevalence > 0.0 ? ap.prevalence / ap.globalPrevalence : 0.0;
            ap.distinguishing = ap.lift >= liftFactor;
            cluster.attributes.push_back(std::move(ap));
        }
        for (const auto& ap : cluster.attributes) {
            if (ap.distinguishing) cluster.distinguishing.push_back(ap);
        }
        std::stable_sort(cluster.distinguishing.begin(), cluster.distinguishing.end(),
                         [](const AttributeProfile& a, const AttributeProfile& b) {
                             return a.lift > b.lift;
                         });

        // Narrative in the shape of the clustering write-up: strongest traits first.
        std::string text = "Cluster " + std::to_string(label + 1) + " (" +
                           std::to_string(cluster.size) + " members): ";
        if (cluster.distinguishing.empty()) {
            text += "no attribute stands out against the global distribution.";
        } else {
            const size_t limit = std::min<size_t>(4, cluster.distinguishing.size());
            for (size_t i = 0; i < limit; ++i) {
                const auto& ap = cluster.distinguishing[i];
                const char* quant = ap.prevalence >= 0.999 ? "all"
                                    : ap.prevalence >= 0.6 ? "most"
                                                           : "many";
                if (i > 0) text += "; ";
                text += std::string(quant) + " have " + ap.attribute + " = " + ap.dominantValue;
            }
            text += ".";
        }
        cluster.narrative = std::move(text);
        profile.clusters.push_back(std::move(cluster));
    }
    return profile;
}

std::string clusteringReportJson(const KSelection& selection, const Clustering& kmeansResult,
                                 const Clustering& kmedoidsResult, double crossAri,
                                 const ClusterProfile& profile) {
    nlohmann::ordered_json doc;
    nlohmann::ordered_json table = nlohmann::ordered_json::array();
    for (const auto& row : selection.table) {
        nlohmann::ordered_json entry;
        entry["k"] = row.k;
        entry["silhouette"] = row.silhouette;
        entry["wcss"] = row.wcss;
        table.push_back(std::move(entry));
    }
    doc["k_table"] = std::move(table);
    doc["chosen_k"] = selection.bestK;
    doc["kmeans"] = {{"assignment", kmeansResult.assignment},
                     {"wcss", kmeansResult.wcss},
                     {"iterations", kmeansResult.iterations}};
    doc["kmedoids"] = {{"assignment", kmedoidsResult.assignment},
                       {"medoid_rows", kmedoidsResult.medoids},
                       {"cost", kmedoidsResult.wcss}};
    doc["kmeans_vs_kmedoids_ari"] = crossAri;
    nlohmann::ordered_json clusters = nlohmann::ordered_json::array();
    for (const auto& cluster : profile.clusters) {
        nlohmann::ordered_json entry;
        entry["label"] = cluster.label;
        entry["size"] = cluster.size;
        nlohmann::ordered_json dist = nlohmann::ordered_json::array();
        for (const auto& ap : cluster.distinguishing) {
            nlohmann::ordered_json a;
            a["attribute"] = ap.attribute;
            a["value"] = ap.dominantValue;
            a["prevalence"] = ap.prevalence;
            a["global_prevalence"] = ap.globalPrevalence;
            a["lift"] = ap.lift;
            dist.push_back(std::move(a));
        }
        entry["distinguishing"] = std::move(dist);
        entry["narrative"] = cluster.narrative;
        clusters.push_back(std::move(entry));
    }
    doc["clusters"] = std::move(clusters);
    return doc.dump(2) + "\n";
}

std::string clusterNarrativesMarkdown(const ClusterProfile& profile) {
    std::string md = "## Cluster profiles\n\n";
    for (const auto& cluster : profile.clusters) {
        md += "- " + cluster.narrative + "\n";
    }
    return md;
}

} // namespace orgminer
