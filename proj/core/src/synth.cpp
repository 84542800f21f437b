#include "orgminer/synth.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "json.hpp"
#include "orgminer/reduce.hpp"
#include "orgminer/rng.hpp"

namespace orgminer {

namespace {

AttributeSpec attr(std::string name, AttributeKind kind, std::vector<std::string> categories,
                   AttributeGroup group) {
    AttributeSpec spec;
    spec.name = std::move(name);
    spec.kind = kind;
    spec.categories = std::move(categories);
    spec.group = group;
    return spec;
}

const std::vector<std::string> kYesNo = {"no", "yes"};

// Geometric category weights, w_i proportional to decay^i.
std::vector<double> geometricWeights(size_t count, double decay) {
    std::vector<double> w(count);
    double v = 1.0, total = 0.0;
    for (size_t i = 0; i < count; ++i) {
        w[i] = v;
        total += v;
        v *= decay;
    }
    for (double& x : w) x /= total;
    return w;
}

// The floor keeps every observed category near eight rows or more at the
// default scale; rarer categories make chi-square tables sparse enough that
// unrelated pairs drift past the pruning threshold.
constexpr double kCategoryFloor = 0.065;

// Baseline draw distributions. Non-source attributes are sharply skewed so
// baseline rows stay compact and forced runner-up values stand out;
// redundant-pair sources keep enough spread to calibrate their copies.
std::vector<double> attributeWeights(const AttributeSpec& spec, bool isSource) {
    const size_t c = spec.categories.size();
    if (spec.kind == AttributeKind::Binary) {
        return isSource ? std::vector<double>{0.75, 0.25} : std::vector<double>{0.95, 0.05};
    }
    if (c < 3) return geometricWeights(c, 1.0 / 3.0);
    if (isSource) {
        std::vector<double> w = geometricWeights(c, 0.55);
        for (double& x : w) x = 0.6 * x + 0.4 / static_cast<double>(c);
        return w;
    }
    std::vector<double> w(c, kCategoryFloor);
    if (spec.kind == AttributeKind::Ordinal) {
        w[0] = 0.60;
        w[1] = 1.0 - 0.60 - kCategoryFloor * static_cast<double>(c - 2);
    } else {
        w[0] = 1.0 - kCategoryFloor * static_cast<double>(c - 1);
    }
    return w;
}

// Association between two columns, measured exactly as reduce sees it.
double measurePair(const AttributeSpec& a, const AttributeSpec& b,
                   const std::vector<Value>& colA, const std::vector<Value>& colB) {
    Codebook cb(std::vector<AttributeSpec>{a, b});
    std::vector<std::vector<Value>> rows(colA.size());
    for (size_t r = 0; r < colA.size(); ++r) rows[r] = {colA[r], colB[r]};
    Dataset pair(std::move(cb), std::move(rows));
    return associationMatrix(pair).at(0, 1);
}

struct SignaturePlan {
    // per group: list of (column index, forced category index)
    std::vector<std::vector<std::pair<size_t, size_t>>> groups;
    // per column: forced category index for a given group, if any
    std::vector<std::vector<int>> forcedByColumn;  // [column][group] -> -1 or category
};

// A group's signature forces an attribute's runner-up category. Both groups
// sharing an attribute force the SAME runner-up: the doubled marginal keeps
// every co-forced pair's association well below the pruning threshold, while
// the remaining flags still tell the two groups apart.
size_t forcedCategory(size_t cats, size_t usage) {
    if (cats < 2) return 0;
    if (usage <= 1) return 1;
    return usage % cats;
}

SignaturePlan planSignatures(const Codebook& cb, const std::set<size_t>& sourceCols,
                             size_t nGroups, size_t perGroup) {
    std::vector<size_t> eligible;
    for (size_t c = 0; c < cb.size(); ++c) {
        if (!cb.at(c).isNumeric()) eligible.push_back(c);
    }
    if (perGroup > eligible.size()) {
        throw Error(ErrorCode::InfeasibleSpec,
                    "signature attributes per group exceed the categorical attribute count");
    }
    // Multiway non-source attributes carry signatures; binaries and
    // redundant-pair sources only back up unusually shaped codebooks.
    auto tier = [&](size_t col) -> size_t {
        if (sourceCols.count(col)) return 2;
        const AttributeSpec& a = cb.at(col);
        if (a.kind == AttributeKind::Categorical && a.categories.size() > 2) return 0;
        return a.kind == AttributeKind::Binary ? 1 : 2;
    };
    auto cap = [&](size_t col) { return tier(col) == 0 ? size_t{2} : size_t{1}; };

    SignaturePlan plan;
    plan.groups.assign(nGroups, {});
    plan.forcedByColumn.assign(cb.size(), std::vector<int>(nGroups, -1));
    std::set<std::pair<size_t, size_t>> usedPairs;
    std::vector<size_t> usage(cb.size(), 0);

    for (size_t g = 0; g < nGroups; ++g) {
        std::vector<size_t> chosen;
        for (size_t slot = 0; slot < perGroup; ++slot) {
            size_t best = cb.size();
            auto bestKey = std::make_tuple(true, SIZE_MAX, SIZE_MAX, SIZE_MAX);
            for (size_t cand : eligible) {
                if (std::find(chosen.begin(), chosen.end(), cand) != chosen.end()) continue;
                size_t conflicts = 0;
                for (size_t prev : chosen) {
                    const auto key = std::minmax(cand, prev);
                    if (usedPairs.count({key.first, key.second})) ++conflicts;
                }
                // Prefer attributes under their reuse cap, strong tiers, and
                // unseen pairs; then finish a second use to share the marginal.
                const size_t remaining = cap(cand) - std::min(usage[cand], cap(cand));
                const auto candKey =
                    std::make_tuple(usage[cand] >= cap(cand), tier(cand), conflicts, remaining);
                if (candKey < bestKey) {
                    bestKey = candKey;
                    best = cand;
                }
            }
            chosen.push_back(best);
        }
        for (size_t i = 0; i < chosen.size(); ++i) {
            for (size_t j = i + 1; j < chosen.size(); ++j) {
                const auto key = std::minmax(chosen[i], chosen[j]);
                usedPairs.insert({key.first, key.second});
            }
        }
        for (size_t col : chosen) {
            const size_t forced = forcedCategory(cb.at(col).categories.size(), usage[col]);
            ++usage[col];
            plan.groups[g].push_back({col, forced});
            plan.forcedByColumn[col][g] = static_cast<int>(forced);
        }
    }
    return plan;
}

} // namespace

Codebook defaultSynthCodebook() {
    using K = AttributeKind;
    using G = AttributeGroup;
    std::vector<AttributeSpec> specs;

    specs.push_back(attr("age_range", K::Ordinal,
                         {"under_25", "25_to_34", "35_to_44", "45_to_54", "over_55"}, G::General));
    specs.push_back(attr("marital_status", K::Categorical,
                         {"married", "single", "divorced", "widowed"}, G::General));
    specs.push_back(attr("birthplace", K::Categorical,
                         {"tehran", "mashhad", "isfahan", "tabriz", "shiraz", "elsewhere"},
                         G::General));
    specs.push_back(attr("living_region", K::Categorical,
                         {"center", "west", "east", "north", "south"}, G::General));
    specs.push_back(attr("housing_type", K::Categorical,
                         {"owned", "rented", "family_home", "company_housing"}, G::General));
    specs.push_back(attr("commute_mode", K::Categorical,
                         {"car", "bus", "metro", "motorbike", "walking"}, G::General));
    specs.push_back(attr("children_count", K::Ordinal, {"none", "one", "two", "three_or_more"},
                         G::General));
    specs.push_back(attr("commute_distance_km", K::Numeric, {}, G::General));

    specs.push_back(attr("education_level", K::Ordinal,
                         {"diploma", "associate", "bachelor", "master", "phd"}, G::Personal));
    specs.push_back(attr("field_of_study", K::Categorical,
                         {"engineering", "management", "accounting", "software",
                          "natural_sciences", "humanities"},
                         G::Personal));
    specs.push_back(attr("second_language", K::Categorical,
                         {"none", "english", "arabic", "turkish", "french"}, G::Personal));
    specs.push_back(attr("news_source", K::Categorical,
                         {"television", "online", "radio", "newspapers", "none"}, G::Personal));
    specs.push_back(attr("religious_activity", K::Binary, kYesNo, G::Personal));
    specs.push_back(attr("charity_member", K::Binary, kYesNo, G::Personal));
    specs.push_back(attr("smoker", K::Binary, kYesNo, G::Personal));

    specs.push_back(attr("personnel_code_year", K::Numeric, {}, G::Work));
    specs.push_back(attr("contract_type", K::Categorical,
                         {"permanent", "contractor", "temporary", "seasonal"}, G::Work));
    specs.push_back(attr("job_grade", K::Ordinal, {"junior", "mid", "senior", "principal"},
                         G::Work));
    specs.push_back(attr("department", K::Categorical,
                         {"production", "supply_chain", "sales", "finance", "hr", "it"}, G::Work));
    specs.push_back(attr("work_site", K::Categorical,
                         {"main_plant", "annex", "warehouse", "headquarters", "field"}, G::Work));
    specs.push_back(attr("team_role", K::Categorical,
                         {"member", "coordinator", "specialist", "lead"}, G::Work));

    specs.push_back(attr("music_listener", K::Binary, kYesNo, G::Interests));
    specs.push_back(attr("national_football_fan", K::Binary, kYesNo, G::Interests));
    specs.push_back(attr("no_sports_class", K::Binary, kYesNo, G::Interests));
    specs.push_back(attr("weekly_sport_hours", K::Numeric, {}, G::Interests));
    specs.push_back(attr("favorite_sport", K::Categorical,
                         {"football", "volleyball", "swimming", "hiking", "martial_arts", "none"},
                         G::Interests));
    specs.push_back(attr("music_genre", K::Categorical,
                         {"traditional", "pop", "classical", "rock", "none"}, G::Interests));
    specs.push_back(attr("weekend_activity", K::Categorical,
                         {"family_visits", "picnics", "movies", "shopping", "gardening", "resting"},
                         G::Interests));
    specs.push_back(attr("reading_genre", K::Categorical,
                         {"none", "novels", "poetry", "history", "science"}, G::Interests));
    specs.push_back(attr("vacation_style", K::Categorical,
                         {"hometown", "domestic_travel", "foreign_travel", "staycation"},
                         G::Interests));
    specs.push_back(attr("social_platform", K::Categorical,
                         {"none", "instagram", "telegram", "whatsapp", "linkedin"}, G::Interests));
    specs.push_back(attr("cuisine_preference", K::Categorical,
                         {"traditional", "kebab", "seafood", "vegetarian", "fast_food",
                          "international"},
                         G::Interests));
    specs.push_back(attr("movie_genre", K::Categorical,
                         {"drama", "comedy", "action", "documentary", "none"}, G::Interests));
    specs.push_back(attr("collecting_hobby", K::Categorical,
                         {"none", "stamps", "coins", "antiques"}, G::Interests));
    specs.push_back(attr("reads_books", K::Binary, kYesNo, G::Interests));
    specs.push_back(attr("gym_member", K::Binary, kYesNo, G::Interests));
    specs.push_back(attr("computer_gaming", K::Binary, kYesNo, G::Interests));
    return Codebook(std::move(specs));
}

std::vector<RedundantPairSpec> defaultRedundantPairs() {
    return {
        {"personnel_code_year", "hire_year", 0.572},
        {"charity_member", "book_club_member", 0.591},
        {"national_football_fan", "foreign_football_fan", 0.651},
        {"music_listener", "traditional_music_fan", 0.523},
        {"field_of_study", "field_of_activity", 0.498},
        {"no_sports_class", "no_class_participation", 0.924},
    };
}

SynthSpec::SynthSpec()
    : codebook(defaultSynthCodebook()), redundantPairs(defaultRedundantPairs()) {
    numericRanges = {
        {"commute_distance_km", {1, 60}},
        {"personnel_code_year", {1995, 2012}},
        {"weekly_sport_hours", {0, 14}},
    };
}

std::pair<Dataset, GroundTruth> generate(const SynthSpec& spec) {
    if (spec.nRows == 0 || spec.nGroups == 0 || spec.nGroups > spec.nRows) {
        throw Error(ErrorCode::InfeasibleSpec, "group count must lie in [1, row count]");
    }
    if (spec.noiseRate < 0.0 || spec.noiseRate >= 0.5) {
        throw Error(ErrorCode::InfeasibleSpec, "noise rate must lie in [0, 0.5)");
    }
    const Codebook& base = spec.codebook;
    for (size_t c = 0; c < base.size(); ++c) {
        if (base.at(c).isNumeric() && !spec.numericRanges.count(base.at(c).name)) {
            throw Error(ErrorCode::InfeasibleSpec,
                        "no numeric range for attribute " + base.at(c).name);
        }
    }

    std::mt19937_64 gen(spec.seed);
    const size_t n = spec.nRows;
    std::set<size_t> sourceCols;
    for (const auto& pairSpec : spec.redundantPairs) {
        if (auto col = base.indexOf(pairSpec.source)) sourceCols.insert(*col);
    }
    SignaturePlan plan =
        planSignatures(base, sourceCols, spec.nGroups, spec.signatureAttributesPerGroup);

    std::vector<std::vector<double>> weights(base.size());
    for (size_t c = 0; c < base.size(); ++c) {
        if (!base.at(c).isNumeric()) {
            weights[c] = attributeWeights(base.at(c), sourceCols.count(c) > 0);
        }
    }
    auto drawBase = [&](size_t col) -> Value {
        const AttributeSpec& a = base.at(col);
        if (a.isNumeric()) {
            const auto& range = spec.numericRanges.at(a.name);
            return Value::number(static_cast<double>(rng::nextInt(gen, range.first, range.second)));
        }
        return Value::category(a.categories[rng::nextWeighted(gen, weights[col])]);
    };

    GroundTruth truth;
    truth.groupOf.resize(n);
    truth.signatures.assign(spec.nGroups, {});
    for (size_t g = 0; g < spec.nGroups; ++g) {
        for (const auto& [col, forced] : plan.groups[g]) {
            truth.signatures[g].push_back({base.at(col).name, base.at(col).categories[forced]});
        }
    }

    std::vector<std::vector<Value>> rows(n);
    for (size_t r = 0; r < n; ++r) {
        const size_t g = r % spec.nGroups;
        truth.groupOf[r] = g;
        rows[r].reserve(base.size());
        for (size_t c = 0; c < base.size(); ++c) {
            const int forced = plan.forcedByColumn[c][g];
            if (forced >= 0) {
                const AttributeSpec& a = base.at(c);
                size_t idx = static_cast<size_t>(forced);
                if (rng::nextUnit(gen) < spec.noiseRate) {
                    size_t other = rng::nextIndex(gen, a.categories.size() - 1);
                    if (other >= idx) ++other;
                    idx = other;
                }
                rows[r].push_back(Value::category(a.categories[idx]));
            } else {
                rows[r].push_back(drawBase(c));
            }
        }
    }

    // Derived redundant columns: copy the source, re-randomize the first m
    // cells of a fixed permutation, bisect m to hit the target association.
    Codebook cb = base;
    for (const auto& pairSpec : spec.redundantPairs) {
        const size_t sourceCol = cb.requireIndexOf(pairSpec.source);
        const AttributeSpec sourceSpec = cb.at(sourceCol);
        AttributeSpec derivedSpec = sourceSpec;
        derivedSpec.name = pairSpec.name;

        std::vector<Value> sourceValues(n);
        for (size_t r = 0; r < n; ++r) sourceValues[r] = rows[r][sourceCol];

        std::vector<size_t> perm(n);
        for (size_t i = 0; i < n; ++i) perm[i] = i;
        rng::shuffle(perm, gen);
        std::vector<Value> replacements(n);
        for (size_t i = 0; i < n; ++i) {
            if (sourceSpec.isNumeric()) {
                const auto& range = spec.numericRanges.at(sourceSpec.name);
                replacements[i] = Value::number(
                    static_cast<double>(rng::nextInt(gen, range.first, range.second)));
            } else {
                replacements[i] = Value::category(
                    sourceSpec.categories[rng::nextWeighted(gen, weights[sourceCol])]);
            }
        }

        auto assocAt = [&](size_t m) {
            std::vector<Value> derived = sourceValues;
            for (size_t i = 0; i < m; ++i) derived[perm[i]] = replacements[i];
            return measurePair(sourceSpec, derivedSpec, sourceValues, derived);
        };

        size_t lo = 0, hi = n;
        for (int round = 0; round < 20 && hi - lo > 1; ++round) {
            const size_t mid = lo + (hi - lo) / 2;
            if (assocAt(mid) >= pairSpec.targetAssociation) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        size_t bestM = lo;
        double bestGap = std::abs(assocAt(lo) - pairSpec.targetAssociation);
        const size_t windowLo = lo > 12 ? lo - 12 : 0;
        const size_t windowHi = std::min(n, lo + 12);
        for (size_t m = windowLo; m <= windowHi; ++m) {
            const double gap = std::abs(assocAt(m) - pairSpec.targetAssociation);
            if (gap < bestGap) {
                bestGap = gap;
                bestM = m;
            }
        }
        const double achieved = assocAt(bestM);
        if (std::abs(achieved - pairSpec.targetAssociation) > 0.05) {
            throw Error(ErrorCode::InfeasibleSpec,
                        "could not calibrate " + pairSpec.name + " to its target association");
        }

        cb = cb.withAttributeAppended(derivedSpec);
        for (size_t r = 0; r < n; ++r) rows[r].push_back(sourceValues[r]);
        for (size_t i = 0; i < bestM; ++i) rows[perm[i]].back() = replacements[i];
        truth.pairs.push_back(
            {pairSpec.source, pairSpec.name, pairSpec.targetAssociation, achieved, bestM});
    }

    return {Dataset(std::move(cb), std::move(rows)), std::move(truth)};
}

double adjustedRandIndex(const std::vector<size_t>& a, const std::vector<size_t>& b) {
    if (a.size() != b.size() || a.size() < 2) {
        throw Error(ErrorCode::LengthMismatch, "labelings must have equal length of at least two");
    }
    const size_t n = a.size();
    const size_t ka = 1 + *std::max_element(a.begin(), a.end());
    const size_t kb = 1 + *std::max_element(b.begin(), b.end());
    std::vector<std::vector<size_t>> table(ka, std::vector<size_t>(kb, 0));
    for (size_t i = 0; i < n; ++i) ++table[a[i]][b[i]];

    auto choose2 = [](size_t x) { return static_cast<double>(x) * (x - 1) / 2.0; };
    double sumCells = 0.0, sumA = 0.0, sumB = 0.0;
    for (size_t i = 0; i < ka; ++i) {
        size_t rowTotal = 0;
        for (size_t j = 0; j < kb; ++j) {
            sumCells += choose2(table[i][j]);
            rowTotal += table[i][j];
        }
        sumA += choose2(rowTotal);
    }
    for (size_t j = 0; j < kb; ++j) {
        size_t colTotal = 0;
        for (size_t i = 0; i < ka; ++i) colTotal += table[i][j];
        sumB += choose2(colTotal);
    }
    const double expected = sumA * sumB / choose2(n);
    const double maxIndex = 0.5 * (sumA + sumB);
    if (maxIndex == expected) return 1.0;
    return (sumCells - expected) / (maxIndex - expected);
}

std::string GroundTruth::toJson() const {
    nlohmann::ordered_json doc;
    doc["group_of"] = groupOf;
    nlohmann::ordered_json sigs = nlohmann::ordered_json::array();
    for (const auto& group : signatures) {
        nlohmann::ordered_json entries = nlohmann::ordered_json::array();
        for (const auto& [attribute, value] : group) {
            nlohmann::ordered_json e;
            e["attribute"] = attribute;
            e["value"] = value;
            entries.push_back(std::move(e));
        }
        sigs.push_back(std::move(entries));
    }
    doc["signatures"] = std::move(sigs);
    nlohmann::ordered_json pairDocs = nlohmann::ordered_json::array();
    for (const auto& pair : pairs) {
        nlohmann::ordered_json e;
        e["source"] = pair.source;
        e["derived"] = pair.derived;
        e["target"] = pair.target;
        e["achieved"] = pair.achieved;
        e["rerandomized_cells"] = pair.rerandomizedCells;
        pairDocs.push_back(std::move(e));
    }
    doc["pairs"] = std::move(pairDocs);
    return doc.dump(2) + "\n";
}

} // namespace orgminer
