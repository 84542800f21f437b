#pragma once

#include "orgminer/error.hpp"

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace orgminer {

enum class AttributeKind { Categorical, Binary, Ordinal, Numeric };
enum class AttributeGroup { General, Personal, Work, Interests };

const char* attributeKindName(AttributeKind kind);
const char* attributeGroupName(AttributeGroup group);
AttributeKind parseAttributeKind(std::string_view text);
AttributeGroup parseAttributeGroup(std::string_view text);

/// One questionnaire attribute: its admissible values and which part of the
/// questionnaire it belongs to. Category order is significant for ordinals.
struct AttributeSpec {
    std::string name;
    AttributeKind kind = AttributeKind::Categorical;
    std::vector<std::string> categories;
    AttributeGroup group = AttributeGroup::General;

    bool isNumeric() const { return kind == AttributeKind::Numeric; }
    int categoryIndex(std::string_view category) const;
};

/// Ordered attribute schema. Attribute order is the canonical column order.
class Codebook {
public:
    explicit Codebook(std::vector<AttributeSpec> attributes);

    size_t size() const { return attributes_.size(); }
    const AttributeSpec& at(size_t index) const { return attributes_.at(index); }
    const std::vector<AttributeSpec>& attributes() const { return attributes_; }
    std::optional<size_t> indexOf(std::string_view name) const;
    size_t requireIndexOf(std::string_view name) const;

    Codebook withColumnsDropped(const std::vector<std::string>& names) const;
    Codebook withAttributeAppended(AttributeSpec spec) const;

private:
    std::vector<AttributeSpec> attributes_;
};

/// Cell value: a category string, a number, or an explicit missing marker.
class Value {
public:
    enum class Kind { Missing, Category, Number };

    Value() : kind_(Kind::Missing), number_(0.0) {}

    static Value missing() { return Value(); }
    static Value category(std::string category);
    static Value number(double value);

    Kind kind() const { return kind_; }
    bool isMissing() const { return kind_ == Kind::Missing; }
    const std::string& category() const;
    double number() const;

    bool operator==(const Value& other) const;
    bool operator!=(const Value& other) const { return !(*this == other); }

private:
    Kind kind_;
    std::string category_;
    double number_;
};

/// Immutable table of records over a codebook. Every transform downstream
/// returns a new Dataset; construction validates each cell against its spec.
class Dataset {
public:
    Dataset(Codebook codebook, std::vector<std::vector<Value>> rows);

    const Codebook& codebook() const { return codebook_; }
    size_t rowCount() const { return rows_.size(); }
    size_t columnCount() const { return codebook_.size(); }
    const Value& at(size_t row, size_t col) const { return rows_.at(row).at(col); }
    const std::vector<Value>& row(size_t index) const { return rows_.at(index); }
    const std::vector<std::vector<Value>>& rows() const { return rows_; }

private:
    Codebook codebook_;
    std::vector<std::vector<Value>> rows_;
};

struct AttributeSummary {
    std::string name;
    size_t missingCount = 0;
    std::map<std::string, size_t> frequencies;   // non-numeric attributes
    std::optional<double> minValue;              // numeric attributes
    std::optional<double> maxValue;
};

struct ValidationReport {
    size_t rowCount = 0;
    std::vector<AttributeSummary> attributes;

    std::string toJson() const;
};

Codebook codebookFromJsonText(const std::string& text);
Codebook loadCodebook(const std::filesystem::path& path);
std::string codebookToJsonText(const Codebook& codebook);
void writeCodebook(const Codebook& codebook, const std::filesystem::path& path);

Dataset datasetFromCsvText(const std::string& text, const Codebook& codebook);
Dataset ingestCsv(const std::filesystem::path& path, const Codebook& codebook);
std::string toCsvText(const Dataset& dataset);
void writeCsv(const Dataset& dataset, const std::filesystem::path& path);

ValidationReport validate(const Dataset& dataset);

/// Shortest decimal text that parses back to exactly the same double.
std::string formatNumber(double value);

/// Cell rendered the way the CSV format writes it; missing renders empty.
std::string formatValue(const Value& value);

} // namespace orgminer
