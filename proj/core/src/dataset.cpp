#include "orgminer/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "json.hpp"

namespace orgminer {

namespace {

std::string readFileText(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(ErrorCode::IoError, "cannot open file: " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void writeFileText(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw Error(ErrorCode::IoError, "cannot write file: " + path.string());
    }
    out << text;
}

std::vector<std::string> splitCsvLine(const std::string& line) {
    std::vector<std::string> fields;
    std::string current;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    fields.push_back(current);
    return fields;
}

} // namespace

const char* errorCodeName(ErrorCode code) {
    switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::DuplicateAttribute: return "DuplicateAttribute";
    case ErrorCode::InvalidAttribute: return "InvalidAttribute";
    case ErrorCode::HeaderMismatch: return "HeaderMismatch";
    case ErrorCode::UnknownCategory: return "UnknownCategory";
    case ErrorCode::NumericParse: return "NumericParse";
    case ErrorCode::IncompleteData: return "IncompleteData";
    case ErrorCode::AllMissingColumn: return "AllMissingColumn";
    case ErrorCode::TooFewRows: return "TooFewRows";
    case ErrorCode::UnknownAttribute: return "UnknownAttribute";
    case ErrorCode::KExceedsN: return "KExceedsN";
    case ErrorCode::SingleCluster: return "SingleCluster";
    case ErrorCode::EmptyNode: return "EmptyNode";
    case ErrorCode::NonPartition: return "NonPartition";
    case ErrorCode::DegenerateTable: return "DegenerateTable";
    case ErrorCode::TargetNotCategorical: return "TargetNotCategorical";
    case ErrorCode::TargetMissing: return "TargetMissing";
    case ErrorCode::EmptyTestSet: return "EmptyTestSet";
    case ErrorCode::SchemaMismatch: return "SchemaMismatch";
    case ErrorCode::ConsequentNotCategorical: return "ConsequentNotCategorical";
    case ErrorCode::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorCode::UnknownCluster: return "UnknownCluster";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::BundleIncomplete: return "BundleIncomplete";
    case ErrorCode::StageFailure: return "StageFailure";
    }
    return "Error";
}

const char* attributeKindName(AttributeKind kind) {
    switch (kind) {
    case AttributeKind::Categorical: return "categorical";
    case AttributeKind::Binary: return "binary";
    case AttributeKind::Ordinal: return "ordinal";
    case AttributeKind::Numeric: return "numeric";
    }
    return "categorical";
}

const char* attributeGroupName(AttributeGroup group) {
    switch (group) {
    case AttributeGroup::General: return "general";
    case AttributeGroup::Personal: return "personal";
    case AttributeGroup::Work: return "work";
    case AttributeGroup::Interests: return "interests";
    }
    return "general";
}

AttributeKind parseAttributeKind(std::string_view text) {
    if (text == "categorical") return AttributeKind::Categorical;
    if (text == "binary") return AttributeKind::Binary;
    if (text == "ordinal") return AttributeKind::Ordinal;
    if (text == "numeric") return AttributeKind::Numeric;
    throw Error(ErrorCode::ParseError, "unknown attribute kind: " + std::string(text));
}

AttributeGroup parseAttributeGroup(std::string_view text) {
    if (text == "general") return AttributeGroup::General;
    if (text == "personal") return AttributeGroup::Personal;
    if (text == "work") return AttributeGroup::Work;
    if (text == "interests") return AttributeGroup::Interests;
    throw Error(ErrorCode::ParseError, "unknown attribute group: " + std::string(text));
}

int AttributeSpec::categoryIndex(std::string_view category) const {
    for (size_t i = 0; i < categories.size(); ++i) {
        if (categories[i] == category) return static_cast<int>(i);
    }
    return -1;
}

Codebook::Codebook(std::vector<AttributeSpec> attributes) : attributes_(std::move(attributes)) {
    if (attributes_.empty()) {
        throw Error(ErrorCode::InvalidAttribute, "codebook must declare at least one attribute");
    }
    std::unordered_set<std::string> seen;
    for (const auto& spec : attributes_) {
        if (spec.name.empty()) {
            throw Error(ErrorCode::InvalidAttribute, "attribute with empty name");
        }
        if (!seen.insert(spec.name).second) {
            throw Error(ErrorCode::DuplicateAttribute, "attribute declared twice: " + spec.name);
        }
        switch (spec.kind) {
        case AttributeKind::Numeric:
            if (!spec.categories.empty()) {
                throw Error(ErrorCode::InvalidAttribute,
                            "numeric attribute must not list categories: " + spec.name);
            }
            break;
        case AttributeKind::Binary:
            if (spec.categories.size() != 2) {
                throw Error(ErrorCode::InvalidAttribute,
                            "binary attribute needs exactly 2 categories: " + spec.name);
            }
            break;
        default:
            if (spec.categories.size() < 2) {
                throw Error(ErrorCode::InvalidAttribute,
                            "attribute needs at least 2 categories: " + spec.name);
            }
            break;
        }
        std::unordered_set<std::string> cats(spec.categories.begin(), spec.categories.end());
        if (cats.size() != spec.categories.size()) {
            throw Error(ErrorCode::InvalidAttribute, "duplicate category in attribute: " + spec.name);
        }
    }
}

std::optional<size_t> Codebook::indexOf(std::string_view name) const {
    for (size_t i = 0; i < attributes_.size(); ++i) {
        if (attributes_[i].name == name) return i;
    }
    return std::nullopt;
}

size_t Codebook::requireIndexOf(std::string_view name) const {
    auto idx = indexOf(name);
    if (!idx) {
        throw Error(ErrorCode::UnknownAttribute, "no attribute named " + std::string(name));
    }
    return *idx;
}

Codebook Codebook::withColumnsDropped(const std::vector<std::string>& names) const {
    for (const auto& name : names) {
        requireIndexOf(name);
    }
    std::vector<AttributeSpec> kept;
    for (const auto& spec : attributes_) {
        if (std::find(names.begin(), names.end(), spec.name) == names.end()) {
            kept.push_back(spec);
        }
    }
    return Codebook(std::move(kept));
}

Codebook Codebook::withAttributeAppended(AttributeSpec spec) const {
    std::vector<AttributeSpec> all = attributes_;
    all.push_back(std::move(spec));
    return Codebook(std::move(all));
}

Value Value::category(std::string category) {
    Value v;
    v.kind_ = Kind::Category;
    v.category_ = std::move(category);
    return v;
}

Value Value::number(double value) {
    Value v;
    v.kind_ = Kind::Number;
    v.number_ = value;
    return v;
}

const std::string& Value::category() const {
    if (kind_ != Kind::Category) {
        throw Error(ErrorCode::SchemaMismatch, "value is not a category");
    }
    return category_;
}

double Value::number() const {
    if (kind_ != Kind::Number) {
        throw Error(ErrorCode::SchemaMismatch, "value is not a number");
    }
    return number_;
}

bool Value::operator==(const Value& other) const {
    if (kind_ != other.kind_) return false;
    switch (kind_) {
    case Kind::Missing: return true;
    case Kind::Category: return category_ == other.category_;
    case Kind::Number: return number_ == other.number_;
    }
    return false;
}

Dataset::Dataset(Codebook codebook, std::vector<std::vector<Value>> rows)
    : codebook_(std::move(codebook)), rows_(std::move(rows)) {
    const size_t cols = codebook_.size();
    for (size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].size() != cols) {
            throw Error(ErrorCode::SchemaMismatch,
                        "row " + std::to_string(r) + " has " + std::to_string(rows_[r].size()) +
                            " values, expected " + std::to_string(cols));
        }
        for (size_t c = 0; c < cols; ++c) {
            const Value& v = rows_[r][c];
            const AttributeSpec& spec = codebook_.at(c);
            if (v.isMissing()) continue;
            if (spec.isNumeric()) {
                if (v.kind() != Value::Kind::Number) {
                    throw Error(ErrorCode::SchemaMismatch,
                                "attribute " + spec.name + " expects a numeric value (row " +
                                    std::to_string(r) + ")");
                }
            } else {
                if (v.kind() != Value::Kind::Category) {
                    throw Error(ErrorCode::SchemaMismatch,
                                "attribute " + spec.name + " expects a category (row " +
                                    std::to_string(r) + ")");
                }
                if (spec.categoryIndex(v.category()) < 0) {
                    throw Error(ErrorCode::UnknownCategory,
                                "row " + std::to_string(r) + ", column " + spec.name +
                                    ": unknown category \"" + v.category() + "\"");
                }
            }
        }
    }
}

Codebook codebookFromJsonText(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("codebook JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("attributes") || !doc["attributes"].is_array()) {
        throw Error(ErrorCode::ParseError, "codebook JSON must have an \"attributes\" array");
    }
    std::vector<AttributeSpec> specs;
    for (const auto& item : doc["attributes"]) {
        AttributeSpec spec;
        try {
            spec.name = item.at("name").get<std::string>();
            spec.kind = parseAttributeKind(item.at("kind").get<std::string>());
            spec.group = parseAttributeGroup(item.at("group").get<std::string>());
            if (item.contains("categories")) {
                spec.categories = item.at("categories").get<std::vector<std::string>>();
            }
        } catch (const nlohmann::json::exception& e) {
            throw Error(ErrorCode::ParseError, std::string("codebook attribute entry: ") + e.what());
        }
        specs.push_back(std::move(spec));
    }
    return Codebook(std::move(specs));
}

Codebook loadCodebook(const std::filesystem::path& path) {
    return codebookFromJsonText(readFileText(path));
}

std::string codebookToJsonText(const Codebook& codebook) {
    nlohmann::ordered_json doc;
    doc["attributes"] = nlohmann::ordered_json::array();
    for (const auto& spec : codebook.attributes()) {
        nlohmann::ordered_json entry;
        entry["name"] = spec.name;
        entry["kind"] = attributeKindName(spec.kind);
        entry["categories"] = spec.categories;
        entry["group"] = attributeGroupName(spec.group);
        doc["attributes"].push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

void writeCodebook(const Codebook& codebook, const std::filesystem::path& path) {
    writeFileText(path, codebookToJsonText(codebook));
}

Dataset datasetFromCsvText(const std::string& text, const Codebook& codebook) {
    std::vector<std::string> lines;
    std::string current;
    for (char c : text) {
        if (c == '\n') {
            if (!current.empty() && current.back() == '\r') current.pop_back();
            lines.push_back(current);
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) lines.push_back(current);
    if (lines.empty()) {
        throw Error(ErrorCode::HeaderMismatch, "CSV is empty, expected a header line");
    }

    const auto header = splitCsvLine(lines[0]);
    if (header.size() != codebook.size()) {
        throw Error(ErrorCode::HeaderMismatch,
                    "CSV header has " + std::to_string(header.size()) + " columns, codebook has " +
                        std::to_string(codebook.size()));
    }
    for (size_t c = 0; c < header.size(); ++c) {
        if (header[c] != codebook.at(c).name) {
            throw Error(ErrorCode::HeaderMismatch,
                        "column " + std::to_string(c) + " is \"" + header[c] + "\", expected \"" +
                            codebook.at(c).name + "\"");
        }
    }

    std::vector<std::vector<Value>> rows;
    rows.reserve(lines.size() - 1);
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto fields = splitCsvLine(lines[i]);
        const size_t rowIndex = i - 1;
        if (fields.size() != codebook.size()) {
            throw Error(ErrorCode::ParseError,
                        "row " + std::to_string(rowIndex) + " has " + std::to_string(fields.size()) +
                            " fields, expected " + std::to_string(codebook.size()));
        }
        std::vector<Value> row;
        row.reserve(fields.size());
        for (size_t c = 0; c < fields.size(); ++c) {
            const std::string& token = fields[c];
            const AttributeSpec& spec = codebook.at(c);
            if (token.empty()) {
                row.push_back(Value::missing());
            } else if (spec.isNumeric()) {
                double parsed = 0.0;
                const char* begin = token.data();
                const char* end = token.data() + token.size();
                auto [ptr, ec] = std::from_chars(begin, end, parsed);
                if (ec != std::errc() || ptr != end) {
                    throw Error(ErrorCode::NumericParse,
                                "row " + std::to_string(rowIndex) + ", column " + spec.name +
                                    ": not a number: \"" + token + "\"");
                }
                row.push_back(Value::number(parsed));
            } else {
                if (spec.categoryIndex(token) < 0) {
                    throw Error(ErrorCode::UnknownCategory,
                                "row " + std::to_string(rowIndex) + ", column " + spec.name +
                                    ": unknown category \"" + token + "\"");
                }
                row.push_back(Value::category(token));
            }
        }
        rows.push_back(std::move(row));
    }
    return Dataset(codebook, std::move(rows));
}

Dataset ingestCsv(const std::filesystem::path& path, const Codebook& codebook) {
    return datasetFromCsvText(readFileText(path), codebook);
}

std::string formatNumber(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
    if (ec != std::errc()) {
        throw Error(ErrorCode::ParseError, "cannot format number");
    }
    return std::string(buf, ptr);
}

std::string formatValue(const Value& value) {
    switch (value.kind()) {
    case Value::Kind::Missing: return "";
    case Value::Kind::Category: return value.category();
    case Value::Kind::Number: return formatNumber(value.number());
    }
    return "";
}

std::string toCsvText(const Dataset& dataset) {
    std::string out;
    const Codebook& cb = dataset.codebook();
    for (size_t c = 0; c < cb.size(); ++c) {
        if (c > 0) out.push_back(',');
        out += cb.at(c).name;
    }
    out.push_back('\n');
    for (size_t r = 0; r < dataset.rowCount(); ++r) {
        for (size_t c = 0; c < cb.size(); ++c) {
            if (c > 0) out.push_back(',');
            out += formatValue(dataset.at(r, c));
        }
        out.push_back('\n');
    }
    return out;
}

void writeCsv(const Dataset& dataset, const std::filesystem::path& path) {
    writeFileText(path, toCsvText(dataset));
}

ValidationReport validate(const Dataset& dataset) {
    ValidationReport report;
    report.rowCount = dataset.rowCount();
    const Codebook& cb = dataset.codebook();
    for (size_t c = 0; c < cb.size(); ++c) {
        AttributeSummary summary;
        summary.name = cb.at(c).name;
        for (size_t r = 0; r < dataset.rowCount(); ++r) {
            const Value& v = dataset.at(r, c);
            if (v.isMissing()) {
                ++summary.missingCount;
            } else if (cb.at(c).isNumeric()) {
                const double x = v.number();
                if (!summary.minValue || x < *summary.minValue) summary.minValue = x;
                if (!summary.maxValue || x > *summary.maxValue) summary.maxValue = x;
            } else {
                ++summary.frequencies[v.category()];
            }
        }
        report.attributes.push_back(std::move(summary));
    }
    return report;
}

std::string ValidationReport::toJson() const {
    nlohmann::ordered_json doc;
    doc["rows"] = rowCount;
    doc["attributes"] = nlohmann::ordered_json::array();
    for (const auto& summary : attributes) {
        nlohmann::ordered_json entry;
        entry["name"] = summary.name;
        entry["missing"] = summary.missingCount;
        if (!summary.frequencies.empty() || (!summary.minValue && !summary.maxValue)) {
            entry["frequencies"] = summary.frequencies;
        }
        if (summary.minValue) entry["min"] = *summary.minValue;
        if (summary.maxValue) entry["max"] = *summary.maxValue;
        doc["attributes"].push_back(std::move(entry));
    }
    return doc.dump(2) + "\n";
}

} // namespace orgminer
