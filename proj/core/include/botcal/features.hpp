#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "botcal/account.hpp"

namespace botcal {

enum class FeatureGroup { user_meta, friend_meta, network, content_language, sentiment, temporal };

inline constexpr std::array<FeatureGroup, 6> kAllGroups = {
    FeatureGroup::user_meta,        FeatureGroup::friend_meta, FeatureGroup::network,
    FeatureGroup::content_language, FeatureGroup::sentiment,   FeatureGroup::temporal};

std::string_view to_string(FeatureGroup group);
// Throws ValidationError for unknown tags.
FeatureGroup parse_group(std::string_view text);

struct FeatureSpec {
    std::string name;
    FeatureGroup group = FeatureGroup::user_meta;
    bool linguistic = false;  // derived from post text or language fields
    double default_value = 0.0;

    bool operator==(const FeatureSpec&) const = default;
};

// Ordered feature roster. Immutable once built; share via SchemaPtr.
class FeatureSchema {
public:
    FeatureSchema(std::string version, std::vector<FeatureSpec> specs);

    const std::string& version() const noexcept { return version_; }
    // Hex digest over version and roster; stored in trained models.
    const std::string& fingerprint() const noexcept { return fingerprint_; }

    std::size_t size() const noexcept { return specs_.size(); }
    const FeatureSpec& operator[](std::size_t i) const { return specs_[i]; }
    std::span<const FeatureSpec> specs() const noexcept { return specs_; }

    std::optional<std::size_t> index_of(std::string_view name) const;

    // Sub-schemas keep the parent version; fingerprints differ with the roster.
    FeatureSchema slice(FeatureGroup group) const;
    FeatureSchema without_linguistic() const;  // throws ValidationError if nothing remains
    std::vector<std::size_t> columns_in(const FeatureSchema& parent) const;

    bool operator==(const FeatureSchema& other) const { return fingerprint_ == other.fingerprint_; }

private:
    std::string version_;
    std::vector<FeatureSpec> specs_;
    std::string fingerprint_;
};

using SchemaPtr = std::shared_ptr<const FeatureSchema>;

// The built-in 47-feature roster.
SchemaPtr default_schema();

struct FeatureVector {
    SchemaPtr schema;
    std::vector<double> values;

    double at(std::string_view name) const;  // throws std::out_of_range
    bool operator==(const FeatureVector& other) const {
        return *schema == *other.schema && values == other.values;
    }
};

// Total on validated accounts; never emits non-finite values.
FeatureVector extract(const Account& account, const SchemaPtr& schema);

FeatureVector group_slice(const FeatureVector& vec, FeatureGroup group);
FeatureVector group_slice(const FeatureVector& vec, std::string_view group);
FeatureVector strip_linguistic(const FeatureVector& vec);
// Reorders/filters `vec` onto a schema whose features all exist in vec.schema.
FeatureVector project(const FeatureVector& vec, const SchemaPtr& sub);

// The individual statistics behind some features, exposed for direct use.
double neighbor_language_match(const Account& account);
double timezone_mismatch(const Account& account);
double source_entropy(const Account& account);
// Recent posting rate over lifetime rate; 0 for accounts without posts.
double deletion_mismatch(const Account& account);
// Base-2 Shannon entropy of a histogram. Empty or all-zero -> 0.
double entropy_bits(std::span<const std::size_t> counts);

// Row-major design matrix sharing one schema.
struct FeatureMatrix {
    SchemaPtr schema;
    std::size_t rows = 0;
    std::vector<double> data;

    std::size_t cols() const { return schema ? schema->size() : 0; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * cols(), cols()};
    }
    FeatureVector vector(std::size_t r) const;

    // Projects onto a sub-schema of this matrix's schema.
    FeatureMatrix select(const SchemaPtr& sub) const;
    // Keeps the given rows, in order.
    FeatureMatrix take(std::span<const std::size_t> rows) const;
};

FeatureMatrix extract_matrix(std::span<const Account> accounts, const SchemaPtr& schema);

}  // namespace botcal
