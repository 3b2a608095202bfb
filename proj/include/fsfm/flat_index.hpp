#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fsfm {

struct Hit {
    std::string id;
    double similarity = 0.0;

    friend bool operator==(const Hit&, const Hit&) = default;
};

/// Exact cosine-similarity search over unit vectors stored contiguously.
/// Results are ordered by similarity descending, ties by id ascending.
class FlatIndex {
public:
    explicit FlatIndex(std::size_t dim = 0) : dim_(dim) {}

    /// Replaces the vector if `id` is already present.
    void upsert(std::string_view id, std::span<const double> embedding);
    bool erase(std::string_view id);
    void clear();

    std::vector<Hit> search(std::span<const double> query, std::size_t k) const;

    std::size_t size() const { return ids_.size(); }
    std::size_t dim() const { return dim_; }
    bool contains(std::string_view id) const { return rows_.contains(std::string(id)); }

private:
    std::size_t dim_;
    std::vector<std::string> ids_;
    std::vector<double> data_;
    std::unordered_map<std::string, std::size_t> rows_;
};

}  // namespace fsfm
