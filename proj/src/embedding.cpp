#include "fsfm/embedding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "fsfm/error.hpp"

namespace fsfm {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool is_separator(unsigned char c) {
    if (c >= 0x80) return false;
    return std::isspace(c) || std::ispunct(c);
}

}  // namespace

std::vector<std::string> tokenize(std::string_view content) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : content) {
        if (is_separator(c)) {
            if (!current.empty()) tokens.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

std::vector<double> embed(std::string_view content, std::int64_t dim, std::uint64_t seed) {
    if (dim < 2) throw Error(ErrorCode::InvalidConfig, "embedding dimension must be >= 2");
    const auto tokens = tokenize(content);
    if (tokens.empty()) throw Error(ErrorCode::EmptyContent, "content has no tokens");

    const auto n = static_cast<std::uint64_t>(dim);
    std::vector<double> v(n, 0.0);
    for (const auto& token : tokens) {
        const std::uint64_t h = splitmix64(fnv1a(token) ^ splitmix64(seed));
        const double sign = (h >> 63) != 0 ? -1.0 : 1.0;
        v[h % n] += sign;
    }
    double norm = l2_norm(v);
    if (norm == 0.0) {
        // Every bucket cancelled out; fall back to a single whole-content feature.
        const std::uint64_t h = splitmix64(fnv1a(content) ^ splitmix64(seed));
        v[h % n] = 1.0;
        norm = 1.0;
    }
    for (double& x : v) x /= norm;
    return v;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double l2_norm(std::span<const double> v) { return std::sqrt(dot(v, v)); }

}  // namespace fsfm
