#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fsfm {

/// Lowercased tokens split on ASCII whitespace and punctuation. Non-ASCII bytes
/// are kept inside tokens.
std::vector<std::string> tokenize(std::string_view content);

/// Signed feature hashing of the token multiset into `dim` buckets, L2-normalized.
/// Pure in (content, dim, seed). Throws Error{EmptyContent} when there are no tokens.
std::vector<double> embed(std::string_view content, std::int64_t dim, std::uint64_t seed);

double dot(std::span<const double> a, std::span<const double> b);
double l2_norm(std::span<const double> v);

}  // namespace fsfm
