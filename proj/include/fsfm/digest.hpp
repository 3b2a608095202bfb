#pragma once

#include <string>
#include <string_view>

namespace fsfm {

/// Lowercase hex SHA-256 of `data`.
std::string sha256_hex(std::string_view data);

/// Incremental SHA-256 over a stream of chunks.
class Sha256 {
public:
    Sha256();
    ~Sha256();
    Sha256(const Sha256&) = delete;
    Sha256& operator=(const Sha256&) = delete;

    void update(std::string_view data);
    std::string hex_digest();

private:
    void* ctx_;
};

}  // namespace fsfm
