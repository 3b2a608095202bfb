#pragma once

#include <filesystem>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "fsfm/forgetting.hpp"

namespace fsfm {

/// Append-only log of forget decisions. Entries accumulate in memory and are
/// appended to the backing JSON Lines file (if any) on flush().
class AuditLog {
public:
    AuditLog() = default;
    explicit AuditLog(std::filesystem::path path) : path_(std::move(path)) {}

    AuditLog(AuditLog&& other) noexcept;
    AuditLog& operator=(AuditLog&& other) noexcept;

    void append(const ForgetDecision& decision);
    void append(std::span<const ForgetDecision> decisions);

    /// Writes entries not yet persisted. Throws Error{IoFailure}.
    void flush();

    std::vector<ForgetDecision> entries() const;
    std::size_t size() const;
    const std::optional<std::filesystem::path>& path() const { return path_; }

    /// Reads a JSON Lines audit file.
    static std::vector<ForgetDecision> read(const std::filesystem::path& path);

private:
    mutable std::mutex mu_;
    std::optional<std::filesystem::path> path_;
    std::vector<ForgetDecision> entries_;
    std::size_t flushed_ = 0;
};

}  // namespace fsfm
