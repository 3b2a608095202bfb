#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fsfm {

enum class ErrorCode {
    InvalidConfig,
    InvalidArgument,
    EmptyContent,
    NegativeElapsedTime,
    NegativeTime,
    NonMonotonicEvents,
    KTooLarge,
    BatchTooLarge,
    MalformedRecord,
    IllegalTransition,
    CorruptSnapshot,
    Backpressure,
    DegenerateSamples,
    InvalidMix,
    IncompleteReport,
    IoFailure,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace fsfm
