#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fsfm::cli {

enum ExitStatus : int {
    kOk = 0,
    kUsage = 1,
    kData = 2,
    kInternal = 3,
};

/// Runs one `fsfm` invocation. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fsfm::cli
