#pragma once
// Error taxonomy. The CLI maps these to process exit codes:
// ConfigError -> 2, NumericalError (incl. rank deficiency) -> 3,
// OracleUnsupportedError -> 4.

#include <stdexcept>
#include <string>
#include <vector>

namespace lsmcoc {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankDeficiencyError : NumericalError {
    RankDeficiencyError(const std::string& msg, std::vector<std::string> offending)
        : NumericalError(msg), columns(std::move(offending)) {}
    std::vector<std::string> columns;  // labels of the dependent columns
};

struct OracleUnsupportedError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lsmcoc
