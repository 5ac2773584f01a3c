#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace jano {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidInputError : Error {
    using Error::Error;
};

struct InvalidStateError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

struct SingularityError : Error {
    using Error::Error;
};

struct CorrelationUndefinedError : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct FormatError : Error {
    uint64_t byte_offset;
    FormatError(const std::string& msg, uint64_t offset)
        : Error(msg + " (byte offset " + std::to_string(offset) + ")"), byte_offset(offset) {}
};

struct BudgetInfeasibleError : Error {
    double min_achievable_cost;
    BudgetInfeasibleError(const std::string& msg, double min_cost)
        : Error(msg + " (minimum achievable cost fraction " + std::to_string(min_cost) + ")"),
          min_achievable_cost(min_cost) {}
};

}  // namespace jano
