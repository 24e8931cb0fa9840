#pragma once

#include <stdexcept>
#include <string>

namespace dqpt {

/// Physically invalid input (non-positive hopping, negative temperature, ...).
class InvalidParameter : public std::invalid_argument {
  public:
    explicit InvalidParameter(const std::string& what) : std::invalid_argument(what) {}
};

/// Query that a tabulated dispersion cannot answer.
class LookupError : public std::out_of_range {
  public:
    explicit LookupError(const std::string& what) : std::out_of_range(what) {}
};

}  // namespace dqpt
