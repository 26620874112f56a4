#ifndef SPX_COMMON_HPP
#define SPX_COMMON_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace spx {

/// Flat vector of model parameters (or any node-local real-valued state).
using ParamVector = std::vector<double>;

/// Bad arguments, bad configuration, violated preconditions. Maps to the
/// validation exit/status code at the API boundary.
class ValidationError : public std::invalid_argument {
public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Malformed external input (CSV rows, payload bytes, sweep files).
class FormatError : public std::runtime_error {
public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Corrupt or inconsistent serialized payload.
class DecodeError : public FormatError {
public:
  explicit DecodeError(const std::string& what) : FormatError(what) {}
};

/// Numerical breakdown: diverging bias weights, non-converging iterations.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

inline void check_arg(bool ok, const std::string& msg) {
  if (!ok) throw ValidationError(msg);
}

}  // namespace spx

#endif
