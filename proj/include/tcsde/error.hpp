#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tcsde {

/// Broad failure classes; the CLI maps each to a distinct exit code.
enum class ErrorCategory {
  invalid_parameter = 2,
  numeric = 3,
  weights = 4,
  data = 5,
  config = 6,
  io = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, std::string module, const std::string& what)
      : std::runtime_error(module + ": " + what),
        category_(category),
        module_(std::move(module)) {}

  ErrorCategory category() const noexcept { return category_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorCategory category_;
  std::string module_;
};

struct InvalidParameter : Error {
  InvalidParameter(std::string module, const std::string& what)
      : Error(ErrorCategory::invalid_parameter, std::move(module), what) {}
};

struct OrderingError : Error {
  OrderingError(std::string module, const std::string& what)
      : Error(ErrorCategory::invalid_parameter, std::move(module), what) {}
};

struct GridError : Error {
  GridError(std::string module, const std::string& what)
      : Error(ErrorCategory::invalid_parameter, std::move(module), what) {}
};

struct NumericError : Error {
  NumericError(std::string module, const std::string& what)
      : Error(ErrorCategory::numeric, std::move(module), what) {}
};

struct DivergenceError : Error {
  DivergenceError(std::string module, const std::string& what)
      : Error(ErrorCategory::numeric, std::move(module), what) {}
};

struct DegenerateWeights : Error {
  DegenerateWeights(std::string module, const std::string& what)
      : Error(ErrorCategory::weights, std::move(module), what) {}
};

/// All particle weights vanished at observation block `step`.
struct WeightCollapse : Error {
  WeightCollapse(std::string module, std::size_t step)
      : Error(ErrorCategory::weights, std::move(module),
              "all particle weights are zero at observation " + std::to_string(step)),
        step(step) {}
  std::size_t step;
};

struct DataError : Error {
  DataError(std::string module, const std::string& what)
      : Error(ErrorCategory::data, std::move(module), what) {}
};

struct ParseError : Error {
  ParseError(std::string module, std::size_t line, const std::string& what)
      : Error(ErrorCategory::data, std::move(module),
              "line " + std::to_string(line) + ": " + what),
        line(line) {}
  std::size_t line;
};

struct IoError : Error {
  IoError(std::string module, const std::string& what)
      : Error(ErrorCategory::io, std::move(module), what) {}
};

/// Carries every violation found while validating a configuration.
struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> violations)
      : Error(ErrorCategory::config, "config", join(violations)),
        violations(std::move(violations)) {}

  std::vector<std::string> violations;

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += "; ";
      out += item;
    }
    return out;
  }
};

}  // namespace tcsde
