#pragma once

#include <stdexcept>
#include <string>

namespace navfly {

/// Base for all domain errors. `category()` is the stable machine-parseable
/// token the CLI prints in its one-line error prefix.
class Error : public std::runtime_error {
 public:
  Error(std::string category, const std::string& what)
      : std::runtime_error(what), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error("config", what) {}
};

struct IoError : Error {
  explicit IoError(const std::string& what) : Error("io", what) {}
};

struct ConstructionError : Error {
  explicit ConstructionError(const std::string& what) : Error("construction", what) {}
};

struct TrainingError : Error {
  explicit TrainingError(const std::string& what) : Error("training", what) {}
};

struct DomainError : Error {
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

struct TransportError : Error {
  explicit TransportError(const std::string& what) : Error("transport", what) {}
};

}  // namespace navfly
