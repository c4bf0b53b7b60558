#pragma once

#include <stdexcept>
#include <string>

namespace dtr {

/// A vector that should be a probability distribution is not one.
class InvalidDistributionError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A policy prescribes an action that is not admissible in its state.
class InvalidPolicyError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An exhaustive enumeration was requested on an instance too large for it.
class SizeLimitError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A response category required by the model was never observed.
class DegenerateCategoryError : public std::runtime_error {
public:
  explicit DegenerateCategoryError(int category, const std::string& detail)
      : std::runtime_error("category " + std::to_string(category) +
                           " has no observations" +
                           (detail.empty() ? "" : " (" + detail + ")")),
        category_(category) {}

  int category() const { return category_; }

private:
  int category_;
};

/// Model parameters violate a structural requirement (e.g. non-monotone cut-points).
class InvalidParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An empirical transition row has zero observations and smoothing is disabled.
class UnestimableRowError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A configuration document is missing or inconsistent.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A required upstream artifact file does not exist; names the subcommand that produces it.
class MissingArtifactError : public std::runtime_error {
public:
  MissingArtifactError(const std::string& path, const std::string& producer)
      : std::runtime_error("missing input '" + path + "'; run the `" + producer +
                           "` subcommand first") {}
};

}  // namespace dtr
