#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ckg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GraphError : public Error {
 public:
  enum class Kind { Malformed, DuplicateId, DanglingEndpoint, MixedAttributeKinds, SelfLoop };

  GraphError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// Raised by instance retrieval when the preference names a type with no instances.
class QueryError : public Error {
 public:
  using Error::Error;
};

/// Transport-level failures of a language-model client.
class LlmError : public Error {
 public:
  enum class Kind { Timeout, Transport, BadResponse, NoRecording };

  LlmError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

class ExtractionError : public Error {
 public:
  enum class Kind { NoTemplateMatch, UnknownVocabulary, Unparseable, Validation, Timeout };

  ExtractionError(Kind kind, const std::string& message, std::vector<std::string> log = {})
      : Error(message), kind_(kind), repair_log_(std::move(log)) {}
  Kind kind() const noexcept { return kind_; }
  /// Messages collected across the initial attempt and the repair round-trip.
  const std::vector<std::string>& repair_log() const noexcept { return repair_log_; }

 private:
  Kind kind_;
  std::vector<std::string> repair_log_;
};

class ClassificationError : public Error {
 public:
  enum class Kind { Unclassifiable, UnknownEntity, Unparseable, Timeout };

  ClassificationError(Kind kind, const std::string& message) : Error(message), kind_(kind) {}
  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

/// A node, relation or attribute referenced by a directive does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

}  // namespace ckg
