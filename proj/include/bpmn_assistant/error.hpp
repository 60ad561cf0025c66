#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bpmn_assistant {

enum class ErrorCode {
  // process-ir
  kMalformedDocument,
  kUnknownElementType,
  kMissingField,
  kNotFound,
  kInvalidModel,
  // edit-engine
  kWouldOrphanReference,
  kWouldRemoveLastStartOrEnd,
  kDuplicateId,
  kBothAnchorsGiven,
  kNoAnchorGiven,
  kAnchorInsideMoved,
  kSelfAnchor,
  kResultingModelInvalid,
  kNoMatchingBranch,
  kAmbiguousCondition,
  kScriptFailed,
  // xml-codec / layout
  kMalformedXml,
  kNoProcessElement,
  kUnsupportedElement,
  kUnstructured,
  kInvalidDocument,
  kIncompleteLayout,
  // similarity
  kBothEmpty,
  // assistant-core
  kProviderUnavailable,
  kUnparseableClassification,
  kGenerationFailed,
  kUnparseableFunctionCalls,
  kReadOnlyModel,
  // service-api
  kTooLarge,
  kNothingToDownload,
  kUnknownModel,
  kUnknownSession,
  kInvalidRequest,
};

std::string_view to_string(ErrorCode code);

/// Base of every error raised by the library. `code()` is stable and is what
/// the service maps onto error payloads; `what()` is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// MissingField carries the field name and the element path it was expected at,
/// e.g. field "id" at "process[1].branches[0][1]".
class MissingFieldError : public Error {
 public:
  MissingFieldError(std::string field, std::string path);

  const std::string& field() const noexcept { return field_; }
  const std::string& path() const noexcept { return path_; }

 private:
  std::string field_;
  std::string path_;
};

}  // namespace bpmn_assistant
