#include "bpmn_assistant/error.hpp"

namespace bpmn_assistant {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kMalformedDocument: return "MalformedDocument";
    case ErrorCode::kUnknownElementType: return "UnknownElementType";
    case ErrorCode::kMissingField: return "MissingField";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kInvalidModel: return "InvalidModel";
    case ErrorCode::kWouldOrphanReference: return "WouldOrphanReference";
    case ErrorCode::kWouldRemoveLastStartOrEnd: return "WouldRemoveLastStartOrEnd";
    case ErrorCode::kDuplicateId: return "DuplicateId";
    case ErrorCode::kBothAnchorsGiven: return "BothAnchorsGiven";
    case ErrorCode::kNoAnchorGiven: return "NoAnchorGiven";
    case ErrorCode::kAnchorInsideMoved: return "AnchorInsideMoved";
    case ErrorCode::kSelfAnchor: return "SelfAnchor";
    case ErrorCode::kResultingModelInvalid: return "ResultingModelInvalid";
    case ErrorCode::kNoMatchingBranch: return "NoMatchingBranch";
    case ErrorCode::kAmbiguousCondition: return "AmbiguousCondition";
    case ErrorCode::kScriptFailed: return "ScriptFailed";
    case ErrorCode::kMalformedXml: return "MalformedXml";
    case ErrorCode::kNoProcessElement: return "NoProcessElement";
    case ErrorCode::kUnsupportedElement: return "UnsupportedElement";
    case ErrorCode::kUnstructured: return "Unstructured";
    case ErrorCode::kInvalidDocument: return "InvalidDocument";
    case ErrorCode::kIncompleteLayout: return "IncompleteLayout";
    case ErrorCode::kBothEmpty: return "BothEmpty";
    case ErrorCode::kProviderUnavailable: return "ProviderUnavailable";
    case ErrorCode::kUnparseableClassification: return "UnparseableClassification";
    case ErrorCode::kGenerationFailed: return "GenerationFailed";
    case ErrorCode::kUnparseableFunctionCalls: return "UnparseableFunctionCalls";
    case ErrorCode::kReadOnlyModel: return "ReadOnlyModel";
    case ErrorCode::kTooLarge: return "TooLarge";
    case ErrorCode::kNothingToDownload: return "NothingToDownload";
    case ErrorCode::kUnknownModel: return "UnknownModel";
    case ErrorCode::kUnknownSession: return "UnknownSession";
    case ErrorCode::kInvalidRequest: return "InvalidRequest";
  }
  return "Unknown";
}

MissingFieldError::MissingFieldError(std::string field, std::string path)
    : Error(ErrorCode::kMissingField,
            "missing field '" + field + "' at " + (path.empty() ? std::string("document root") : path)),
      field_(std::move(field)),
      path_(std::move(path)) {}

}  // namespace bpmn_assistant
