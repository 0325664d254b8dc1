#pragma once

#include <stdexcept>
#include <string>

namespace ternavit {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NonFinite,
  EmptyInput,
  CorruptData,
  BadMagic,
  VersionMismatch,
  SectionOverlap,
  MissingTensor,
  DuplicateTensor,
  UnknownPrecision,
  IoFailure,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) { throw Error(code, msg); }

}  // namespace ternavit
