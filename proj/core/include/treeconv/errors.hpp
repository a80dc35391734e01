#pragma once

#include <stdexcept>
#include <string>

namespace treeconv {

enum class ErrorKind {
  NotAlternating,
  LetterOutOfRange,
  NotParentClosed,
  MissingRoot,
  ArityMismatch,
  AlphabetMismatch,
  ImageNotAlternating,
  DomainError,
  DepthCapReached,
  RootDegreeTooSmall,
  GridMismatch,
  CapacityExceeded,
  InvalidSpec,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace treeconv
