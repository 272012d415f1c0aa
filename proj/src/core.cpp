#include "badtime/core.hpp"

namespace badtime {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Format: return "format error";
    case ErrorKind::Ordering: return "ordering error";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::InsufficientData: return "insufficient data";
    case ErrorKind::State: return "state error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Length: return "length error";
    case ErrorKind::Config: return "configuration error";
    case ErrorKind::Infeasible: return "infeasible selection";
    case ErrorKind::Input: return "input error";
    case ErrorKind::Training: return "training error";
    case ErrorKind::Io: return "I/O error";
    case ErrorKind::Internal: return "internal error";
  }
  return "error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
    case ErrorKind::Infeasible:
    case ErrorKind::Shape:
    case ErrorKind::Length:
    case ErrorKind::State:
      return 2;
    case ErrorKind::Format:
    case ErrorKind::Ordering:
    case ErrorKind::EmptyInput:
    case ErrorKind::InsufficientData:
    case ErrorKind::Input:
    case ErrorKind::Io:
      return 3;
    case ErrorKind::Training:
      return 4;
    case ErrorKind::Internal:
      return 1;
  }
  return 1;
}

}  // namespace badtime
