#include "causalbait/errors.hpp"

namespace causalbait {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return "config error";
    case ErrorKind::Data: return "data error";
    case ErrorKind::Format: return "format error";
    case ErrorKind::Truncation: return "truncation error";
    case ErrorKind::Alignment: return "alignment error";
    case ErrorKind::Label: return "label error";
    case ErrorKind::Balance: return "balance error";
    case ErrorKind::File: return "file error";
    case ErrorKind::Shape: return "shape error";
    case ErrorKind::Graph: return "graph error";
    case ErrorKind::Numeric: return "numeric error";
    case ErrorKind::Scenario: return "scenario error";
    case ErrorKind::Gate: return "gate error";
    case ErrorKind::Curve: return "curve error";
  }
  return "error";
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config:
      return 2;
    case ErrorKind::Data:
    case ErrorKind::Format:
    case ErrorKind::Truncation:
    case ErrorKind::Alignment:
    case ErrorKind::Label:
    case ErrorKind::Balance:
    case ErrorKind::File:
      return 3;
    default:
      return 4;
  }
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind), detail_(what) {}

void rethrow_with_stage(const std::string& stage) {
  try {
    throw;
  } catch (const Error& e) {
    throw Error(e.kind(), "[" + stage + "] " + e.detail());
  }
}

}  // namespace causalbait
