#pragma once

#include <stdexcept>
#include <string>

namespace causalbait {

enum class ErrorKind {
  Config,
  Data,
  Format,
  Truncation,
  Alignment,
  Label,
  Balance,
  File,
  Shape,
  Graph,
  Numeric,
  Scenario,
  Gate,
  Curve,
};

const char* to_string(ErrorKind kind);

// Process exit code for an error kind: 2 config, 3 data, 4 numeric/assertion.
int exit_code(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const { return kind_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

#define CAUSALBAIT_DEFINE_ERROR(Name, Kind)                          \
  class Name : public Error {                                       \
   public:                                                          \
    explicit Name(const std::string& what) : Error(Kind, what) {}   \
  };

CAUSALBAIT_DEFINE_ERROR(ConfigError, ErrorKind::Config)
CAUSALBAIT_DEFINE_ERROR(DataError, ErrorKind::Data)
CAUSALBAIT_DEFINE_ERROR(FormatError, ErrorKind::Format)
CAUSALBAIT_DEFINE_ERROR(TruncationError, ErrorKind::Truncation)
CAUSALBAIT_DEFINE_ERROR(AlignmentError, ErrorKind::Alignment)
CAUSALBAIT_DEFINE_ERROR(LabelError, ErrorKind::Label)
CAUSALBAIT_DEFINE_ERROR(BalanceError, ErrorKind::Balance)
CAUSALBAIT_DEFINE_ERROR(FileError, ErrorKind::File)
CAUSALBAIT_DEFINE_ERROR(ShapeError, ErrorKind::Shape)
CAUSALBAIT_DEFINE_ERROR(GraphError, ErrorKind::Graph)
CAUSALBAIT_DEFINE_ERROR(NumericError, ErrorKind::Numeric)
CAUSALBAIT_DEFINE_ERROR(ScenarioError, ErrorKind::Scenario)
CAUSALBAIT_DEFINE_ERROR(GateError, ErrorKind::Gate)
CAUSALBAIT_DEFINE_ERROR(CurveError, ErrorKind::Curve)

#undef CAUSALBAIT_DEFINE_ERROR

// Wraps an error raised inside a pipeline stage, keeping its kind.
[[noreturn]] void rethrow_with_stage(const std::string& stage);

}  // namespace causalbait
