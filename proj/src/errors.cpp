#include "tasql/errors.hpp"

namespace tasql {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Io: return "IoError";
    case ErrorKind::Parse: return "ParseError";
    case ErrorKind::Precondition: return "PreconditionError";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::ReplayMiss: return "ReplayMissError";
    case ErrorKind::Backend: return "BackendError";
    case ErrorKind::SqlParse: return "SqlParseError";
    case ErrorKind::Unsupported: return "UnsupportedError";
    case ErrorKind::GoldSchema: return "GoldSchemaError";
    case ErrorKind::SymbolicParse: return "SymbolicParseError";
    case ErrorKind::UnknownFunction: return "UnknownFunctionError";
    case ErrorKind::JoinInference: return "JoinInferenceError";
    case ErrorKind::Compile: return "CompileError";
    case ErrorKind::Synthesis: return "SynthesisError";
  }
  return "Error";
}

}  // namespace tasql
