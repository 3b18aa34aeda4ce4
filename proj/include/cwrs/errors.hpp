#pragma once
#include <stdexcept>
#include <string>

namespace cwrs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// numerics
struct ShapeMismatch : Error { using Error::Error; };
struct NonFiniteValue : Error { using Error::Error; };
struct NonFiniteGradient : Error { using Error::Error; };

// cwkg store
struct UnknownEntity : Error { using Error::Error; };
struct UnknownRelation : Error { using Error::Error; };
struct SubgraphMismatch : Error { using Error::Error; };
struct DuplicateTriple : Error { using Error::Error; };
struct EmptyEwbg : Error { using Error::Error; };
struct IoFailure : Error { using Error::Error; };
struct SchemaViolation : Error { using Error::Error; };

struct ParseError : Error {
  ParseError(const std::string& msg, int line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  int line() const { return line_; }
 private:
  int line_;
};

// synthlab
struct DegenerateCorpus : Error { using Error::Error; };
struct SpecReconstructionError : Error { using Error::Error; };

// krl
struct ExhaustedCandidates : Error { using Error::Error; };
struct EmptyLabel : Error { using Error::Error; };
struct NonNumericRelation : Error { using Error::Error; };

// ere
struct UnknownMode : Error { using Error::Error; };

// cf-train
struct UnbalancedBatch : Error { using Error::Error; };
struct NoNegativeAvailable : Error { using Error::Error; };
struct EmptyTestSet : Error { using Error::Error; };
struct DivergenceDetected : Error { using Error::Error; };
struct InvalidValue : Error { using Error::Error; };

// checkpoint container
struct CheckpointError : Error { using Error::Error; };

}  // namespace cwrs
