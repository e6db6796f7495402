#pragma once

#include <stdexcept>
#include <string>

namespace pacrf {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform to an operation's rule.
class InvalidShapeError : public Error {
 public:
  using Error::Error;
};

// Bad run configuration (unknown variant, non-positive counts, ...).
class InvalidConfigError : public Error {
 public:
  using Error::Error;
};

// A label index or label name outside the governing label set.
class InvalidLabelError : public Error {
 public:
  using Error::Error;
};

class DuplicateTypeError : public Error {
 public:
  using Error::Error;
};

class InvalidNameError : public Error {
 public:
  using Error::Error;
};

// Malformed input file; message carries the line number where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Corpus cannot supply the requested way/shot/query counts.
class EpisodeInfeasibleError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class MissingEmbeddingError : public Error {
 public:
  using Error::Error;
};

class CorpusMismatchError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

// Gradient checker given a function it cannot verify (non-deterministic).
class OracleInvalidError : public Error {
 public:
  using Error::Error;
};

// Non-finite values produced by a numeric operation.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace pacrf
