// Copyright (c) 2026 The unifyspeech-cpp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef UNIFYSPEECH_ERRORS_H_
#define UNIFYSPEECH_ERRORS_H_

#include <stdexcept>
#include <string>

namespace unifyspeech {

// Every failure raised by the library derives from Error so callers (the CLI
// in particular) can catch one type and still branch on the category.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes do not fit the operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameter or setting (even kernel, dropout >= 1, empty codebook).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Class label, phoneme id or table index out of range.
class IndexError : public Error {
 public:
  using Error::Error;
};

// Value outside the mathematical domain of the operation (negative F0).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Misuse of an API contract (backward on a non-scalar, etc).
class ContractError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf reached a place where it must not.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Missing or inconsistent training data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Corpus record violates its invariants (durations do not sum to T, ...).
class IntegrityError : public DataError {
 public:
  using DataError::DataError;
};

// Text and speech content sequences have different lengths.
class PairingError : public Error {
 public:
  using Error::Error;
};

// A metric has no defined value for the given inputs.
class UndefinedResultError : public Error {
 public:
  using Error::Error;
};

// Sequences that must be frame-synchronous are not.
class AlignmentError : public DimensionError {
 public:
  using DimensionError::DimensionError;
};

// Zero-norm vector where a direction is required.
class DegenerateEmbeddingError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Malformed file (bad magic, version, header).
class FormatError : public Error {
 public:
  using Error::Error;
};

// Checkpoint or file lacks required entries.
class SchemaError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Filesystem failure or truncated file.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace unifyspeech

#endif  // UNIFYSPEECH_ERRORS_H_
