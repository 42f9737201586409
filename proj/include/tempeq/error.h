/*
 * Copyright 2026 The tempeq Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef TEMPEQ_ERROR_H_
#define TEMPEQ_ERROR_H_

#include <stdexcept>
#include <string>

namespace tempeq {

// Root of every error thrown by the library. The CLI maps ConfigError to exit
// code 2 and everything else to exit code 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or a failed numerical audit.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Empty splits, missing pairs, single-class labels.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public IoError {
 public:
  using IoError::IoError;
};

class VersionError : public SchemaError {
 public:
  using SchemaError::SchemaError;
};

class IntegrityError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace tempeq

#endif  // TEMPEQ_ERROR_H_
