// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ACP_ERRORS_H_
#define ACP_ERRORS_H_

#include <stdexcept>
#include <string>

namespace acp {

// Base of every error raised by the library. Tools map subclasses onto exit
// codes, so throw the most specific one that applies.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input bytes. `location` is a human-readable position such as
// "line 3, column 14" or "record 7".
class ParseError : public Error {
 public:
  ParseError(const std::string& location, const std::string& what)
      : Error(location + ": " + what), location_(location) {}
  const std::string& location() const { return location_; }

 private:
  std::string location_;
};

// A name that is not part of the active vocabulary.
class VocabularyError : public Error {
 public:
  VocabularyError(const std::string& kind, const std::string& name)
      : Error("unknown " + kind + " '" + name + "'"), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

// A violated precondition or domain invariant.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Matrix shapes that do not compose.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf where finite values are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Invalid experiment or generator configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace acp

#endif  // ACP_ERRORS_H_
