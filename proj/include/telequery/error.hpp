// Copyright 2026 The Telequery Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace telequery {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration or contract violation by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Corpus loading and chunking failures.
class CorpusError : public Error {
 public:
  using Error::Error;
};

/// Index build, query and persistence failures.
class IndexError : public Error {
 public:
  using Error::Error;
};

/// Malformed question or judgment files.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Transport-level failures talking to a generation or embedding backend.
class GatewayError : public Error {
 public:
  using Error::Error;
};

/// The backend answered, but not in the wire format we expect.
class ProtocolError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

/// A replayed request has no recorded response. Never retried.
class CassetteMissError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

}  // namespace telequery
