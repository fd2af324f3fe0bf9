/*
 * Copyright 2026 The FleetLens Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef FLEETLENS_ERRORS_HPP_
#define FLEETLENS_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace fleetlens {

// Every error raised by the library derives from Error so callers can catch
// the whole family at a boundary (CLI, HTTP handler).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidSampleError : public Error {
 public:
  using Error::Error;
};

class InvalidProfileError : public Error {
 public:
  using Error::Error;
};

// Malformed summary packet. key() names the offending JSON key.
class CodecError : public Error {
 public:
  CodecError(std::string key, const std::string& what)
      : Error("codec error at key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class EmptyWindowError : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  StorageError(std::string path, const std::string& what)
      : Error(what + ": " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class InvalidFilterError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class MetricError : public Error {
 public:
  using Error::Error;
};

class ConfigurationError : public Error {
 public:
  using Error::Error;
};

class UnknownIntentError : public Error {
 public:
  using Error::Error;
};

class UnknownLandmarkError : public Error {
 public:
  explicit UnknownLandmarkError(std::string name)
      : Error("unknown landmark: " + name), name_(std::move(name)) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class UnknownEventError : public Error {
 public:
  using Error::Error;
};

}  // namespace fleetlens

#endif  // FLEETLENS_ERRORS_HPP_
