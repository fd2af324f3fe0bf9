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

#ifndef FLEETLENS_OBJECT_STORE_HPP_
#define FLEETLENS_OBJECT_STORE_HPP_

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace fleetlens {

// Flat key/value object storage with '/'-separated keys, the minimal surface
// an S3-like bucket offers. Implementations must make put() atomic with
// respect to concurrent get()/list(): readers never observe partial objects.
class ObjectStore {
 public:
  virtual ~ObjectStore() = default;

  // Throws StorageError on failure.
  virtual void put(const std::string& key, std::string_view bytes) = 0;
  virtual std::optional<std::string> get(const std::string& key) const = 0;
  // All keys starting with prefix, sorted ascending.
  virtual std::vector<std::string> list(const std::string& prefix) const = 0;
};

// Objects are files under root; writes go to a temporary sibling and are
// renamed into place.
class FilesystemObjectStore final : public ObjectStore {
 public:
  explicit FilesystemObjectStore(std::filesystem::path root);

  void put(const std::string& key, std::string_view bytes) override;
  std::optional<std::string> get(const std::string& key) const override;
  std::vector<std::string> list(const std::string& prefix) const override;

  const std::filesystem::path& root() const noexcept { return root_; }

 private:
  std::filesystem::path root_;
};

class MemoryObjectStore final : public ObjectStore {
 public:
  void put(const std::string& key, std::string_view bytes) override;
  std::optional<std::string> get(const std::string& key) const override;
  std::vector<std::string> list(const std::string& prefix) const override;

 private:
  mutable std::mutex mu_;
  std::map<std::string, std::string, std::less<>> objects_;
};

}  // namespace fleetlens

#endif  // FLEETLENS_OBJECT_STORE_HPP_
