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

#include "fleetlens/object_store.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <system_error>
#include <thread>

#include "fleetlens/errors.hpp"

namespace fleetlens {
namespace fs = std::filesystem;

namespace {

constexpr std::string_view kTempSuffix = ".partial";

bool ends_with(std::string_view s, std::string_view suffix) {
  return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

std::string temp_suffix() {
  static std::atomic<unsigned long> counter{0};
  std::ostringstream os;
  os << '.' << std::hash<std::thread::id>{}(std::this_thread::get_id()) << '.' << counter++
     << kTempSuffix;
  return os.str();
}

}  // namespace

FilesystemObjectStore::FilesystemObjectStore(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw StorageError(root_.string(), "cannot create store root: " + ec.message());
}

void FilesystemObjectStore::put(const std::string& key, std::string_view bytes) {
  const fs::path target = root_ / key;
  std::error_code ec;
  fs::create_directories(target.parent_path(), ec);
  if (ec) throw StorageError(target.string(), "cannot create directory: " + ec.message());

  const fs::path tmp = target.string() + temp_suffix();
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw StorageError(tmp.string(), "cannot open for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw StorageError(tmp.string(), "write failed");
  }
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw StorageError(target.string(), "rename failed");
  }
}

std::optional<std::string> FilesystemObjectStore::get(const std::string& key) const {
  std::ifstream in(root_ / key, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<std::string> FilesystemObjectStore::list(const std::string& prefix) const {
  std::vector<std::string> keys;
  std::error_code ec;
  // Narrow the walk to the deepest directory named by the prefix.
  fs::path start = root_;
  if (auto slash = prefix.rfind('/'); slash != std::string::npos) {
    start = root_ / prefix.substr(0, slash);
  }
  if (!fs::exists(start, ec)) return keys;
  for (auto it = fs::recursive_directory_iterator(start, ec); !ec && it != fs::end(it);
       it.increment(ec)) {
    if (!it->is_regular_file(ec)) continue;
    const auto name = it->path().filename().string();
    if (ends_with(name, kTempSuffix)) continue;
    auto rel = fs::relative(it->path(), root_, ec).generic_string();
    if (rel.compare(0, prefix.size(), prefix) == 0) keys.push_back(std::move(rel));
  }
  if (ec) throw StorageError(start.string(), "directory walk failed: " + ec.message());
  std::sort(keys.begin(), keys.end());
  return keys;
}

void MemoryObjectStore::put(const std::string& key, std::string_view bytes) {
  std::lock_guard lock(mu_);
  objects_.insert_or_assign(key, std::string(bytes));
}

std::optional<std::string> MemoryObjectStore::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = objects_.find(key);
  if (it == objects_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> MemoryObjectStore::list(const std::string& prefix) const {
  std::lock_guard lock(mu_);
  std::vector<std::string> keys;
  for (auto it = objects_.lower_bound(prefix); it != objects_.end(); ++it) {
    if (it->first.compare(0, prefix.size(), prefix) != 0) break;
    keys.push_back(it->first);
  }
  return keys;
}

}  // namespace fleetlens
