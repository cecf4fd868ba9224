/*
 * Licensed to the Apache Software Foundation (ASF) under one
 * or more contributor license agreements.  See the NOTICE file
 * distributed with this work for additional information
 * regarding copyright ownership.  The ASF licenses this file
 * to you under the Apache License, Version 2.0 (the
 * "License"); you may not use this file except in compliance
 * with the License.  You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing,
 * software distributed under the License is distributed on an
 * "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
 * KIND, either express or implied.  See the License for the
 * specific language governing permissions and limitations
 * under the License.
 */

#include "xtable/storage.h"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <filesystem>
#include <random>

#include "xtable/error.h"

namespace xtable {

namespace fs = std::filesystem;

namespace {

bool KnownScheme(std::string_view scheme) {
  return scheme == "file" || scheme == "abfs" || scheme == "s3" || scheme == "gs";
}

std::string NormalizePath(std::string_view raw, std::string_view original) {
  const bool absolute = !raw.empty() && raw.front() == '/';
  std::string out = absolute ? "/" : "";
  size_t i = 0;
  while (i < raw.size()) {
    while (i < raw.size() && raw[i] == '/') ++i;
    size_t j = i;
    while (j < raw.size() && raw[j] != '/') ++j;
    if (j > i) {
      std::string_view segment = raw.substr(i, j - i);
      if (segment == "..") {
        Fail(ErrorCode::kMalformedUri, "'..' segments are not allowed: " + std::string(original));
      }
      if (segment != ".") {
        if (!out.empty() && out.back() != '/') out += '/';
        out += segment;
      }
    }
    i = j;
  }
  if (out.empty()) Fail(ErrorCode::kMalformedUri, "empty path: " + std::string(original));
  return out;
}

std::string ErrnoText() { return std::strerror(errno); }

void CheckExecutable(const StoragePath& path) {
  if (path.scheme != "file") {
    Fail(ErrorCode::kUnsupportedScheme,
         "scheme '" + path.scheme + "' is not executable: " + path.ToString());
  }
}

void EnsureParent(const StoragePath& path) {
  std::error_code ec;
  fs::create_directories(fs::path(path.path).parent_path(), ec);
  if (ec) Fail(ErrorCode::kIoFailure, "cannot create parent of " + path.path + ": " + ec.message());
}

// Writes the whole buffer to a fresh temp file next to `path` and fsyncs it.
std::string WriteTemp(const StoragePath& path, std::string_view bytes) {
  EnsureParent(path);
  const fs::path target(path.path);
  const std::string temp = (target.parent_path() / TempNameFor(target.filename().string())).string();
  const int fd = ::open(temp.c_str(), O_WRONLY | O_CREAT | O_EXCL | O_CLOEXEC, 0644);
  if (fd < 0) Fail(ErrorCode::kIoFailure, "open " + temp + ": " + ErrnoText());
  size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + off, bytes.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = ErrnoText();
      ::close(fd);
      ::unlink(temp.c_str());
      Fail(ErrorCode::kIoFailure, "write " + temp + ": " + err);
    }
    off += static_cast<size_t>(n);
  }
  if (::fsync(fd) != 0 || ::close(fd) != 0) {
    ::unlink(temp.c_str());
    Fail(ErrorCode::kIoFailure, "sync " + temp + ": " + ErrnoText());
  }
  return temp;
}

}  // namespace

StoragePath StoragePath::Join(std::string_view rel) const {
  StoragePath out = *this;
  std::string combined = path;
  if (!rel.empty()) combined += "/" + std::string(rel);
  out.path = NormalizePath(combined, combined);
  return out;
}

StoragePath StoragePath::Parent() const {
  StoragePath out = *this;
  const auto slash = path.find_last_of('/');
  if (slash == std::string::npos) {
    out.path = ".";
  } else if (slash == 0) {
    out.path = "/";
  } else {
    out.path = path.substr(0, slash);
  }
  return out;
}

std::string StoragePath::Name() const {
  const auto slash = path.find_last_of('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

std::string StoragePath::ToString() const {
  if (scheme == "file" && authority.empty()) return path;
  return scheme + "://" + authority + path;
}

StoragePath ParseUri(std::string_view raw) {
  if (raw.empty()) Fail(ErrorCode::kMalformedUri, "empty uri");
  const auto sep = raw.find("://");
  StoragePath out;
  if (sep == std::string_view::npos) {
    out.scheme = "file";
    out.path = NormalizePath(raw, raw);
    return out;
  }
  out.scheme = std::string(raw.substr(0, sep));
  if (!KnownScheme(out.scheme)) {
    Fail(ErrorCode::kMalformedUri, "unknown scheme '" + out.scheme + "' in " + std::string(raw));
  }
  std::string_view rest = raw.substr(sep + 3);
  const auto slash = rest.find('/');
  out.authority = std::string(rest.substr(0, slash));
  if (slash == std::string_view::npos) {
    Fail(ErrorCode::kMalformedUri, "missing path in " + std::string(raw));
  }
  out.path = NormalizePath(rest.substr(slash), raw);
  if (out.path == "/" && out.scheme != "file") {
    Fail(ErrorCode::kMalformedUri, "empty path in " + std::string(raw));
  }
  return out;
}

// ---- IoTracker ----

void IoTracker::Register(std::string prefix, PrefixClass cls) {
  std::lock_guard lock(mu_);
  auto it = slots_.find(prefix);
  if (it != slots_.end()) {
    it->second->cls = cls;
    return;
  }
  auto slot = std::make_unique<Slot>();
  slot->cls = cls;
  slots_.emplace(std::move(prefix), std::move(slot));
}

IoTracker::Slot* IoTracker::Find(std::string_view path) const {
  std::lock_guard lock(mu_);
  Slot* best = nullptr;
  size_t best_len = 0;
  for (const auto& [prefix, slot] : slots_) {
    const bool match = path == prefix ||
                       (path.size() > prefix.size() && path.substr(0, prefix.size()) == prefix &&
                        (path[prefix.size()] == '/' || prefix.back() == '/'));
    if (match && prefix.size() >= best_len) {
      best = slot.get();
      best_len = prefix.size();
    }
  }
  return best;
}

void IoTracker::RecordRead(std::string_view path, uint64_t bytes) {
  if (Slot* slot = Find(path)) {
    slot->read_opens.fetch_add(1, std::memory_order_relaxed);
    slot->read_bytes.fetch_add(bytes, std::memory_order_relaxed);
  }
}

void IoTracker::RecordWrite(std::string_view path, uint64_t bytes) {
  if (Slot* slot = Find(path)) {
    slot->write_opens.fetch_add(1, std::memory_order_relaxed);
    slot->write_bytes.fetch_add(bytes, std::memory_order_relaxed);
  }
}

StorageStats IoTracker::Snapshot() const {
  std::lock_guard lock(mu_);
  StorageStats out;
  for (const auto& [prefix, slot] : slots_) {
    out.reads_by_prefix[prefix] = {slot->read_opens.load(), slot->read_bytes.load()};
    out.writes_by_prefix[prefix] = {slot->write_opens.load(), slot->write_bytes.load()};
    out.classes[prefix] = slot->cls;
  }
  return out;
}

namespace {

bool Under(std::string_view path, std::string_view root) {
  if (root.empty()) return true;
  return path == root ||
         (path.size() > root.size() && path.substr(0, root.size()) == root &&
          path[root.size()] == '/');
}

IoCounter Sum(const std::map<std::string, IoCounter>& counters,
              const std::map<std::string, PrefixClass>& classes, PrefixClass cls,
              std::string_view root) {
  IoCounter total;
  for (const auto& [prefix, counter] : counters) {
    if (classes.at(prefix) != cls || !Under(prefix, root)) continue;
    total.opens += counter.opens;
    total.bytes += counter.bytes;
  }
  return total;
}

}  // namespace

IoCounter StorageStats::Reads(PrefixClass cls, std::string_view root) const {
  return Sum(reads_by_prefix, classes, cls, root);
}

IoCounter StorageStats::Writes(PrefixClass cls, std::string_view root) const {
  return Sum(writes_by_prefix, classes, cls, root);
}

IoCounter StorageStats::ReadsUnder(std::string_view prefix) const {
  IoCounter total;
  for (const auto& [p, counter] : reads_by_prefix) {
    if (!Under(p, prefix)) continue;
    total.opens += counter.opens;
    total.bytes += counter.bytes;
  }
  return total;
}

void RegisterTablePrefixes(Storage& storage, const StoragePath& base) {
  storage.tracker().Register(base.path, PrefixClass::kData);
  for (auto dir : kMetadataDirs) {
    storage.tracker().Register(base.Join(dir).path, PrefixClass::kMetadata);
  }
}

// ---- temp names ----

std::string TempNameFor(std::string_view name) {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  char suffix[17];
  std::snprintf(suffix, sizeof(suffix), "%016llx", static_cast<unsigned long long>(rng()));
  return "." + std::string(name) + ".tmp-" + suffix;
}

bool IsTempName(std::string_view name) {
  return !name.empty() && name.front() == '.' && name.find(".tmp-") != std::string_view::npos;
}

// ---- LocalStorage ----

bool LocalStorage::Exists(const StoragePath& path) {
  CheckExecutable(path);
  std::error_code ec;
  return fs::exists(path.path, ec);
}

bool LocalStorage::IsDirectory(const StoragePath& path) {
  CheckExecutable(path);
  std::error_code ec;
  return fs::is_directory(path.path, ec);
}

std::vector<std::string> LocalStorage::ListDir(const StoragePath& path) {
  CheckExecutable(path);
  std::error_code ec;
  if (!fs::is_directory(path.path, ec)) {
    Fail(ErrorCode::kNotFound, "not a directory: " + path.path);
  }
  std::vector<std::string> names;
  for (fs::directory_iterator it(path.path, ec), end; !ec && it != end; it.increment(ec)) {
    names.push_back(it->path().filename().string());
  }
  if (ec) Fail(ErrorCode::kIoFailure, "list " + path.path + ": " + ec.message());
  std::sort(names.begin(), names.end());
  return names;
}

std::string LocalStorage::ReadFile(const StoragePath& path) {
  CheckExecutable(path);
  const int fd = ::open(path.path.c_str(), O_RDONLY | O_CLOEXEC);
  if (fd < 0) {
    if (errno == ENOENT) Fail(ErrorCode::kNotFound, "no such file: " + path.path);
    Fail(ErrorCode::kIoFailure, "open " + path.path + ": " + ErrnoText());
  }
  std::string out;
  char buf[64 * 1024];
  while (true) {
    const ssize_t n = ::read(fd, buf, sizeof(buf));
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = ErrnoText();
      ::close(fd);
      Fail(ErrorCode::kIoFailure, "read " + path.path + ": " + err);
    }
    if (n == 0) break;
    out.append(buf, static_cast<size_t>(n));
  }
  ::close(fd);
  tracker_.RecordRead(path.path, out.size());
  return out;
}

PutOutcome LocalStorage::PutIfAbsent(const StoragePath& path, std::string_view bytes) {
  CheckExecutable(path);
  const std::string temp = WriteTemp(path, bytes);
  // link(2) fails with EEXIST instead of replacing, which makes the
  // publication both atomic and exclusive.
  const int rc = ::link(temp.c_str(), path.path.c_str());
  const int err = errno;
  ::unlink(temp.c_str());
  if (rc != 0) {
    if (err == EEXIST) return PutOutcome::kAlreadyExists;
    Fail(ErrorCode::kIoFailure, "publish " + path.path + ": " + std::strerror(err));
  }
  tracker_.RecordWrite(path.path, bytes.size());
  return PutOutcome::kCreated;
}

bool LocalStorage::WriteReplaceAtomic(const StoragePath& path, std::string_view bytes) {
  CheckExecutable(path);
  std::error_code ec;
  const bool existed = fs::exists(path.path, ec);
  const std::string temp = WriteTemp(path, bytes);
  if (::rename(temp.c_str(), path.path.c_str()) != 0) {
    const std::string err = ErrnoText();
    ::unlink(temp.c_str());
    Fail(ErrorCode::kIoFailure, "rename onto " + path.path + ": " + err);
  }
  tracker_.RecordWrite(path.path, bytes.size());
  return !existed;
}

void LocalStorage::Append(const StoragePath& path, std::string_view bytes) {
  CheckExecutable(path);
  EnsureParent(path);
  const int fd = ::open(path.path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd < 0) Fail(ErrorCode::kIoFailure, "open " + path.path + ": " + ErrnoText());
  size_t off = 0;
  while (off < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + off, bytes.size() - off);
    if (n < 0) {
      if (errno == EINTR) continue;
      const std::string err = ErrnoText();
      ::close(fd);
      Fail(ErrorCode::kIoFailure, "append " + path.path + ": " + err);
    }
    off += static_cast<size_t>(n);
  }
  ::close(fd);
  tracker_.RecordWrite(path.path, bytes.size());
}

// ---- FaultInjectingStorage ----

void FaultInjectingStorage::MaybeFail(const StoragePath& path, std::string_view bytes,
                                      bool atomic) {
  const uint64_t n = ++writes_;
  if (fired_) Fail(ErrorCode::kIoFailure, "storage crashed before write #" + std::to_string(n));
  if (plan_.fail_at == 0 || n != plan_.fail_at) return;
  fired_ = true;
  if (atomic && plan_.mode == FaultMode::kTornWrite) {
    // Half of the payload lands in a temp sibling that nobody will rename.
    const StoragePath orphan = path.Parent().Join(TempNameFor(path.Name()));
    inner_.PutIfAbsent(orphan, bytes.substr(0, bytes.size() / 2));
  }
  Fail(ErrorCode::kIoFailure, "injected fault at write #" + std::to_string(n) + " (" +
                                  path.ToString() + ")");
}

PutOutcome FaultInjectingStorage::PutIfAbsent(const StoragePath& path, std::string_view bytes) {
  MaybeFail(path, bytes, true);
  return inner_.PutIfAbsent(path, bytes);
}

bool FaultInjectingStorage::WriteReplaceAtomic(const StoragePath& path,
                                               std::string_view bytes) {
  MaybeFail(path, bytes, true);
  return inner_.WriteReplaceAtomic(path, bytes);
}

void FaultInjectingStorage::Append(const StoragePath& path, std::string_view bytes) {
  MaybeFail(path, bytes, false);
  inner_.Append(path, bytes);
}

}  // namespace xtable
