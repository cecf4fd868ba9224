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

#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace xtable {

struct StoragePath {
  std::string scheme;     // file, abfs, s3 or gs
  std::string authority;  // e.g. container@account.dfs.core.windows.net
  std::string path;       // normalized, forward slashes

  /// Appends a relative, forward-slash path.
  StoragePath Join(std::string_view rel) const;
  StoragePath Parent() const;
  std::string Name() const;
  std::string ToString() const;

  bool operator==(const StoragePath&) const = default;
  auto operator<=>(const StoragePath&) const = default;
};

/// Splits `scheme://authority/path` or a bare path. Throws kMalformedUri.
StoragePath ParseUri(std::string_view raw);

enum class PutOutcome { kCreated, kAlreadyExists };

enum class PrefixClass { kData, kMetadata };

struct IoCounter {
  uint64_t opens = 0;
  uint64_t bytes = 0;

  bool operator==(const IoCounter&) const = default;
};

struct StorageStats {
  std::map<std::string, IoCounter> reads_by_prefix;
  std::map<std::string, IoCounter> writes_by_prefix;
  std::map<std::string, PrefixClass> classes;

  /// Sums read counters of prefixes of the given class that lie under `root`
  /// (or everywhere when root is empty).
  IoCounter Reads(PrefixClass cls, std::string_view root = {}) const;
  IoCounter Writes(PrefixClass cls, std::string_view root = {}) const;
  IoCounter ReadsUnder(std::string_view prefix) const;
};

/// Tracks I/O by registered path prefixes. A read or write is attributed to
/// the longest registered prefix containing it; unattributed I/O is dropped.
class IoTracker {
 public:
  void Register(std::string prefix, PrefixClass cls);
  void RecordRead(std::string_view path, uint64_t bytes);
  void RecordWrite(std::string_view path, uint64_t bytes);
  StorageStats Snapshot() const;

 private:
  struct Slot {
    PrefixClass cls;
    std::atomic<uint64_t> read_opens{0};
    std::atomic<uint64_t> read_bytes{0};
    std::atomic<uint64_t> write_opens{0};
    std::atomic<uint64_t> write_bytes{0};
  };
  Slot* Find(std::string_view path) const;

  mutable std::mutex mu_;
  std::map<std::string, std::unique_ptr<Slot>, std::less<>> slots_;
};

/// The pluggable file system every reader and writer goes through.
class Storage {
 public:
  virtual ~Storage() = default;

  virtual bool Exists(const StoragePath& path) = 0;
  virtual bool IsDirectory(const StoragePath& path) = 0;
  /// Entry names sorted in byte order. kNotFound if not a directory.
  virtual std::vector<std::string> ListDir(const StoragePath& path) = 0;
  virtual std::string ReadFile(const StoragePath& path) = 0;
  /// Publishes the complete content or nothing; never replaces.
  virtual PutOutcome PutIfAbsent(const StoragePath& path, std::string_view bytes) = 0;
  /// Readers see the old or the new complete content, never a mix. Returns
  /// true if the file did not exist before.
  virtual bool WriteReplaceAtomic(const StoragePath& path, std::string_view bytes) = 0;
  /// Non-atomic append, used only for the telemetry log.
  virtual void Append(const StoragePath& path, std::string_view bytes) = 0;

  virtual IoTracker& tracker() = 0;
  StorageStats stats() { return tracker().Snapshot(); }
};

/// Registers `base` as a data prefix and every known metadata directory under
/// it (`_delta_log`, `metadata`, `.hoodie`, `_xtable`) as metadata prefixes.
void RegisterTablePrefixes(Storage& storage, const StoragePath& base);

inline constexpr std::string_view kMetadataDirs[] = {"_delta_log", "metadata", ".hoodie",
                                                     "_xtable"};

/// Local POSIX file system; the only executable scheme is `file`.
class LocalStorage final : public Storage {
 public:
  bool Exists(const StoragePath& path) override;
  bool IsDirectory(const StoragePath& path) override;
  std::vector<std::string> ListDir(const StoragePath& path) override;
  std::string ReadFile(const StoragePath& path) override;
  PutOutcome PutIfAbsent(const StoragePath& path, std::string_view bytes) override;
  bool WriteReplaceAtomic(const StoragePath& path, std::string_view bytes) override;
  void Append(const StoragePath& path, std::string_view bytes) override;
  IoTracker& tracker() override { return tracker_; }

 private:
  IoTracker tracker_;
};

/// Temporary sibling used by atomic publication; readers ignore these names.
std::string TempNameFor(std::string_view name);
bool IsTempName(std::string_view name);

enum class FaultMode {
  /// The k-th write fails before touching storage.
  kFailBefore,
  /// The k-th write leaves an orphaned temp file, as a crash between the temp
  /// write and the rename would.
  kTornWrite,
};

struct FaultPlan {
  /// 1-based index of the write operation to fail; 0 disables injection.
  uint64_t fail_at = 0;
  FaultMode mode = FaultMode::kFailBefore;
};

/// Decorator that counts write operations (PutIfAbsent, WriteReplaceAtomic,
/// Append) and fails the one selected by the plan with kIoFailure. Every later
/// write fails too, as after a process crash.
class FaultInjectingStorage final : public Storage {
 public:
  FaultInjectingStorage(Storage& inner, FaultPlan plan) : inner_(inner), plan_(plan) {}

  bool Exists(const StoragePath& path) override { return inner_.Exists(path); }
  bool IsDirectory(const StoragePath& path) override { return inner_.IsDirectory(path); }
  std::vector<std::string> ListDir(const StoragePath& path) override {
    return inner_.ListDir(path);
  }
  std::string ReadFile(const StoragePath& path) override { return inner_.ReadFile(path); }
  PutOutcome PutIfAbsent(const StoragePath& path, std::string_view bytes) override;
  bool WriteReplaceAtomic(const StoragePath& path, std::string_view bytes) override;
  void Append(const StoragePath& path, std::string_view bytes) override;
  IoTracker& tracker() override { return inner_.tracker(); }

  uint64_t writes_seen() const { return writes_.load(); }
  bool fired() const { return fired_.load(); }

 private:
  void MaybeFail(const StoragePath& path, std::string_view bytes, bool atomic);

  Storage& inner_;
  FaultPlan plan_;
  std::atomic<uint64_t> writes_{0};
  std::atomic<bool> fired_{false};
};

}  // namespace xtable
