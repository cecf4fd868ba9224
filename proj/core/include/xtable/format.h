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

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "xtable/model.h"
#include "xtable/storage.h"

namespace xtable {

/// Source of random identifiers (uuids, Iceberg snapshot ids, Hudi file ids).
/// Seeded instances make every generated id reproducible.
class IdSource {
 public:
  /// Entropy-backed.
  IdSource();
  explicit IdSource(uint64_t seed);

  uint64_t Next();
  std::string Uuid();
  bool seeded() const { return seeded_; }
  uint64_t seed() const { return seed_; }

 private:
  std::mutex mu_;
  std::mt19937_64 rng_;
  bool seeded_;
  uint64_t seed_;
};

/// One entry of a table's commit history, as shown by `inspect`. The creation
/// of the table is the first entry in every format.
struct CommitSummary {
  std::string token;
  int64_t timestamp_ms = 0;
  std::string operation;
  std::optional<std::string> source_tag;
};

struct WriteOutcome {
  std::string token;
  /// Files newly created under the metadata directory.
  int files_written = 0;
};

/// Reader and writer of one table format. Implementations are stateless apart
/// from a per-instance cache of parsed immutable metadata documents, so an
/// instance should live no longer than one sync run.
class TableFormat {
 public:
  virtual ~TableFormat() = default;

  virtual Format format() const = 0;
  /// True if the root metadata of this format exists under base.
  virtual bool Exists(const StoragePath& base) = 0;

  /// Table state as of the given token (latest when absent). The creation
  /// token yields the initial schema with no live files.
  virtual InternalSnapshot ReadSnapshot(const StoragePath& base,
                                        const std::optional<std::string>& as_of) = 0;
  /// Token of the commit that created the table.
  virtual std::string CreationToken() const = 0;
  virtual std::string LatestToken(const StoragePath& base) = 0;

  /// One change per commit after `after_token` (creation token or empty for
  /// everything). `baseline` is the schema in effect at after_token when the
  /// caller knows it; readers that would otherwise scan history use it.
  virtual std::vector<TableChange> ReadChangesSince(
      const StoragePath& base, const std::string& after_token,
      const InternalSchema* baseline = nullptr) = 0;

  virtual std::vector<CommitSummary> ReadHistory(const StoragePath& base) = 0;
  /// Target token -> source tag, for every commit that carries one.
  virtual std::map<std::string, std::string> ReadSourceTags(const StoragePath& base);

  /// Creates the table from the schema, partition spec and name of `table`;
  /// its live files are ignored. Throws kTableExists.
  virtual WriteOutcome Init(const StoragePath& base, const InternalSnapshot& table) = 0;
  /// Publishes exactly one commit. An empty source_tag writes a native commit.
  virtual WriteOutcome WriteChange(const StoragePath& base, const TableChange& change,
                                   const std::string& source_tag) = 0;
};

std::unique_ptr<TableFormat> MakeFormat(Format format, Storage& storage, IdSource& ids);

/// Operation label shared by the writers. A change that removes files and adds
/// back no more records than it removed is a delete.
enum class ChangeKind { kAppend, kDelete, kOverwrite, kEmpty };
ChangeKind ClassifyChange(const FileSet& live_before, const TableChange& change);

}  // namespace xtable
