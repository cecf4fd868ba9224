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
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "xtable/values.h"

namespace xtable {

enum class Format { kDelta, kIceberg, kHudi };

inline constexpr Format kAllFormats[] = {Format::kDelta, Format::kIceberg, Format::kHudi};

std::string_view FormatName(Format format);
/// Case-insensitive.
std::optional<Format> FormatFromName(std::string_view name);

struct InternalField {
  int32_t field_id = 0;
  std::string name;
  FieldType type = FieldType::kString;
  bool nullable = true;

  bool operator==(const InternalField&) const = default;
};

struct InternalSchema {
  int32_t schema_id = 0;
  std::vector<InternalField> fields;

  const InternalField* FindByName(std::string_view name) const;
  const InternalField* FindById(int32_t id) const;
  int32_t MaxFieldId() const;

  /// Same fields (id/name/type/nullable, in order); schema_id is ignored.
  bool SameFields(const InternalSchema& other) const { return fields == other.fields; }
  bool operator==(const InternalSchema&) const = default;
};

enum class PartitionTransform { kIdentity };

struct InternalPartitionField {
  int32_t source_field_id = 0;
  PartitionTransform transform = PartitionTransform::kIdentity;

  bool operator==(const InternalPartitionField&) const = default;
};

using PartitionSpec = std::vector<InternalPartitionField>;

std::vector<std::string> PartitionColumnNames(const InternalSchema& schema,
                                              const PartitionSpec& spec);

struct ColumnStat {
  int32_t field_id = 0;
  std::string min;
  std::string max;
  int64_t null_count = 0;

  bool operator==(const ColumnStat&) const = default;
};

struct InternalDataFile {
  std::string rel_path;
  std::map<std::string, std::string> partition_values;
  int64_t record_count = 0;
  int64_t file_size_bytes = 0;
  std::optional<std::vector<ColumnStat>> column_stats;

  bool operator==(const InternalDataFile&) const = default;
};

/// Live and added file sets, keyed by rel_path (the identity of a data file).
using FileSet = std::map<std::string, InternalDataFile>;

void InsertFile(FileSet& files, InternalDataFile file);

/// Ordered commit identifier. Delta tokens are decimal versions, Iceberg
/// tokens decimal snapshot ordinals, Hudi tokens 17-digit instants.
struct FormatCommitId {
  Format format = Format::kDelta;
  std::string token;

  /// `<FORMAT>:<token>`, the string stored in target commits.
  std::string Tag() const;
  static std::optional<FormatCommitId> FromTag(std::string_view tag);

  bool operator==(const FormatCommitId&) const = default;
};

/// Orders tokens of one format. Decimal tokens are compared after zero
/// padding to 20 digits; Hudi instants compare as-is.
int CompareTokens(Format format, std::string_view a, std::string_view b);
std::string PaddedToken(Format format, std::string_view token);

struct TableChange {
  FormatCommitId source_commit;
  int64_t timestamp_ms = 0;
  FileSet files_added;
  std::set<std::string> files_removed;
  InternalSchema schema;
};

struct InternalSnapshot {
  FormatCommitId source_commit;
  int64_t timestamp_ms = 0;
  InternalSchema schema;
  PartitionSpec partition_spec;
  FileSet live_files;
  std::string table_name;
};

/// (live \ removed) ∪ added. Throws kRemovedNotLive or kDuplicateAdd.
FileSet ApplyChange(const FileSet& live, const TableChange& change);
void ApplyChangeInPlace(FileSet& live, const TableChange& change);

/// The minimal change turning current into desired. Identity is rel_path, so a
/// path present on both sides is left alone.
TableChange DiffFilesets(const FileSet& current, const FileSet& desired);

struct Violation {
  std::string subject;
  std::string message;
};

std::vector<Violation> ValidateRelPath(std::string_view rel_path);
std::vector<Violation> ValidateSchema(const InternalSchema& schema);
std::vector<Violation> ValidateSnapshot(const InternalSnapshot& snapshot);
/// Append-only evolution: every old field survives with the same id, name,
/// type and nullability, new ids exceed every old id and schema_id grows.
std::vector<Violation> ValidateSchemaEvolution(const InternalSchema& before,
                                               const InternalSchema& after);

/// Empty iff the two snapshots are equal for conformance purposes: schema
/// fields, partition column names, and the (rel_path, record_count) set.
/// Column stats are compared only where both sides carry them.
std::vector<std::string> SnapshotDifferences(const InternalSnapshot& expected,
                                             const InternalSnapshot& actual);

/// Partition path `<col>=<value>/...` in spec order; empty when unpartitioned.
std::string PartitionPath(const std::vector<std::string>& columns,
                          const std::map<std::string, std::string>& values);

}  // namespace xtable
