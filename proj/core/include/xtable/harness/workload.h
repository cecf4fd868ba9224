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
#include <optional>
#include <string>
#include <vector>

#include "xtable/format.h"
#include "xtable/model.h"
#include "xtable/storage.h"

namespace xtable::harness {

/// One row as canonical value strings, aligned with a schema's fields.
using Row = std::vector<std::string>;

struct WorkloadProfile {
  /// Distinct values of the partition column.
  int partitions = 3;
  /// Mean rows per INSERT.
  int rows_per_insert = 6;
  double delete_ratio = 0.25;
  double schema_evolution_ratio = 0.1;
};

enum class OpKind { kCreate, kInsert, kDelete, kAddColumn };

struct WorkloadOp {
  OpKind kind = OpKind::kInsert;
  int op_id = 0;
  // CREATE
  std::string table_name;
  InternalSchema schema;
  std::vector<std::string> partition_columns;
  // INSERT: rows aligned with the schema in effect, split into `fan_out`
  // files per partition.
  std::vector<Row> rows;
  int fan_out = 1;
  // DELETE: column = canonical value (kNullToken matches nulls).
  std::string predicate_column;
  std::string predicate_value;
  // ADD_COLUMN
  InternalField field;
};

/// Deterministic in (seed, n_ops, profile). The first op is the only CREATE.
/// At least one DELETE appears when delete_ratio > 0 and n_ops >= 5.
std::vector<WorkloadOp> GenerateWorkload(uint64_t seed, int n_ops,
                                         const WorkloadProfile& profile = {});

/// CREATE sales(s_id, s_type) PARTITIONED BY (s_type); INSERT (1,a),(2,b),(3,b);
/// DELETE WHERE s_id = 3.
std::vector<WorkloadOp> SalesWorkload();

/// Oracle of the rows a table should hold after each op.
struct LogicalTable {
  InternalSchema schema;
  std::vector<Row> rows;
  /// (op_id, sorted rows) after every committed op.
  std::vector<std::pair<int, std::vector<Row>>> history;
};

struct ApplyOptions {
  /// Commit timestamps are base + op_id * 1000.
  int64_t base_timestamp_ms = 1704110400000;  // 2024-01-01T12:00:00Z
  /// Attach exact per-column stats to every written file.
  bool with_stats = true;
};

struct AppliedWorkload {
  /// Native commit per op, CREATE included.
  std::vector<FormatCommitId> commits;
  LogicalTable table;
  /// Rows of every data file ever written, by rel_path.
  std::map<std::string, std::vector<Row>> files;
};

/// Applies ops one at a time, so syncs can interleave with source commits.
class WorkloadWriter {
 public:
  WorkloadWriter(Storage& storage, TableFormat& format, const StoragePath& base,
                 const ApplyOptions& options = {});
  ~WorkloadWriter();
  WorkloadWriter(const WorkloadWriter&) = delete;
  WorkloadWriter& operator=(const WorkloadWriter&) = delete;

  FormatCommitId Apply(const WorkloadOp& op);
  const AppliedWorkload& result() const;

 private:
  class Applier;
  std::unique_ptr<Applier> impl_;
};

/// Writes data files and one native commit per op through `format`, which
/// must be backed by `storage`.
AppliedWorkload ApplyWorkload(Storage& storage, TableFormat& format, const StoragePath& base,
                              const std::vector<WorkloadOp>& ops, const ApplyOptions& options = {});

struct ScanResult {
  InternalSchema schema;
  /// Sorted; rows of files written under older schemas are padded with nulls.
  std::vector<Row> rows;
  FileSet live_files;
};

/// Resolves live files through `format`, then reads their payloads through
/// `data_storage`. Throws kMissingDataFile.
ScanResult ScanLive(Storage& data_storage, TableFormat& format, const StoragePath& base,
                    const std::optional<std::string>& as_of = std::nullopt);

/// CSV payload with a header row.
std::string EncodeCsv(const std::vector<std::string>& columns, const std::vector<Row>& rows);
void DecodeCsv(const std::string& text, std::vector<std::string>& columns, std::vector<Row>& rows);

/// Exact min/max/null count per column. Columns with only nulls get no entry.
std::vector<ColumnStat> ComputeStats(const InternalSchema& schema, const std::vector<Row>& rows);

/// Recursively copies `from` to `to` on the local file system, skipping the
/// named top-level entries.
void CopyTree(const std::string& from, const std::string& to,
              const std::vector<std::string>& skip_top_level = {});

}  // namespace xtable::harness
