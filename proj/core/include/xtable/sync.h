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
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "xtable/error.h"
#include "xtable/format.h"
#include "xtable/model.h"
#include "xtable/storage.h"

namespace xtable {

struct DatasetConfig {
  StoragePath table_base_path;
  std::optional<std::string> table_name;
};

struct SyncConfig {
  Format source_format = Format::kHudi;
  std::vector<Format> target_formats;
  std::vector<DatasetConfig> datasets;
};

/// Human-readable problems; empty when the config is usable.
std::vector<std::string> ValidateConfig(const SyncConfig& config);

struct SyncState {
  Format source_format = Format::kDelta;
  Format target_format = Format::kIceberg;
  /// Empty when nothing has been translated yet.
  std::string last_translated_source_commit;
  /// Source token -> target token. JSON keys sort bytewise, not by commit order.
  std::map<std::string, std::string> commit_map;
  int state_version = 1;

  bool operator==(const SyncState&) const = default;
};

enum class SyncMode { kFullSnapshot, kIncremental };
enum class PlanReason { kNoState, kStateStaleSourceUnavailable, kBacklogAvailable, kEmpty };

std::string_view SyncModeName(SyncMode mode);
std::string_view PlanReasonName(PlanReason reason);

struct SyncPlan {
  SyncMode mode = SyncMode::kIncremental;
  PlanReason reason = PlanReason::kEmpty;
  /// INCREMENTAL work items, oldest first.
  std::vector<TableChange> backlog;
  /// FULL_SNAPSHOT work item.
  std::optional<InternalSnapshot> snapshot;
  /// Creation-time table used to initialize a missing target before replay.
  std::optional<InternalSnapshot> init_table;
  /// Latest source token at planning time.
  std::string source_latest;

  bool empty() const { return reason == PlanReason::kEmpty; }
};

enum class Phase { kDetect, kPlan, kTranslate, kPublish, kStateSave };
std::string_view PhaseName(Phase phase);

struct TelemetryCounters {
  uint64_t commits_translated = 0;
  uint64_t metadata_files_written = 0;
  uint64_t metadata_bytes_read = 0;
  uint64_t data_bytes_read = 0;
};

struct TelemetryEvent {
  int64_t timestamp_ms = 0;
  std::string table;
  Format source_format = Format::kDelta;
  std::optional<Format> target_format;
  Phase phase = Phase::kDetect;
  int64_t duration_ms = 0;
  TelemetryCounters counters;
  std::string message;
};

std::string EventToJson(const TelemetryEvent& event);

/// Append-only `<base>/_xtable/events.jsonl`, optionally mirrored to stderr.
/// Failures to append are reported on stderr and otherwise ignored: the event
/// log never decides the outcome of a sync.
class EventLog {
 public:
  EventLog(Storage& storage, StoragePath base, bool mirror_to_stderr);

  void Emit(const TelemetryEvent& event);
  const std::vector<TelemetryEvent>& events() const { return events_; }

  static StoragePath PathFor(const StoragePath& base);

 private:
  Storage& storage_;
  StoragePath base_;
  bool mirror_;
  std::vector<TelemetryEvent> events_;
};

StoragePath StatePath(const StoragePath& base, Format source, Format target);
std::string StateToJson(const SyncState& state);
/// Absent or unparseable state yields nullopt; the latter also emits a warning
/// event when `log` is given.
std::optional<SyncState> LoadState(Storage& storage, const StoragePath& base, Format source,
                                   Format target, EventLog* log = nullptr);
/// Returns true if the state file did not exist before. Throws kStateIoFailure.
bool SaveState(Storage& storage, const StoragePath& base, const SyncState& state);

/// Formats whose root metadata exists under base. Empty means NONE.
std::set<Format> DetectFormats(Storage& storage, const StoragePath& base);

enum class CommitOutcome { kTranslated, kSkippedAlreadyPresent };

struct CommitResult {
  std::string source_token;
  std::string target_token;
  CommitOutcome outcome = CommitOutcome::kTranslated;
};

struct SyncReport {
  std::string table;
  StoragePath base;
  Format source_format = Format::kDelta;
  Format target_format = Format::kIceberg;
  std::optional<SyncMode> mode;
  std::optional<PlanReason> reason;
  std::vector<CommitResult> commits;
  std::vector<TelemetryEvent> events;
  std::optional<ErrorCode> error_code;
  std::string error;

  bool ok() const { return !error_code.has_value(); }
  int translated() const;
  int skipped() const;
};

struct SyncOptions {
  bool mirror_events_to_stderr = false;
  /// Datasets processed concurrently; targets of one dataset always run in order.
  int workers = 1;
  /// Seeded ids for reproducible output; entropy when null.
  IdSource* ids = nullptr;
};

/// All the collaborators one (table, target) sync needs.
struct SyncJob {
  Storage& storage;
  StoragePath base;
  std::string table_name;
  TableFormat& source;
  TableFormat& target;
  EventLog& log;
};

SyncPlan PlanSync(SyncJob& job, const std::optional<SyncState>& state,
                  std::optional<SyncMode> mode_override = std::nullopt);

/// Runs a plan, persisting state after every published commit. Errors are
/// captured in the report rather than thrown.
SyncReport ExecutePlan(SyncJob& job, const SyncPlan& plan, std::optional<SyncState> state);

/// Detect, plan and execute for every dataset and target. A failing dataset
/// never aborts the others. Throws kConfigInvalid for a malformed config.
std::vector<SyncReport> RunSync(Storage& storage, const SyncConfig& config,
                                std::optional<SyncMode> mode_override = std::nullopt,
                                const SyncOptions& options = {});

}  // namespace xtable
