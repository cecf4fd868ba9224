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

#include "xtable/sync.h"

#include <atomic>
#include <chrono>
#include <iostream>
#include <thread>

#include "json_util.h"

namespace xtable {

using internal::Canonical;
using internal::Json;

namespace {

int64_t NowMs() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  int64_t ElapsedMs() const {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() -
                                                                 start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

bool IsStaleSourceError(ErrorCode code) {
  return code == ErrorCode::kSnapshotExpired || code == ErrorCode::kInstantNotFound ||
         code == ErrorCode::kVersionAhead;
}

}  // namespace

std::string_view SyncModeName(SyncMode mode) {
  switch (mode) {
    case SyncMode::kFullSnapshot: return "FULL_SNAPSHOT";
    case SyncMode::kIncremental: return "INCREMENTAL";
  }
  return "?";
}

std::string_view PlanReasonName(PlanReason reason) {
  switch (reason) {
    case PlanReason::kNoState: return "NO_STATE";
    case PlanReason::kStateStaleSourceUnavailable: return "STATE_STALE_SOURCE_UNAVAILABLE";
    case PlanReason::kBacklogAvailable: return "BACKLOG_AVAILABLE";
    case PlanReason::kEmpty: return "EMPTY";
  }
  return "?";
}

std::string_view PhaseName(Phase phase) {
  switch (phase) {
    case Phase::kDetect: return "DETECT";
    case Phase::kPlan: return "PLAN";
    case Phase::kTranslate: return "TRANSLATE";
    case Phase::kPublish: return "PUBLISH";
    case Phase::kStateSave: return "STATE_SAVE";
  }
  return "?";
}

std::vector<std::string> ValidateConfig(const SyncConfig& config) {
  std::vector<std::string> problems;
  if (config.target_formats.empty()) problems.push_back("targetFormats: must not be empty");
  std::set<Format> seen;
  for (Format f : config.target_formats) {
    if (f == config.source_format) {
      problems.push_back("targetFormats: " + std::string(FormatName(f)) +
                         " is also the source format");
    }
    if (!seen.insert(f).second) {
      problems.push_back("targetFormats: " + std::string(FormatName(f)) + " listed twice");
    }
  }
  std::set<StoragePath> paths;
  for (size_t i = 0; i < config.datasets.size(); ++i) {
    const auto& d = config.datasets[i];
    if (!paths.insert(d.table_base_path).second) {
      problems.push_back("datasets[" + std::to_string(i) + "].tableBasePath: duplicate path " +
                         d.table_base_path.ToString());
    }
    if (d.table_name && d.table_name->empty()) {
      problems.push_back("datasets[" + std::to_string(i) + "].tableName: must not be empty");
    }
  }
  return problems;
}

std::string EventToJson(const TelemetryEvent& event) {
  Json j = {{"counters",
             {{"commits_translated", event.counters.commits_translated},
              {"data_bytes_read", event.counters.data_bytes_read},
              {"metadata_bytes_read", event.counters.metadata_bytes_read},
              {"metadata_files_written", event.counters.metadata_files_written}}},
            {"duration_ms", event.duration_ms},
            {"message", event.message},
            {"phase", std::string(PhaseName(event.phase))},
            {"source_format", std::string(FormatName(event.source_format))},
            {"table", event.table},
            {"timestamp_ms", event.timestamp_ms}};
  j["target_format"] =
      event.target_format ? Json(std::string(FormatName(*event.target_format))) : Json(nullptr);
  return Canonical(j);
}

EventLog::EventLog(Storage& storage, StoragePath base, bool mirror_to_stderr)
    : storage_(storage), base_(std::move(base)), mirror_(mirror_to_stderr) {}

StoragePath EventLog::PathFor(const StoragePath& base) {
  return base.Join("_xtable/events.jsonl");
}

void EventLog::Emit(const TelemetryEvent& event) {
  if (event.counters.data_bytes_read != 0) {
    Fail(ErrorCode::kDataReadViolation,
         "translator read " + std::to_string(event.counters.data_bytes_read) +
             " data bytes under " + base_.ToString());
  }
  events_.push_back(event);
  const std::string line = EventToJson(event);
  if (mirror_) std::cerr << line << "\n";
  try {
    storage_.Append(PathFor(base_), line + "\n");
  } catch (const std::exception& e) {
    std::cerr << "warning: could not append telemetry event: " << e.what() << "\n";
  }
}

StoragePath StatePath(const StoragePath& base, Format source, Format target) {
  return base.Join("_xtable/state-" + std::string(FormatName(source)) + "-to-" +
                   std::string(FormatName(target)) + ".json");
}

std::string StateToJson(const SyncState& state) {
  Json map = Json::object();
  for (const auto& [k, v] : state.commit_map) map[k] = v;
  return Canonical(Json{{"commit_map", map},
                        {"last_translated_source_commit", state.last_translated_source_commit},
                        {"source_format", std::string(FormatName(state.source_format))},
                        {"state_version", state.state_version},
                        {"target_format", std::string(FormatName(state.target_format))}});
}

std::optional<SyncState> LoadState(Storage& storage, const StoragePath& base, Format source,
                                   Format target, EventLog* log) {
  const StoragePath path = StatePath(base, source, target);
  auto warn = [&](const std::string& why) -> std::optional<SyncState> {
    if (log != nullptr) {
      TelemetryEvent e;
      e.timestamp_ms = NowMs();
      e.table = base.ToString();
      e.source_format = source;
      e.target_format = target;
      e.phase = Phase::kPlan;
      e.message = "ignoring state file " + path.ToString() + ": " + why;
      log->Emit(e);
    }
    return std::nullopt;
  };
  std::string text;
  try {
    if (!storage.Exists(path)) return std::nullopt;
    text = storage.ReadFile(path);
  } catch (const Error& e) {
    return warn(e.what());
  }
  try {
    const Json j = Json::parse(text);
    SyncState state;
    const auto src = FormatFromName(j.at("source_format").get<std::string>());
    const auto tgt = FormatFromName(j.at("target_format").get<std::string>());
    if (!src || !tgt || *src != source || *tgt != target) return warn("format mismatch");
    state.source_format = *src;
    state.target_format = *tgt;
    state.last_translated_source_commit = j.at("last_translated_source_commit").get<std::string>();
    state.commit_map = j.at("commit_map").get<std::map<std::string, std::string>>();
    state.state_version = j.at("state_version").get<int>();
    if (state.state_version != 1) return warn("unsupported state_version");
    if (!state.last_translated_source_commit.empty() &&
        state.commit_map.count(state.last_translated_source_commit) == 0) {
      return warn("last translated commit missing from commit_map");
    }
    return state;
  } catch (const nlohmann::json::exception& e) {
    return warn(e.what());
  }
}

bool SaveState(Storage& storage, const StoragePath& base, const SyncState& state) {
  try {
    return storage.WriteReplaceAtomic(StatePath(base, state.source_format, state.target_format),
                                      StateToJson(state));
  } catch (const Error& e) {
    Fail(ErrorCode::kStateIoFailure, e.what());
  }
}

std::set<Format> DetectFormats(Storage& storage, const StoragePath& base) {
  std::set<Format> out;
  if (storage.IsDirectory(base.Join("_delta_log"))) out.insert(Format::kDelta);
  if (storage.Exists(base.Join("metadata/version-hint.text"))) out.insert(Format::kIceberg);
  if (storage.Exists(base.Join(".hoodie/hoodie.properties"))) out.insert(Format::kHudi);
  return out;
}

int SyncReport::translated() const {
  int n = 0;
  for (const auto& c : commits) n += c.outcome == CommitOutcome::kTranslated;
  return n;
}

int SyncReport::skipped() const {
  int n = 0;
  for (const auto& c : commits) n += c.outcome == CommitOutcome::kSkippedAlreadyPresent;
  return n;
}

namespace {

// Source errors other than the staleness signals are reported as unreadable.
template <typename F>
auto ReadSource(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (IsStaleSourceError(e.code())) throw;
    Fail(ErrorCode::kSourceUnreadable, e.what());
  }
}

SyncPlan FullPlan(SyncJob& job, PlanReason reason, const std::string& latest) {
  SyncPlan plan;
  plan.mode = SyncMode::kFullSnapshot;
  plan.reason = reason;
  plan.source_latest = latest;
  plan.snapshot = ReadSource([&] { return job.source.ReadSnapshot(job.base, latest); });
  return plan;
}

}  // namespace

SyncPlan PlanSync(SyncJob& job, const std::optional<SyncState>& state_in,
                  std::optional<SyncMode> mode_override) {
  const std::string latest = ReadSource([&] { return job.source.LatestToken(job.base); });
  const bool target_exists = job.target.Exists(job.base);
  const std::optional<SyncState> state = target_exists ? state_in : std::nullopt;

  if (mode_override == SyncMode::kFullSnapshot) {
    return FullPlan(job, state ? PlanReason::kBacklogAvailable : PlanReason::kNoState, latest);
  }
  if (!state && mode_override != SyncMode::kIncremental) {
    return FullPlan(job, PlanReason::kNoState, latest);
  }

  SyncPlan plan;
  plan.mode = SyncMode::kIncremental;
  plan.source_latest = latest;
  if (state && state->last_translated_source_commit == latest) {
    plan.reason = PlanReason::kEmpty;
    return plan;
  }
  try {
    if (!state) {
      // Replay everything; missing targets are created from the table as created.
      plan.reason = PlanReason::kNoState;
      if (!target_exists) {
        plan.init_table = ReadSource(
            [&] { return job.source.ReadSnapshot(job.base, job.source.CreationToken()); });
      }
      plan.backlog = ReadSource([&] { return job.source.ReadChangesSince(job.base, "", nullptr); });
    } else {
      plan.reason = PlanReason::kBacklogAvailable;
      const InternalSnapshot current = job.target.ReadSnapshot(job.base, std::nullopt);
      plan.backlog = ReadSource([&] {
        return job.source.ReadChangesSince(job.base, state->last_translated_source_commit,
                                           &current.schema);
      });
    }
  } catch (const Error& e) {
    if (!IsStaleSourceError(e.code())) throw;
    return FullPlan(job, PlanReason::kStateStaleSourceUnavailable, latest);
  }
  if (plan.backlog.empty() && !plan.init_table) {
    plan.reason = PlanReason::kEmpty;
    plan.backlog.clear();
  }
  return plan;
}

namespace {

class Executor {
 public:
  Executor(SyncJob& job, std::optional<SyncState> state, SyncReport& report)
      : job_(job), state_(std::move(state)), report_(report) {
    if (!state_) {
      state_.emplace();
      state_->source_format = job.source.format();
      state_->target_format = job.target.format();
    }
    before_ = job.storage.stats();
  }

  void Init(InternalSnapshot table) {
    if (job_.target.Exists(job_.base)) return;
    table.table_name = job_.table_name;
    Stopwatch sw;
    const WriteOutcome out = job_.target.Init(job_.base, table);
    Emit(Phase::kPublish, sw.ElapsedMs(), 0, out.files_written,
         "initialized " + std::string(FormatName(job_.target.format())) + " table");
  }

  void LoadTags() {
    std::string anchor;
    if (state_ && !state_->last_translated_source_commit.empty()) {
      anchor = state_->commit_map[state_->last_translated_source_commit];
    }
    tags_.clear();
    for (const auto& [token, tag] : job_.target.ReadSourceTags(job_.base)) {
      if (!anchor.empty() && CompareTokens(job_.target.format(), token, anchor) <= 0) continue;
      tags_[tag] = token;
    }
  }

  void Incremental(const std::vector<TableChange>& backlog) {
    LoadTags();
    for (const auto& change : backlog) {
      const std::string tag = change.source_commit.Tag();
      auto present = tags_.find(tag);
      if (present != tags_.end()) {
        Record(change.source_commit.token, present->second, CommitOutcome::kSkippedAlreadyPresent);
        continue;
      }
      Stopwatch sw;
      const WriteOutcome out = Publish(change, tag);
      tags_[tag] = out.token;
      Emit(Phase::kPublish, sw.ElapsedMs(), 1, out.files_written,
           "published " + tag + " as " + out.token);
      Record(change.source_commit.token, out.token, CommitOutcome::kTranslated);
    }
  }

  void Full(const InternalSnapshot& desired) {
    Stopwatch sw;
    const InternalSnapshot current = job_.target.ReadSnapshot(job_.base, std::nullopt);
    TableChange change = DiffFilesets(current.live_files, desired.live_files);
    change.source_commit = desired.source_commit;
    change.timestamp_ms = desired.timestamp_ms;
    change.schema = desired.schema;
    Emit(Phase::kTranslate, sw.ElapsedMs(), 0, 0,
         "full snapshot diff: +" + std::to_string(change.files_added.size()) + " -" +
             std::to_string(change.files_removed.size()));
    state_->commit_map.clear();
    const bool no_op = change.files_added.empty() && change.files_removed.empty() &&
                       desired.schema.SameFields(current.schema);
    if (no_op) {
      Record(desired.source_commit.token, job_.target.LatestToken(job_.base),
             CommitOutcome::kSkippedAlreadyPresent);
      return;
    }
    Stopwatch publish;
    const std::string tag = desired.source_commit.Tag();
    const WriteOutcome out = Publish(change, tag);
    Emit(Phase::kPublish, publish.ElapsedMs(), 1, out.files_written,
         "published " + tag + " as " + out.token);
    Record(desired.source_commit.token, out.token, CommitOutcome::kTranslated);
  }

  void Emit(Phase phase, int64_t duration, uint64_t commits, uint64_t files,
            const std::string& message) {
    const StorageStats now = job_.storage.stats();
    const std::string& root = job_.base.path;
    TelemetryEvent e;
    e.timestamp_ms = NowMs();
    e.table = job_.table_name;
    e.source_format = job_.source.format();
    e.target_format = job_.target.format();
    e.phase = phase;
    e.duration_ms = duration;
    e.counters.commits_translated = commits;
    e.counters.metadata_files_written = files;
    e.counters.metadata_bytes_read =
        now.Reads(PrefixClass::kMetadata, root).bytes - before_.Reads(PrefixClass::kMetadata, root).bytes;
    e.counters.data_bytes_read =
        now.Reads(PrefixClass::kData, root).bytes - before_.Reads(PrefixClass::kData, root).bytes;
    e.message = message;
    before_ = now;
    report_.events.push_back(e);
    job_.log.Emit(e);
  }

 private:
  WriteOutcome Publish(const TableChange& change, const std::string& tag) {
    try {
      return job_.target.WriteChange(job_.base, change, tag);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConcurrentCommit) throw;
    }
    // One re-plan: another writer may have published this very commit.
    LoadTags();
    auto present = tags_.find(tag);
    if (present != tags_.end()) return {present->second, 0};
    try {
      return job_.target.WriteChange(job_.base, change, tag);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::kConcurrentCommit) throw;
      Fail(ErrorCode::kPublishConflict, e.what());
    }
  }

  void Record(const std::string& source_token, const std::string& target_token,
              CommitOutcome outcome) {
    report_.commits.push_back({source_token, target_token, outcome});
    state_->last_translated_source_commit = source_token;
    state_->commit_map[source_token] = target_token;
    Stopwatch sw;
    const bool created = SaveState(job_.storage, job_.base, *state_);
    Emit(Phase::kStateSave, sw.ElapsedMs(), 0, created ? 1 : 0,
         "state at " + std::string(FormatName(job_.source.format())) + ":" + source_token);
  }

  SyncJob& job_;
  std::optional<SyncState> state_;
  SyncReport& report_;
  StorageStats before_;
  std::map<std::string, std::string> tags_;  // tag -> target token
};

}  // namespace

SyncReport ExecutePlan(SyncJob& job, const SyncPlan& plan, std::optional<SyncState> state) {
  SyncReport report;
  report.table = job.table_name;
  report.base = job.base;
  report.source_format = job.source.format();
  report.target_format = job.target.format();
  report.mode = plan.mode;
  report.reason = plan.reason;
  if (plan.empty()) return report;
  try {
    Executor exec(job, std::move(state), report);
    if (plan.mode == SyncMode::kFullSnapshot) {
      exec.Init(*plan.snapshot);
      exec.Full(*plan.snapshot);
    } else {
      if (plan.init_table) exec.Init(*plan.init_table);
      exec.Incremental(plan.backlog);
    }
  } catch (const Error& e) {
    report.error_code = e.code();
    report.error = e.what();
  } catch (const std::exception& e) {
    report.error_code = ErrorCode::kIoFailure;
    report.error = e.what();
  }
  return report;
}

namespace {

void SyncDataset(Storage& storage, const SyncConfig& config, const DatasetConfig& dataset,
                 std::optional<SyncMode> mode_override, const SyncOptions& options, IdSource& ids,
                 std::vector<SyncReport>& out) {
  const StoragePath& base = dataset.table_base_path;
  EventLog log(storage, base, options.mirror_events_to_stderr);
  auto source = MakeFormat(config.source_format, storage, ids);
  std::string table_name = dataset.table_name.value_or("");

  auto failed = [&](Format target, const Error& e) {
    SyncReport r;
    r.table = table_name.empty() ? base.Name() : table_name;
    r.base = base;
    r.source_format = config.source_format;
    r.target_format = target;
    r.error_code = e.code();
    r.error = e.what();
    return r;
  };

  Stopwatch detect_sw;
  std::set<Format> formats;
  try {
    formats = DetectFormats(storage, base);
    if (formats.count(config.source_format) == 0) {
      Fail(ErrorCode::kSourceUnreadable, "no " + std::string(FormatName(config.source_format)) +
                                             " table at " + base.ToString());
    }
    RegisterTablePrefixes(storage, base);
  } catch (const Error& e) {
    for (Format t : config.target_formats) out.push_back(failed(t, e));
    return;
  }

  for (Format target_format : config.target_formats) {
    auto target = MakeFormat(target_format, storage, ids);
    SyncReport report;
    try {
      const StorageStats start = storage.stats();
      std::string name = table_name;
      SyncJob job{storage, base, name, *source, *target, log};
      {
        TelemetryEvent e;
        e.timestamp_ms = NowMs();
        e.source_format = config.source_format;
        e.target_format = target_format;
        e.phase = Phase::kDetect;
        e.duration_ms = detect_sw.ElapsedMs();
        std::string found;
        for (Format f : formats) found += (found.empty() ? "" : ",") + std::string(FormatName(f));
        e.message = "formats present: " + found;
        e.table = name.empty() ? base.Name() : name;
        log.Emit(e);
        report.events.push_back(e);
      }
      Stopwatch plan_sw;
      const auto state = LoadState(storage, base, config.source_format, target_format, &log);
      SyncPlan plan = PlanSync(job, state, mode_override);
      if (name.empty()) {
        if (plan.snapshot) name = plan.snapshot->table_name;
        if (plan.init_table) name = plan.init_table->table_name;
        if (name.empty()) name = base.Name();
        job.table_name = name;
      }
      const StorageStats planned = storage.stats();
      {
        TelemetryEvent e;
        e.timestamp_ms = NowMs();
        e.table = name;
        e.source_format = config.source_format;
        e.target_format = target_format;
        e.phase = Phase::kPlan;
        e.duration_ms = plan_sw.ElapsedMs();
        e.counters.metadata_bytes_read =
            planned.Reads(PrefixClass::kMetadata, base.path).bytes -
            start.Reads(PrefixClass::kMetadata, base.path).bytes;
        e.counters.data_bytes_read = planned.Reads(PrefixClass::kData, base.path).bytes -
                                     start.Reads(PrefixClass::kData, base.path).bytes;
        e.message = std::string(SyncModeName(plan.mode)) + " " +
                    std::string(PlanReasonName(plan.reason)) + ", backlog " +
                    std::to_string(plan.mode == SyncMode::kIncremental ? plan.backlog.size() : 1);
        log.Emit(e);
        report.events.push_back(e);
      }
      SyncReport executed = ExecutePlan(job, plan, state);
      executed.events.insert(executed.events.begin(), report.events.begin(), report.events.end());
      report = std::move(executed);
    } catch (const Error& e) {
      SyncReport r = failed(target_format, e);
      r.events = std::move(report.events);
      report = std::move(r);
    }
    out.push_back(std::move(report));
  }
}

}  // namespace

std::vector<SyncReport> RunSync(Storage& storage, const SyncConfig& config,
                                std::optional<SyncMode> mode_override, const SyncOptions& options) {
  const auto problems = ValidateConfig(config);
  if (!problems.empty()) Fail(ErrorCode::kConfigInvalid, problems.front());

  IdSource local_ids;
  IdSource& ids = options.ids != nullptr ? *options.ids : local_ids;
  std::vector<std::vector<SyncReport>> per_dataset(config.datasets.size());
  const size_t workers =
      std::max<size_t>(1, std::min<size_t>(options.workers, config.datasets.size()));
  if (workers <= 1) {
    for (size_t i = 0; i < config.datasets.size(); ++i) {
      SyncDataset(storage, config, config.datasets[i], mode_override, options, ids, per_dataset[i]);
    }
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (size_t i = next++; i < config.datasets.size(); i = next++) {
          SyncDataset(storage, config, config.datasets[i], mode_override, options, ids,
                      per_dataset[i]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  std::vector<SyncReport> out;
  for (auto& reports : per_dataset) {
    for (auto& r : reports) out.push_back(std::move(r));
  }
  return out;
}

}  // namespace xtable
