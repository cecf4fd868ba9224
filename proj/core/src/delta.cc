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

#include "xtable/delta.h"

#include <cstdio>
#include <map>
#include <mutex>

#include "json_util.h"

namespace xtable {

using internal::Canonical;
using internal::Get;
using internal::Member;
using internal::Json;

namespace {

constexpr std::string_view kLogDir = "_delta_log";

std::string_view DeltaTypeName(FieldType type) {
  switch (type) {
    case FieldType::kBool: return "boolean";
    case FieldType::kInt32: return "integer";
    case FieldType::kInt64: return "long";
    case FieldType::kFloat64: return "double";
    case FieldType::kString: return "string";
    case FieldType::kDate: return "date";
    case FieldType::kTimestampMicros: return "timestamp";
  }
  return "?";
}

std::optional<FieldType> DeltaTypeFromName(std::string_view name) {
  for (FieldType t : {FieldType::kBool, FieldType::kInt32, FieldType::kInt64,
                      FieldType::kFloat64, FieldType::kString, FieldType::kDate,
                      FieldType::kTimestampMicros}) {
    if (DeltaTypeName(t) == name) return t;
  }
  return std::nullopt;
}

struct MetaData {
  std::string id;
  std::string name;
  std::vector<std::string> partition_columns;
  std::vector<InternalField> fields;
  std::map<std::string, std::string> configuration;
};

// Column stats stay as written (keyed by column name) until the add is folded
// against the schema in effect at its version.
struct AddAction {
  InternalDataFile file;
  Json stats;
};

struct DeltaCommit {
  int64_t version = 0;
  std::optional<MetaData> meta;
  std::vector<AddAction> adds;
  std::vector<std::string> removes;
  int64_t timestamp_ms = 0;
  std::string operation;
  std::optional<std::string> source_tag;
};

std::string SchemaString(const std::vector<InternalField>& fields) {
  Json arr = Json::array();
  for (const auto& f : fields) {
    arr.push_back({{"fieldId", f.field_id},
                   {"metadata", Json::object()},
                   {"name", f.name},
                   {"nullable", f.nullable},
                   {"type", std::string(DeltaTypeName(f.type))}});
  }
  return Canonical(Json{{"fields", arr}, {"type", "struct"}});
}

std::vector<InternalField> ParseSchemaString(const std::string& text, const std::string& where) {
  const Json j = internal::ParseJson(text, ErrorCode::kMalformedAction, where + " schemaString");
  std::vector<InternalField> out;
  for (const auto& f : Member(j, "fields", ErrorCode::kMalformedAction, where)) {
    InternalField field;
    field.field_id = Get<int32_t>(f, "fieldId", ErrorCode::kMalformedAction, where);
    field.name = Get<std::string>(f, "name", ErrorCode::kMalformedAction, where);
    field.nullable = Get<bool>(f, "nullable", ErrorCode::kMalformedAction, where);
    auto type = DeltaTypeFromName(Get<std::string>(f, "type", ErrorCode::kMalformedAction, where));
    if (!type) Fail(ErrorCode::kMalformedAction, where + ": unsupported type for " + field.name);
    field.type = *type;
    out.push_back(std::move(field));
  }
  return out;
}

Json MetaDataToJson(const MetaData& meta) {
  Json config = Json::object();
  for (const auto& [k, v] : meta.configuration) config[k] = v;
  return {{"metaData",
           {{"configuration", config},
            {"format", {{"options", Json::object()}, {"provider", "parquet"}}},
            {"id", meta.id},
            {"name", meta.name},
            {"partitionColumns", meta.partition_columns},
            {"schemaString", SchemaString(meta.fields)}}}};
}

std::string StatsString(const InternalDataFile& file, const InternalSchema& schema) {
  Json stats = {{"numRecords", file.record_count}};
  if (file.column_stats) {
    Json mins = Json::object(), maxs = Json::object(), nulls = Json::object();
    for (const auto& stat : *file.column_stats) {
      const InternalField* field = schema.FindById(stat.field_id);
      if (field == nullptr) continue;
      mins[field->name] = stat.min;
      maxs[field->name] = stat.max;
      nulls[field->name] = stat.null_count;
    }
    stats["minValues"] = mins;
    stats["maxValues"] = maxs;
    stats["nullCount"] = nulls;
  }
  return Canonical(stats);
}

Json AddToJson(const InternalDataFile& file, const InternalSchema& schema, int64_t ts) {
  return {{"add",
           {{"dataChange", true},
            {"modificationTime", ts},
            {"partitionValues", internal::PartitionValuesToJson(file.partition_values)},
            {"path", file.rel_path},
            {"size", file.file_size_bytes},
            {"stats", StatsString(file, schema)}}}};
}

Json RemoveToJson(const std::string& path, int64_t ts) {
  return {{"remove", {{"dataChange", true}, {"deletionTimestamp", ts}, {"path", path}}}};
}

std::optional<std::vector<ColumnStat>> ResolveStats(const Json& stats,
                                                    const std::vector<InternalField>& fields,
                                                    const std::string& where) {
  if (!stats.contains("minValues")) return std::nullopt;
  std::vector<ColumnStat> out;
  try {
  const Json& mins = stats["minValues"];
  const Json maxs = stats.value("maxValues", Json::object());
  const Json nulls = stats.value("nullCount", Json::object());
  for (const auto& f : fields) {
    if (!mins.contains(f.name)) continue;
    if (!maxs.contains(f.name)) {
      Fail(ErrorCode::kMalformedAction, where + ": minValues without maxValues for " + f.name);
    }
    ColumnStat stat;
    stat.field_id = f.field_id;
    stat.min = mins[f.name].get<std::string>();
    stat.max = maxs[f.name].get<std::string>();
    stat.null_count = nulls.value(f.name, int64_t{0});
    out.push_back(std::move(stat));
  }
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kMalformedAction, where + ": bad stats: " + e.what());
  }
  return out;
}

DeltaCommit ParseCommit(int64_t version, const std::string& text, const std::string& where) {
  DeltaCommit commit;
  commit.version = version;
  int commit_infos = 0, metas = 0;
  size_t line_no = 0, pos = 0;
  while (pos <= text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view line(text.data() + pos, end - pos);
    ++line_no;
    pos = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string at = where + ":" + std::to_string(line_no);
    const Json action = internal::ParseJson(line, ErrorCode::kMalformedAction, at);
    if (!action.is_object() || action.size() != 1) {
      Fail(ErrorCode::kMalformedAction, at + ": expected exactly one action per line");
    }
    const std::string kind = action.begin().key();
    const Json& body = action.begin().value();
    constexpr auto kBad = ErrorCode::kMalformedAction;
    try {
      if (kind == "metaData") {
        ++metas;
        MetaData meta;
        meta.id = Get<std::string>(body, "id", kBad, at);
        meta.name = body.value("name", std::string());
        meta.partition_columns = Get<std::vector<std::string>>(body, "partitionColumns", kBad, at);
        meta.fields = ParseSchemaString(Get<std::string>(body, "schemaString", kBad, at), at);
        if (body.contains("configuration")) {
          meta.configuration = body["configuration"].get<std::map<std::string, std::string>>();
        }
        commit.meta = std::move(meta);
      } else if (kind == "add") {
        AddAction add;
        InternalDataFile& file = add.file;
        file.rel_path = Get<std::string>(body, "path", kBad, at);
        file.partition_values = internal::PartitionValuesFromJson(
            Member(body, "partitionValues", kBad, at));
        file.file_size_bytes = Get<int64_t>(body, "size", kBad, at);
        add.stats = internal::ParseJson(Get<std::string>(body, "stats", kBad, at), kBad,
                                        at + " stats");
        file.record_count = Get<int64_t>(add.stats, "numRecords", kBad, at + " stats");
        commit.adds.push_back(std::move(add));
      } else if (kind == "remove") {
        commit.removes.push_back(Get<std::string>(body, "path", kBad, at));
      } else if (kind == "commitInfo") {
        ++commit_infos;
        commit.timestamp_ms = Get<int64_t>(body, "timestamp", kBad, at);
        commit.operation = body.value("operation", std::string());
        if (body.contains("xtableSourceCommit")) {
          commit.source_tag = body["xtableSourceCommit"].get<std::string>();
        }
      } else {
        Fail(kBad, at + ": unsupported action '" + kind + "'");
      }
    } catch (const nlohmann::json::exception& e) {
      Fail(kBad, at + ": " + e.what());
    }
  }
  if (commit_infos != 1) {
    Fail(ErrorCode::kMalformedAction, where + ": expected exactly one commitInfo, found " +
                                          std::to_string(commit_infos));
  }
  if (metas > 1) Fail(ErrorCode::kMalformedAction, where + ": more than one metaData");
  if (version == 0 && metas != 1) {
    Fail(ErrorCode::kMalformedAction, where + ": version 0 must carry metaData");
  }
  return commit;
}

}  // namespace

struct DeltaFormat::Impl {
  Impl(Storage& s, IdSource& i) : storage(s), ids(i) {}

  Storage& storage;
  IdSource& ids;
  std::mutex mu;
  std::map<std::string, DeltaCommit> commits;  // keyed by version file path

  StoragePath LogDir(const StoragePath& base) const { return base.Join(kLogDir); }

  const DeltaCommit& Load(const StoragePath& base, int64_t version) {
    const StoragePath path = LogDir(base).Join(VersionFileName(version));
    const std::string key = path.ToString();
    {
      std::lock_guard lock(mu);
      auto it = commits.find(key);
      if (it != commits.end()) return it->second;
    }
    DeltaCommit commit = ParseCommit(version, storage.ReadFile(path), key);
    std::lock_guard lock(mu);
    return commits.emplace(key, std::move(commit)).first->second;
  }

  // Our own publications go straight into the cache.
  void Remember(const StoragePath& base, int64_t version, const std::string& text) {
    const std::string key = LogDir(base).Join(VersionFileName(version)).ToString();
    DeltaCommit commit = ParseCommit(version, text, key);
    std::lock_guard lock(mu);
    commits.emplace(key, std::move(commit));
  }
};

DeltaFormat::DeltaFormat(Storage& storage, IdSource& ids)
    : impl_(std::make_unique<Impl>(storage, ids)) {}

DeltaFormat::~DeltaFormat() = default;

std::string DeltaFormat::VersionFileName(int64_t version) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%020lld.json", static_cast<long long>(version));
  return buf;
}

bool DeltaFormat::Exists(const StoragePath& base) {
  return impl_->storage.IsDirectory(impl_->LogDir(base));
}

std::vector<int64_t> DeltaFormat::ListVersions(const StoragePath& base) {
  const StoragePath dir = impl_->LogDir(base);
  if (!impl_->storage.IsDirectory(dir)) {
    Fail(ErrorCode::kNoTable, "no Delta log at " + dir.ToString());
  }
  RegisterTablePrefixes(impl_->storage, base);
  std::vector<int64_t> versions;
  for (const auto& name : impl_->storage.ListDir(dir)) {
    if (name.size() != 25 || name.substr(20) != ".json") continue;
    bool digits = true;
    for (size_t i = 0; i < 20; ++i) digits = digits && name[i] >= '0' && name[i] <= '9';
    if (!digits) continue;
    versions.push_back(std::stoll(name.substr(0, 20)));
  }
  if (versions.empty()) Fail(ErrorCode::kNoTable, "empty Delta log at " + dir.ToString());
  for (size_t i = 0; i < versions.size(); ++i) {
    if (versions[i] != static_cast<int64_t>(i)) {
      Fail(ErrorCode::kGapInLog, "Delta log at " + dir.ToString() + " is missing version " +
                                     std::to_string(i));
    }
  }
  return versions;
}

std::string DeltaFormat::LatestToken(const StoragePath& base) {
  return std::to_string(ListVersions(base).back());
}

namespace {

int64_t ParseVersion(const std::string& token) {
  try {
    size_t used = 0;
    const long long v = std::stoll(token, &used);
    if (used != token.size() || v < 0) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorCode::kInvalidArgument, "not a Delta version: '" + token + "'");
  }
}

PartitionSpec SpecFromColumns(const std::vector<std::string>& columns,
                              const InternalSchema& schema, const std::string& where) {
  PartitionSpec spec;
  for (const auto& col : columns) {
    const InternalField* field = schema.FindByName(col);
    if (field == nullptr) {
      Fail(ErrorCode::kMalformedAction, where + ": partition column " + col + " not in schema");
    }
    spec.push_back({field->field_id, PartitionTransform::kIdentity});
  }
  return spec;
}

}  // namespace

InternalSnapshot DeltaFormat::ReadSnapshot(const StoragePath& base,
                                           const std::optional<std::string>& as_of) {
  const auto versions = ListVersions(base);
  const int64_t last = versions.back();
  const int64_t target = as_of ? ParseVersion(*as_of) : last;
  if (target > last) {
    Fail(ErrorCode::kVersionAhead, "version " + std::to_string(target) + " is beyond latest " +
                                       std::to_string(last));
  }
  InternalSnapshot snap;
  std::vector<std::string> partition_columns;
  int32_t schema_count = 0;
  for (int64_t v = 0; v <= target; ++v) {
    const DeltaCommit& commit = impl_->Load(base, v);
    if (commit.meta) {
      snap.schema.fields = commit.meta->fields;
      snap.schema.schema_id = schema_count++;
      snap.table_name = commit.meta->name;
      partition_columns = commit.meta->partition_columns;
    }
    TableChange change;
    for (const auto& path : commit.removes) change.files_removed.insert(path);
    for (const auto& add : commit.adds) {
      InternalDataFile file = add.file;
      file.column_stats = ResolveStats(add.stats, snap.schema.fields, file.rel_path);
      InsertFile(change.files_added, std::move(file));
    }
    ApplyChangeInPlace(snap.live_files, change);
    snap.timestamp_ms = commit.timestamp_ms;
  }
  snap.partition_spec = SpecFromColumns(partition_columns, snap.schema, base.ToString());
  snap.source_commit = {Format::kDelta, std::to_string(target)};
  return snap;
}

std::vector<TableChange> DeltaFormat::ReadChangesSince(const StoragePath& base,
                                                       const std::string& after_token,
                                                       const InternalSchema* baseline) {
  const auto versions = ListVersions(base);
  const int64_t last = versions.back();
  int64_t start;
  if (after_token.empty()) {
    const DeltaCommit& v0 = impl_->Load(base, 0);
    start = (v0.adds.empty() && v0.removes.empty()) ? 1 : 0;
  } else {
    const int64_t after = ParseVersion(after_token);
    if (after > last) {
      Fail(ErrorCode::kVersionAhead, "sync state names version " + after_token +
                                         " but the log ends at " + std::to_string(last));
    }
    start = after + 1;
  }
  std::vector<TableChange> out;
  if (start > last) return out;

  InternalSchema schema;
  if (baseline != nullptr && start > 0) {
    schema = *baseline;
  } else {
    // Walk back to the metaData in effect just before `start`.
    for (int64_t v = start; v-- > 0;) {
      const DeltaCommit& commit = impl_->Load(base, v);
      if (commit.meta) {
        schema.fields = commit.meta->fields;
        break;
      }
    }
  }
  for (int64_t v = start; v <= last; ++v) {
    const DeltaCommit& commit = impl_->Load(base, v);
    if (commit.meta) {
      schema.fields = commit.meta->fields;
      ++schema.schema_id;
    }
    TableChange change;
    change.source_commit = {Format::kDelta, std::to_string(v)};
    change.timestamp_ms = commit.timestamp_ms;
    for (const auto& path : commit.removes) change.files_removed.insert(path);
    for (const auto& add : commit.adds) {
      InternalDataFile file = add.file;
      file.column_stats = ResolveStats(add.stats, schema.fields, file.rel_path);
      InsertFile(change.files_added, std::move(file));
    }
    change.schema = schema;
    out.push_back(std::move(change));
  }
  return out;
}

std::vector<CommitSummary> DeltaFormat::ReadHistory(const StoragePath& base) {
  std::vector<CommitSummary> out;
  for (int64_t v : ListVersions(base)) {
    const DeltaCommit& commit = impl_->Load(base, v);
    out.push_back({std::to_string(v), commit.timestamp_ms, commit.operation, commit.source_tag});
  }
  return out;
}

WriteOutcome DeltaFormat::Init(const StoragePath& base, const InternalSnapshot& table) {
  const StoragePath dir = impl_->LogDir(base);
  if (impl_->storage.IsDirectory(dir) && !impl_->storage.ListDir(dir).empty()) {
    Fail(ErrorCode::kTableExists, "Delta log already exists at " + dir.ToString());
  }
  RegisterTablePrefixes(impl_->storage, base);
  MetaData meta;
  meta.id = impl_->ids.Uuid();
  meta.name = table.table_name;
  meta.partition_columns = PartitionColumnNames(table.schema, table.partition_spec);
  meta.fields = table.schema.fields;
  const Json info = {{"commitInfo",
                      {{"operation", "CREATE TABLE"}, {"timestamp", table.timestamp_ms}}}};
  const std::string text = Canonical(info) + "\n" + Canonical(MetaDataToJson(meta)) + "\n";
  if (impl_->storage.PutIfAbsent(dir.Join(VersionFileName(0)), text) ==
      PutOutcome::kAlreadyExists) {
    Fail(ErrorCode::kTableExists, "Delta version 0 already exists at " + dir.ToString());
  }
  impl_->Remember(base, 0, text);
  return {"0", 1};
}

WriteOutcome DeltaFormat::WriteChange(const StoragePath& base, const TableChange& change,
                                      const std::string& source_tag) {
  const auto versions = ListVersions(base);
  const int64_t next = versions.back() + 1;
  const InternalSnapshot current = ReadSnapshot(base, std::nullopt);
  try {
    (void)ApplyChange(current.live_files, change);
  } catch (const Error& e) {
    Fail(ErrorCode::kInvalidChange, e.what());
  }

  InternalSchema schema = current.schema;
  std::optional<MetaData> new_meta;
  if (!change.schema.fields.empty() && !change.schema.SameFields(current.schema)) {
    InternalSchema proposed = change.schema;
    proposed.schema_id = current.schema.schema_id + 1;
    const auto problems = ValidateSchemaEvolution(current.schema, proposed);
    if (!problems.empty()) {
      Fail(ErrorCode::kInvalidChange, "schema change is not an append-only evolution: " +
                                          problems.front().subject + " " +
                                          problems.front().message);
    }
    const DeltaCommit& v0 = impl_->Load(base, 0);
    MetaData meta;
    meta.id = v0.meta->id;
    meta.name = current.table_name;
    meta.partition_columns = PartitionColumnNames(current.schema, current.partition_spec);
    meta.fields = proposed.fields;
    new_meta = std::move(meta);
    schema = proposed;
  }

  std::string operation;
  switch (ClassifyChange(current.live_files, change)) {
    case ChangeKind::kAppend:
    case ChangeKind::kEmpty: operation = "WRITE"; break;
    case ChangeKind::kDelete: operation = "DELETE"; break;
    case ChangeKind::kOverwrite: operation = "REPLACE"; break;
  }
  Json info = {{"operation", operation}, {"timestamp", change.timestamp_ms}};
  if (!source_tag.empty()) info["xtableSourceCommit"] = source_tag;

  std::string text = Canonical(Json{{"commitInfo", info}}) + "\n";
  if (new_meta) text += Canonical(MetaDataToJson(*new_meta)) + "\n";
  for (const auto& path : change.files_removed) {
    text += Canonical(RemoveToJson(path, change.timestamp_ms)) + "\n";
  }
  for (const auto& [path, file] : change.files_added) {
    text += Canonical(AddToJson(file, schema, change.timestamp_ms)) + "\n";
  }
  const StoragePath target = impl_->LogDir(base).Join(VersionFileName(next));
  if (impl_->storage.PutIfAbsent(target, text) == PutOutcome::kAlreadyExists) {
    Fail(ErrorCode::kConcurrentCommit, "Delta version " + std::to_string(next) +
                                           " was published concurrently at " + base.ToString());
  }
  impl_->Remember(base, next, text);
  return {std::to_string(next), 1};
}

}  // namespace xtable
