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

#include "xtable/iceberg.h"

#include <map>
#include <set>

#include "json_util.h"

namespace xtable {

using internal::Canonical;
using internal::Get;
using internal::Member;
using internal::Json;

namespace {

constexpr std::string_view kMetaDir = "metadata";
constexpr std::string_view kHintName = "version-hint.text";
constexpr std::string_view kTagKey = "xtable.source.commit";
constexpr std::string_view kNameKey = "name";
constexpr ErrorCode kBad = ErrorCode::kMalformedMetadata;

// Manifest entry status.
constexpr int kExisting = 0;
constexpr int kAdded = 1;
constexpr int kDeleted = 2;

std::string_view IcebergTypeName(FieldType type) {
  switch (type) {
    case FieldType::kBool: return "boolean";
    case FieldType::kInt32: return "int";
    case FieldType::kInt64: return "long";
    case FieldType::kFloat64: return "double";
    case FieldType::kString: return "string";
    case FieldType::kDate: return "date";
    case FieldType::kTimestampMicros: return "timestamp";
  }
  return "?";
}

std::optional<FieldType> IcebergTypeFromName(std::string_view name) {
  for (FieldType t : {FieldType::kBool, FieldType::kInt32, FieldType::kInt64,
                      FieldType::kFloat64, FieldType::kString, FieldType::kDate,
                      FieldType::kTimestampMicros}) {
    if (IcebergTypeName(t) == name) return t;
  }
  return std::nullopt;
}

std::string VersionName(int64_t version) {
  return "v" + std::to_string(version) + ".metadata.json";
}

Json SchemaToJson(const InternalSchema& schema) {
  Json fields = Json::array();
  for (const auto& f : schema.fields) {
    fields.push_back({{"id", f.field_id},
                      {"name", f.name},
                      {"required", !f.nullable},
                      {"type", std::string(IcebergTypeName(f.type))}});
  }
  return {{"fields", fields}, {"schema-id", schema.schema_id}, {"type", "struct"}};
}

InternalSchema SchemaFromJson(const Json& j, const std::string& where) {
  InternalSchema schema;
  schema.schema_id = Get<int32_t>(j, "schema-id", kBad, where);
  for (const auto& f : Member(j, "fields", kBad, where)) {
    InternalField field;
    field.field_id = Get<int32_t>(f, "id", kBad, where);
    field.name = Get<std::string>(f, "name", kBad, where);
    field.nullable = !Get<bool>(f, "required", kBad, where);
    auto type = IcebergTypeFromName(Get<std::string>(f, "type", kBad, where));
    if (!type) Fail(kBad, where + ": unsupported type for field " + field.name);
    field.type = *type;
    schema.fields.push_back(std::move(field));
  }
  return schema;
}

Json DataFileToJson(const InternalDataFile& file) {
  Json j = {{"file_path", file.rel_path},
            {"file_size_in_bytes", file.file_size_bytes},
            {"partition", internal::PartitionValuesToJson(file.partition_values)},
            {"record_count", file.record_count}};
  if (file.column_stats) {
    Json lower = Json::object(), upper = Json::object(), nulls = Json::object();
    for (const auto& stat : *file.column_stats) {
      const std::string id = std::to_string(stat.field_id);
      lower[id] = stat.min;
      upper[id] = stat.max;
      nulls[id] = stat.null_count;
    }
    j["lower_bounds"] = lower;
    j["upper_bounds"] = upper;
    j["null_value_counts"] = nulls;
  }
  return j;
}

InternalDataFile DataFileFromJson(const Json& j, const std::string& where) {
  InternalDataFile file;
  file.rel_path = Get<std::string>(j, "file_path", kBad, where);
  file.file_size_bytes = Get<int64_t>(j, "file_size_in_bytes", kBad, where);
  file.record_count = Get<int64_t>(j, "record_count", kBad, where);
  try {
    file.partition_values = internal::PartitionValuesFromJson(Member(j, "partition", kBad, where));
    if (j.contains("lower_bounds")) {
      const Json& lower = j["lower_bounds"];
      const Json upper = j.value("upper_bounds", Json::object());
      const Json nulls = j.value("null_value_counts", Json::object());
      std::vector<ColumnStat> stats;
      for (auto it = lower.begin(); it != lower.end(); ++it) {
        ColumnStat stat;
        stat.field_id = std::stoi(it.key());
        stat.min = it.value().get<std::string>();
        if (!upper.contains(it.key())) {
          Fail(kBad, where + ": lower bound without upper bound for field " + it.key());
        }
        stat.max = upper[it.key()].get<std::string>();
        stat.null_count = nulls.value(it.key(), int64_t{0});
        stats.push_back(std::move(stat));
      }
      std::sort(stats.begin(), stats.end(),
                [](const ColumnStat& a, const ColumnStat& b) { return a.field_id < b.field_id; });
      file.column_stats = std::move(stats);
    }
  } catch (const nlohmann::json::exception& e) {
    Fail(kBad, where + ": " + e.what());
  } catch (const std::logic_error& e) {
    Fail(kBad, where + ": bad field id in bounds");
  }
  return file;
}

struct Entry {
  int status = kExisting;
  int64_t snapshot_id = 0;
  InternalDataFile file;
};

int64_t ParseOrdinal(const std::string& token) {
  try {
    size_t used = 0;
    const long long v = std::stoll(token, &used);
    if (used != token.size() || v < 0) throw std::invalid_argument(token);
    return v;
  } catch (const std::exception&) {
    Fail(ErrorCode::kInvalidArgument, "not an Iceberg snapshot ordinal: '" + token + "'");
  }
}

// Snapshots of one metadata document, in snapshot-log order.
struct SnapshotRef {
  int64_t ordinal = 0;
  int64_t id = 0;
  const Json* body = nullptr;
};

std::vector<SnapshotRef> SnapshotsInLogOrder(const Json& doc, const std::string& where) {
  std::map<int64_t, const Json*> by_id;
  for (const auto& s : Member(doc, "snapshots", kBad, where)) {
    by_id[Get<int64_t>(s, "snapshot-id", kBad, where)] = &s;
  }
  std::vector<SnapshotRef> out;
  for (const auto& entry : Member(doc, "snapshot-log", kBad, where)) {
    const int64_t id = Get<int64_t>(entry, "snapshot-id", kBad, where);
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      Fail(ErrorCode::kDanglingPointer,
           where + ": snapshot-log names missing snapshot " + std::to_string(id));
    }
    out.push_back({Get<int64_t>(*it->second, "sequence-number", kBad, where), id, it->second});
  }
  return out;
}

const Json& SchemaById(const Json& doc, int32_t id, const std::string& where) {
  for (const auto& s : Member(doc, "schemas", kBad, where)) {
    if (Get<int32_t>(s, "schema-id", kBad, where) == id) return s;
  }
  Fail(ErrorCode::kDanglingPointer, where + ": no schema with id " + std::to_string(id));
}

}  // namespace

struct IcebergFormat::Impl {
  Impl(Storage& s, IdSource& i) : storage(s), ids(i), cache(s) {}

  Storage& storage;
  IdSource& ids;
  internal::JsonCache cache;

  StoragePath MetaDir(const StoragePath& base) const { return base.Join(kMetaDir); }

  const Json& Version(const StoragePath& base, int64_t version) {
    const StoragePath path = MetaDir(base).Join(VersionName(version));
    if (!storage.Exists(path)) {
      Fail(ErrorCode::kDanglingPointer, "metadata version " + path.ToString() + " does not exist");
    }
    return cache.Load(path, kBad);
  }

  std::vector<Entry> Entries(const StoragePath& base, const Json& snapshot,
                             const std::string& where) {
    const std::string list_rel = Get<std::string>(snapshot, "manifest-list", kBad, where);
    const StoragePath list_path = base.Join(list_rel);
    if (!storage.Exists(list_path)) {
      Fail(ErrorCode::kDanglingPointer, where + ": manifest list " + list_rel + " is missing");
    }
    const Json& list = cache.Load(list_path, kBad);
    std::vector<Entry> out;
    for (const auto& m : Member(list, "manifests", kBad, list_path.ToString())) {
      const std::string rel = Get<std::string>(m, "manifest_path", kBad, list_path.ToString());
      const StoragePath path = base.Join(rel);
      if (!storage.Exists(path)) {
        Fail(ErrorCode::kDanglingPointer, list_path.ToString() + ": manifest " + rel + " is missing");
      }
      const Json& manifest = cache.Load(path, kBad);
      const std::string at = path.ToString();
      for (const auto& e : Member(manifest, "entries", kBad, at)) {
        Entry entry;
        entry.status = Get<int>(e, "status", kBad, at);
        if (entry.status < kExisting || entry.status > kDeleted) {
          Fail(kBad, at + ": bad entry status " + std::to_string(entry.status));
        }
        entry.snapshot_id = Get<int64_t>(e, "snapshot_id", kBad, at);
        entry.file = DataFileFromJson(Member(e, "data_file", kBad, at), at);
        out.push_back(std::move(entry));
      }
    }
    return out;
  }

  static FileSet Live(const std::vector<Entry>& entries) {
    FileSet live;
    for (const auto& e : entries) {
      if (e.status != kDeleted) InsertFile(live, e.file);
    }
    return live;
  }

  PartitionSpec Spec(const Json& doc, const InternalSchema& schema, const std::string& where) {
    const int32_t spec_id = Get<int32_t>(doc, "default-spec-id", kBad, where);
    for (const auto& s : Member(doc, "partition-specs", kBad, where)) {
      if (Get<int32_t>(s, "spec-id", kBad, where) != spec_id) continue;
      PartitionSpec spec;
      for (const auto& f : Member(s, "fields", kBad, where)) {
        const int32_t source = Get<int32_t>(f, "source-id", kBad, where);
        if (schema.FindById(source) == nullptr) {
          Fail(kBad, where + ": partition source field " + std::to_string(source) + " not in schema");
        }
        if (Get<std::string>(f, "transform", kBad, where) != "identity") {
          Fail(kBad, where + ": only identity partition transforms are supported");
        }
        spec.push_back({source, PartitionTransform::kIdentity});
      }
      return spec;
    }
    Fail(ErrorCode::kDanglingPointer, where + ": default-spec-id names a missing spec");
  }

  void Publish(const StoragePath& path, const Json& doc) {
    if (storage.PutIfAbsent(path, Canonical(doc)) == PutOutcome::kAlreadyExists) {
      Fail(ErrorCode::kConcurrentCommit, path.ToString() + " was published concurrently");
    }
    cache.Put(path, doc);
  }
};

IcebergFormat::IcebergFormat(Storage& storage, IdSource& ids)
    : impl_(std::make_unique<Impl>(storage, ids)) {}

IcebergFormat::~IcebergFormat() = default;

bool IcebergFormat::Exists(const StoragePath& base) {
  const StoragePath dir = impl_->MetaDir(base);
  return impl_->storage.Exists(dir.Join(kHintName)) || impl_->storage.Exists(dir.Join(VersionName(1)));
}

int64_t IcebergFormat::CurrentVersion(const StoragePath& base) {
  const StoragePath dir = impl_->MetaDir(base);
  RegisterTablePrefixes(impl_->storage, base);
  const StoragePath hint = dir.Join(kHintName);
  int64_t version = 0;
  if (impl_->storage.Exists(hint)) {
    std::string text = impl_->storage.ReadFile(hint);
    while (!text.empty() && (text.back() == '\n' || text.back() == ' ')) text.pop_back();
    try {
      size_t used = 0;
      version = std::stoll(text, &used);
      if (used != text.size() || version < 1) throw std::invalid_argument(text);
    } catch (const std::exception&) {
      Fail(kBad, hint.ToString() + ": unparseable version hint '" + text + "'");
    }
    if (!impl_->storage.Exists(dir.Join(VersionName(version)))) {
      Fail(ErrorCode::kDanglingPointer,
           hint.ToString() + " names missing " + VersionName(version));
    }
  } else if (impl_->storage.Exists(dir.Join(VersionName(1)))) {
    version = 1;
  } else {
    Fail(ErrorCode::kNoTable, "no Iceberg metadata at " + dir.ToString());
  }
  while (impl_->storage.Exists(dir.Join(VersionName(version + 1)))) ++version;
  return version;
}

std::string IcebergFormat::LatestToken(const StoragePath& base) {
  const Json& doc = impl_->Version(base, CurrentVersion(base));
  const auto snaps = SnapshotsInLogOrder(doc, base.ToString());
  return snaps.empty() ? "0" : std::to_string(snaps.back().ordinal);
}

InternalSnapshot IcebergFormat::ReadSnapshot(const StoragePath& base,
                                             const std::optional<std::string>& as_of) {
  const int64_t version = CurrentVersion(base);
  const Json& doc = impl_->Version(base, version);
  const std::string where = impl_->MetaDir(base).Join(VersionName(version)).ToString();
  const auto snaps = SnapshotsInLogOrder(doc, where);
  const int64_t latest = snaps.empty() ? 0 : snaps.back().ordinal;
  const int64_t ordinal = as_of ? ParseOrdinal(*as_of) : latest;
  if (ordinal > latest) {
    Fail(ErrorCode::kVersionAhead,
         "snapshot ordinal " + std::to_string(ordinal) + " is beyond latest " + std::to_string(latest));
  }

  InternalSnapshot snap;
  snap.source_commit = {Format::kIceberg, std::to_string(ordinal)};
  const Json props = doc.value("properties", Json::object());
  snap.table_name = props.value(std::string(kNameKey), std::string());
  if (ordinal == 0) {
    const Json& v1 = impl_->Version(base, 1);
    const Json& schemas = Member(v1, "schemas", kBad, where);
    if (schemas.empty()) Fail(kBad, where + ": no schemas");
    snap.schema = SchemaFromJson(schemas.front(), where);
    snap.timestamp_ms = Get<int64_t>(v1, "last-updated-ms", kBad, where);
  } else {
    const SnapshotRef* ref = nullptr;
    for (const auto& s : snaps) {
      if (s.ordinal == ordinal) ref = &s;
    }
    if (ref == nullptr) {
      Fail(ErrorCode::kSnapshotExpired,
           "snapshot ordinal " + std::to_string(ordinal) + " is no longer in the snapshot log");
    }
    snap.schema = SchemaFromJson(
        SchemaById(doc, Get<int32_t>(*ref->body, "schema-id", kBad, where), where), where);
    snap.timestamp_ms = Get<int64_t>(*ref->body, "timestamp-ms", kBad, where);
    snap.live_files = Impl::Live(impl_->Entries(base, *ref->body, where));
  }
  snap.partition_spec = impl_->Spec(doc, snap.schema, where);
  return snap;
}

std::vector<TableChange> IcebergFormat::ReadChangesSince(const StoragePath& base,
                                                         const std::string& after_token,
                                                         const InternalSchema* /*baseline*/) {
  const int64_t version = CurrentVersion(base);
  const Json& doc = impl_->Version(base, version);
  const std::string where = impl_->MetaDir(base).Join(VersionName(version)).ToString();
  const auto snaps = SnapshotsInLogOrder(doc, where);
  const int64_t latest = snaps.empty() ? 0 : snaps.back().ordinal;
  const int64_t after = after_token.empty() ? 0 : ParseOrdinal(after_token);
  if (after > latest) {
    Fail(ErrorCode::kVersionAhead, "sync state names snapshot ordinal " + after_token +
                                       " but the table ends at " + std::to_string(latest));
  }
  if (!snaps.empty() && after + 1 < snaps.front().ordinal) {
    Fail(ErrorCode::kSnapshotExpired, "snapshots after ordinal " + after_token + " have expired");
  }
  std::vector<TableChange> out;
  for (const auto& ref : snaps) {
    if (ref.ordinal <= after) continue;
    TableChange change;
    change.source_commit = {Format::kIceberg, std::to_string(ref.ordinal)};
    change.timestamp_ms = Get<int64_t>(*ref.body, "timestamp-ms", kBad, where);
    change.schema = SchemaFromJson(
        SchemaById(doc, Get<int32_t>(*ref.body, "schema-id", kBad, where), where), where);
    for (auto& e : impl_->Entries(base, *ref.body, where)) {
      if (e.snapshot_id != ref.id) continue;
      if (e.status == kAdded) InsertFile(change.files_added, std::move(e.file));
      if (e.status == kDeleted) change.files_removed.insert(e.file.rel_path);
    }
    out.push_back(std::move(change));
  }
  return out;
}

std::vector<CommitSummary> IcebergFormat::ReadHistory(const StoragePath& base) {
  const int64_t version = CurrentVersion(base);
  const Json& doc = impl_->Version(base, version);
  const std::string where = impl_->MetaDir(base).Join(VersionName(version)).ToString();
  std::vector<CommitSummary> out;
  out.push_back({"0", Get<int64_t>(impl_->Version(base, 1), "last-updated-ms", kBad, where),
                 "create", std::nullopt});
  for (const auto& ref : SnapshotsInLogOrder(doc, where)) {
    CommitSummary c;
    c.token = std::to_string(ref.ordinal);
    c.timestamp_ms = Get<int64_t>(*ref.body, "timestamp-ms", kBad, where);
    const Json summary = ref.body->value("summary", Json::object());
    c.operation = summary.value("operation", std::string());
    if (summary.contains(kTagKey)) c.source_tag = summary[std::string(kTagKey)].get<std::string>();
    out.push_back(std::move(c));
  }
  return out;
}

WriteOutcome IcebergFormat::Init(const StoragePath& base, const InternalSnapshot& table) {
  if (Exists(base)) {
    Fail(ErrorCode::kTableExists, "Iceberg metadata already exists at " + base.ToString());
  }
  RegisterTablePrefixes(impl_->storage, base);
  const StoragePath dir = impl_->MetaDir(base);
  Json fields = Json::array();
  int32_t next_partition_field = 1000;
  for (const auto& pf : table.partition_spec) {
    const InternalField* source = table.schema.FindById(pf.source_field_id);
    fields.push_back({{"field-id", next_partition_field++},
                      {"name", source != nullptr ? source->name : std::string()},
                      {"source-id", pf.source_field_id},
                      {"transform", "identity"}});
  }
  InternalSchema schema = table.schema;
  schema.schema_id = 0;
  const Json doc = {
      {"current-schema-id", 0},
      {"current-snapshot-id", -1},
      {"default-spec-id", 0},
      {"format-version", 1},
      {"last-column-id", table.schema.MaxFieldId()},
      {"last-sequence-number", 0},
      {"last-updated-ms", table.timestamp_ms},
      {"location", base.ToString()},
      {"partition-specs", Json::array({{{"fields", fields}, {"spec-id", 0}}})},
      {"properties", {{std::string(kNameKey), table.table_name}}},
      {"schemas", Json::array({SchemaToJson(schema)})},
      {"snapshot-log", Json::array()},
      {"snapshots", Json::array()},
      {"table-uuid", impl_->ids.Uuid()},
  };
  const StoragePath v1 = dir.Join(VersionName(1));
  if (impl_->storage.PutIfAbsent(v1, Canonical(doc)) == PutOutcome::kAlreadyExists) {
    Fail(ErrorCode::kTableExists, v1.ToString() + " already exists");
  }
  impl_->cache.Put(v1, doc);
  const bool hint_new = impl_->storage.WriteReplaceAtomic(dir.Join(kHintName), "1");
  return {"0", hint_new ? 2 : 1};
}

WriteOutcome IcebergFormat::WriteChange(const StoragePath& base, const TableChange& change,
                                        const std::string& source_tag) {
  const int64_t version = CurrentVersion(base);
  const StoragePath dir = impl_->MetaDir(base);
  const std::string where = dir.Join(VersionName(version)).ToString();
  Json doc = impl_->Version(base, version);
  const auto snaps = SnapshotsInLogOrder(doc, where);

  std::vector<Entry> previous;
  int64_t parent_id = -1;
  if (!snaps.empty()) {
    parent_id = snaps.back().id;
    previous = impl_->Entries(base, *snaps.back().body, where);
  }
  FileSet live = Impl::Live(previous);
  try {
    (void)ApplyChange(live, change);
  } catch (const Error& e) {
    Fail(ErrorCode::kInvalidChange, e.what());
  }

  // Schema: reuse the current one unless the change carries different fields.
  const int32_t current_schema_id = Get<int32_t>(doc, "current-schema-id", kBad, where);
  const InternalSchema current =
      SchemaFromJson(SchemaById(doc, current_schema_id, where), where);
  int32_t schema_id = current_schema_id;
  if (!change.schema.fields.empty() && !change.schema.SameFields(current)) {
    InternalSchema proposed = change.schema;
    int32_t max_id = 0;
    for (const auto& s : doc["schemas"]) max_id = std::max(max_id, s["schema-id"].get<int32_t>());
    proposed.schema_id = max_id + 1;
    const auto problems = ValidateSchemaEvolution(current, proposed);
    if (!problems.empty()) {
      Fail(ErrorCode::kInvalidChange, "schema change is not an append-only evolution: " +
                                          problems.front().subject + " " + problems.front().message);
    }
    doc["schemas"].push_back(SchemaToJson(proposed));
    doc["current-schema-id"] = proposed.schema_id;
    doc["last-column-id"] = std::max(doc.value("last-column-id", 0), proposed.MaxFieldId());
    schema_id = proposed.schema_id;
  }

  std::set<int64_t> taken;
  for (const auto& s : doc["snapshots"]) taken.insert(s["snapshot-id"].get<int64_t>());
  int64_t snapshot_id = 0;
  StoragePath manifest_path, list_path;
  std::string manifest_rel, list_rel;
  // A crashed writer can leave manifests behind under a drawn id; draw again.
  for (;;) {
    snapshot_id = static_cast<int64_t>(impl_->ids.Next() >> 1);
    if (snapshot_id == 0 || taken.count(snapshot_id) > 0) continue;
    manifest_rel = std::string(kMetaDir) + "/manifest-" + std::to_string(snapshot_id) + ".json";
    list_rel = std::string(kMetaDir) + "/snap-" + std::to_string(snapshot_id) +
               "-manifest-list.json";
    manifest_path = base.Join(manifest_rel);
    list_path = base.Join(list_rel);
    if (!impl_->storage.Exists(manifest_path) && !impl_->storage.Exists(list_path)) break;
  }

  const int64_t sequence = doc.value("last-sequence-number", int64_t{0}) + 1;
  Json entries = Json::array();
  int added = 0, deleted = 0, existing = 0;
  for (const auto& e : previous) {
    if (e.status == kDeleted) continue;
    const bool removed = change.files_removed.count(e.file.rel_path) > 0;
    entries.push_back({{"data_file", DataFileToJson(e.file)},
                       {"snapshot_id", removed ? snapshot_id : e.snapshot_id},
                       {"status", removed ? kDeleted : kExisting}});
    (removed ? deleted : existing)++;
  }
  for (const auto& [path, file] : change.files_added) {
    entries.push_back(
        {{"data_file", DataFileToJson(file)}, {"snapshot_id", snapshot_id}, {"status", kAdded}});
    ++added;
  }
  const Json manifest = {{"entries", entries}, {"schema_id", schema_id}, {"spec_id", 0}};
  const Json list = {{"manifests", Json::array({{{"added_files_count", added},
                                                  {"added_snapshot_id", snapshot_id},
                                                  {"deleted_files_count", deleted},
                                                  {"existing_files_count", existing},
                                                  {"manifest_path", manifest_rel},
                                                  {"sequence_number", sequence}}})}};

  std::string operation;
  switch (ClassifyChange(live, change)) {
    case ChangeKind::kAppend:
    case ChangeKind::kEmpty: operation = "append"; break;
    case ChangeKind::kDelete: operation = "delete"; break;
    case ChangeKind::kOverwrite: operation = "overwrite"; break;
  }
  Json summary = {{"added-data-files", std::to_string(added)},
                  {"deleted-data-files", std::to_string(deleted)},
                  {"operation", operation},
                  {"total-data-files", std::to_string(existing + added)}};
  if (!source_tag.empty()) summary[std::string(kTagKey)] = source_tag;
  Json snapshot = {{"manifest-list", list_rel},
                   {"schema-id", schema_id},
                   {"sequence-number", sequence},
                   {"snapshot-id", snapshot_id},
                   {"summary", summary},
                   {"timestamp-ms", change.timestamp_ms}};
  if (parent_id >= 0) snapshot["parent-snapshot-id"] = parent_id;
  doc["snapshots"].push_back(snapshot);
  doc["snapshot-log"].push_back({{"snapshot-id", snapshot_id}, {"timestamp-ms", change.timestamp_ms}});
  doc["current-snapshot-id"] = snapshot_id;
  doc["last-sequence-number"] = sequence;
  doc["last-updated-ms"] = change.timestamp_ms;

  impl_->Publish(manifest_path, manifest);
  impl_->Publish(list_path, list);
  const StoragePath next = dir.Join(VersionName(version + 1));
  if (impl_->storage.PutIfAbsent(next, Canonical(doc)) == PutOutcome::kAlreadyExists) {
    Fail(ErrorCode::kConcurrentCommit, "Iceberg metadata " + VersionName(version + 1) +
                                           " was published concurrently at " + base.ToString());
  }
  impl_->cache.Put(next, doc);
  const bool hint_new = impl_->storage.WriteReplaceAtomic(dir.Join(kHintName),
                                                          std::to_string(version + 1));
  return {std::to_string(sequence), 3 + (hint_new ? 1 : 0)};
}

}  // namespace xtable
