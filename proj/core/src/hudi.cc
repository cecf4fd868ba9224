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

#include "xtable/hudi.h"

#include <algorithm>
#include <map>
#include <mutex>
#include <set>

#include "json_util.h"

namespace xtable {

using internal::Canonical;
using internal::Get;
using internal::Member;
using internal::Json;

namespace {

constexpr std::string_view kHoodieDir = ".hoodie";
constexpr std::string_view kPropertiesName = "hoodie.properties";
constexpr std::string_view kTagKey = "xtable.source.commit";
constexpr std::string_view kNullCommit = "null";
constexpr ErrorCode kBad = ErrorCode::kMalformedTimeline;

constexpr std::string_view kPropName = "hoodie.table.name";
constexpr std::string_view kPropType = "hoodie.table.type";
constexpr std::string_view kPropPartitions = "hoodie.table.partition.fields";
constexpr std::string_view kPropSchema = "hoodie.table.create.schema";
constexpr std::string_view kPropCreated = "hoodie.table.create.time.ms";

bool IsInstantStem(std::string_view s) {
  return s.size() == 17 &&
         std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

struct WriteStat {
  std::string file_id;
  std::string path;
  int64_t num_writes = 0;
  int64_t size = 0;
  std::optional<std::string> prev_commit;
};

struct Instant {
  std::string ts;
  std::string action;
  std::string operation;
  std::map<std::string, std::vector<WriteStat>> writes;
  std::map<std::string, std::vector<std::string>> replaced;
  std::optional<InternalSchema> schema;
  std::optional<std::string> source_tag;
};

Instant ParseInstant(const std::string& ts, const std::string& action, const std::string& text,
                     const std::string& where) {
  const Json j = internal::ParseJson(text, kBad, where);
  Instant inst;
  inst.ts = ts;
  inst.action = action;
  try {
    inst.operation = Get<std::string>(j, "operationType", kBad, where);
    for (const auto& [partition, stats] : Member(j, "partitionToWriteStats", kBad, where).items()) {
      auto& out = inst.writes[partition];
      for (const auto& s : stats) {
        WriteStat w;
        w.file_id = Get<std::string>(s, "fileId", kBad, where);
        w.path = Get<std::string>(s, "path", kBad, where);
        w.num_writes = Get<int64_t>(s, "numWrites", kBad, where);
        w.size = Get<int64_t>(s, "fileSizeInBytes", kBad, where);
        const std::string prev = s.value("prevCommit", std::string(kNullCommit));
        if (prev != kNullCommit) w.prev_commit = prev;
        out.push_back(std::move(w));
      }
    }
    if (j.contains("partitionToReplaceFileIds")) {
      if (action != "replacecommit") {
        Fail(kBad, where + ": replaced file ids outside a replacecommit");
      }
      for (const auto& [partition, ids] : j["partitionToReplaceFileIds"].items()) {
        inst.replaced[partition] = ids.get<std::vector<std::string>>();
      }
    }
    const Json extra = j.value("extraMetadata", Json::object());
    if (extra.contains("schema")) {
      inst.schema = internal::SchemaFromJson(
          internal::ParseJson(extra["schema"].get<std::string>(), kBad, where + " schema"), kBad,
          where + " schema");
    }
    if (extra.contains(kTagKey)) inst.source_tag = extra[std::string(kTagKey)].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    Fail(kBad, where + ": " + e.what());
  }
  return inst;
}

std::map<std::string, std::string> ParsePartitionPath(const std::string& path,
                                                      const std::vector<std::string>& columns,
                                                      const std::string& where) {
  std::map<std::string, std::string> values;
  if (path.empty()) {
    if (!columns.empty()) Fail(kBad, where + ": empty partition path on a partitioned table");
    return values;
  }
  size_t pos = 0;
  size_t index = 0;
  while (pos <= path.size()) {
    size_t end = path.find('/', pos);
    if (end == std::string::npos) end = path.size();
    const std::string segment = path.substr(pos, end - pos);
    const size_t eq = segment.find('=');
    if (eq == std::string::npos || index >= columns.size() || segment.substr(0, eq) != columns[index]) {
      Fail(kBad, where + ": partition path '" + path + "' does not match partition fields");
    }
    values[columns[index]] = segment.substr(eq + 1);
    ++index;
    pos = end + 1;
  }
  if (index != columns.size()) {
    Fail(kBad, where + ": partition path '" + path + "' does not match partition fields");
  }
  return values;
}

struct Group {
  std::string partition;
  std::string path;     // live slice
  std::string instant;  // instant of the live slice
  int64_t records = 0;
  int64_t size = 0;
  bool replaced = false;
};

struct Properties {
  std::string name;
  std::vector<std::string> partition_columns;
  InternalSchema schema;
  int64_t created_ms = 0;
};

}  // namespace

struct HudiFormat::Impl {
  Impl(Storage& s, IdSource& i) : storage(s), ids(i) {}

  Storage& storage;
  IdSource& ids;
  std::mutex mu;
  std::map<std::string, Instant> instants;  // keyed by instant file path

  StoragePath Dir(const StoragePath& base) const { return base.Join(kHoodieDir); }

  // Completed instants in timeline order, as (timestamp, action).
  std::vector<std::pair<std::string, std::string>> Timeline(const StoragePath& base) {
    const StoragePath dir = Dir(base);
    if (!storage.Exists(dir.Join(kPropertiesName))) {
      Fail(ErrorCode::kNoTable, "no Hudi table at " + base.ToString());
    }
    RegisterTablePrefixes(storage, base);
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& name : storage.ListDir(dir)) {
      if (IsTempName(name)) continue;
      const size_t dot = name.find('.');
      if (dot == std::string::npos) continue;
      const std::string stem = name.substr(0, dot);
      const std::string action = name.substr(dot + 1);
      if (action != "commit" && action != "replacecommit") continue;
      if (!IsInstantStem(stem)) Fail(kBad, "unparseable instant file name " + name);
      out.emplace_back(stem, action);
    }
    std::sort(out.begin(), out.end());
    for (size_t i = 1; i < out.size(); ++i) {
      if (out[i].first == out[i - 1].first) {
        Fail(kBad, "instant " + out[i].first + " appears twice on the timeline");
      }
    }
    return out;
  }

  const Instant& Load(const StoragePath& base, const std::string& ts, const std::string& action) {
    const StoragePath path = Dir(base).Join(ts + "." + action);
    const std::string key = path.ToString();
    {
      std::lock_guard lock(mu);
      auto it = instants.find(key);
      if (it != instants.end()) return it->second;
    }
    Instant inst = ParseInstant(ts, action, storage.ReadFile(path), key);
    std::lock_guard lock(mu);
    return instants.emplace(key, std::move(inst)).first->second;
  }

  void Remember(const StoragePath& base, Instant inst) {
    const std::string key = Dir(base).Join(inst.ts + "." + inst.action).ToString();
    std::lock_guard lock(mu);
    instants.emplace(key, std::move(inst));
  }

  Properties Props(const StoragePath& base, HudiFormat& self) {
    Properties props;
    const std::string where = Dir(base).Join(kPropertiesName).ToString();
    bool have_schema = false;
    for (const auto& [key, value] : self.ReadProperties(base)) {
      if (key == kPropName) {
        props.name = value;
      } else if (key == kPropPartitions) {
        size_t pos = 0;
        while (!value.empty() && pos <= value.size()) {
          size_t end = value.find(',', pos);
          if (end == std::string::npos) end = value.size();
          props.partition_columns.push_back(value.substr(pos, end - pos));
          pos = end + 1;
        }
      } else if (key == kPropSchema) {
        props.schema = internal::SchemaFromJson(internal::ParseJson(value, kBad, where), kBad, where);
        have_schema = true;
      } else if (key == kPropCreated) {
        try {
          props.created_ms = std::stoll(value);
        } catch (const std::exception&) {
          Fail(kBad, where + ": bad " + std::string(kPropCreated));
        }
      }
    }
    if (!have_schema) Fail(kBad, where + ": missing " + std::string(kPropSchema));
    return props;
  }

  struct Folded {
    std::map<std::string, Group> groups;  // by fileId
    InternalSchema schema;
  };

  Folded Fold(const StoragePath& base, const std::vector<std::pair<std::string, std::string>>& tl,
              const std::string& as_of, const Properties& props) {
    Folded out;
    out.schema = props.schema;
    for (const auto& [ts, action] : tl) {
      if (ts > as_of) break;
      const Instant& inst = Load(base, ts, action);
      for (const auto& [partition, stats] : inst.writes) {
        for (const auto& w : stats) {
          auto it = out.groups.find(w.file_id);
          if (it == out.groups.end()) {
            if (w.prev_commit) {
              Fail(kBad, "instant " + ts + " continues unknown file group " + w.file_id);
            }
            it = out.groups.emplace(w.file_id, Group{}).first;
            it->second.partition = partition;
          } else if (it->second.replaced || !w.prev_commit || *w.prev_commit != it->second.instant) {
            Fail(kBad, "instant " + ts + " breaks the slice chain of file group " + w.file_id);
          }
          it->second.path = w.path;
          it->second.instant = ts;
          it->second.records = w.num_writes;
          it->second.size = w.size;
        }
      }
      for (const auto& [partition, ids] : inst.replaced) {
        for (const auto& id : ids) {
          auto it = out.groups.find(id);
          if (it == out.groups.end() || it->second.replaced) {
            Fail(kBad, "instant " + ts + " replaces unknown file group " + id);
          }
          it->second.replaced = true;
        }
      }
      if (inst.schema) out.schema = *inst.schema;
    }
    return out;
  }

  FileSet LiveFiles(const Folded& folded, const Properties& props) {
    FileSet live;
    for (const auto& [id, g] : folded.groups) {
      if (g.replaced) continue;
      InternalDataFile file;
      file.rel_path = g.path;
      file.partition_values = ParsePartitionPath(g.partition, props.partition_columns, g.path);
      file.record_count = g.records;
      file.file_size_bytes = g.size;
      InsertFile(live, std::move(file));
    }
    return live;
  }
};

HudiFormat::HudiFormat(Storage& storage, IdSource& ids)
    : impl_(std::make_unique<Impl>(storage, ids)) {}

HudiFormat::~HudiFormat() = default;

std::string HudiFormat::BaseFileName(std::string_view file_id, std::string_view instant) {
  return std::string(file_id) + "_" + std::string(kWriteToken) + "_" + std::string(instant) + ".data";
}

std::optional<std::string> HudiFormat::FileIdFromPath(std::string_view rel_path) {
  const size_t slash = rel_path.rfind('/');
  std::string_view name = slash == std::string_view::npos ? rel_path : rel_path.substr(slash + 1);
  constexpr std::string_view kExt = ".data";
  if (name.size() <= kExt.size() || name.substr(name.size() - kExt.size()) != kExt) {
    return std::nullopt;
  }
  name.remove_suffix(kExt.size());
  const std::string suffix = "_" + std::string(kWriteToken) + "_";
  if (name.size() < suffix.size() + 17 + 1) return std::nullopt;
  const std::string_view instant = name.substr(name.size() - 17);
  if (!IsInstantStem(instant)) return std::nullopt;
  const std::string_view rest = name.substr(0, name.size() - 17);
  if (rest.size() <= suffix.size() || rest.substr(rest.size() - suffix.size()) != suffix) {
    return std::nullopt;
  }
  return std::string(rest.substr(0, rest.size() - suffix.size()));
}

std::string InstantFromMillis(int64_t epoch_ms) {
  // FormatTimestamp yields YYYY-MM-DDTHH:MM:SS.ffffffZ.
  const std::string iso = FormatTimestamp(TimestampMicros{epoch_ms * 1000});
  std::string out;
  for (size_t i = 0; i < iso.size() && out.size() < 17; ++i) {
    if (iso[i] >= '0' && iso[i] <= '9') out += iso[i];
  }
  return out;
}

std::optional<int64_t> MillisFromInstant(std::string_view instant) {
  if (!IsInstantStem(instant)) return std::nullopt;
  const std::string iso = std::string(instant.substr(0, 4)) + "-" + std::string(instant.substr(4, 2)) +
                          "-" + std::string(instant.substr(6, 2)) + "T" +
                          std::string(instant.substr(8, 2)) + ":" + std::string(instant.substr(10, 2)) +
                          ":" + std::string(instant.substr(12, 2)) + "." +
                          std::string(instant.substr(14, 3)) + "000Z";
  try {
    const Value v = ParseValue(FieldType::kTimestampMicros, iso);
    return std::get<TimestampMicros>(v).micros / 1000;
  } catch (const Error&) {
    return std::nullopt;
  }
}

bool HudiFormat::Exists(const StoragePath& base) {
  return impl_->storage.Exists(impl_->Dir(base).Join(kPropertiesName));
}

std::vector<std::pair<std::string, std::string>> HudiFormat::ReadProperties(const StoragePath& base) {
  const StoragePath path = impl_->Dir(base).Join(kPropertiesName);
  if (!impl_->storage.Exists(path)) Fail(ErrorCode::kNoTable, "no Hudi table at " + base.ToString());
  RegisterTablePrefixes(impl_->storage, base);
  const std::string text = impl_->storage.ReadFile(path);
  std::vector<std::pair<std::string, std::string>> out;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    pos = end + 1;
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) Fail(kBad, path.ToString() + ": bad line '" + line + "'");
    out.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return out;
}

std::string HudiFormat::LatestToken(const StoragePath& base) {
  const auto tl = impl_->Timeline(base);
  return tl.empty() ? std::string(kCreationInstant) : tl.back().first;
}

std::string HudiFormat::NextInstant(const StoragePath& base, int64_t timestamp_ms) {
  const auto tl = impl_->Timeline(base);
  int64_t ms = timestamp_ms;
  if (!tl.empty()) {
    const auto latest = MillisFromInstant(tl.back().first);
    if (!latest) Fail(kBad, "unparseable instant " + tl.back().first);
    ms = std::max(ms, *latest + 1);
  }
  return InstantFromMillis(std::max<int64_t>(ms, 0));
}

InternalSnapshot HudiFormat::ReadSnapshot(const StoragePath& base,
                                          const std::optional<std::string>& as_of) {
  const auto tl = impl_->Timeline(base);
  const Properties props = impl_->Props(base, *this);
  const std::string latest = tl.empty() ? std::string(kCreationInstant) : tl.back().first;
  const std::string target = as_of ? *as_of : latest;
  if (!IsInstantStem(target)) {
    Fail(ErrorCode::kInvalidArgument, "not a Hudi instant: '" + target + "'");
  }
  if (target > latest) {
    Fail(ErrorCode::kVersionAhead, "instant " + target + " is beyond latest " + latest);
  }
  const auto folded = impl_->Fold(base, tl, target, props);
  InternalSnapshot snap;
  snap.source_commit = {Format::kHudi, target};
  snap.schema = folded.schema;
  snap.table_name = props.name;
  snap.live_files = impl_->LiveFiles(folded, props);
  snap.timestamp_ms = props.created_ms;
  for (const auto& [ts, action] : tl) {
    if (ts > target) break;
    snap.timestamp_ms = MillisFromInstant(ts).value_or(0);
  }
  for (const auto& col : props.partition_columns) {
    const InternalField* field = snap.schema.FindByName(col);
    if (field == nullptr) Fail(kBad, "partition field " + col + " not in schema");
    snap.partition_spec.push_back({field->field_id, PartitionTransform::kIdentity});
  }
  return snap;
}

std::vector<TableChange> HudiFormat::ReadChangesSince(const StoragePath& base,
                                                      const std::string& after_token,
                                                      const InternalSchema* baseline) {
  const auto tl = impl_->Timeline(base);
  const std::string after = after_token.empty() ? std::string(kCreationInstant) : after_token;
  const std::string latest = tl.empty() ? std::string(kCreationInstant) : tl.back().first;
  if (after > latest) {
    Fail(ErrorCode::kVersionAhead, "sync state names instant " + after + " but the timeline ends at " +
                                       latest);
  }
  size_t start = 0;
  if (after != kCreationInstant) {
    auto it = std::find_if(tl.begin(), tl.end(), [&](const auto& e) { return e.first == after; });
    if (it == tl.end()) Fail(ErrorCode::kInstantNotFound, "instant " + after + " is not on the timeline");
    start = static_cast<size_t>(it - tl.begin()) + 1;
  }
  std::vector<TableChange> out;
  if (start >= tl.size()) return out;

  std::optional<Properties> props;
  auto properties = [&]() -> const Properties& {
    if (!props) props = impl_->Props(base, *this);
    return *props;
  };
  std::map<std::string, std::string> action_of;
  for (const auto& [ts, action] : tl) action_of[ts] = action;

  InternalSchema schema;
  if (baseline != nullptr && start > 0) {
    schema = *baseline;
  } else {
    bool found = false;
    for (size_t i = start; i-- > 0;) {
      const Instant& inst = impl_->Load(base, tl[i].first, tl[i].second);
      if (inst.schema) {
        schema = *inst.schema;
        found = true;
        break;
      }
    }
    if (!found) schema = properties().schema;
  }

  auto slice_path = [&](const std::string& file_id, const std::string& ts,
                        const std::string& action) -> std::optional<std::string> {
    const Instant& inst = impl_->Load(base, ts, action);
    for (const auto& [partition, stats] : inst.writes) {
      for (const auto& w : stats) {
        if (w.file_id == file_id) return w.path;
      }
    }
    return std::nullopt;
  };

  for (size_t i = start; i < tl.size(); ++i) {
    const Instant& inst = impl_->Load(base, tl[i].first, tl[i].second);
    TableChange change;
    change.source_commit = {Format::kHudi, inst.ts};
    change.timestamp_ms = MillisFromInstant(inst.ts).value_or(0);
    if (inst.schema) schema = *inst.schema;
    change.schema = schema;
    for (const auto& [partition, stats] : inst.writes) {
      const auto values = ParsePartitionPath(partition, properties().partition_columns, inst.ts);
      for (const auto& w : stats) {
        InternalDataFile file;
        file.rel_path = w.path;
        file.partition_values = values;
        file.record_count = w.num_writes;
        file.file_size_bytes = w.size;
        InsertFile(change.files_added, std::move(file));
        if (w.prev_commit) {
          auto it = action_of.find(*w.prev_commit);
          std::optional<std::string> prev;
          if (it != action_of.end()) prev = slice_path(w.file_id, it->first, it->second);
          if (!prev) {
            Fail(kBad, "instant " + inst.ts + " names prevCommit " + *w.prev_commit +
                           " without a slice of " + w.file_id);
          }
          change.files_removed.insert(*prev);
        }
      }
    }
    for (const auto& [partition, ids] : inst.replaced) {
      for (const auto& id : ids) {
        std::optional<std::string> prev;
        for (size_t j = i; j-- > 0 && !prev;) prev = slice_path(id, tl[j].first, tl[j].second);
        if (!prev) Fail(kBad, "instant " + inst.ts + " replaces unknown file group " + id);
        change.files_removed.insert(*prev);
      }
    }
    out.push_back(std::move(change));
  }
  return out;
}

std::vector<CommitSummary> HudiFormat::ReadHistory(const StoragePath& base) {
  const auto tl = impl_->Timeline(base);
  const Properties props = impl_->Props(base, *this);
  std::vector<CommitSummary> out;
  out.push_back({std::string(kCreationInstant), props.created_ms, "CREATE", std::nullopt});
  for (const auto& [ts, action] : tl) {
    const Instant& inst = impl_->Load(base, ts, action);
    out.push_back({ts, MillisFromInstant(ts).value_or(0), inst.operation, inst.source_tag});
  }
  return out;
}

WriteOutcome HudiFormat::Init(const StoragePath& base, const InternalSnapshot& table) {
  const StoragePath path = impl_->Dir(base).Join(kPropertiesName);
  if (impl_->storage.Exists(path)) {
    Fail(ErrorCode::kTableExists, "Hudi table already exists at " + base.ToString());
  }
  RegisterTablePrefixes(impl_->storage, base);
  std::string columns;
  for (const auto& col : PartitionColumnNames(table.schema, table.partition_spec)) {
    if (!columns.empty()) columns += ",";
    columns += col;
  }
  InternalSchema schema = table.schema;
  schema.schema_id = 0;
  std::map<std::string, std::string> props = {
      {std::string(kPropName), table.table_name},
      {std::string(kPropType), "COPY_ON_WRITE"},
      {std::string(kPropPartitions), columns},
      {std::string(kPropSchema), Canonical(internal::SchemaToJson(schema))},
      {std::string(kPropCreated), std::to_string(table.timestamp_ms)},
  };
  std::string text;
  for (const auto& [k, v] : props) text += k + "=" + v + "\n";
  if (impl_->storage.PutIfAbsent(path, text) == PutOutcome::kAlreadyExists) {
    Fail(ErrorCode::kTableExists, "Hudi table already exists at " + base.ToString());
  }
  return {std::string(kCreationInstant), 1};
}

WriteOutcome HudiFormat::WriteChange(const StoragePath& base, const TableChange& change,
                                     const std::string& source_tag) {
  const auto tl = impl_->Timeline(base);
  const Properties props = impl_->Props(base, *this);
  const auto folded = impl_->Fold(base, tl, "99999999999999999", props);
  const FileSet live = impl_->LiveFiles(folded, props);
  try {
    (void)ApplyChange(live, change);
  } catch (const Error& e) {
    Fail(ErrorCode::kInvalidChange, e.what());
  }

  InternalSchema schema = folded.schema;
  if (!change.schema.fields.empty() && !change.schema.SameFields(folded.schema)) {
    InternalSchema proposed = change.schema;
    proposed.schema_id = folded.schema.schema_id + 1;
    const auto problems = ValidateSchemaEvolution(folded.schema, proposed);
    if (!problems.empty()) {
      Fail(ErrorCode::kInvalidChange, "schema change is not an append-only evolution: " +
                                          problems.front().subject + " " + problems.front().message);
    }
    schema = proposed;
  }

  std::map<std::string, std::string> live_group;  // live path -> fileId
  std::set<std::string> used_ids;
  for (const auto& [id, g] : folded.groups) {
    used_ids.insert(id);
    if (!g.replaced) live_group[g.path] = id;
  }

  const std::string instant = NextInstant(base, change.timestamp_ms);

  // Bucket removes and adds by partition path.
  std::map<std::string, std::vector<std::string>> removed_by_part, added_by_part;
  for (const auto& path : change.files_removed) {
    if (live_group.count(path) == 0) {
      Fail(ErrorCode::kUnpairableRemove, "removed path " + path + " has no known file group");
    }
    const auto& g = folded.groups.at(live_group[path]);
    removed_by_part[g.partition].push_back(path);
  }
  for (const auto& [path, file] : change.files_added) {
    added_by_part[PartitionPath(props.partition_columns, file.partition_values)].push_back(path);
  }

  Json writes = Json::object();
  Json replaced = Json::object();
  std::set<std::string> parts;
  for (const auto& [p, v] : removed_by_part) parts.insert(p);
  for (const auto& [p, v] : added_by_part) parts.insert(p);
  for (const auto& part : parts) {
    std::vector<std::string> removed = removed_by_part[part];
    std::vector<std::string> added = added_by_part[part];
    std::vector<std::pair<std::string, std::string>> pairs;  // (removed, added)
    // An add that names the removed slice's file group continues it.
    for (auto a = added.begin(); a != added.end();) {
      const auto id = FileIdFromPath(*a);
      auto r = std::find_if(removed.begin(), removed.end(),
                            [&](const std::string& path) { return id && live_group[path] == *id; });
      if (r != removed.end()) {
        pairs.emplace_back(*r, *a);
        removed.erase(r);
        a = added.erase(a);
      } else {
        ++a;
      }
    }
    std::sort(removed.begin(), removed.end());
    std::sort(added.begin(), added.end());
    const size_t n = std::min(removed.size(), added.size());
    for (size_t i = 0; i < n; ++i) pairs.emplace_back(removed[i], added[i]);

    Json stats = Json::array();
    auto add_stat = [&](const std::string& path, const std::string& file_id,
                        const std::string& prev) {
      const InternalDataFile& file = change.files_added.at(path);
      stats.push_back({{"fileId", file_id},
                       {"fileSizeInBytes", file.file_size_bytes},
                       {"numWrites", file.record_count},
                       {"path", path},
                       {"prevCommit", prev}});
    };
    for (const auto& [r, a] : pairs) {
      const std::string& id = live_group[r];
      add_stat(a, id, folded.groups.at(id).instant);
    }
    for (size_t i = n; i < added.size(); ++i) {
      auto id = FileIdFromPath(added[i]);
      // Seeded ids can repeat across runs; a group id is never reused.
      while (!id || used_ids.count(*id) > 0) id = impl_->ids.Uuid();
      used_ids.insert(*id);
      add_stat(added[i], *id, std::string(kNullCommit));
    }
    if (!stats.empty()) writes[part] = stats;
    Json ids = Json::array();
    for (size_t i = n; i < removed.size(); ++i) ids.push_back(live_group[removed[i]]);
    if (!ids.empty()) replaced[part] = ids;
  }

  std::string operation;
  switch (ClassifyChange(live, change)) {
    case ChangeKind::kAppend:
    case ChangeKind::kEmpty: operation = "INSERT"; break;
    case ChangeKind::kDelete: operation = "DELETE"; break;
    case ChangeKind::kOverwrite: operation = "UPSERT"; break;
  }
  Json extra = {{"schema", Canonical(internal::SchemaToJson(schema))}};
  if (!source_tag.empty()) extra[std::string(kTagKey)] = source_tag;
  Json body = {{"extraMetadata", extra},
               {"operationType", operation},
               {"partitionToWriteStats", writes}};
  const std::string action = replaced.empty() ? "commit" : "replacecommit";
  if (!replaced.empty()) body["partitionToReplaceFileIds"] = replaced;

  const std::string text = Canonical(body);
  const StoragePath path = impl_->Dir(base).Join(instant + "." + action);
  if (impl_->storage.PutIfAbsent(path, text) == PutOutcome::kAlreadyExists) {
    Fail(ErrorCode::kConcurrentCommit, "Hudi instant " + instant + " was published concurrently at " +
                                           base.ToString());
  }
  impl_->Remember(base, ParseInstant(instant, action, text, path.ToString()));
  return {instant, 1};
}

}  // namespace xtable
