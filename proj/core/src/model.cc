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

#include "xtable/model.h"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "xtable/error.h"

namespace xtable {

std::string_view FormatName(Format format) {
  switch (format) {
    case Format::kDelta: return "DELTA";
    case Format::kIceberg: return "ICEBERG";
    case Format::kHudi: return "HUDI";
  }
  return "?";
}

std::optional<Format> FormatFromName(std::string_view name) {
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Format f : kAllFormats) {
    if (FormatName(f) == upper) return f;
  }
  return std::nullopt;
}

const InternalField* InternalSchema::FindByName(std::string_view name) const {
  for (const auto& f : fields) {
    if (f.name == name) return &f;
  }
  return nullptr;
}

const InternalField* InternalSchema::FindById(int32_t id) const {
  for (const auto& f : fields) {
    if (f.field_id == id) return &f;
  }
  return nullptr;
}

int32_t InternalSchema::MaxFieldId() const {
  int32_t max_id = 0;
  for (const auto& f : fields) max_id = std::max(max_id, f.field_id);
  return max_id;
}

std::vector<std::string> PartitionColumnNames(const InternalSchema& schema,
                                              const PartitionSpec& spec) {
  std::vector<std::string> names;
  for (const auto& pf : spec) {
    const InternalField* field = schema.FindById(pf.source_field_id);
    if (field == nullptr) {
      Fail(ErrorCode::kInvalidArgument,
           "partition source field " + std::to_string(pf.source_field_id) + " not in schema");
    }
    names.push_back(field->name);
  }
  return names;
}

void InsertFile(FileSet& files, InternalDataFile file) {
  std::string key = file.rel_path;
  files.insert_or_assign(std::move(key), std::move(file));
}

std::string FormatCommitId::Tag() const {
  return std::string(FormatName(format)) + ":" + token;
}

std::optional<FormatCommitId> FormatCommitId::FromTag(std::string_view tag) {
  const auto colon = tag.find(':');
  if (colon == std::string_view::npos) return std::nullopt;
  auto format = FormatFromName(tag.substr(0, colon));
  if (!format) return std::nullopt;
  return FormatCommitId{*format, std::string(tag.substr(colon + 1))};
}

std::string PaddedToken(Format format, std::string_view token) {
  if (format == Format::kHudi || token.size() >= 20) return std::string(token);
  return std::string(20 - token.size(), '0') + std::string(token);
}

int CompareTokens(Format format, std::string_view a, std::string_view b) {
  const int c = PaddedToken(format, a).compare(PaddedToken(format, b));
  return c < 0 ? -1 : (c > 0 ? 1 : 0);
}

void ApplyChangeInPlace(FileSet& live, const TableChange& change) {
  for (const auto& path : change.files_removed) {
    if (live.find(path) == live.end()) {
      Fail(ErrorCode::kRemovedNotLive, "removed file is not live: " + path);
    }
  }
  for (const auto& [path, file] : change.files_added) {
    if (live.count(path) != 0 && change.files_removed.count(path) == 0) {
      Fail(ErrorCode::kDuplicateAdd, "added file is already live: " + path);
    }
    if (change.files_removed.count(path) != 0) {
      Fail(ErrorCode::kDuplicateAdd, "file both added and removed: " + path);
    }
  }
  for (const auto& path : change.files_removed) live.erase(path);
  for (const auto& [path, file] : change.files_added) live.emplace(path, file);
}

FileSet ApplyChange(const FileSet& live, const TableChange& change) {
  FileSet out = live;
  ApplyChangeInPlace(out, change);
  return out;
}

TableChange DiffFilesets(const FileSet& current, const FileSet& desired) {
  TableChange change;
  for (const auto& [path, file] : desired) {
    if (current.find(path) == current.end()) change.files_added.emplace(path, file);
  }
  for (const auto& [path, file] : current) {
    if (desired.find(path) == desired.end()) change.files_removed.insert(path);
  }
  return change;
}

std::vector<Violation> ValidateRelPath(std::string_view rel_path) {
  std::vector<Violation> out;
  const std::string subject(rel_path);
  if (rel_path.empty()) {
    out.push_back({subject, "empty path"});
    return out;
  }
  if (rel_path.front() == '/') out.push_back({subject, "path is absolute"});
  if (rel_path.find('\\') != std::string_view::npos) {
    out.push_back({subject, "path contains a backslash"});
  }
  std::string_view rest = rel_path;
  bool first = true;
  while (true) {
    const auto slash = rest.find('/');
    const auto segment = rest.substr(0, slash);
    if (segment == "..") out.push_back({subject, "path contains '..'"});
    if (first) {
      for (auto dir : {"_delta_log", "metadata", ".hoodie", "_xtable"}) {
        if (segment == dir) out.push_back({subject, "path is under metadata directory"});
      }
      first = false;
    }
    if (slash == std::string_view::npos) break;
    rest = rest.substr(slash + 1);
  }
  return out;
}

std::vector<Violation> ValidateSchema(const InternalSchema& schema) {
  std::vector<Violation> out;
  std::set<int32_t> ids;
  std::set<std::string> names;
  for (const auto& f : schema.fields) {
    const std::string subject = "schema.field[" + f.name + "]";
    if (f.field_id <= 0) out.push_back({subject, "field id must be positive"});
    if (f.name.empty()) out.push_back({subject, "field name is empty"});
    if (!ids.insert(f.field_id).second) {
      out.push_back({subject, "duplicate field id " + std::to_string(f.field_id)});
    }
    if (!names.insert(f.name).second) out.push_back({subject, "duplicate field name"});
  }
  if (schema.schema_id < 0) out.push_back({"schema", "negative schema id"});
  return out;
}

std::vector<Violation> ValidateSnapshot(const InternalSnapshot& snapshot) {
  std::vector<Violation> out = ValidateSchema(snapshot.schema);
  std::vector<std::string> columns;
  for (const auto& pf : snapshot.partition_spec) {
    const InternalField* field = snapshot.schema.FindById(pf.source_field_id);
    if (field == nullptr) {
      out.push_back({"partition_spec",
                     "source field " + std::to_string(pf.source_field_id) + " not in schema"});
    } else {
      columns.push_back(field->name);
    }
  }
  const std::set<std::string> expected(columns.begin(), columns.end());
  for (const auto& [key, file] : snapshot.live_files) {
    for (auto& v : ValidateRelPath(file.rel_path)) out.push_back(std::move(v));
    std::set<std::string> actual;
    for (const auto& [col, value] : file.partition_values) actual.insert(col);
    if (actual != expected) {
      out.push_back({file.rel_path, "partition keys do not match the partition spec"});
    }
    if (file.record_count < 0) out.push_back({file.rel_path, "negative record count"});
    if (file.file_size_bytes < 0) out.push_back({file.rel_path, "negative file size"});
    if (file.column_stats) {
      for (const auto& stat : *file.column_stats) {
        const InternalField* field = snapshot.schema.FindById(stat.field_id);
        const std::string subject =
            file.rel_path + "#stats[" + std::to_string(stat.field_id) + "]";
        if (field == nullptr) {
          out.push_back({subject, "stats for unknown field"});
          continue;
        }
        try {
          if (CompareCanonical(field->type, stat.min, stat.max) > 0) {
            out.push_back({subject, "min exceeds max"});
          }
        } catch (const Error& e) {
          out.push_back({subject, e.what()});
        }
        if (stat.null_count < 0) out.push_back({subject, "negative null count"});
      }
    }
  }
  // Keys are only a lookup aid; identity is the rel_path stored in the file.
  std::set<std::string> paths;
  for (const auto& [key, file] : snapshot.live_files) {
    if (!paths.insert(file.rel_path).second) {
      out.push_back({file.rel_path, "duplicate rel_path in live set"});
    }
  }
  return out;
}

std::vector<Violation> ValidateSchemaEvolution(const InternalSchema& before,
                                               const InternalSchema& after) {
  std::vector<Violation> out = ValidateSchema(after);
  if (after.fields.size() < before.fields.size()) {
    out.push_back({"schema", "fields were dropped"});
    return out;
  }
  for (size_t i = 0; i < before.fields.size(); ++i) {
    if (before.fields[i] != after.fields[i]) {
      out.push_back({"schema.field[" + before.fields[i].name + "]",
                     "existing field changed"});
    }
  }
  const int32_t old_max = before.MaxFieldId();
  for (size_t i = before.fields.size(); i < after.fields.size(); ++i) {
    if (after.fields[i].field_id <= old_max) {
      out.push_back({"schema.field[" + after.fields[i].name + "]",
                     "new field reuses an old field id"});
    }
  }
  if (after.fields.size() > before.fields.size() && after.schema_id <= before.schema_id) {
    out.push_back({"schema", "schema id did not increase"});
  }
  return out;
}

namespace {

std::string DescribeField(const InternalField& f) {
  std::ostringstream os;
  os << f.field_id << ":" << f.name << ":" << FieldTypeName(f.type)
     << (f.nullable ? "" : " not null");
  return os.str();
}

}  // namespace

std::vector<std::string> SnapshotDifferences(const InternalSnapshot& expected,
                                             const InternalSnapshot& actual) {
  std::vector<std::string> out;
  const auto& ef = expected.schema.fields;
  const auto& af = actual.schema.fields;
  for (size_t i = 0; i < std::max(ef.size(), af.size()); ++i) {
    if (i >= af.size()) {
      out.push_back("schema: missing field " + DescribeField(ef[i]));
    } else if (i >= ef.size()) {
      out.push_back("schema: unexpected field " + DescribeField(af[i]));
    } else if (ef[i] != af[i]) {
      out.push_back("schema: field " + DescribeField(ef[i]) + " != " + DescribeField(af[i]));
    }
  }
  std::vector<std::string> ep, ap;
  try {
    ep = PartitionColumnNames(expected.schema, expected.partition_spec);
    ap = PartitionColumnNames(actual.schema, actual.partition_spec);
  } catch (const Error& e) {
    out.push_back(std::string("partition spec: ") + e.what());
  }
  if (ep != ap) {
    auto join = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : ",") + x;
      return "[" + s + "]";
    };
    out.push_back("partition columns: " + join(ep) + " != " + join(ap));
  }
  for (const auto& [path, file] : expected.live_files) {
    auto it = actual.live_files.find(path);
    if (it == actual.live_files.end()) {
      out.push_back("missing file: " + path);
      continue;
    }
    if (it->second.record_count != file.record_count) {
      out.push_back("record count differs for " + path + ": " +
                    std::to_string(file.record_count) + " != " +
                    std::to_string(it->second.record_count));
    }
    if (file.column_stats && it->second.column_stats) {
      auto sorted = [](std::vector<ColumnStat> v) {
        std::sort(v.begin(), v.end(),
                  [](const ColumnStat& a, const ColumnStat& b) { return a.field_id < b.field_id; });
        return v;
      };
      if (sorted(*file.column_stats) != sorted(*it->second.column_stats)) {
        out.push_back("column stats differ for " + path);
      }
    }
  }
  for (const auto& [path, file] : actual.live_files) {
    if (expected.live_files.find(path) == expected.live_files.end()) {
      out.push_back("added file: " + path);
    }
  }
  return out;
}

std::string PartitionPath(const std::vector<std::string>& columns,
                          const std::map<std::string, std::string>& values) {
  std::string out;
  for (const auto& col : columns) {
    auto it = values.find(col);
    const std::string value = it == values.end() ? std::string(kNullToken) : it->second;
    if (!out.empty()) out += "/";
    out += col + "=" + value;
  }
  return out;
}

}  // namespace xtable
