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

#include "xtable/harness/workload.h"

#include <algorithm>
#include <filesystem>
#include <random>

#include "xtable/error.h"
#include "xtable/hudi.h"

namespace xtable::harness {

namespace {

// Distribution helpers on raw engine output, so sequences do not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}
  uint64_t Below(uint64_t n) { return n == 0 ? 0 : engine_() % n; }
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  bool Chance(double p) { return Unit() < p; }

 private:
  std::mt19937_64 engine_;
};

InternalSchema BaseSchema() {
  InternalSchema s;
  s.schema_id = 0;
  s.fields = {
      {1, "id", FieldType::kInt64, false},
      {2, "category", FieldType::kString, true},
      {3, "bucket", FieldType::kInt32, true},
      {4, "amount", FieldType::kFloat64, true},
      {5, "flag", FieldType::kBool, true},
      {6, "day", FieldType::kDate, true},
      {7, "ts", FieldType::kTimestampMicros, true},
  };
  return s;
}

std::string RandomValue(Rng& rng, const InternalField& field, const WorkloadProfile& profile) {
  if (field.name == "category") {
    if (rng.Chance(0.05)) return std::string(kNullToken);
    return "c" + std::to_string(rng.Below(std::max(1, profile.partitions)));
  }
  if (field.nullable && rng.Chance(0.1)) return std::string(kNullToken);
  switch (field.type) {
    case FieldType::kBool: return RenderValue(rng.Below(2) == 1);
    case FieldType::kInt32: return RenderValue(static_cast<int32_t>(rng.Below(4)));
    case FieldType::kInt64: return RenderValue(static_cast<int64_t>(rng.Below(1000000)) - 500000);
    case FieldType::kFloat64:
      return RenderValue((static_cast<double>(rng.Below(200001)) - 100000.0) / 100.0);
    case FieldType::kString: return "s" + std::to_string(rng.Below(50));
    case FieldType::kDate: return RenderValue(Date{static_cast<int32_t>(19000 + rng.Below(1000))});
    case FieldType::kTimestampMicros:
      return RenderValue(
          TimestampMicros{1700000000000000LL + static_cast<int64_t>(rng.Below(10000000000000ULL))});
  }
  return std::string(kNullToken);
}

int ColumnIndex(const InternalSchema& schema, const std::string& name) {
  for (size_t i = 0; i < schema.fields.size(); ++i) {
    if (schema.fields[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

std::string Cell(const Row& row, int index) {
  return index >= 0 && static_cast<size_t>(index) < row.size() ? row[index]
                                                                : std::string(kNullToken);
}

Row Pad(Row row, size_t width) {
  row.resize(std::max(row.size(), width), std::string(kNullToken));
  return row;
}

std::vector<Row> Sorted(std::vector<Row> rows) {
  std::sort(rows.begin(), rows.end());
  return rows;
}

}  // namespace

std::vector<WorkloadOp> GenerateWorkload(uint64_t seed, int n_ops, const WorkloadProfile& profile) {
  Rng rng(seed);
  std::vector<WorkloadOp> ops;
  if (n_ops < 1) return ops;

  WorkloadOp create;
  create.kind = OpKind::kCreate;
  create.op_id = 0;
  create.table_name = "orders";
  create.schema = BaseSchema();
  create.partition_columns = {"category"};
  ops.push_back(create);

  InternalSchema schema = create.schema;
  std::vector<Row> rows;  // simulated contents, to aim deletes at real values
  int64_t next_id = 1;
  int extras = 0;
  bool have_delete = false;

  auto make_delete = [&](int op_id) {
    WorkloadOp op;
    op.kind = OpKind::kDelete;
    op.op_id = op_id;
    const double u = rng.Unit();
    op.predicate_column = u < 0.7 ? "bucket" : (u < 0.85 ? "category" : "id");
    const int col = ColumnIndex(schema, op.predicate_column);
    if (!rows.empty()) {
      op.predicate_value = Cell(rows[rng.Below(rows.size())], col);
    } else {
      op.predicate_value = RandomValue(rng, schema.fields[col], profile);
    }
    std::vector<Row> kept;
    for (auto& r : rows) {
      if (Cell(r, col) != op.predicate_value) kept.push_back(std::move(r));
    }
    rows = std::move(kept);
    have_delete = true;
    return op;
  };

  for (int i = 1; i < n_ops; ++i) {
    const bool force_delete =
        i == n_ops - 1 && !have_delete && profile.delete_ratio > 0 && n_ops >= 5;
    const double u = rng.Unit();
    if (force_delete || u < profile.delete_ratio) {
      ops.push_back(make_delete(i));
    } else if (u < profile.delete_ratio + profile.schema_evolution_ratio) {
      WorkloadOp op;
      op.kind = OpKind::kAddColumn;
      op.op_id = i;
      static constexpr FieldType kExtraTypes[] = {FieldType::kInt64, FieldType::kString,
                                                  FieldType::kFloat64};
      op.field = {schema.MaxFieldId() + 1, "extra_" + std::to_string(++extras),
                  kExtraTypes[extras % 3], true};
      schema.fields.push_back(op.field);
      ++schema.schema_id;
      for (auto& r : rows) r = Pad(std::move(r), schema.fields.size());
      ops.push_back(op);
    } else {
      WorkloadOp op;
      op.kind = OpKind::kInsert;
      op.op_id = i;
      op.fan_out = 1 + static_cast<int>(rng.Below(2));
      const uint64_t n = 1 + rng.Below(2 * std::max(1, profile.rows_per_insert));
      for (uint64_t k = 0; k < n; ++k) {
        Row r;
        for (const auto& f : schema.fields) {
          r.push_back(f.name == "id" ? std::to_string(next_id++) : RandomValue(rng, f, profile));
        }
        op.rows.push_back(r);
        rows.push_back(r);
      }
      ops.push_back(op);
    }
  }
  return ops;
}

std::vector<WorkloadOp> SalesWorkload() {
  WorkloadOp create;
  create.kind = OpKind::kCreate;
  create.op_id = 0;
  create.table_name = "sales";
  create.schema.fields = {{1, "s_id", FieldType::kInt32, false},
                          {2, "s_type", FieldType::kString, true}};
  create.partition_columns = {"s_type"};

  WorkloadOp insert;
  insert.kind = OpKind::kInsert;
  insert.op_id = 1;
  insert.rows = {{"1", "a"}, {"2", "b"}, {"3", "b"}};

  WorkloadOp del;
  del.kind = OpKind::kDelete;
  del.op_id = 2;
  del.predicate_column = "s_id";
  del.predicate_value = "3";
  return {create, insert, del};
}

// Cells holding a comma, quote or line break are quoted, with quotes doubled.
std::string EncodeCsv(const std::vector<std::string>& columns, const std::vector<Row>& rows) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i > 0) out += ',';
      const std::string& cell = cells[i];
      if (cell.find_first_of(",\"\r\n") == std::string::npos) {
        out += cell;
        continue;
      }
      out += '"';
      for (char ch : cell) {
        if (ch == '"') out += '"';
        out += ch;
      }
      out += '"';
    }
    out += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

void DecodeCsv(const std::string& text, std::vector<std::string>& columns, std::vector<Row>& rows) {
  columns.clear();
  rows.clear();
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  bool header = true;
  auto end_line = [&] {
    cells.push_back(std::move(cell));
    cell.clear();
    if (header) {
      columns = std::move(cells);
      header = false;
    } else {
      rows.push_back(std::move(cells));
    }
    cells.clear();
  };
  for (size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    if (quoted) {
      if (ch != '"') {
        cell += ch;
      } else if (i + 1 < text.size() && text[i + 1] == '"') {
        cell += '"';
        ++i;
      } else {
        quoted = false;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else if (ch == '\n') {
      end_line();
    } else {
      cell += ch;
    }
  }
  if (quoted) Fail(ErrorCode::kMissingDataFile, "unterminated quoted CSV cell");
  if (!cell.empty() || !cells.empty()) end_line();
}

std::vector<ColumnStat> ComputeStats(const InternalSchema& schema, const std::vector<Row>& rows) {
  std::vector<ColumnStat> out;
  for (size_t c = 0; c < schema.fields.size(); ++c) {
    const InternalField& f = schema.fields[c];
    ColumnStat stat;
    stat.field_id = f.field_id;
    bool any = false;
    for (const auto& r : rows) {
      const std::string v = Cell(r, static_cast<int>(c));
      if (v == kNullToken) {
        ++stat.null_count;
        continue;
      }
      if (!any || CompareCanonical(f.type, v, stat.min) < 0) stat.min = v;
      if (!any || CompareCanonical(f.type, v, stat.max) > 0) stat.max = v;
      any = true;
    }
    if (any) out.push_back(std::move(stat));
  }
  return out;
}

class WorkloadWriter::Applier {
 public:
  Applier(Storage& storage, TableFormat& format, const StoragePath& base,
          const ApplyOptions& options)
      : storage_(storage), format_(format), base_(base), options_(options), ids_(0x5eed) {}

  FormatCommitId Apply(const WorkloadOp& op) {
    switch (op.kind) {
      case OpKind::kCreate: Create(op); break;
      case OpKind::kInsert: Insert(op); break;
      case OpKind::kDelete: Delete(op); break;
      case OpKind::kAddColumn: AddColumn(op); break;
    }
    out_.table.schema = schema_;
    out_.table.rows.clear();
    for (const auto& [path, file] : live_) {
      for (const auto& r : file.rows) out_.table.rows.push_back(Pad(r, schema_.fields.size()));
    }
    out_.table.rows = Sorted(std::move(out_.table.rows));
    out_.table.history.emplace_back(op.op_id, out_.table.rows);
    return out_.commits.back();
  }

  const AppliedWorkload& result() const { return out_; }

 private:
  struct LiveFile {
    InternalDataFile meta;
    std::vector<Row> rows;  // aligned with schema_ at write time
  };

  int64_t Ts(const WorkloadOp& op) const { return options_.base_timestamp_ms + op.op_id * 1000LL; }

  void Create(const WorkloadOp& op) {
    if (created_) Fail(ErrorCode::kInvalidArgument, "CREATE must be the first and only first op");
    created_ = true;
    schema_ = op.schema;
    partition_columns_ = op.partition_columns;
    InternalSnapshot table;
    table.schema = schema_;
    table.table_name = op.table_name;
    table.timestamp_ms = Ts(op);
    for (const auto& col : partition_columns_) {
      const InternalField* f = schema_.FindByName(col);
      if (f == nullptr) Fail(ErrorCode::kInvalidArgument, "partition column " + col + " not in schema");
      table.partition_spec.push_back({f->field_id, PartitionTransform::kIdentity});
    }
    const WriteOutcome w = format_.Init(base_, table);
    out_.commits.push_back({format_.format(), w.token});
  }

  std::map<std::string, std::string> PartitionOf(const Row& row) const {
    std::map<std::string, std::string> values;
    for (const auto& col : partition_columns_) values[col] = Cell(row, ColumnIndex(schema_, col));
    return values;
  }

  // Name for a new data file; `continues` is the path it rewrites, if any.
  std::string NewPath(const std::string& partition, const WorkloadOp& op, int index,
                      const std::string& continues) {
    std::string name;
    if (auto* hudi = dynamic_cast<HudiFormat*>(&format_)) {
      std::optional<std::string> file_id;
      if (!continues.empty()) file_id = HudiFormat::FileIdFromPath(continues);
      if (!file_id) file_id = ids_.Uuid();
      if (instant_.empty()) instant_ = hudi->NextInstant(base_, Ts(op));
      name = HudiFormat::BaseFileName(*file_id, instant_);
    } else {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "part-%05d-%03d-", op.op_id, index);
      name = buf + ids_.Uuid() + ".data";
    }
    return partition.empty() ? name : partition + "/" + name;
  }

  InternalDataFile WriteFile(const std::string& rel_path,
                             const std::map<std::string, std::string>& partition,
                             const std::vector<Row>& rows) {
    std::vector<std::string> columns;
    for (const auto& f : schema_.fields) columns.push_back(f.name);
    const std::string payload = EncodeCsv(columns, rows);
    if (storage_.PutIfAbsent(base_.Join(rel_path), payload) == PutOutcome::kAlreadyExists) {
      Fail(ErrorCode::kIoFailure, "data file " + rel_path + " already exists");
    }
    InternalDataFile file;
    file.rel_path = rel_path;
    file.partition_values = partition;
    file.record_count = static_cast<int64_t>(rows.size());
    file.file_size_bytes = static_cast<int64_t>(payload.size());
    if (options_.with_stats) file.column_stats = ComputeStats(schema_, rows);
    out_.files[rel_path] = rows;
    return file;
  }

  void Commit(const WorkloadOp& op, TableChange change) {
    change.timestamp_ms = Ts(op);
    change.schema = schema_;
    const WriteOutcome w = format_.WriteChange(base_, change, "");
    out_.commits.push_back({format_.format(), w.token});
    instant_.clear();
  }

  void Insert(const WorkloadOp& op) {
    // Group rows by partition, keeping first-seen order.
    std::vector<std::string> order;
    std::map<std::string, std::vector<Row>> groups;
    std::map<std::string, std::map<std::string, std::string>> values;
    for (const auto& r : op.rows) {
      const Row row = Pad(r, schema_.fields.size());
      const auto pv = PartitionOf(row);
      const std::string part = PartitionPath(partition_columns_, pv);
      if (groups.count(part) == 0) order.push_back(part);
      groups[part].push_back(row);
      values[part] = pv;
    }
    TableChange change;
    int index = 0;
    std::vector<std::pair<std::string, LiveFile>> written;
    for (const auto& part : order) {
      const auto& rows = groups[part];
      const size_t k = static_cast<size_t>(std::max(1, op.fan_out));
      for (size_t c = 0; c < k; ++c) {
        const size_t lo = c * rows.size() / k, hi = (c + 1) * rows.size() / k;
        if (lo == hi) continue;
        std::vector<Row> chunk(rows.begin() + lo, rows.begin() + hi);
        const std::string path = NewPath(part, op, index++, "");
        InternalDataFile file = WriteFile(path, values[part], chunk);
        written.push_back({path, LiveFile{file, chunk}});
        InsertFile(change.files_added, std::move(file));
      }
    }
    Commit(op, std::move(change));
    for (auto& [path, f] : written) live_[path] = std::move(f);
  }

  void Delete(const WorkloadOp& op) {
    const int col = ColumnIndex(schema_, op.predicate_column);
    if (col < 0) {
      Fail(ErrorCode::kInvalidArgument, "DELETE references unknown column " + op.predicate_column);
    }
    TableChange change;
    std::vector<std::pair<std::string, LiveFile>> written;
    int index = 0;
    for (const auto& [path, file] : live_) {
      std::vector<Row> kept;
      for (const auto& r : file.rows) {
        if (Cell(r, col) != op.predicate_value) kept.push_back(Pad(r, schema_.fields.size()));
      }
      if (kept.size() == file.rows.size()) continue;
      change.files_removed.insert(path);
      if (kept.empty()) continue;
      const std::string part = PartitionPath(partition_columns_, file.meta.partition_values);
      const std::string new_path = NewPath(part, op, index++, path);
      InternalDataFile rewritten = WriteFile(new_path, file.meta.partition_values, kept);
      written.push_back({new_path, LiveFile{rewritten, kept}});
      InsertFile(change.files_added, std::move(rewritten));
    }
    const std::set<std::string> removed = change.files_removed;
    Commit(op, std::move(change));
    for (const auto& path : removed) live_.erase(path);
    for (auto& [path, f] : written) live_[path] = std::move(f);
  }

  void AddColumn(const WorkloadOp& op) {
    schema_.fields.push_back(op.field);
    ++schema_.schema_id;
    Commit(op, TableChange{});
  }

  Storage& storage_;
  TableFormat& format_;
  StoragePath base_;
  ApplyOptions options_;
  IdSource ids_;
  bool created_ = false;
  InternalSchema schema_;
  std::vector<std::string> partition_columns_;
  std::map<std::string, LiveFile> live_;
  std::string instant_;
  AppliedWorkload out_;
};

WorkloadWriter::WorkloadWriter(Storage& storage, TableFormat& format, const StoragePath& base,
                               const ApplyOptions& options)
    : impl_(std::make_unique<Applier>(storage, format, base, options)) {}

WorkloadWriter::~WorkloadWriter() = default;

FormatCommitId WorkloadWriter::Apply(const WorkloadOp& op) { return impl_->Apply(op); }

const AppliedWorkload& WorkloadWriter::result() const { return impl_->result(); }

AppliedWorkload ApplyWorkload(Storage& storage, TableFormat& format, const StoragePath& base,
                              const std::vector<WorkloadOp>& ops, const ApplyOptions& options) {
  WorkloadWriter writer(storage, format, base, options);
  for (const auto& op : ops) writer.Apply(op);
  return writer.result();
}

ScanResult ScanLive(Storage& data_storage, TableFormat& format, const StoragePath& base,
                    const std::optional<std::string>& as_of) {
  const InternalSnapshot snap = format.ReadSnapshot(base, as_of);
  ScanResult out;
  out.schema = snap.schema;
  out.live_files = snap.live_files;
  for (const auto& [path, file] : snap.live_files) {
    const StoragePath full = base.Join(path);
    if (!data_storage.Exists(full)) {
      Fail(ErrorCode::kMissingDataFile, "live file " + path + " is missing under " + base.ToString());
    }
    std::vector<std::string> columns;
    std::vector<Row> rows;
    DecodeCsv(data_storage.ReadFile(full), columns, rows);
    std::vector<int> index;
    for (const auto& f : snap.schema.fields) {
      auto it = std::find(columns.begin(), columns.end(), f.name);
      index.push_back(it == columns.end() ? -1 : static_cast<int>(it - columns.begin()));
    }
    for (const auto& r : rows) {
      Row aligned;
      for (int i : index) aligned.push_back(Cell(r, i));
      out.rows.push_back(std::move(aligned));
    }
  }
  out.rows = Sorted(std::move(out.rows));
  return out;
}

void CopyTree(const std::string& from, const std::string& to,
              const std::vector<std::string>& skip_top_level) {
  namespace fs = std::filesystem;
  fs::create_directories(to);
  for (const auto& entry : fs::directory_iterator(from)) {
    const std::string name = entry.path().filename().string();
    if (std::find(skip_top_level.begin(), skip_top_level.end(), name) != skip_top_level.end()) {
      continue;
    }
    fs::copy(entry.path(), fs::path(to) / name,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing);
  }
}

}  // namespace xtable::harness
