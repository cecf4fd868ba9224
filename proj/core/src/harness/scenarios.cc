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

#include "xtable/harness/scenarios.h"

#include <filesystem>

#include "json_util.h"

namespace xtable::harness {

namespace {

std::string RowText(const Row& row) {
  std::string out = "(";
  for (size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
  return out + ")";
}

class Checker {
 public:
  explicit Checker(ScenarioReport& report) : report_(report) {}

  void Expect(bool ok, const std::string& what) {
    if (ok) {
      report_.passed.push_back(what);
    } else {
      report_.failures.push_back(what);
    }
  }

  void ExpectNone(const std::vector<std::string>& problems, const std::string& what) {
    if (problems.empty()) {
      report_.passed.push_back(what);
      return;
    }
    std::string msg = what + ": " + problems.front();
    if (problems.size() > 1) msg += " (+" + std::to_string(problems.size() - 1) + " more)";
    report_.failures.push_back(msg);
  }

  bool ReportsOk(const std::vector<SyncReport>& reports, const std::string& what) {
    for (const auto& r : reports) {
      if (!r.ok()) {
        report_.failures.push_back(what + ": " + r.error);
        return false;
      }
    }
    report_.passed.push_back(what);
    return true;
  }

 private:
  ScenarioReport& report_;
};

// Isolated translator and harness storages keep data reads of the harness out
// of the translator's counters.
struct Env {
  LocalStorage translator;
  LocalStorage harness;
  IdSource ids;
  explicit Env(uint64_t seed) : ids(seed) {}
};

StoragePath PathOf(const std::filesystem::path& p) { return ParseUri(p.string()); }

void Scenario1(Env& env, const std::filesystem::path& dir, uint64_t seed, Checker& check) {
  const std::string name = "scenario1";
  for (int n_ops : {1, 20}) {
    const std::string label = name + "[n_ops=" + std::to_string(n_ops) + "]";
    const auto partner = dir / ("partner-" + std::to_string(n_ops));
    const StoragePath base = PathOf(partner);
    auto delta = MakeFormat(Format::kDelta, env.harness, env.ids);
    ApplyWorkload(env.harness, *delta, base, GenerateWorkload(seed, n_ops));
    auto reports = RunSync(env.translator,
                           SingleTableConfig(Format::kDelta, {Format::kHudi, Format::kIceberg}, base),
                           std::nullopt, {false, 1, &env.ids});
    if (!check.ReportsOk(reports, label + " import to HUDI+ICEBERG")) continue;

    auto original_reader = MakeFormat(Format::kDelta, env.harness, env.ids);
    const InternalSnapshot original = original_reader->ReadSnapshot(base, std::nullopt);
    const ScanResult original_scan = ScanLive(env.harness, *original_reader, base);
    for (Format via : {Format::kHudi, Format::kIceberg}) {
      const std::string via_name(FormatName(via));
      const auto fresh = dir / ("reexport-" + std::to_string(n_ops) + "-" + via_name);
      std::vector<std::string> skip = {"_delta_log", "_xtable"};
      if (via == Format::kHudi) skip.push_back("metadata");
      if (via == Format::kIceberg) skip.push_back(".hoodie");
      CopyTree(partner.string(), fresh.string(), skip);
      const StoragePath fresh_base = PathOf(fresh);
      auto back = RunSync(env.translator, SingleTableConfig(via, {Format::kDelta}, fresh_base),
                          std::nullopt, {false, 1, &env.ids});
      if (!check.ReportsOk(back, label + " re-export " + via_name + "->DELTA")) continue;
      auto reader = MakeFormat(Format::kDelta, env.harness, env.ids);
      check.ExpectNone(SnapshotDifferences(original, reader->ReadSnapshot(fresh_base, std::nullopt)),
                       label + " partner table equals re-export via " + via_name);
      check.ExpectNone(CompareScans(original_scan, ScanLive(env.harness, *reader, fresh_base)),
                       label + " partner rows equal re-export via " + via_name);
    }
  }
}

void Scenario2(Env& env, const std::filesystem::path& dir, uint64_t seed, Checker& check) {
  struct Table {
    std::string name;
    Format format;
  };
  for (const Table& t : {Table{"Stocks", Format::kHudi}, Table{"Crypto", Format::kIceberg}}) {
    const std::string label = "scenario2[" + t.name + "]";
    const StoragePath base = PathOf(dir / t.name);
    auto ops = GenerateWorkload(seed + (t.format == Format::kHudi ? 100 : 200), 15);
    ops.front().table_name = t.name;
    auto native = MakeFormat(t.format, env.harness, env.ids);
    ApplyWorkload(env.harness, *native, base, ops);
    std::vector<Format> targets;
    for (Format f : kAllFormats) {
      if (f != t.format) targets.push_back(f);
    }
    if (!check.ReportsOk(RunSync(env.translator, SingleTableConfig(t.format, targets, base),
                                 std::nullopt, {false, 1, &env.ids}),
                         label + " sync")) {
      continue;
    }
    const ScanResult expected = ScanLive(env.harness, *native, base);
    const std::set<Format> detected = DetectFormats(env.harness, base);
    check.Expect(detected.size() == 3, label + " readable in all formats");
    for (Format f : targets) {
      auto reader = MakeFormat(f, env.harness, env.ids);
      const InternalSnapshot snap = reader->ReadSnapshot(base, std::nullopt);
      check.Expect(snap.table_name == t.name, label + " is named " + t.name + " in " +
                                                  std::string(FormatName(f)) + " (got '" +
                                                  snap.table_name + "')");
      check.ExpectNone(CompareScans(expected, ScanLive(env.harness, *reader, base)),
                       label + " scan agrees in " + std::string(FormatName(f)));
    }
  }
}

// Stats are synthesized from the payloads of each added file and injected into
// the change stream between the Hudi reader and the Iceberg writer.
void Scenario3(Env& env, const std::filesystem::path& dir, uint64_t seed, Checker& check) {
  const std::string label = "scenario3";
  const StoragePath base = PathOf(dir / "hudi-stats");
  auto hudi = MakeFormat(Format::kHudi, env.harness, env.ids);
  const AppliedWorkload applied = ApplyWorkload(env.harness, *hudi, base, GenerateWorkload(seed + 300, 20));

  const InternalSnapshot hudi_snap = hudi->ReadSnapshot(base, std::nullopt);
  bool hudi_has_stats = false;
  for (const auto& [path, f] : hudi_snap.live_files) hudi_has_stats |= f.column_stats.has_value();
  check.Expect(!hudi_has_stats, label + " Hudi metadata carries no column stats");

  auto source = MakeFormat(Format::kHudi, env.translator, env.ids);
  auto iceberg = MakeFormat(Format::kIceberg, env.translator, env.ids);
  InternalSnapshot created = source->ReadSnapshot(base, source->CreationToken());
  iceberg->Init(base, created);
  for (TableChange change : source->ReadChangesSince(base, "", nullptr)) {
    FileSet with_stats;
    for (auto [path, file] : change.files_added) {
      std::vector<std::string> columns;
      std::vector<Row> rows;
      DecodeCsv(env.harness.ReadFile(base.Join(path)), columns, rows);
      std::vector<Row> aligned;
      for (const auto& r : rows) {
        Row a;
        for (const auto& f : change.schema.fields) {
          auto it = std::find(columns.begin(), columns.end(), f.name);
          a.push_back(it == columns.end() ? std::string(kNullToken) : r[it - columns.begin()]);
        }
        aligned.push_back(std::move(a));
      }
      file.column_stats = ComputeStats(change.schema, aligned);
      InsertFile(with_stats, std::move(file));
    }
    change.files_added = std::move(with_stats);
    iceberg->WriteChange(base, change, change.source_commit.Tag());
  }

  auto reader = MakeFormat(Format::kIceberg, env.harness, env.ids);
  const InternalSnapshot ice = reader->ReadSnapshot(base, std::nullopt);
  check.ExpectNone(SnapshotDifferences(hudi_snap, ice), label + " Iceberg live set equals Hudi");
  // Oracle: brute force over the rows the generator put in each file, under
  // the schema that was current when the file was written.
  std::vector<std::string> wrong;
  size_t bounded = 0;
  for (const auto& [path, file] : ice.live_files) {
    auto rows = applied.files.find(path);
    if (rows == applied.files.end()) {
      wrong.push_back(path + ": not written by the workload");
      continue;
    }
    InternalSchema at_write = ice.schema;
    if (!rows->second.empty()) at_write.fields.resize(rows->second.front().size());
    const auto expected = ComputeStats(at_write, rows->second);
    if (!file.column_stats) {
      wrong.push_back(path + ": no bounds");
    } else if (*file.column_stats != expected) {
      wrong.push_back(path + ": bounds differ from brute-force min/max");
    } else {
      bounded += expected.empty() ? 0 : 1;
    }
  }
  check.ExpectNone(wrong, label + " Iceberg lower/upper bounds equal brute-force min/max");
  check.Expect(ice.live_files.empty() || bounded > 0, label + " Iceberg bounds present");
}

}  // namespace

std::string ScenarioReport::ToJson() const {
  return internal::Canonical(internal::Json{{"failures", failures}, {"passed", passed}});
}

std::vector<std::string> CompareScans(const ScanResult& expected, const ScanResult& actual) {
  std::vector<std::string> out;
  if (!expected.schema.SameFields(actual.schema)) out.push_back("schemas differ");
  if (expected.rows.size() != actual.rows.size()) {
    out.push_back("row count " + std::to_string(expected.rows.size()) + " vs " +
                  std::to_string(actual.rows.size()));
  }
  for (size_t i = 0; i < std::min(expected.rows.size(), actual.rows.size()); ++i) {
    if (expected.rows[i] != actual.rows[i]) {
      out.push_back("row " + std::to_string(i) + ": " + RowText(expected.rows[i]) + " vs " +
                    RowText(actual.rows[i]));
      break;
    }
  }
  return out;
}

SyncConfig SingleTableConfig(Format source, std::vector<Format> targets, const StoragePath& base) {
  SyncConfig config;
  config.source_format = source;
  config.target_formats = std::move(targets);
  config.datasets.push_back({base, std::nullopt});
  return config;
}

ScenarioReport AssertScenarios(const std::string& workdir, uint64_t seed) {
  namespace fs = std::filesystem;
  ScenarioReport report;
  Checker check(report);
  Env env(seed);
  const fs::path root(workdir);
  struct Step {
    const char* name;
    void (*run)(Env&, const fs::path&, uint64_t, Checker&);
  };
  for (const Step& step : {Step{"scenario1", Scenario1}, Step{"scenario2", Scenario2},
                           Step{"scenario3", Scenario3}}) {
    const fs::path dir = root / step.name;
    fs::create_directories(dir);
    try {
      step.run(env, dir, seed, check);
    } catch (const std::exception& e) {
      report.failures.push_back(std::string(step.name) + ": " + e.what());
    }
  }
  return report;
}

}  // namespace xtable::harness
