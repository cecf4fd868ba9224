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

#include "xtable/cli/commands.h"

#include <chrono>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "xtable/cli/config.h"
#include "xtable/format.h"

namespace xtable::cli {

using Json = nlohmann::json;

namespace {

std::string ReadConfigFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) Fail(ErrorCode::kConfigInvalid, "cannot read config file " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return text.str();
}

std::vector<SyncReport> RunOnce(Storage& storage, const SyncConfig& config,
                                std::optional<SyncMode> mode, Io io, bool& failed) {
  const auto reports = RunSync(storage, config, mode);
  failed = false;
  int translated = 0;
  for (const auto& r : reports) {
    io.out << r.table << " " << FormatName(r.source_format) << "->" << FormatName(r.target_format)
           << ": ";
    if (!r.ok()) {
      failed = true;
      io.out << "FAILED " << r.error << "\n";
      continue;
    }
    translated += r.translated();
    io.out << (r.mode ? SyncModeName(*r.mode) : "") << " ("
           << (r.reason ? PlanReasonName(*r.reason) : "") << "), " << r.translated()
           << " commits translated, " << r.skipped() << " skipped\n";
  }
  io.out << translated << " commits translated\n";
  return reports;
}

Json SchemaJson(const InternalSchema& schema) {
  Json fields = Json::array();
  for (const auto& f : schema.fields) {
    fields.push_back({{"id", f.field_id},
                      {"name", f.name},
                      {"nullable", f.nullable},
                      {"type", std::string(FieldTypeName(f.type))}});
  }
  return {{"fields", fields}, {"schema_id", schema.schema_id}};
}

Json InspectJson(Format format, const std::vector<CommitSummary>& history,
                 const InternalSnapshot& snap) {
  Json commits = Json::array();
  for (const auto& c : history) {
    Json j = {{"operation", c.operation}, {"timestamp_ms", c.timestamp_ms}, {"token", c.token}};
    if (c.source_tag) j["source_tag"] = *c.source_tag;
    commits.push_back(j);
  }
  const auto columns = PartitionColumnNames(snap.schema, snap.partition_spec);
  Json per_partition = Json::object();
  Json files = Json::array();
  for (const auto& [path, f] : snap.live_files) {
    const std::string part = PartitionPath(columns, f.partition_values);
    per_partition[part] = per_partition.value(part, 0) + 1;
    Json values = Json::object();
    for (const auto& [k, v] : f.partition_values) values[k] = v;
    files.push_back({{"file_size_bytes", f.file_size_bytes},
                     {"partition_values", values},
                     {"path", path},
                     {"record_count", f.record_count}});
  }
  return {{"commits", commits},
          {"format", std::string(FormatName(format))},
          {"live_files", files},
          {"partitions", {{"columns", columns}, {"files_per_partition", per_partition}}},
          {"schema", SchemaJson(snap.schema)}};
}

void InspectText(Format format, const std::vector<CommitSummary>& history,
                 const InternalSnapshot& snap, std::ostream& out) {
  out << "== " << FormatName(format) << " table '" << snap.table_name << "' as of "
      << snap.source_commit.token << "\n";
  out << "commits (" << history.size() << "):\n";
  for (const auto& c : history) {
    out << "  " << c.token << "  " << FormatTimestamp(TimestampMicros{c.timestamp_ms * 1000})
        << "  " << c.operation;
    if (c.source_tag) out << "  <- " << *c.source_tag;
    out << "\n";
  }
  out << "schema (id " << snap.schema.schema_id << "):\n";
  for (const auto& f : snap.schema.fields) {
    out << "  " << f.field_id << " " << f.name << " " << FieldTypeName(f.type)
        << (f.nullable ? "" : " NOT NULL") << "\n";
  }
  const auto columns = PartitionColumnNames(snap.schema, snap.partition_spec);
  out << "partition spec: ";
  if (columns.empty()) out << "(unpartitioned)";
  for (size_t i = 0; i < columns.size(); ++i) out << (i ? ", " : "") << "identity(" << columns[i] << ")";
  out << "\n";
  std::map<std::string, int> per_partition;
  for (const auto& [path, f] : snap.live_files) ++per_partition[PartitionPath(columns, f.partition_values)];
  out << "live files: " << snap.live_files.size() << "\n";
  for (const auto& [part, n] : per_partition) {
    out << "  " << (part.empty() ? "(root)" : part) << ": " << n << "\n";
  }
}

// Identity of each commit across formats: its source tag, or its own tag for
// commits native to the format.
std::vector<std::pair<std::string, std::string>> Identities(TableFormat& format,
                                                            const StoragePath& base) {
  std::vector<std::pair<std::string, std::string>> out;  // (identity, token)
  for (const auto& c : format.ReadHistory(base)) {
    if (c.token == format.CreationToken()) continue;
    out.emplace_back(c.source_tag ? *c.source_tag : FormatCommitId{format.format(), c.token}.Tag(),
                     c.token);
  }
  return out;
}

}  // namespace

int CmdSync(Storage& storage, const std::string& config_path, std::optional<SyncMode> mode, Io io) {
  SyncConfig config;
  try {
    config = ParseConfig(ReadConfigFile(config_path));
  } catch (const Error& e) {
    io.err << e.what() << "\n";
    return kExitUsage;
  }
  bool failed = false;
  RunOnce(storage, config, mode, io, failed);
  return failed ? kExitFailure : kExitOk;
}

int CmdWatch(Storage& storage, const std::string& config_path, double interval_seconds,
             const std::atomic<bool>& stop, Io io) {
  SyncConfig config;
  try {
    config = ParseConfig(ReadConfigFile(config_path));
  } catch (const Error& e) {
    io.err << e.what() << "\n";
    return kExitUsage;
  }
  const auto interval = std::chrono::milliseconds(
      static_cast<int64_t>(std::max(1.0, interval_seconds) * 1000.0));
  while (!stop.load()) {
    const auto next = std::chrono::steady_clock::now() + interval;
    bool failed = false;
    try {
      RunOnce(storage, config, std::nullopt, io, failed);
    } catch (const std::exception& e) {
      failed = true;
      io.err << "watch: sync failed: " << e.what() << "\n";
    }
    if (failed) io.err << "watch: some datasets failed; retrying next interval\n";
    io.out.flush();
    while (!stop.load() && std::chrono::steady_clock::now() < next) {
      std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
  }
  return kExitOk;
}

int CmdInspect(Storage& storage, const std::string& path, std::optional<Format> format,
               const std::optional<std::string>& as_of, bool json, Io io) {
  try {
    const StoragePath base = ParseUri(path);
    std::vector<Format> formats;
    const std::set<Format> detected = DetectFormats(storage, base);
    if (format) {
      IdSource probe_ids;
      if (!MakeFormat(*format, storage, probe_ids)->Exists(base)) {
        Fail(ErrorCode::kNoTable, "no " + std::string(FormatName(*format)) + " table at " + path);
      }
      formats.push_back(*format);
    } else {
      formats.assign(detected.begin(), detected.end());
    }
    if (formats.empty()) Fail(ErrorCode::kNoTable, "no table format detected at " + path);

    IdSource ids;
    Json docs = Json::array();
    for (Format f : formats) {
      auto reader = MakeFormat(f, storage, ids);
      const auto history = reader->ReadHistory(base);
      const InternalSnapshot snap = reader->ReadSnapshot(base, as_of);
      if (json) {
        docs.push_back(InspectJson(f, history, snap));
      } else {
        InspectText(f, history, snap, io.out);
      }
    }
    if (json) io.out << (docs.size() == 1 ? docs.front() : docs).dump() << "\n";
    return kExitOk;
  } catch (const Error& e) {
    io.err << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitFailure;
  }
}

int CmdDiff(Storage& storage, const std::string& path, const std::vector<Format>& formats,
            bool latest_common, Io io) {
  if (formats.size() < 2) {
    io.err << "diff needs at least two formats\n";
    return kExitUsage;
  }
  try {
    const StoragePath base = ParseUri(path);
    IdSource ids;
    std::vector<std::unique_ptr<TableFormat>> readers;
    for (Format f : formats) {
      readers.push_back(MakeFormat(f, storage, ids));
      if (!readers.back()->Exists(base)) {
        Fail(ErrorCode::kNoTable, "no " + std::string(FormatName(f)) + " table at " + path);
      }
    }
    std::vector<std::optional<std::string>> as_of(formats.size());
    if (latest_common) {
      std::vector<std::map<std::string, std::string>> ids_of;
      for (auto& r : readers) {
        std::map<std::string, std::string> m;
        for (const auto& [identity, token] : Identities(*r, base)) m[identity] = token;
        ids_of.push_back(std::move(m));
      }
      const auto first = Identities(*readers.front(), base);
      std::optional<std::string> common;
      for (auto it = first.rbegin(); it != first.rend() && !common; ++it) {
        bool everywhere = true;
        for (const auto& m : ids_of) everywhere = everywhere && m.count(it->first) > 0;
        if (everywhere) common = it->first;
      }
      if (!common) {
        io.out << "no commit is common to all formats\n";
        return kExitDifferent;
      }
      io.out << "comparing as of " << *common << "\n";
      for (size_t i = 0; i < readers.size(); ++i) as_of[i] = ids_of[i].at(*common);
    }
    std::vector<InternalSnapshot> snaps;
    for (size_t i = 0; i < readers.size(); ++i) {
      snaps.push_back(readers[i]->ReadSnapshot(base, as_of[i]));
    }
    bool different = false;
    for (size_t i = 1; i < snaps.size(); ++i) {
      const auto problems = SnapshotDifferences(snaps[0], snaps[i]);
      const std::string pair =
          std::string(FormatName(formats[0])) + " vs " + std::string(FormatName(formats[i]));
      if (problems.empty()) {
        io.out << pair << ": equal (" << snaps[0].live_files.size() << " live files)\n";
        continue;
      }
      different = true;
      io.out << pair << ": " << problems.size() << " difference(s)\n";
      for (const auto& p : problems) io.out << "  " << FormatName(formats[i]) << " " << p << "\n";
    }
    return different ? kExitDifferent : kExitOk;
  } catch (const Error& e) {
    io.err << e.what() << "\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitFailure;
  }
}

int Main(int argc, const char* const* argv, const std::atomic<bool>& stop, Io io) {
  CLI::App app{"Translate table format metadata between Delta, Iceberg and Hudi", "xtable"};
  app.require_subcommand(1);

  std::string config_path;
  std::string mode = "";
  auto* sync = app.add_subcommand("sync", "Translate every dataset in the config once");
  sync->add_option("--config", config_path, "Sync config YAML")->required();
  sync->add_option("--mode", mode, "Force a plan mode")->check(CLI::IsMember({"full", "incremental"}));

  double interval = 1.0;
  auto* watch = app.add_subcommand("watch", "Translate periodically until interrupted");
  watch->add_option("--config", config_path, "Sync config YAML")->required();
  watch->add_option("--interval", interval, "Seconds between runs (minimum 1)");

  std::string path;
  std::string format_flag = "auto";
  std::string as_of;
  bool json = false;
  auto* inspect = app.add_subcommand("inspect", "Show history, schema and live files");
  inspect->add_option("--path", path, "Table base path")->required();
  inspect->add_option("--format", format_flag, "DELTA, ICEBERG, HUDI or auto");
  inspect->add_option("--as-of", as_of, "Commit token to inspect");
  inspect->add_flag("--json", json, "Emit canonical JSON");

  std::string formats_flag;
  bool latest_common = false;
  auto* diff = app.add_subcommand("diff", "Compare the table across formats");
  diff->add_option("--path", path, "Table base path")->required();
  diff->add_option("--formats", formats_flag, "Comma-separated formats, at least two")->required();
  diff->add_flag("--as-of-latest-common", latest_common,
                 "Compare at the latest commit present in every format");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    io.out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    io.err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  LocalStorage storage;
  if (*sync) {
    std::optional<SyncMode> m;
    if (mode == "full") m = SyncMode::kFullSnapshot;
    if (mode == "incremental") m = SyncMode::kIncremental;
    return CmdSync(storage, config_path, m, io);
  }
  if (*watch) return CmdWatch(storage, config_path, interval, stop, io);
  if (*inspect) {
    std::optional<Format> format;
    if (format_flag != "auto") {
      format = FormatFromName(format_flag);
      if (!format) {
        io.err << "unknown format '" << format_flag << "'\n" << app.help();
        return kExitUsage;
      }
    }
    return CmdInspect(storage, path, format,
                      as_of.empty() ? std::nullopt : std::optional<std::string>(as_of), json, io);
  }
  std::vector<Format> formats;
  std::stringstream list(formats_flag);
  for (std::string item; std::getline(list, item, ',');) {
    auto f = FormatFromName(item);
    if (!f) {
      io.err << "unknown format '" << item << "'\n" << app.help();
      return kExitUsage;
    }
    formats.push_back(*f);
  }
  return CmdDiff(storage, path, formats, latest_common, io);
}

}  // namespace xtable::cli
