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

#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "json.hpp"
#include "support.h"
#include "xtable/error.h"
#include "xtable/hudi.h"

namespace xtable {
namespace {

using Json = nlohmann::json;
using testing::BuildSource;
using testing::PathOf;
using testing::ScratchDir;

std::string Slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

template <typename Fn>
ErrorCode CodeOf(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kInvalidArgument;
}

std::vector<std::string> Timeline(const std::filesystem::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : std::filesystem::directory_iterator(dir / ".hoodie")) {
    const std::string name = e.path().filename().string();
    if (name != "hoodie.properties") out.push_back(name);
  }
  std::sort(out.begin(), out.end());
  return out;
}

InternalDataFile File(const std::string& path, const std::string& part) {
  InternalDataFile f;
  f.rel_path = path;
  f.partition_values["s_type"] = part;
  f.record_count = 1;
  f.file_size_bytes = 3;
  return f;
}

TEST(HudiFormat, Instants) {
  EXPECT_EQ(InstantFromMillis(1704110400000), "20240101120000000");
  EXPECT_EQ(MillisFromInstant("20240101120000000"), 1704110400000);
  EXPECT_FALSE(MillisFromInstant("2024").has_value());
  EXPECT_EQ(HudiFormat::BaseFileName("g1", "20240101120000000"), "g1_0-1-0_20240101120000000.data");
  EXPECT_EQ(HudiFormat::FileIdFromPath("s_type=a/g1_0-1-0_20240101120000000.data"), "g1");
  EXPECT_FALSE(HudiFormat::FileIdFromPath("s_type=a/part-00000.data").has_value());
}

TEST(HudiFormat, SalesTableLayout) {
  ScratchDir dir("hudi-layout");
  auto src = BuildSource(Format::kHudi, dir.path(), harness::SalesWorkload());
  const std::string props = Slurp(dir / ".hoodie" / "hoodie.properties");
  EXPECT_NE(props.find("hoodie.table.partition.fields=s_type\n"), std::string::npos) << props;
  EXPECT_NE(props.find("hoodie.table.name=sales\n"), std::string::npos);
  EXPECT_NE(props.find("hoodie.table.type=COPY_ON_WRITE\n"), std::string::npos);
  const auto hudi = dynamic_cast<HudiFormat*>(src->format.get());
  const auto kv = hudi->ReadProperties(src->base);
  EXPECT_TRUE(std::is_sorted(kv.begin(), kv.end()));

  const auto timeline = Timeline(dir.path());
  ASSERT_EQ(timeline.size(), 2u);
  EXPECT_EQ(timeline[0], "20240101120001000.commit");
  EXPECT_EQ(timeline[1], "20240101120002000.commit");
  const Json del = Json::parse(Slurp(dir / ".hoodie" / timeline[1]));
  EXPECT_EQ(del["operationType"], "DELETE");
  // The delete writes a new slice of the rewritten group.
  const Json& stats = del["partitionToWriteStats"]["s_type=b"][0];
  EXPECT_EQ(stats["prevCommit"], "20240101120001000");
  EXPECT_EQ(stats["path"].get<std::string>().rfind("s_type=b/" + stats["fileId"].get<std::string>(), 0), 0u);

  const auto changes = src->format->ReadChangesSince(src->base, "20240101120001000", nullptr);
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0].files_added.size(), 1u);
  EXPECT_EQ(changes[0].files_removed.size(), 1u);
  for (const auto& [p, f] : src->format->ReadSnapshot(src->base, std::nullopt).live_files) {
    EXPECT_FALSE(f.column_stats.has_value());
  }
}

TEST(HudiFormat, PairingAndReplacement) {
  ScratchDir dir("hudi-pairs");
  LocalStorage storage;
  IdSource ids(4);
  HudiFormat hudi(storage, ids);
  const StoragePath base = PathOf(dir.path());
  InternalSnapshot table;
  table.table_name = "t";
  table.schema.fields = {{1, "s_id", FieldType::kInt32, false}, {2, "s_type", FieldType::kString, true}};
  table.partition_spec = {{2, PartitionTransform::kIdentity}};
  hudi.Init(base, table);

  TableChange insert;
  insert.schema = table.schema;
  insert.timestamp_ms = 1704110400000;
  for (auto p : {"s_type=a/x1.data", "s_type=a/x2.data", "s_type=b/y1.data"}) {
    InsertFile(insert.files_added, File(p, std::string(1, p[7])));
  }
  const std::string t1 = hudi.WriteChange(base, insert, "DELTA:1").token;
  EXPECT_EQ(t1, "20240101120000000");

  // Removes paired with adds in one partition, leftovers replaced.
  TableChange rewrite;
  rewrite.schema = table.schema;
  rewrite.timestamp_ms = 1704110400000;  // same millisecond: the clock still advances
  rewrite.files_removed = {"s_type=a/x1.data", "s_type=a/x2.data", "s_type=b/y1.data"};
  InsertFile(rewrite.files_added, File("s_type=a/x3.data", "a"));
  const std::string t2 = hudi.WriteChange(base, rewrite, "DELTA:2").token;
  EXPECT_EQ(t2, "20240101120000001");
  const Json commit = Json::parse(Slurp(dir / ".hoodie" / (t2 + ".replacecommit")));
  ASSERT_EQ(commit["partitionToWriteStats"]["s_type=a"].size(), 1u);
  EXPECT_EQ(commit["partitionToWriteStats"]["s_type=a"][0]["prevCommit"], t1);
  EXPECT_EQ(commit["partitionToReplaceFileIds"]["s_type=a"].size(), 1u);
  EXPECT_EQ(commit["partitionToReplaceFileIds"]["s_type=b"].size(), 1u);

  const auto snap = hudi.ReadSnapshot(base, std::nullopt);
  ASSERT_EQ(snap.live_files.size(), 1u);
  EXPECT_EQ(snap.live_files.begin()->first, "s_type=a/x3.data");
  const auto changes = hudi.ReadChangesSince(base, t1, nullptr);
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0].files_removed, rewrite.files_removed);

  // Lexicographic pairing: x1 is the group that continues into x3.
  const Json first = Json::parse(Slurp(dir / ".hoodie" / (t1 + ".commit")));
  std::string x1_id;
  for (const auto& s : first["partitionToWriteStats"]["s_type=a"]) {
    if (s["path"] == "s_type=a/x1.data") x1_id = s["fileId"];
  }
  EXPECT_EQ(commit["partitionToWriteStats"]["s_type=a"][0]["fileId"], x1_id);

  TableChange unknown;
  unknown.schema = table.schema;
  unknown.files_removed = {"s_type=b/never.data"};
  EXPECT_EQ(CodeOf([&] { hudi.WriteChange(base, unknown, ""); }), ErrorCode::kInvalidChange);
}

TEST(HudiFormat, NullPartitionSentinel) {
  ScratchDir dir("hudi-null");
  LocalStorage storage;
  IdSource ids(4);
  HudiFormat hudi(storage, ids);
  const StoragePath base = PathOf(dir.path());
  InternalSnapshot table;
  table.table_name = "t";
  table.schema.fields = {{1, "s_type", FieldType::kString, true}};
  table.partition_spec = {{1, PartitionTransform::kIdentity}};
  hudi.Init(base, table);
  TableChange insert;
  insert.schema = table.schema;
  insert.timestamp_ms = 1;
  InsertFile(insert.files_added, File("s_type=__null__/n.data", std::string(kNullToken)));
  hudi.WriteChange(base, insert, "");
  const auto snap = hudi.ReadSnapshot(base, std::nullopt);
  ASSERT_EQ(snap.live_files.size(), 1u);
  EXPECT_EQ(snap.live_files.begin()->second.partition_values.at("s_type"), kNullToken);
}

TEST(HudiFormat, TimelineErrors) {
  ScratchDir dir("hudi-bad");
  auto src = BuildSource(Format::kHudi, dir.path(), harness::SalesWorkload());
  LocalStorage storage;
  IdSource ids;
  HudiFormat hudi(storage, ids);
  EXPECT_EQ(CodeOf([&] { hudi.ReadChangesSince(src->base, "20240101120001500", nullptr); }),
            ErrorCode::kInstantNotFound);
  EXPECT_TRUE(hudi.ReadSnapshot(src->base, "20230101000000000").live_files.empty());
  std::ofstream(dir / ".hoodie" / "2024.commit") << "{}";
  EXPECT_EQ(CodeOf([&] { hudi.ReadSnapshot(src->base, std::nullopt); }),
            ErrorCode::kMalformedTimeline);
}

// Within every file group slice instants increase and each slice names its
// predecessor.
TEST(HudiFormatProperty, SliceChains) {
  for (uint64_t seed = 1; seed <= 5; ++seed) {
    ScratchDir dir("hudi-chains");
    BuildSource(Format::kHudi, dir.path(), harness::GenerateWorkload(seed, 30));
    std::map<std::string, std::string> last_instant;  // fileId -> instant
    for (const auto& name : Timeline(dir.path())) {
      const std::string instant = name.substr(0, 17);
      const Json c = Json::parse(Slurp(dir / ".hoodie" / name));
      for (const auto& [part, stats] : c["partitionToWriteStats"].items()) {
        for (const auto& s : stats) {
          const std::string id = s["fileId"];
          auto it = last_instant.find(id);
          ASSERT_EQ(s["prevCommit"], it == last_instant.end() ? "null" : it->second) << name;
          ASSERT_NE(s["path"].get<std::string>().find(instant), std::string::npos);
          last_instant[id] = instant;
        }
      }
    }
  }
}

}  // namespace
}  // namespace xtable
