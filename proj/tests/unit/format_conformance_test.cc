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

// Contracts every table format satisfies, run against all three.

#include <gtest/gtest.h>

#include "support.h"
#include "xtable/error.h"

namespace xtable {
namespace {

using harness::GenerateWorkload;
using harness::ScanLive;
using testing::BuildSource;
using testing::Join;
using testing::PathOf;
using testing::ScratchDir;

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

class FormatContract : public ::testing::TestWithParam<Format> {
 protected:
  Format format() const { return GetParam(); }
};

std::string ParamName(const ::testing::TestParamInfo<Format>& info) {
  return std::string(FormatName(info.param));
}

TEST_P(FormatContract, MissingTable) {
  ScratchDir dir("missing");
  LocalStorage storage;
  IdSource ids(1);
  auto f = MakeFormat(format(), storage, ids);
  const StoragePath base = PathOf(dir.path());
  EXPECT_FALSE(f->Exists(base));
  EXPECT_EQ(CodeOf([&] { f->ReadSnapshot(base, std::nullopt); }), ErrorCode::kNoTable);
  EXPECT_EQ(CodeOf([&] { f->ReadHistory(base); }), ErrorCode::kNoTable);
}

TEST_P(FormatContract, InitTwiceIsTableExists) {
  ScratchDir dir("init");
  auto src = BuildSource(format(), dir.path(), harness::SalesWorkload());
  InternalSnapshot table = src->format->ReadSnapshot(src->base, src->format->CreationToken());
  EXPECT_EQ(CodeOf([&] { src->format->Init(src->base, table); }), ErrorCode::kTableExists);
}

TEST_P(FormatContract, SalesLifecycle) {
  ScratchDir dir("sales");
  auto src = BuildSource(format(), dir.path(), harness::SalesWorkload());
  const auto history = src->format->ReadHistory(src->base);
  EXPECT_EQ(history.size(), 3u);
  const InternalSnapshot latest = src->format->ReadSnapshot(src->base, std::nullopt);
  EXPECT_EQ(latest.table_name, "sales");
  EXPECT_EQ(latest.live_files.size(), 2u);
  EXPECT_EQ(PartitionColumnNames(latest.schema, latest.partition_spec),
            std::vector<std::string>{"s_type"});
  EXPECT_TRUE(ValidateSnapshot(latest).empty());
  const auto scan = ScanLive(src->storage, *src->format, src->base);
  EXPECT_EQ(scan.rows, (std::vector<harness::Row>{{"1", "a"}, {"2", "b"}}));

  // Created table: schema present, nothing live.
  const InternalSnapshot created = src->format->ReadSnapshot(src->base, src->format->CreationToken());
  EXPECT_TRUE(created.live_files.empty());
  EXPECT_EQ(created.schema.fields.size(), 2u);

  // The delete is one rewrite: one file out, one in.
  const auto changes = src->format->ReadChangesSince(src->base, history[1].token, nullptr);
  ASSERT_EQ(changes.size(), 1u);
  EXPECT_EQ(changes[0].files_added.size(), 1u);
  EXPECT_EQ(changes[0].files_removed.size(), 1u);
  EXPECT_TRUE(src->format->ReadChangesSince(src->base, history.back().token, nullptr).empty());
}

TEST_P(FormatContract, NativeTablesCarryNoSourceTags) {
  ScratchDir dir("tags");
  auto src = BuildSource(format(), dir.path(), harness::SalesWorkload());
  EXPECT_TRUE(src->format->ReadSourceTags(src->base).empty());
}

TEST_P(FormatContract, SourceTagsRoundTrip) {
  ScratchDir dir("tag-rt");
  auto src = BuildSource(format(), dir.path(), harness::SalesWorkload());
  TableChange change;
  change.schema = src->format->ReadSnapshot(src->base, std::nullopt).schema;
  change.timestamp_ms = 1704200000000;
  const WriteOutcome w = src->format->WriteChange(src->base, change, "HUDI:20240101120000000");
  const auto tags = src->format->ReadSourceTags(src->base);
  ASSERT_EQ(tags.size(), 1u);
  EXPECT_EQ(tags.begin()->first, w.token);
  EXPECT_EQ(tags.begin()->second, "HUDI:20240101120000000");
  EXPECT_EQ(src->format->LatestToken(src->base), w.token);
}

TEST_P(FormatContract, VersionAhead) {
  ScratchDir dir("ahead");
  auto src = BuildSource(format(), dir.path(), harness::SalesWorkload());
  const std::string ahead = format() == Format::kHudi ? "99991231235959999" : "999";
  EXPECT_EQ(CodeOf([&] { src->format->ReadChangesSince(src->base, ahead, nullptr); }),
            ErrorCode::kVersionAhead);
}

TEST_P(FormatContract, RemovingANonLiveFileIsInvalid) {
  ScratchDir dir("invalid");
  auto src = BuildSource(format(), dir.path(), harness::SalesWorkload());
  TableChange change;
  change.schema = src->format->ReadSnapshot(src->base, std::nullopt).schema;
  change.files_removed = {"s_type=a/missing.data"};
  const ErrorCode code =
      CodeOf([&] { src->format->WriteChange(src->base, change, "DELTA:9"); });
  EXPECT_TRUE(code == ErrorCode::kInvalidChange || code == ErrorCode::kUnpairableRemove)
      << ErrorCodeName(code);
}

// Every historical snapshot equals the logical oracle at that point, and
// snapshot(k) + changes_since(k) = snapshot(latest).
TEST_P(FormatContract, HistoryMatchesOracleAndPrefixProperty) {
  for (uint64_t seed : {1, 2, 3}) {
    ScratchDir dir("oracle");
    auto src = BuildSource(format(), dir.path(), GenerateWorkload(seed, 30));
    const auto& applied = src->applied;
    ASSERT_EQ(applied.commits.size(), applied.table.history.size());
    const InternalSnapshot latest = src->format->ReadSnapshot(src->base, std::nullopt);
    for (size_t i = 0; i < applied.commits.size(); ++i) {
      const std::string& token = applied.commits[i].token;
      const auto scan = ScanLive(src->storage, *src->format, src->base, token);
      ASSERT_EQ(scan.rows, applied.table.history[i].second) << "seed " << seed << " at " << token;

      InternalSnapshot folded = src->format->ReadSnapshot(src->base, token);
      for (const auto& c : src->format->ReadChangesSince(src->base, token, &folded.schema)) {
        ApplyChangeInPlace(folded.live_files, c);
        folded.schema = c.schema;
      }
      const auto diffs = SnapshotDifferences(latest, folded);
      ASSERT_TRUE(diffs.empty()) << "seed " << seed << " from " << token << ": " << Join(diffs);
    }
  }
}

TEST_P(FormatContract, EmptyInsertIsTolerated) {
  ScratchDir dir("empty-insert");
  auto ops = harness::SalesWorkload();
  harness::WorkloadOp empty = ops[1];
  empty.rows.clear();
  empty.op_id = 4;
  ops.push_back(empty);
  auto src = BuildSource(format(), dir.path(), ops);
  EXPECT_EQ(src->format->ReadHistory(src->base).size(), 4u);
  EXPECT_EQ(src->format->ReadSnapshot(src->base, std::nullopt).live_files.size(), 2u);
}

// Incremental reads of one new commit open O(1) metadata files regardless of
// history length.
TEST_P(FormatContract, IncrementalReadIsProportional) {
  ScratchDir dir("proportional");
  const auto ops = GenerateWorkload(8, 201);
  LocalStorage writer_storage;
  IdSource writer_ids(2);
  auto writer_format = MakeFormat(format(), writer_storage, writer_ids);
  const StoragePath base = PathOf(dir.path());
  harness::WorkloadWriter writer(writer_storage, *writer_format, base);
  for (size_t i = 0; i + 1 < ops.size(); ++i) writer.Apply(ops[i]);
  const Format target = format() == Format::kDelta ? Format::kIceberg : Format::kDelta;
  IdSource ids(3);
  {
    LocalStorage translator;
    ASSERT_EQ(testing::SyncErrors(testing::Sync(translator, format(), {target}, base, ids)), "");
  }
  writer.Apply(ops.back());
  LocalStorage translator;
  ASSERT_EQ(testing::SyncErrors(testing::Sync(translator, format(), {target}, base, ids)), "");
  const std::string dir_name = format() == Format::kDelta     ? "_delta_log"
                               : format() == Format::kIceberg ? "metadata"
                                                              : ".hoodie";
  const IoCounter source = translator.stats().ReadsUnder(base.Join(dir_name).path);
  EXPECT_LE(source.opens, 8u);
  EXPECT_GT(source.opens, 0u);
  EXPECT_EQ(translator.stats().Reads(PrefixClass::kData).opens, 0u);
}

INSTANTIATE_TEST_SUITE_P(AllFormats, FormatContract,
                         ::testing::Values(Format::kDelta, Format::kIceberg, Format::kHudi),
                         ParamName);

}  // namespace
}  // namespace xtable
