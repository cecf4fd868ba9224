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

#include "support.h"
#include "xtable/error.h"
#include "xtable/sync.h"

namespace xtable {
namespace {

using testing::BuildSource;
using testing::DirectedPairs;
using testing::PathOf;
using testing::ReadLatest;
using testing::ScratchDir;
using testing::Sync;
using testing::SyncErrors;

constexpr const char* kInsert = "20240101120001000";
constexpr const char* kDelete = "20240101120002000";

struct Translator {
  LocalStorage storage;
  IdSource ids{11};
};

class PlanTest : public ::testing::Test {
 protected:
  void SetUp() override {
    src_ = BuildSource(Format::kHudi, dir_.path(), harness::SalesWorkload());
    source_ = MakeFormat(Format::kHudi, t_.storage, t_.ids);
    target_ = MakeFormat(Format::kDelta, t_.storage, t_.ids);
    log_ = std::make_unique<EventLog>(t_.storage, src_->base, false);
    ASSERT_EQ(testing::SyncErrors(Sync(t_.storage, Format::kHudi, {Format::kDelta}, src_->base, t_.ids)),
              "");
    job_ = std::make_unique<SyncJob>(
        SyncJob{t_.storage, src_->base, "sales", *source_, *target_, *log_});
  }

  ScratchDir dir_{"plan"};
  Translator t_;
  std::unique_ptr<testing::SourceTable> src_;
  std::unique_ptr<TableFormat> source_, target_;
  std::unique_ptr<EventLog> log_;
  std::unique_ptr<SyncJob> job_;
};

TEST_F(PlanTest, NoStatePlansFullSnapshot) {
  std::filesystem::remove_all(dir_ / "_delta_log");
  const SyncPlan plan = PlanSync(*job_, std::nullopt);
  EXPECT_EQ(plan.mode, SyncMode::kFullSnapshot);
  EXPECT_EQ(plan.reason, PlanReason::kNoState);
  ASSERT_TRUE(plan.snapshot.has_value());
  EXPECT_EQ(plan.snapshot->live_files.size(), 2u);
  EXPECT_EQ(plan.source_latest, kDelete);
}

TEST_F(PlanTest, StateBehindPlansBacklog) {
  SyncState state;
  state.source_format = Format::kHudi;
  state.target_format = Format::kDelta;
  state.last_translated_source_commit = kInsert;
  state.commit_map = {{kInsert, "1"}};
  const SyncPlan plan = PlanSync(*job_, state);
  EXPECT_EQ(plan.mode, SyncMode::kIncremental);
  EXPECT_EQ(plan.reason, PlanReason::kBacklogAvailable);
  ASSERT_EQ(plan.backlog.size(), 1u);
  EXPECT_EQ(plan.backlog[0].source_commit.token, kDelete);
  EXPECT_FALSE(plan.empty());
}

TEST_F(PlanTest, StateAtLatestPlansNothing) {
  SyncState state;
  state.source_format = Format::kHudi;
  state.target_format = Format::kDelta;
  state.last_translated_source_commit = kDelete;
  const SyncPlan plan = PlanSync(*job_, state);
  EXPECT_TRUE(plan.empty());
  EXPECT_TRUE(plan.backlog.empty());
  EXPECT_FALSE(plan.snapshot.has_value());
}

TEST_F(PlanTest, UnknownInstantFallsBackToFull) {
  SyncState state;
  state.source_format = Format::kHudi;
  state.target_format = Format::kDelta;
  state.last_translated_source_commit = "20240101120001500";
  const SyncPlan plan = PlanSync(*job_, state);
  EXPECT_EQ(plan.mode, SyncMode::kFullSnapshot);
  EXPECT_EQ(plan.reason, PlanReason::kStateStaleSourceUnavailable);
}

TEST_F(PlanTest, ForcedModes) {
  SyncState state;
  state.source_format = Format::kHudi;
  state.target_format = Format::kDelta;
  state.last_translated_source_commit = kInsert;
  EXPECT_EQ(PlanSync(*job_, state, SyncMode::kFullSnapshot).mode, SyncMode::kFullSnapshot);
  const SyncPlan all = PlanSync(*job_, std::nullopt, SyncMode::kIncremental);
  EXPECT_EQ(all.mode, SyncMode::kIncremental);
  EXPECT_EQ(all.backlog.size(), 2u);
  EXPECT_FALSE(all.init_table.has_value());
}

TEST(SyncState, PathAndRoundTrip) {
  EXPECT_EQ(StatePath(ParseUri("/tmp/sales"), Format::kHudi, Format::kDelta).path,
            "/tmp/sales/_xtable/state-HUDI-to-DELTA.json");
  ScratchDir dir("state");
  LocalStorage storage;
  const StoragePath base = PathOf(dir.path());
  SyncState state;
  state.source_format = Format::kIceberg;
  state.target_format = Format::kHudi;
  state.last_translated_source_commit = "12";
  state.commit_map = {{"2", "20240101120000000"}, {"12", "20240101120001000"}};
  EXPECT_FALSE(LoadState(storage, base, Format::kIceberg, Format::kHudi).has_value());
  EXPECT_TRUE(SaveState(storage, base, state));
  EXPECT_FALSE(SaveState(storage, base, state));
  EXPECT_EQ(LoadState(storage, base, Format::kIceberg, Format::kHudi), state);
  EXPECT_EQ(StateToJson(*LoadState(storage, base, Format::kIceberg, Format::kHudi)),
            StateToJson(state));
}

TEST(SyncState, CorruptStateWarnsAndSyncConverges) {
  ScratchDir dir("corrupt");
  auto src = BuildSource(Format::kHudi, dir.path(), harness::SalesWorkload());
  Translator t;
  ASSERT_EQ(SyncErrors(Sync(t.storage, Format::kHudi, {Format::kIceberg}, src->base, t.ids)), "");
  const StoragePath state = StatePath(src->base, Format::kHudi, Format::kIceberg);
  std::ofstream(state.path, std::ios::trunc) << "{\"last_translated";

  EventLog log(t.storage, src->base, false);
  EXPECT_FALSE(LoadState(t.storage, src->base, Format::kHudi, Format::kIceberg, &log).has_value());
  EXPECT_FALSE(log.events().empty());

  const auto reports = Sync(t.storage, Format::kHudi, {Format::kIceberg}, src->base, t.ids);
  ASSERT_EQ(SyncErrors(reports), "");
  EXPECT_EQ(reports[0].reason, PlanReason::kNoState);
  EXPECT_EQ(reports[0].translated(), 0);
  EXPECT_TRUE(SnapshotDifferences(ReadLatest(t.storage, Format::kHudi, src->base),
                                  ReadLatest(t.storage, Format::kIceberg, src->base))
                  .empty());
  EXPECT_TRUE(LoadState(t.storage, src->base, Format::kHudi, Format::kIceberg).has_value());
}

TEST(SyncState, DeletedStateFileIsANoOpFullSync) {
  ScratchDir dir("deleted");
  auto src = BuildSource(Format::kDelta, dir.path(), harness::SalesWorkload());
  Translator t;
  ASSERT_EQ(SyncErrors(Sync(t.storage, Format::kDelta, {Format::kHudi}, src->base, t.ids)), "");
  const auto history = MakeFormat(Format::kHudi, t.storage, t.ids)->ReadHistory(src->base);
  std::filesystem::remove(StatePath(src->base, Format::kDelta, Format::kHudi).path);
  const auto reports = Sync(t.storage, Format::kDelta, {Format::kHudi}, src->base, t.ids);
  ASSERT_EQ(SyncErrors(reports), "");
  EXPECT_EQ(reports[0].mode, SyncMode::kFullSnapshot);
  EXPECT_EQ(reports[0].translated(), 0);
  EXPECT_EQ(MakeFormat(Format::kHudi, t.storage, t.ids)->ReadHistory(src->base).size(),
            history.size());
}

TEST(Detect, FormatsAppearAsTheyAreWritten) {
  ScratchDir dir("detect");
  LocalStorage storage;
  EXPECT_TRUE(DetectFormats(storage, PathOf(dir.path())).empty());
  auto src = BuildSource(Format::kHudi, dir.path(), harness::SalesWorkload());
  EXPECT_EQ(DetectFormats(storage, src->base), std::set<Format>{Format::kHudi});
  IdSource ids(2);
  ASSERT_EQ(SyncErrors(Sync(storage, Format::kHudi, {Format::kDelta, Format::kIceberg}, src->base, ids)),
            "");
  EXPECT_EQ(DetectFormats(storage, src->base),
            (std::set<Format>{Format::kDelta, Format::kIceberg, Format::kHudi}));
}

TEST(RunSync, OneReportPerTargetAndNoneWithoutDatasets) {
  ScratchDir dir("reports");
  auto src = BuildSource(Format::kHudi, dir.path(), harness::SalesWorkload());
  Translator t;
  const auto reports = Sync(t.storage, Format::kHudi, {Format::kDelta, Format::kIceberg}, src->base, t.ids);
  ASSERT_EQ(reports.size(), 2u);
  EXPECT_EQ(reports[0].target_format, Format::kDelta);
  EXPECT_EQ(reports[1].target_format, Format::kIceberg);
  for (const auto& r : reports) {
    EXPECT_TRUE(r.ok()) << r.error;
    EXPECT_EQ(r.table, "sales");
  }
  SyncConfig empty;
  empty.source_format = Format::kHudi;
  empty.target_formats = {Format::kDelta};
  EXPECT_TRUE(RunSync(t.storage, empty).empty());
}

TEST(RunSync, MissingSourceIsReportedNotThrown) {
  ScratchDir dir("missing");
  Translator t;
  const auto reports = Sync(t.storage, Format::kDelta, {Format::kIceberg}, PathOf(dir.path()), t.ids);
  ASSERT_EQ(reports.size(), 1u);
  EXPECT_EQ(reports[0].error_code, ErrorCode::kSourceUnreadable);
  EXPECT_NE(reports[0].error.find("no DELTA table"), std::string::npos) << reports[0].error;
}

// The metadata_files_written counters over a run add up to the files the run
// created under the metadata directories.
TEST(TelemetryProperty, FilesWrittenMatchesNewFiles) {
  for (const auto& [source, target] : DirectedPairs()) {
    for (uint64_t seed = 1; seed <= 2; ++seed) {
      ScratchDir dir("telemetry");
      auto src = BuildSource(source, dir.path(), harness::GenerateWorkload(seed, 12));
      Translator t;
      for (auto mode : {std::optional<SyncMode>{}, std::optional<SyncMode>{SyncMode::kIncremental}}) {
        const auto before = testing::TreeSnapshot(dir.path(), {"_xtable/events.jsonl"});
        const auto reports = Sync(t.storage, source, {target}, src->base, t.ids, mode);
        ASSERT_EQ(SyncErrors(reports), "");
        const auto after = testing::TreeSnapshot(dir.path(), {"_xtable/events.jsonl"});
        uint64_t created = 0;
        for (const auto& [path, bytes] : after) created += before.count(path) == 0 ? 1 : 0;
        uint64_t counted = 0;
        for (const auto& e : reports[0].events) counted += e.counters.metadata_files_written;
        EXPECT_EQ(counted, created) << FormatName(source) << "->" << FormatName(target);
      }
    }
  }
}

TEST(Telemetry, EventsAppendToTheLog) {
  ScratchDir dir("events");
  auto src = BuildSource(Format::kIceberg, dir.path(), harness::SalesWorkload());
  Translator t;
  const auto reports = Sync(t.storage, Format::kIceberg, {Format::kDelta}, src->base, t.ids);
  ASSERT_EQ(SyncErrors(reports), "");
  std::ifstream in(EventLog::PathFor(src->base).path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  ASSERT_FALSE(lines.empty());
  EXPECT_EQ(lines.back(), EventToJson(reports[0].events.back()));
  for (const auto& e : reports[0].events) EXPECT_EQ(e.counters.data_bytes_read, 0u);
}

}  // namespace
}  // namespace xtable
