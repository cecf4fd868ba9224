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

#include <atomic>
#include <thread>

#include "gen.h"
#include "support.h"
#include "xtable/error.h"
#include "xtable/storage.h"

namespace xtable {
namespace {

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

TEST(ParseUri, Examples) {
  const StoragePath abfs = ParseUri("abfs://container@ac.dfs.core.windows.net/sales");
  EXPECT_EQ(abfs.scheme, "abfs");
  EXPECT_EQ(abfs.authority, "container@ac.dfs.core.windows.net");
  EXPECT_EQ(abfs.path, "/sales");
  EXPECT_EQ(abfs.ToString(), "abfs://container@ac.dfs.core.windows.net/sales");

  const StoragePath bare = ParseUri("/tmp/sales/");
  EXPECT_EQ(bare.scheme, "file");
  EXPECT_EQ(bare.authority, "");
  EXPECT_EQ(bare.path, "/tmp/sales");

  EXPECT_EQ(ParseUri("file:///a//b/").path, "/a/b");
  EXPECT_EQ(ParseUri("s3://bucket/t").scheme, "s3");
  EXPECT_EQ(ParseUri("gs://bucket/t").scheme, "gs");
}

TEST(ParseUri, Errors) {
  EXPECT_EQ(CodeOf([] { ParseUri(""); }), ErrorCode::kMalformedUri);
  EXPECT_EQ(CodeOf([] { ParseUri("/a/../b"); }), ErrorCode::kMalformedUri);
  EXPECT_EQ(CodeOf([] { ParseUri("hdfs://nn/t"); }), ErrorCode::kMalformedUri);
  EXPECT_EQ(CodeOf([] { ParseUri("file://"); }), ErrorCode::kMalformedUri);
}

TEST(StoragePath, JoinAndParent) {
  const StoragePath base = ParseUri("/tmp/sales");
  EXPECT_EQ(base.Join("_delta_log/0.json").path, "/tmp/sales/_delta_log/0.json");
  EXPECT_EQ(base.Join("a/b").Parent(), base.Join("a"));
  EXPECT_EQ(base.Name(), "sales");
}

TEST(LocalStorage, OnlyFileSchemeExecutes) {
  LocalStorage storage;
  EXPECT_EQ(CodeOf([&] { storage.ReadFile(ParseUri("abfs://c@a.dfs.core.windows.net/x")); }),
            ErrorCode::kUnsupportedScheme);
}

TEST(LocalStorage, PutIfAbsent) {
  ScratchDir dir("storage");
  LocalStorage storage;
  const StoragePath p = PathOf(dir / "deep/x.json");
  const std::string first(100, 'a');
  EXPECT_EQ(storage.PutIfAbsent(p, first), PutOutcome::kCreated);
  EXPECT_EQ(storage.ReadFile(p), first);
  EXPECT_EQ(storage.PutIfAbsent(p, "second"), PutOutcome::kAlreadyExists);
  EXPECT_EQ(storage.ReadFile(p), first);
  // No temp siblings survive a publish.
  EXPECT_EQ(storage.ListDir(PathOf(dir / "deep")), std::vector<std::string>{"x.json"});
}

TEST(LocalStorage, PutIfAbsentRaceHasOneWinner) {
  ScratchDir dir("race");
  LocalStorage storage;
  for (int round = 0; round < 5; ++round) {
    const StoragePath p = PathOf(dir / ("r" + std::to_string(round)));
    std::atomic<int> created{0}, existing{0};
    std::atomic<bool> go{false};
    std::vector<std::thread> threads;
    for (int i = 0; i < 64; ++i) {
      threads.emplace_back([&, i] {
        while (!go.load()) std::this_thread::yield();
        const auto outcome = storage.PutIfAbsent(p, "writer-" + std::to_string(i));
        (outcome == PutOutcome::kCreated ? created : existing)++;
      });
    }
    go = true;
    for (auto& t : threads) t.join();
    EXPECT_EQ(created.load(), 1);
    EXPECT_EQ(existing.load(), 63);
    EXPECT_EQ(storage.ReadFile(p).rfind("writer-", 0), 0u);
  }
}

TEST(LocalStorage, ReplaceIsAtomicForReaders) {
  ScratchDir dir("replace");
  LocalStorage storage;
  const StoragePath p = PathOf(dir / "hint");
  const std::string a(10, 'a'), b(20, 'b');
  EXPECT_TRUE(storage.WriteReplaceAtomic(p, a));  // absent path: behaves as create
  EXPECT_FALSE(storage.WriteReplaceAtomic(p, a));
  std::atomic<bool> done{false};
  std::atomic<int> torn{0}, reads{0};
  std::thread reader([&] {
    while (!done.load()) {
      const std::string got = storage.ReadFile(p);
      if (got != a && got != b) ++torn;
      ++reads;
    }
  });
  for (int i = 0; i < 2000; ++i) storage.WriteReplaceAtomic(p, i % 2 ? a : b);
  done = true;
  reader.join();
  EXPECT_EQ(torn.load(), 0);
  EXPECT_GT(reads.load(), 0);
}

TEST(LocalStorage, ListDirSortedAndErrors) {
  ScratchDir dir("list");
  LocalStorage storage;
  for (int v : {3, 0, 2, 1}) {
    char name[32];
    std::snprintf(name, sizeof name, "%020d.json", v);
    storage.PutIfAbsent(PathOf(dir / "_delta_log" / name), "{}");
  }
  const auto names = storage.ListDir(PathOf(dir / "_delta_log"));
  ASSERT_EQ(names.size(), 4u);
  EXPECT_TRUE(std::is_sorted(names.begin(), names.end()));
  EXPECT_EQ(names.front(), "00000000000000000000.json");
  std::filesystem::create_directories(dir / "empty");
  EXPECT_TRUE(storage.ListDir(PathOf(dir / "empty")).empty());
  EXPECT_EQ(CodeOf([&] { storage.ListDir(PathOf(dir / "missing")); }), ErrorCode::kNotFound);
  EXPECT_EQ(CodeOf([&] { storage.ReadFile(PathOf(dir / "missing")); }), ErrorCode::kNotFound);
}

TEST(IoTracker, LongestPrefixAttribution) {
  ScratchDir dir("tracker");
  LocalStorage storage;
  const StoragePath base = PathOf(dir.path());
  RegisterTablePrefixes(storage, base);
  storage.PutIfAbsent(base.Join("p=1/f.data"), "12345");
  storage.PutIfAbsent(base.Join("_delta_log/0.json"), "{}");
  storage.ReadFile(base.Join("p=1/f.data"));
  storage.ReadFile(base.Join("_delta_log/0.json"));
  storage.ReadFile(base.Join("_delta_log/0.json"));
  const StorageStats stats = storage.stats();
  EXPECT_EQ(stats.Reads(PrefixClass::kData), (IoCounter{1, 5}));
  EXPECT_EQ(stats.Reads(PrefixClass::kMetadata), (IoCounter{2, 4}));
  EXPECT_EQ(stats.ReadsUnder(base.Join("_delta_log").path), (IoCounter{2, 4}));
  EXPECT_EQ(stats.Writes(PrefixClass::kData).opens, 1u);
  // A sibling whose name merely starts with the base is not under it.
  storage.PutIfAbsent(PathOf(dir.path().string() + "-other/x"), "zz");
  storage.ReadFile(PathOf(dir.path().string() + "-other/x"));
  EXPECT_EQ(storage.stats().Reads(PrefixClass::kData), (IoCounter{1, 5}));
}

// Counters attribute every read to exactly one class, by construction of paths.
TEST(IoTrackerProperty, ReadsPartitionByClass) {
  ScratchDir dir("tracker-prop");
  LocalStorage storage;
  const StoragePath base = PathOf(dir.path());
  RegisterTablePrefixes(storage, base);
  testing::Gen gen(17);
  const std::vector<std::string> roots = {"p=1", "p=2/q=3", "_delta_log", "metadata", ".hoodie",
                                          "_xtable", "_delta_logx"};
  IoCounter data, meta;
  for (int i = 0; i < 300; ++i) {
    const std::string root = gen.Pick(roots);
    const StoragePath p = base.Join(root + "/f" + std::to_string(gen.Below(20)));
    const std::string bytes(gen.Below(50), 'x');
    storage.WriteReplaceAtomic(p, bytes);
    const uint64_t n = storage.ReadFile(p).size();
    const bool is_meta = root == "_delta_log" || root == "metadata" || root == ".hoodie" ||
                         root == "_xtable";
    IoCounter& c = is_meta ? meta : data;
    ++c.opens;
    c.bytes += n;
  }
  const StorageStats stats = storage.stats();
  EXPECT_EQ(stats.Reads(PrefixClass::kData), data);
  EXPECT_EQ(stats.Reads(PrefixClass::kMetadata), meta);
}

TEST(FaultInjection, FailBeforeLeavesNothing) {
  ScratchDir dir("fault");
  LocalStorage inner;
  FaultInjectingStorage faulty(inner, {2, FaultMode::kFailBefore});
  faulty.PutIfAbsent(PathOf(dir / "a"), "1");
  EXPECT_EQ(CodeOf([&] { faulty.PutIfAbsent(PathOf(dir / "b"), "2"); }), ErrorCode::kIoFailure);
  EXPECT_TRUE(faulty.fired());
  EXPECT_FALSE(inner.Exists(PathOf(dir / "b")));
  // A crashed process writes nothing more.
  EXPECT_EQ(CodeOf([&] { faulty.PutIfAbsent(PathOf(dir / "c"), "3"); }), ErrorCode::kIoFailure);
  EXPECT_EQ(faulty.writes_seen(), 3u);
}

TEST(FaultInjection, TornReplaceKeepsOriginal) {
  ScratchDir dir("torn");
  LocalStorage inner;
  const StoragePath p = PathOf(dir / "hint");
  inner.WriteReplaceAtomic(p, "original");
  FaultInjectingStorage faulty(inner, {1, FaultMode::kTornWrite});
  EXPECT_EQ(CodeOf([&] { faulty.WriteReplaceAtomic(p, "replacement-bytes"); }),
            ErrorCode::kIoFailure);
  EXPECT_EQ(inner.ReadFile(p), "original");
  const auto names = inner.ListDir(PathOf(dir.path()));
  ASSERT_EQ(names.size(), 2u);
  EXPECT_TRUE(IsTempName(names[0]) || IsTempName(names[1]));
}

TEST(TempNames, Recognized) {
  const std::string t = TempNameFor("v2.metadata.json");
  EXPECT_TRUE(IsTempName(t));
  EXPECT_EQ(t.rfind(".v2.metadata.json.tmp-", 0), 0u);
  EXPECT_EQ(t.size(), std::string(".v2.metadata.json.tmp-").size() + 16);
  EXPECT_FALSE(IsTempName("v2.metadata.json"));
  EXPECT_FALSE(IsTempName(".hoodie"));
}

}  // namespace
}  // namespace xtable
