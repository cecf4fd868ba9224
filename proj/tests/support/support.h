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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xtable/format.h"
#include "xtable/harness/scenarios.h"
#include "xtable/harness/workload.h"
#include "xtable/storage.h"
#include "xtable/sync.h"

namespace xtable::testing {

/// Fresh directory under the system temp dir, removed on destruction unless
/// XTABLE_KEEP_SCRATCH is set.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& label);
  ~ScratchDir();
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& child) const { return path_ / child; }

 private:
  std::filesystem::path path_;
};

StoragePath PathOf(const std::filesystem::path& p);

/// Relative path -> file bytes for every regular file under root, skipping
/// relative paths listed in `exclude`.
std::map<std::string, std::string> TreeSnapshot(const std::filesystem::path& root,
                                                const std::vector<std::string>& exclude = {});

/// The (source, target) pairs with source != target.
std::vector<std::pair<Format, Format>> DirectedPairs();

std::vector<Format> OtherFormats(Format format);

/// A source table written by the harness through its own storage, so the
/// translator's counters see only translator I/O.
struct SourceTable {
  LocalStorage storage;
  IdSource ids{7};
  std::unique_ptr<TableFormat> format;
  StoragePath base;
  harness::AppliedWorkload applied;
};

std::unique_ptr<SourceTable> BuildSource(Format format, const std::filesystem::path& dir,
                                         const std::vector<harness::WorkloadOp>& ops);

/// RunSync with seeded ids and the reports' errors folded into one string
/// (empty when every report is ok).
std::string SyncErrors(const std::vector<SyncReport>& reports);

std::vector<SyncReport> Sync(Storage& storage, Format source, const std::vector<Format>& targets,
                             const StoragePath& base, IdSource& ids,
                             std::optional<SyncMode> mode = std::nullopt);

/// Snapshot of `format` at base read through a fresh reader on `storage`.
InternalSnapshot ReadLatest(Storage& storage, Format format, const StoragePath& base);

std::string Join(const std::vector<std::string>& items, const std::string& sep = "; ");

}  // namespace xtable::testing
