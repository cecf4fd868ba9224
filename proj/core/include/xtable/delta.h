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

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "xtable/format.h"

namespace xtable {

/// Delta-style table: `_delta_log/%020d.json`, one JSON action per line.
class DeltaFormat final : public TableFormat {
 public:
  DeltaFormat(Storage& storage, IdSource& ids);
  ~DeltaFormat() override;

  Format format() const override { return Format::kDelta; }
  bool Exists(const StoragePath& base) override;

  InternalSnapshot ReadSnapshot(const StoragePath& base,
                                const std::optional<std::string>& as_of) override;
  std::string CreationToken() const override { return "0"; }
  std::string LatestToken(const StoragePath& base) override;
  std::vector<TableChange> ReadChangesSince(const StoragePath& base,
                                            const std::string& after_token,
                                            const InternalSchema* baseline) override;
  std::vector<CommitSummary> ReadHistory(const StoragePath& base) override;

  WriteOutcome Init(const StoragePath& base, const InternalSnapshot& table) override;
  WriteOutcome WriteChange(const StoragePath& base, const TableChange& change,
                           const std::string& source_tag) override;

  /// Versions present in the log, checked for contiguity from 0.
  std::vector<int64_t> ListVersions(const StoragePath& base);

  static std::string VersionFileName(int64_t version);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace xtable
