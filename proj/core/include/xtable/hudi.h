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
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "xtable/format.h"

namespace xtable {

/// Hudi-style copy-on-write table: `.hoodie/hoodie.properties` plus a timeline
/// of completed `<instant>.commit` / `<instant>.replacecommit` files.
class HudiFormat final : public TableFormat {
 public:
  HudiFormat(Storage& storage, IdSource& ids);
  ~HudiFormat() override;

  Format format() const override { return Format::kHudi; }
  bool Exists(const StoragePath& base) override;

  InternalSnapshot ReadSnapshot(const StoragePath& base,
                                const std::optional<std::string>& as_of) override;
  std::string CreationToken() const override { return std::string(kCreationInstant); }
  std::string LatestToken(const StoragePath& base) override;
  std::vector<TableChange> ReadChangesSince(const StoragePath& base,
                                            const std::string& after_token,
                                            const InternalSchema* baseline) override;
  std::vector<CommitSummary> ReadHistory(const StoragePath& base) override;

  WriteOutcome Init(const StoragePath& base, const InternalSnapshot& table) override;
  WriteOutcome WriteChange(const StoragePath& base, const TableChange& change,
                           const std::string& source_tag) override;

  /// The instant the next WriteChange with this timestamp will allocate:
  /// max(latest + 1ms, timestamp_ms).
  std::string NextInstant(const StoragePath& base, int64_t timestamp_ms);

  /// Key/value pairs of hoodie.properties.
  std::vector<std::pair<std::string, std::string>> ReadProperties(const StoragePath& base);

  /// Sorts before every real instant; the table as created.
  static constexpr std::string_view kCreationInstant = "00000000000000000";
  static constexpr std::string_view kWriteToken = "0-1-0";

  /// `<fileId>_<writeToken>_<instant>.data`
  static std::string BaseFileName(std::string_view file_id, std::string_view instant);
  /// File id encoded in a base file name, if the name follows the convention.
  static std::optional<std::string> FileIdFromPath(std::string_view rel_path);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Instants are UTC `yyyyMMddHHmmssSSS`.
std::string InstantFromMillis(int64_t epoch_ms);
std::optional<int64_t> MillisFromInstant(std::string_view instant);

}  // namespace xtable
