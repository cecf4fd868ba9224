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

#include "xtable/format.h"

#include <cstdio>

#include "xtable/delta.h"
#include "xtable/hudi.h"
#include "xtable/iceberg.h"

namespace xtable {

IdSource::IdSource() : rng_(std::random_device{}()), seeded_(false), seed_(0) {}

IdSource::IdSource(uint64_t seed) : rng_(seed), seeded_(true), seed_(seed) {}

uint64_t IdSource::Next() {
  std::lock_guard lock(mu_);
  return rng_();
}

std::string IdSource::Uuid() {
  uint64_t hi, lo;
  {
    std::lock_guard lock(mu_);
    hi = rng_();
    lo = rng_();
  }
  // RFC 4122 version 4 layout.
  hi = (hi & 0xffffffffffff0fffULL) | 0x0000000000004000ULL;
  lo = (lo & 0x3fffffffffffffffULL) | 0x8000000000000000ULL;
  char buf[37];
  std::snprintf(buf, sizeof(buf), "%08llx-%04llx-%04llx-%04llx-%012llx",
                static_cast<unsigned long long>(hi >> 32),
                static_cast<unsigned long long>((hi >> 16) & 0xffff),
                static_cast<unsigned long long>(hi & 0xffff),
                static_cast<unsigned long long>(lo >> 48),
                static_cast<unsigned long long>(lo & 0xffffffffffffULL));
  return buf;
}

std::map<std::string, std::string> TableFormat::ReadSourceTags(const StoragePath& base) {
  std::map<std::string, std::string> tags;
  for (const auto& commit : ReadHistory(base)) {
    if (commit.source_tag) tags[commit.token] = *commit.source_tag;
  }
  return tags;
}

std::unique_ptr<TableFormat> MakeFormat(Format format, Storage& storage, IdSource& ids) {
  switch (format) {
    case Format::kDelta: return std::make_unique<DeltaFormat>(storage, ids);
    case Format::kIceberg: return std::make_unique<IcebergFormat>(storage, ids);
    case Format::kHudi: return std::make_unique<HudiFormat>(storage, ids);
  }
  return nullptr;
}

ChangeKind ClassifyChange(const FileSet& live_before, const TableChange& change) {
  if (change.files_added.empty() && change.files_removed.empty()) return ChangeKind::kEmpty;
  if (change.files_removed.empty()) return ChangeKind::kAppend;
  int64_t removed = 0, added = 0;
  for (const auto& path : change.files_removed) {
    auto it = live_before.find(path);
    if (it != live_before.end()) removed += it->second.record_count;
  }
  for (const auto& [path, file] : change.files_added) added += file.record_count;
  return added <= removed ? ChangeKind::kDelete : ChangeKind::kOverwrite;
}

}  // namespace xtable
