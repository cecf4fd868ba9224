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

#include "support.h"

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

namespace xtable::testing {

namespace fs = std::filesystem;

ScratchDir::ScratchDir(const std::string& label) {
  std::random_device rd;
  std::ostringstream name;
  name << "xtable-" << label << "-" << std::hex << ((uint64_t{rd()} << 32) | rd());
  path_ = fs::temp_directory_path() / name.str();
  fs::create_directories(path_);
}

ScratchDir::~ScratchDir() {
  if (std::getenv("XTABLE_KEEP_SCRATCH") != nullptr) return;
  std::error_code ec;
  fs::remove_all(path_, ec);
}

StoragePath PathOf(const fs::path& p) { return ParseUri(p.string()); }

std::map<std::string, std::string> TreeSnapshot(const fs::path& root,
                                                const std::vector<std::string>& exclude) {
  std::map<std::string, std::string> out;
  if (!fs::exists(root)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    const std::string rel = fs::relative(entry.path(), root).generic_string();
    if (std::find(exclude.begin(), exclude.end(), rel) != exclude.end()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream bytes;
    bytes << in.rdbuf();
    out[rel] = bytes.str();
  }
  return out;
}

std::vector<std::pair<Format, Format>> DirectedPairs() {
  std::vector<std::pair<Format, Format>> out;
  for (Format s : kAllFormats) {
    for (Format t : kAllFormats) {
      if (s != t) out.emplace_back(s, t);
    }
  }
  return out;
}

std::vector<Format> OtherFormats(Format format) {
  std::vector<Format> out;
  for (Format f : kAllFormats) {
    if (f != format) out.push_back(f);
  }
  return out;
}

std::unique_ptr<SourceTable> BuildSource(Format format, const fs::path& dir,
                                         const std::vector<harness::WorkloadOp>& ops) {
  auto t = std::make_unique<SourceTable>();
  t->format = MakeFormat(format, t->storage, t->ids);
  t->base = PathOf(dir);
  t->applied = harness::ApplyWorkload(t->storage, *t->format, t->base, ops);
  return t;
}

std::string SyncErrors(const std::vector<SyncReport>& reports) {
  std::vector<std::string> errors;
  for (const auto& r : reports) {
    if (!r.ok()) {
      errors.push_back(std::string(FormatName(r.source_format)) + "->" +
                       std::string(FormatName(r.target_format)) + ": " + r.error);
    }
  }
  return Join(errors);
}

std::vector<SyncReport> Sync(Storage& storage, Format source, const std::vector<Format>& targets,
                             const StoragePath& base, IdSource& ids,
                             std::optional<SyncMode> mode) {
  SyncOptions options;
  options.ids = &ids;
  return RunSync(storage, harness::SingleTableConfig(source, targets, base), mode, options);
}

InternalSnapshot ReadLatest(Storage& storage, Format format, const StoragePath& base) {
  IdSource ids;
  return MakeFormat(format, storage, ids)->ReadSnapshot(base, std::nullopt);
}

std::string Join(const std::vector<std::string>& items, const std::string& sep) {
  std::string out;
  for (const auto& s : items) out += (out.empty() ? "" : sep) + s;
  return out;
}

}  // namespace xtable::testing
