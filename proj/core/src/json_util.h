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
#include <mutex>
#include <string>
#include <string_view>

#include "json.hpp"
#include "xtable/error.h"
#include "xtable/model.h"
#include "xtable/storage.h"

namespace xtable::internal {

using Json = nlohmann::json;

/// nlohmann::json keeps object keys in a std::map, so dump() without indent is
/// already the canonical form: sorted keys, no insignificant whitespace.
inline std::string Canonical(const Json& j) { return j.dump(); }

Json ParseJson(std::string_view text, ErrorCode code, const std::string& where);

/// Internal schema form, also embedded in Hudi metadata:
/// {"fields":[{"id","name","nullable","type"}],"schema_id":N}
Json SchemaToJson(const InternalSchema& schema);
InternalSchema SchemaFromJson(const Json& j, ErrorCode code, const std::string& where);

/// Partition values where kNullToken is spelled as JSON null.
Json PartitionValuesToJson(const std::map<std::string, std::string>& values);
std::map<std::string, std::string> PartitionValuesFromJson(const Json& j);

/// Memoizes parsed documents of immutable metadata files for one run.
class JsonCache {
 public:
  explicit JsonCache(Storage& storage) : storage_(storage) {}

  const Json& Load(const StoragePath& path, ErrorCode code);
  /// Seeds the cache with a document this process just published.
  void Put(const StoragePath& path, Json doc);
  void Clear();

 private:
  Storage& storage_;
  std::mutex mu_;
  std::map<std::string, Json> docs_;
};

template <typename T>
T Get(const Json& j, std::string_view key, ErrorCode code, const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) Fail(code, where + ": missing '" + std::string(key) + "'");
  try {
    return it->get<T>();
  } catch (const nlohmann::json::exception& e) {
    Fail(code, where + ": bad '" + std::string(key) + "': " + e.what());
  }
}

/// Like Get, without copying the member.
inline const Json& Member(const Json& j, std::string_view key, ErrorCode code,
                          const std::string& where) {
  auto it = j.find(key);
  if (it == j.end()) Fail(code, where + ": missing '" + std::string(key) + "'");
  return *it;
}

}  // namespace xtable::internal
