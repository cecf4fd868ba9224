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

#include "json_util.h"

namespace xtable::internal {

Json ParseJson(std::string_view text, ErrorCode code, const std::string& where) {
  try {
    return Json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::exception& e) {
    Fail(code, where + ": " + e.what());
  }
}

Json SchemaToJson(const InternalSchema& schema) {
  Json fields = Json::array();
  for (const auto& f : schema.fields) {
    fields.push_back({{"id", f.field_id},
                      {"name", f.name},
                      {"nullable", f.nullable},
                      {"type", std::string(FieldTypeName(f.type))}});
  }
  return {{"fields", fields}, {"schema_id", schema.schema_id}};
}

InternalSchema SchemaFromJson(const Json& j, ErrorCode code, const std::string& where) {
  InternalSchema schema;
  schema.schema_id = Get<int32_t>(j, "schema_id", code, where);
  for (const auto& f : Member(j, "fields", code, where)) {
    InternalField field;
    field.field_id = Get<int32_t>(f, "id", code, where);
    field.name = Get<std::string>(f, "name", code, where);
    field.nullable = Get<bool>(f, "nullable", code, where);
    auto type = FieldTypeFromName(Get<std::string>(f, "type", code, where));
    if (!type) Fail(code, where + ": unknown type for field " + field.name);
    field.type = *type;
    schema.fields.push_back(std::move(field));
  }
  return schema;
}

Json PartitionValuesToJson(const std::map<std::string, std::string>& values) {
  Json out = Json::object();
  for (const auto& [k, v] : values) {
    if (v == kNullToken) {
      out[k] = nullptr;
    } else {
      out[k] = v;
    }
  }
  return out;
}

std::map<std::string, std::string> PartitionValuesFromJson(const Json& j) {
  std::map<std::string, std::string> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    out[it.key()] = it.value().is_null() ? std::string(kNullToken) : it.value().get<std::string>();
  }
  return out;
}

const Json& JsonCache::Load(const StoragePath& path, ErrorCode code) {
  const std::string key = path.ToString();
  {
    std::lock_guard lock(mu_);
    auto it = docs_.find(key);
    if (it != docs_.end()) return it->second;
  }
  Json doc = ParseJson(storage_.ReadFile(path), code, key);
  std::lock_guard lock(mu_);
  return docs_.emplace(key, std::move(doc)).first->second;
}

void JsonCache::Put(const StoragePath& path, Json doc) {
  std::lock_guard lock(mu_);
  docs_.insert_or_assign(path.ToString(), std::move(doc));
}

void JsonCache::Clear() {
  std::lock_guard lock(mu_);
  docs_.clear();
}

}  // namespace xtable::internal
