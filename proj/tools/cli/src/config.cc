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

#include "xtable/cli/config.h"

#include <set>
#include <sstream>

#include <yaml-cpp/eventhandler.h>
#include <yaml-cpp/yaml.h>

namespace xtable::cli {

namespace {

[[noreturn]] void Invalid(int line, const std::string& message) {
  Fail(ErrorCode::kConfigInvalid, "line " + std::to_string(line) + ": " + message);
}

int LineOf(const YAML::Node& node) { return node.Mark().line + 1; }

// First pass over parser events: only plain mappings, sequences and scalars.
class SubsetChecker final : public YAML::EventHandler {
 public:
  void OnDocumentStart(const YAML::Mark&) override {}
  void OnDocumentEnd() override {}
  void OnNull(const YAML::Mark& mark, YAML::anchor_t anchor) override { Check(mark, anchor); }
  void OnAlias(const YAML::Mark& mark, YAML::anchor_t) override {
    Invalid(mark.line + 1, "aliases are not supported");
  }
  void OnScalar(const YAML::Mark& mark, const std::string&, YAML::anchor_t anchor,
                const std::string&) override {
    Check(mark, anchor);
  }
  void OnSequenceStart(const YAML::Mark& mark, const std::string&, YAML::anchor_t anchor,
                       YAML::EmitterStyle::value) override {
    Check(mark, anchor);
  }
  void OnSequenceEnd() override {}
  void OnMapStart(const YAML::Mark& mark, const std::string&, YAML::anchor_t anchor,
                  YAML::EmitterStyle::value) override {
    Check(mark, anchor);
  }
  void OnMapEnd() override {}
  void OnAnchor(const YAML::Mark& mark, const std::string&) override {
    Invalid(mark.line + 1, "anchors are not supported");
  }

 private:
  static void Check(const YAML::Mark& mark, YAML::anchor_t anchor) {
    if (anchor != YAML::NullAnchor) Invalid(mark.line + 1, "anchors are not supported");
  }
};

std::string Scalar(const YAML::Node& node, const std::string& field) {
  if (!node.IsScalar()) Invalid(LineOf(node), field + " must be a string");
  return node.Scalar();
}

Format ParseFormat(const YAML::Node& node, const std::string& field) {
  const std::string name = Scalar(node, field);
  auto format = FormatFromName(name);
  if (!format) {
    Invalid(LineOf(node), field + ": unknown format '" + name + "' (expected DELTA, ICEBERG or HUDI)");
  }
  return *format;
}

// Keys of a mapping, rejecting duplicates and anything outside `allowed`.
std::map<std::string, YAML::Node> Keys(const YAML::Node& map, const std::set<std::string>& allowed,
                                       const std::string& where) {
  std::map<std::string, YAML::Node> out;
  for (const auto& kv : map) {
    const std::string key = Scalar(kv.first, where + " key");
    if (allowed.count(key) == 0) Invalid(LineOf(kv.first), "unknown key '" + where + key + "'");
    if (!out.emplace(key, kv.second).second) {
      Invalid(LineOf(kv.first), "duplicate key '" + where + key + "'");
    }
  }
  return out;
}

}  // namespace

SyncConfig ParseConfig(std::string_view yaml) {
  const std::string text(yaml);
  YAML::Node root;
  try {
    std::istringstream in(text);
    YAML::Parser parser(in);
    SubsetChecker checker;
    int documents = 0;
    while (parser.HandleNextDocument(checker)) ++documents;
    if (documents > 1) Fail(ErrorCode::kConfigInvalid, "expected a single YAML document");
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    Invalid(e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) Invalid(root.IsDefined() ? LineOf(root) : 1, "config must be a mapping");

  const auto keys = Keys(root, {"sourceFormat", "targetFormats", "datasets"}, "");
  for (const char* required : {"sourceFormat", "targetFormats", "datasets"}) {
    if (keys.count(required) == 0) Invalid(LineOf(root), std::string("missing key '") + required + "'");
  }

  SyncConfig config;
  config.source_format = ParseFormat(keys.at("sourceFormat"), "sourceFormat");

  const YAML::Node& targets = keys.at("targetFormats");
  if (!targets.IsSequence()) Invalid(LineOf(targets), "targetFormats must be a list");
  if (targets.size() == 0) Invalid(LineOf(targets), "targetFormats must not be empty");
  std::set<Format> seen;
  for (const auto& t : targets) {
    const Format f = ParseFormat(t, "targetFormats");
    if (f == config.source_format) {
      Invalid(LineOf(t), "targetFormats: " + std::string(FormatName(f)) +
                             " is also the sourceFormat");
    }
    if (!seen.insert(f).second) {
      Invalid(LineOf(t), "targetFormats: " + std::string(FormatName(f)) + " listed twice");
    }
    config.target_formats.push_back(f);
  }

  const YAML::Node& datasets = keys.at("datasets");
  if (!datasets.IsSequence()) Invalid(LineOf(datasets), "datasets must be a list");
  std::set<StoragePath> paths;
  for (size_t i = 0; i < datasets.size(); ++i) {
    const YAML::Node d = datasets[i];
    const std::string where = "datasets[" + std::to_string(i) + "].";
    if (!d.IsMap()) Invalid(LineOf(d), where + " must be a mapping");
    const auto dk = Keys(d, {"tableBasePath", "tableName"}, where);
    if (dk.count("tableBasePath") == 0) Invalid(LineOf(d), "missing key '" + where + "tableBasePath'");
    DatasetConfig dataset;
    const YAML::Node& path = dk.at("tableBasePath");
    try {
      dataset.table_base_path = ParseUri(Scalar(path, where + "tableBasePath"));
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kConfigInvalid) throw;
      Invalid(LineOf(path), where + "tableBasePath: " + e.what());
    }
    if (!paths.insert(dataset.table_base_path).second) {
      Invalid(LineOf(path), where + "tableBasePath: duplicate path " +
                                dataset.table_base_path.ToString());
    }
    if (dk.count("tableName") > 0) {
      const std::string name = Scalar(dk.at("tableName"), where + "tableName");
      if (name.empty()) Invalid(LineOf(dk.at("tableName")), where + "tableName must not be empty");
      dataset.table_name = name;
    }
    config.datasets.push_back(std::move(dataset));
  }
  return config;
}

std::string ConfigToYaml(const SyncConfig& config) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "sourceFormat" << YAML::Value << std::string(FormatName(config.source_format));
  out << YAML::Key << "targetFormats" << YAML::Value << YAML::BeginSeq;
  for (Format f : config.target_formats) out << std::string(FormatName(f));
  out << YAML::EndSeq;
  out << YAML::Key << "datasets" << YAML::Value;
  if (config.datasets.empty()) {
    out << YAML::Flow << YAML::BeginSeq << YAML::EndSeq;
  } else {
    out << YAML::BeginSeq;
    for (const auto& d : config.datasets) {
      out << YAML::BeginMap;
      out << YAML::Key << "tableBasePath" << YAML::Value << YAML::DoubleQuoted
          << d.table_base_path.ToString();
      if (d.table_name) {
        out << YAML::Key << "tableName" << YAML::Value << YAML::DoubleQuoted << *d.table_name;
      }
      out << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace xtable::cli
