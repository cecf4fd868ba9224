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
#include <string>
#include <vector>

#include "xtable/harness/workload.h"
#include "xtable/sync.h"

namespace xtable::harness {

struct ScenarioReport {
  std::vector<std::string> passed;
  std::vector<std::string> failures;

  bool ok() const { return failures.empty(); }
  /// Canonical JSON: {"failures":[...],"passed":[...]}.
  std::string ToJson() const;
};

/// Row-level differences between two scans; empty when equal.
std::vector<std::string> CompareScans(const ScanResult& expected, const ScanResult& actual);

/// One dataset, one source, the given targets.
SyncConfig SingleTableConfig(Format source, std::vector<Format> targets, const StoragePath& base);

/// Runs the three demonstration scenarios in fresh directories under
/// `workdir`, which must be empty or absent.
ScenarioReport AssertScenarios(const std::string& workdir, uint64_t seed = 1);

}  // namespace xtable::harness
