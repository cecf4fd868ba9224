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

#include <string>
#include <string_view>

#include "xtable/sync.h"

namespace xtable::cli {

/// Parses the sync config YAML:
///
///   sourceFormat: HUDI
///   targetFormats: [DELTA, ICEBERG]
///   datasets:
///     - tableBasePath: abfs://container@account.dfs.core.windows.net/sales
///       tableName: sales        # optional
///
/// Format names are case-insensitive. Unknown keys, anchors and aliases are
/// rejected. Throws kConfigInvalid with the line and field at fault.
SyncConfig ParseConfig(std::string_view yaml);

/// Block-style YAML that ParseConfig reads back to an equal config.
std::string ConfigToYaml(const SyncConfig& config);

}  // namespace xtable::cli
