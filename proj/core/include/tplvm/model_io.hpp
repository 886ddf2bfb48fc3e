// Copyright 2026 The tplvm Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "tplvm/lvm.hpp"

namespace tplvm {

/// A fitted model plus the labels of its rows (asset names), when known.
struct ModelFile {
  FittedLVM model;
  std::vector<std::string> labels;
};

/// Flat `key = value` text, one field per line, floats with 17 significant
/// digits. Vectors and matrices are space-separated (matrices row-major).
void write_model(std::ostream& out, const ModelFile& file);
ModelFile read_model(std::istream& in);

void save_model(const std::filesystem::path& path, const ModelFile& file);
ModelFile load_model(const std::filesystem::path& path);

}  // namespace tplvm
