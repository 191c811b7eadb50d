// Copyright (c) 2026 The gist authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "gist/spectral.hpp"

namespace gist::cli::detail {

void write_text(const std::filesystem::path& path, const std::string& text);
void ensure_dir(const std::filesystem::path& dir);
nlohmann::json rank_policy_json(const spectral::RankPolicy& policy);

}  // namespace gist::cli::detail
