#pragma once

#include <filesystem>
#include <span>
#include <string>

#include "spdelab/error_lab.hpp"

namespace spdelab::cli {

// 12 significant digits, the pinned columnar precision.
std::string format_g12(double x);

// Header `h,error,stderr` plus one row per level, newline-terminated.
std::string rates_csv(std::span<const lab::LevelResult> levels);

// First unused <out_root>/<suite>/run_NNNN directory; never reuses a name,
// so reruns append instead of overwriting.
std::filesystem::path make_run_dir(const std::filesystem::path& out_root,
                                   const std::string& suite);

void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace spdelab::cli
