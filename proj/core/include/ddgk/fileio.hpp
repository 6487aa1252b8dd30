#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ddgk {

// Whole-file read; throws IngestionError naming the file.
std::string read_text_file(const std::filesystem::path& path);

// Writes to a sibling temporary file, then renames over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

// Exact hexadecimal float text ("%a") and its inverse.
std::string hex_double(double x);
double parse_hex_double(std::string_view text);

// Replaces characters outside [A-Za-z0-9._-] so an id can be used as a file name.
std::string sanitize_file_stem(std::string_view id);

}  // namespace ddgk
