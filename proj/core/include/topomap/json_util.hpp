#pragma once

#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "topomap/error.hpp"

namespace topomap::json_util {

std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

/// Parses a JSON document, mapping syntax errors onto Error{kParse, code}.
nlohmann::json parse(const std::string& text, const std::string& source, const std::string& code);
nlohmann::json read(const std::filesystem::path& path, const std::string& code);

/// Canonical on-disk rendering: two-space indent, trailing newline.
std::string dump(const nlohmann::json& doc);

/// Field accessors raising Error{kFormat, code} with the JSON path on
/// missing or mistyped members.
const nlohmann::json& member(const nlohmann::json& obj, const char* key, const std::string& where, const std::string& code);
std::string get_string(const nlohmann::json& obj, const char* key, const std::string& where, const std::string& code);
double get_number(const nlohmann::json& obj, const char* key, const std::string& where, const std::string& code);
std::int64_t get_integer(const nlohmann::json& obj, const char* key, const std::string& where, const std::string& code);
bool get_bool(const nlohmann::json& obj, const char* key, const std::string& where, const std::string& code);
const nlohmann::json& get_array(const nlohmann::json& obj, const char* key, const std::string& where, const std::string& code);

}  // namespace topomap::json_util
