#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace cvf {

using json = nlohmann::json;

std::string read_text_file(const std::filesystem::path& path);

// Parses a whole-file JSON document. Syntax errors name the byte offset.
json read_json_file(const std::filesystem::path& path);

// One JSON value per non-blank line. Errors name the line number.
std::vector<json> read_jsonl_file(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view contents);

void write_jsonl_file(const std::filesystem::path& path, const std::vector<json>& rows);

// Hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(std::string_view bytes);
std::string sha256_file(const std::filesystem::path& path);

// Field accessors that turn type mismatches into cvf::Error(parse) naming `where`.
std::int64_t get_int(const json& obj, const char* key, std::string_view where);
std::string get_string(const json& obj, const char* key, std::string_view where);
const json& get_array(const json& obj, const char* key, std::string_view where);

}  // namespace cvf
