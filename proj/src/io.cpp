#include "cvf/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <sstream>

#include "cvf/error.hpp"

namespace cvf {

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::parse, path.string() + ": byte " + std::to_string(e.byte) +
                                      ": " + e.what());
  }
}

std::vector<json> read_jsonl_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::vector<json> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      rows.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::parse, path.string() + ":" + std::to_string(lineno) + ": byte " +
                                        std::to_string(e.byte) + ": " + e.what());
    }
  }
  return rows;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::io, "cannot write " + path.string());
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::io, "short write to " + path.string());
}

void write_jsonl_file(const std::filesystem::path& path, const std::vector<json>& rows) {
  std::string buf;
  for (const auto& row : rows) {
    buf += row.dump();
    buf.push_back('\n');
  }
  write_text_file(path, buf);
}

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorKind::io, "sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(read_text_file(path));
}

std::int64_t get_int(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_number_integer()) {
    throw Error(ErrorKind::parse, std::string(where) + "." + key + ": expected integer");
  }
  return it->get<std::int64_t>();
}

std::string get_string(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) {
    throw Error(ErrorKind::parse, std::string(where) + "." + key + ": expected string");
  }
  return it->get<std::string>();
}

const json& get_array(const json& obj, const char* key, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_array()) {
    throw Error(ErrorKind::parse, std::string(where) + "." + key + ": expected array");
  }
  return *it;
}

}  // namespace cvf
