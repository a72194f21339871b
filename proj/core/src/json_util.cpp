#include "topomap/json_util.hpp"

#include <fstream>
#include <sstream>

namespace topomap::json_util {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::kIo, "io.open", "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCategory::kIo, "io.read", "error while reading '" + path.string() + "'");
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCategory::kIo, "io.open", "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorCategory::kIo, "io.write", "error while writing '" + path.string() + "'");
}

json parse(const std::string& text, const std::string& source, const std::string& code) {
  try {
    return json::parse(text);
  } catch (const json::out_of_range& e) {
    // 406: a numeric literal overflows double. JSON cannot spell inf/nan, so
    // this is the only way a file smuggles a non-finite value in.
    if (e.id == 406) {
      const std::string prefix = code.substr(0, code.find('.'));
      fail(ErrorCategory::kFormat, prefix + ".nonfinite", source + ": " + e.what());
    }
    fail(ErrorCategory::kParse, code, source + ": " + e.what());
  } catch (const json::exception& e) {
    fail(ErrorCategory::kParse, code, source + ": " + e.what());
  }
}

json read(const std::filesystem::path& path, const std::string& code) {
  return parse(read_text(path), path.string(), code);
}

std::string dump(const json& doc) {
  return doc.dump(2) + "\n";
}

const json& member(const json& obj, const char* key, const std::string& where, const std::string& code) {
  if (!obj.is_object()) fail(ErrorCategory::kFormat, code, where + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(ErrorCategory::kFormat, code, where + ": missing field '" + key + "'");
  return *it;
}

namespace {

[[noreturn]] void wrong_type(const char* key, const std::string& where, const std::string& code, const char* want) {
  fail(ErrorCategory::kFormat, code, where + "." + key + ": expected " + want);
}

}  // namespace

std::string get_string(const json& obj, const char* key, const std::string& where, const std::string& code) {
  const json& v = member(obj, key, where, code);
  if (!v.is_string()) wrong_type(key, where, code, "a string");
  return v.get<std::string>();
}

double get_number(const json& obj, const char* key, const std::string& where, const std::string& code) {
  const json& v = member(obj, key, where, code);
  if (!v.is_number()) wrong_type(key, where, code, "a number");
  return v.get<double>();
}

std::int64_t get_integer(const json& obj, const char* key, const std::string& where, const std::string& code) {
  const json& v = member(obj, key, where, code);
  if (!v.is_number_integer()) wrong_type(key, where, code, "an integer");
  return v.get<std::int64_t>();
}

bool get_bool(const json& obj, const char* key, const std::string& where, const std::string& code) {
  const json& v = member(obj, key, where, code);
  if (!v.is_boolean()) wrong_type(key, where, code, "a boolean");
  return v.get<bool>();
}

const json& get_array(const json& obj, const char* key, const std::string& where, const std::string& code) {
  const json& v = member(obj, key, where, code);
  if (!v.is_array()) wrong_type(key, where, code, "an array");
  return v;
}

}  // namespace topomap::json_util
