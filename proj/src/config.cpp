#include "fbm/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "fbm/error.hpp"

namespace fbm {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
T parse_number(std::string_view text, std::string_view what) {
  text = trim(text);
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size() || text.empty()) {
    throw ValidationError("bad value '" + std::string(text) + "' for " + std::string(what));
  }
  return value;
}

}  // namespace

double parse_double(std::string_view text, std::string_view what) { return parse_number<double>(text, what); }
int parse_int(std::string_view text, std::string_view what) { return parse_number<int>(text, what); }
std::uint64_t parse_u64(std::string_view text, std::string_view what) {
  return parse_number<std::uint64_t>(text, what);
}

KeyValues KeyValues::parse(std::string_view text, std::string_view origin) {
  KeyValues kv;
  kv.origin_ = std::string(origin);
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ValidationError(std::string(origin) + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ValidationError(std::string(origin) + ":" + std::to_string(line_no) + ": empty key");
    if (kv.contains(key)) {
      throw ValidationError(std::string(origin) + ":" + std::to_string(line_no) + ": duplicate key '" +
                            std::string(key) + "'");
    }
    kv.entries_.emplace_back(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return kv;
}

KeyValues KeyValues::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

void KeyValues::set(std::string key, std::string value) {
  for (auto& [k, v] : entries_) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries_.emplace_back(std::move(key), std::move(value));
}

bool KeyValues::contains(std::string_view key) const { return find(key).has_value(); }

std::optional<std::string> KeyValues::find(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  return std::nullopt;
}

const std::string& KeyValues::require(std::string_view key) const {
  for (const auto& [k, v] : entries_) {
    if (k == key) return v;
  }
  throw ValidationError(origin_ + ": missing required key '" + std::string(key) + "'");
}

std::string KeyValues::get_string(std::string_view key, std::string fallback) const {
  auto v = find(key);
  return v ? *v : std::move(fallback);
}

double KeyValues::get_double(std::string_view key, double fallback) const {
  auto v = find(key);
  return v ? parse_double(*v, key) : fallback;
}

int KeyValues::get_int(std::string_view key, int fallback) const {
  auto v = find(key);
  return v ? parse_int(*v, key) : fallback;
}

std::uint64_t KeyValues::get_u64(std::string_view key, std::uint64_t fallback) const {
  auto v = find(key);
  return v ? parse_u64(*v, key) : fallback;
}

bool KeyValues::get_bool(std::string_view key, bool fallback) const {
  auto v = find(key);
  if (!v) return fallback;
  if (*v == "true" || *v == "1" || *v == "yes") return true;
  if (*v == "false" || *v == "0" || *v == "no") return false;
  throw ValidationError("bad boolean '" + *v + "' for " + std::string(key));
}

void KeyValues::check_known(const std::vector<std::string_view>& known) const {
  for (const auto& [k, v] : entries_) {
    const bool ok = std::any_of(known.begin(), known.end(), [&k](std::string_view pattern) {
      if (!pattern.empty() && pattern.back() == '.') return std::string_view(k).starts_with(pattern);
      return std::string_view(k) == pattern;
    });
    if (!ok) throw ValidationError(origin_ + ": unknown key '" + k + "'");
  }
}

}  // namespace fbm
