#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "cpdd/cli.hpp"

namespace cpdd::cli {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string unit_of(const std::string& key) {
  static const std::pair<const char*, const char*> table[] = {
      {"_hz", "Hz"}, {"_ns", "ns"}, {"_us", "us"}, {"_s", "s"}, {"_rad", "rad"},
      {"_pi", "pi rad"}, {"_tesla", "T"}, {"_over_larmor", "omega_L"}};
  for (const auto& [suffix, unit] : table)
    if (ends_with(key, suffix)) return unit;
  return "1";
}

Config::Config(nlohmann::ordered_json j) : raw_(std::move(j)) {
  if (!raw_.is_object()) throw ConfigError("config must be a JSON object");
}

Config Config::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open config " + path);
  try {
    return Config(nlohmann::ordered_json::parse(is, nullptr, true, true));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + " is not valid JSON: " + e.what());
  }
}

const nlohmann::ordered_json* Config::find(const std::string& key) {
  used_.insert(key);
  const auto it = raw_.find(key);
  return it == raw_.end() ? nullptr : &*it;
}

bool Config::has(const std::string& key) const { return raw_.contains(key); }

void Config::bad(const std::string& key, const std::string& expected, const nlohmann::ordered_json& got) const {
  std::ostringstream os;
  os << "field '" << key << "': expected " << expected;
  const std::string u = unit_of(key);
  if (u != "1") os << " [" << u << "]";
  os << ", got " << got.dump();
  throw ConfigError(os.str());
}

double Config::number(const std::string& key, double fallback) {
  double v = fallback;
  if (const auto* j = find(key)) {
    if (!j->is_number() || !std::isfinite(j->get<double>())) bad(key, "a finite number", *j);
    v = j->get<double>();
  }
  resolved_[key] = v;
  return v;
}

double Config::positive(const std::string& key, double fallback) {
  const double v = number(key, fallback);
  if (!(v > 0.0)) bad(key, "a positive number", v);
  return v;
}

std::optional<double> Config::optional_number(const std::string& key) {
  const auto* j = find(key);
  if (!j || j->is_null()) return std::nullopt;
  if (!j->is_number() || !std::isfinite(j->get<double>())) bad(key, "a finite number", *j);
  resolved_[key] = j->get<double>();
  return j->get<double>();
}

std::uint64_t Config::integer(const std::string& key, std::uint64_t fallback) {
  std::uint64_t v = fallback;
  if (const auto* j = find(key)) {
    if (!j->is_number_unsigned() && !(j->is_number_integer() && j->get<std::int64_t>() >= 0))
      bad(key, "a non-negative integer", *j);
    v = j->get<std::uint64_t>();
  }
  resolved_[key] = v;
  return v;
}

bool Config::flag(const std::string& key, bool fallback) {
  bool v = fallback;
  if (const auto* j = find(key)) {
    if (!j->is_boolean()) bad(key, "true or false", *j);
    v = j->get<bool>();
  }
  resolved_[key] = v;
  return v;
}

std::string Config::text(const std::string& key, const std::string& fallback,
                         const std::vector<std::string>& allowed) {
  std::string v = fallback;
  if (const auto* j = find(key)) {
    if (!j->is_string()) bad(key, "a string", *j);
    v = j->get<std::string>();
  }
  if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
    std::string opts;
    for (const auto& a : allowed) opts += (opts.empty() ? "" : "|") + a;
    bad(key, "one of " + opts, v);
  }
  resolved_[key] = v;
  return v;
}

std::vector<double> Config::numbers(const std::string& key, const std::vector<double>& fallback) {
  std::vector<double> v = fallback;
  if (const auto* j = find(key)) {
    if (!j->is_array()) bad(key, "an array of numbers", *j);
    v.clear();
    for (const auto& e : *j) {
      if (!e.is_number()) bad(key, "an array of numbers", *j);
      v.push_back(e.get<double>());
    }
  }
  resolved_[key] = v;
  return v;
}

std::vector<std::uint64_t> Config::integers(const std::string& key, const std::vector<std::uint64_t>& fallback) {
  std::vector<std::uint64_t> v = fallback;
  if (const auto* j = find(key)) {
    if (!j->is_array()) bad(key, "an array of non-negative integers", *j);
    v.clear();
    for (const auto& e : *j) {
      if (!e.is_number_unsigned() && !(e.is_number_integer() && e.get<std::int64_t>() >= 0))
        bad(key, "an array of non-negative integers", *j);
      v.push_back(e.get<std::uint64_t>());
    }
  }
  resolved_[key] = v;
  return v;
}

void Config::set(const std::string& key, nlohmann::ordered_json value) { raw_[key] = std::move(value); }

void Config::merge_defaults(const Config& other) {
  for (const auto& [k, v] : other.raw_.items())
    if (!raw_.contains(k)) raw_[k] = v;
}

void Config::finish() const {
  std::string unknown;
  for (const auto& [k, v] : raw_.items())
    if (!used_.count(k)) unknown += (unknown.empty() ? "" : ", ") + std::string("'") + k + "'";
  if (!unknown.empty()) throw ConfigError("unknown config key(s): " + unknown);
}

}  // namespace cpdd::cli
