#pragma once

// Command-line front end: typed JSON configs with unit-suffixed keys and
// one subcommand per experiment.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace cpdd::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kNumericError = 3, kIoError = 4 };

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Unit implied by a key suffix ("_hz" → "Hz"); "1" when dimensionless.
std::string unit_of(const std::string& key);

/// Reads typed fields from a JSON object, records every value actually used
/// (defaults included) and rejects keys nobody asked for.
class Config {
 public:
  Config() : Config(nlohmann::ordered_json::object()) {}
  explicit Config(nlohmann::ordered_json j);

  static Config load(const std::string& path);

  double number(const std::string& key, double fallback);
  double positive(const std::string& key, double fallback);
  std::optional<double> optional_number(const std::string& key);
  std::uint64_t integer(const std::string& key, std::uint64_t fallback);
  bool flag(const std::string& key, bool fallback);
  std::string text(const std::string& key, const std::string& fallback,
                   const std::vector<std::string>& allowed = {});
  std::vector<double> numbers(const std::string& key, const std::vector<double>& fallback);
  std::vector<std::uint64_t> integers(const std::string& key, const std::vector<std::uint64_t>& fallback);
  bool has(const std::string& key) const;

  /// Overrides (or adds) a key, e.g. from a command-line flag.
  void set(const std::string& key, nlohmann::ordered_json value);
  /// Keys from `other` not present here are added.
  void merge_defaults(const Config& other);

  /// Throws ConfigError naming every key that was never read.
  void finish() const;
  const nlohmann::ordered_json& resolved() const { return resolved_; }

 private:
  const nlohmann::ordered_json* find(const std::string& key);
  [[noreturn]] void bad(const std::string& key, const std::string& expected,
                        const nlohmann::ordered_json& got) const;

  nlohmann::ordered_json raw_;
  nlohmann::ordered_json resolved_ = nlohmann::ordered_json::object();
  std::set<std::string> used_;
};

/// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

std::string usage();

}  // namespace cpdd::cli
