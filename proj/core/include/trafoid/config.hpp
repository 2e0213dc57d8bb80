#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trafoid/io.hpp"

namespace trafoid {

enum class Mode
{
  oracle,
  simulate,
  estimate,
  verify,
  mc
};

std::string to_string(Mode m);
//! Throws ConfigError for an unknown name.
Mode mode_from_string(const std::string& name);

enum class ValueType
{
  text,
  real,
  integer,
  boolean,
  real_list,
  integer_list
};

struct KeySpec
{
  std::string key;
  ValueType type;
  std::string default_value;  //!< empty: unset unless given
  std::string help;
  bool positive = false;      //!< numeric values (or list entries) must be > 0
};

//! Every recognised configuration key, in documentation order.
const std::vector<KeySpec>& config_schema();
const KeySpec* find_key(const std::string& key);

/*
 * Flat `key = value` run configuration. Lines starting with `#` and
 * trailing `# ...` comments are ignored. Each value remembers where it
 * came from (config line or command-line flag) for error messages.
 */
class RunConfig
{
public:
  explicit RunConfig(Mode mode = Mode::oracle);

  //! Parses config text; unknown keys, duplicates and malformed lines are
  //! ConfigErrors naming the line.
  static RunConfig parse(Mode mode, const std::string& text, const std::string& source = "config");

  Mode mode() const { return mode_; }

  //! Sets or overrides a value; `origin` is used in error messages.
  void set(const std::string& key, const std::string& value, const std::string& origin);
  bool is_set(const std::string& key) const;

  std::string text(const std::string& key) const;
  double real(const std::string& key) const;
  long long integer(const std::string& key) const;
  std::size_t count(const std::string& key) const;
  bool boolean(const std::string& key) const;
  std::vector<double> reals(const std::string& key) const;
  std::vector<std::size_t> counts(const std::string& key) const;
  std::uint64_t seed() const;

  //! Type-checks every value and the mode-specific requirements.
  void validate() const;

  //! Resolved values of all keys that are set or defaulted, sorted by key,
  //! without `output.dir`.
  Metadata echo() const;

private:
  struct Entry
  {
    std::string value;
    std::string origin;
  };

  const std::string& raw(const std::string& key, std::string* origin = nullptr) const;

  Mode mode_;
  std::map<std::string, Entry> values_;
};

} // namespace trafoid
