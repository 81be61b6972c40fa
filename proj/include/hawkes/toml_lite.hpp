#pragma once

// Reader and writer for the subset of TOML used by model configuration files:
// [section] headers, bare keys, and values that are strings, booleans, numbers
// or (nested, possibly multi-line) arrays of those. Comments start with '#'.

#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace hawkes::toml {

struct Value;
using Array = std::vector<Value>;

struct Value {
    std::variant<double, bool, std::string, Array> data;

    [[nodiscard]] bool is_number() const noexcept { return std::holds_alternative<double>(data); }
    [[nodiscard]] bool is_string() const noexcept { return std::holds_alternative<std::string>(data); }
    [[nodiscard]] bool is_array() const noexcept { return std::holds_alternative<Array>(data); }
    [[nodiscard]] bool is_bool() const noexcept { return std::holds_alternative<bool>(data); }

    [[nodiscard]] double as_number(std::string_view context) const;
    [[nodiscard]] const std::string& as_string(std::string_view context) const;
    [[nodiscard]] const Array& as_array(std::string_view context) const;
    [[nodiscard]] bool as_bool(std::string_view context) const;
};

/// Key/value pairs of one section, in file order.
struct Table {
    std::vector<std::pair<std::string, Value>> entries;

    [[nodiscard]] const Value* find(std::string_view key) const noexcept;
    [[nodiscard]] const Value& at(std::string_view key, std::string_view section) const;
    void set(std::string key, Value value);
};

struct Document {
    std::vector<std::pair<std::string, Table>> sections;

    [[nodiscard]] const Table* find(std::string_view section) const noexcept;
    Table& section(std::string_view name);
};

/// Throws InvalidInput with a line number on malformed input.
Document parse(std::string_view text);
std::string serialize(const Document& doc);

/// Shortest decimal that reads back to exactly `v`, always spelled as a float.
std::string format_double(double v);

} // namespace hawkes::toml
