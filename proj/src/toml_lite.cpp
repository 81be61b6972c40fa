#include "hawkes/toml_lite.hpp"

#include "hawkes/error.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

namespace hawkes::toml {

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
    throw InvalidInput("TOML line " + std::to_string(line) + ": " + what);
}

class Parser {
public:
    explicit Parser(std::string_view text) : text_(text) {}

    Document run() {
        Document doc;
        Table* current = &doc.section("");
        for (;;) {
            skip_blank_lines();
            if (at_end()) break;
            if (peek() == '[') {
                ++pos_;
                skip_inline_space();
                std::string name = read_key();
                skip_inline_space();
                expect(']');
                if (doc.find(name)) fail(line_, "duplicate section [" + name + "]");
                current = &doc.section(name);
            } else {
                std::string key = read_key();
                skip_inline_space();
                expect('=');
                skip_inline_space();
                Value v = read_value();
                if (current->find(key)) fail(line_, "duplicate key '" + key + "'");
                current->set(std::move(key), std::move(v));
            }
            finish_line();
        }
        return doc;
    }

private:
    bool at_end() const noexcept { return pos_ >= text_.size(); }
    char peek() const noexcept { return text_[pos_]; }

    void skip_inline_space() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }

    void skip_comment() {
        if (!at_end() && peek() == '#')
            while (!at_end() && peek() != '\n') ++pos_;
    }

    void skip_blank_lines() {
        for (;;) {
            skip_inline_space();
            skip_comment();
            if (at_end() || peek() != '\n') return;
            ++pos_;
            ++line_;
        }
    }

    // Whitespace, newlines and comments inside arrays.
    void skip_array_space() {
        for (;;) {
            skip_inline_space();
            skip_comment();
            if (at_end() || peek() != '\n') return;
            ++pos_;
            ++line_;
        }
    }

    void finish_line() {
        skip_inline_space();
        skip_comment();
        if (at_end()) return;
        if (peek() != '\n') fail(line_, std::string("unexpected character '") + peek() + "'");
        ++pos_;
        ++line_;
    }

    void expect(char c) {
        if (at_end() || peek() != c) fail(line_, std::string("expected '") + c + "'");
        ++pos_;
    }

    std::string read_key() {
        std::string key;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-' ||
                             peek() == '.'))
            key += text_[pos_++];
        if (key.empty()) fail(line_, "expected a key");
        return key;
    }

    Value read_value() {
        if (at_end()) fail(line_, "missing value");
        const char c = peek();
        if (c == '"') return Value{read_string()};
        if (c == '[') return Value{read_array()};
        if (text_.substr(pos_, 4) == "true") {
            pos_ += 4;
            return Value{true};
        }
        if (text_.substr(pos_, 5) == "false") {
            pos_ += 5;
            return Value{false};
        }
        return Value{read_number()};
    }

    std::string read_string() {
        expect('"');
        std::string out;
        for (;;) {
            if (at_end() || peek() == '\n') fail(line_, "unterminated string");
            char c = text_[pos_++];
            if (c == '"') return out;
            if (c == '\\') {
                if (at_end()) fail(line_, "unterminated escape");
                const char e = text_[pos_++];
                switch (e) {
                case '"': out += '"'; break;
                case '\\': out += '\\'; break;
                case 'n': out += '\n'; break;
                case 't': out += '\t'; break;
                default: fail(line_, std::string("unsupported escape \\") + e);
                }
            } else {
                out += c;
            }
        }
    }

    Array read_array() {
        expect('[');
        Array out;
        for (;;) {
            skip_array_space();
            if (at_end()) fail(line_, "unterminated array");
            if (peek() == ']') {
                ++pos_;
                return out;
            }
            out.push_back(read_value());
            skip_array_space();
            if (!at_end() && peek() == ',') {
                ++pos_;
                continue;
            }
            skip_array_space();
            expect(']');
            return out;
        }
    }

    double read_number() {
        std::size_t end = pos_;
        while (end < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[end])) || text_[end] == '.' ||
                                      text_[end] == '+' || text_[end] == '-' || text_[end] == '_'))
            ++end;
        std::string token;
        for (std::size_t i = pos_; i < end; ++i)
            if (text_[i] != '_') token += text_[i];
        pos_ = end;
        if (token.empty()) fail(line_, "expected a value");
        std::string_view body = token;
        bool negative = false;
        if (body.front() == '+' || body.front() == '-') {
            negative = body.front() == '-';
            body.remove_prefix(1);
        }
        double v = 0.0;
        if (body == "inf") {
            v = INFINITY;
        } else if (body == "nan") {
            v = NAN;
        } else {
            auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
            if (ec != std::errc() || ptr != body.data() + body.size()) fail(line_, "malformed number '" + token + "'");
        }
        return negative ? -v : v;
    }

    std::string_view text_;
    std::size_t pos_{0};
    std::size_t line_{1};
};

void write_value(std::string& out, const Value& v) {
    if (const auto* d = std::get_if<double>(&v.data)) {
        out += format_double(*d);
    } else if (const auto* b = std::get_if<bool>(&v.data)) {
        out += *b ? "true" : "false";
    } else if (const auto* s = std::get_if<std::string>(&v.data)) {
        out += '"';
        for (char c : *s) {
            switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            default: out += c;
            }
        }
        out += '"';
    } else {
        const auto& a = std::get<Array>(v.data);
        out += '[';
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (i) out += ", ";
            write_value(out, a[i]);
        }
        out += ']';
    }
}

} // namespace

double Value::as_number(std::string_view context) const {
    if (const auto* d = std::get_if<double>(&data)) return *d;
    throw InvalidInput(std::string(context) + ": expected a number");
}

const std::string& Value::as_string(std::string_view context) const {
    if (const auto* s = std::get_if<std::string>(&data)) return *s;
    throw InvalidInput(std::string(context) + ": expected a string");
}

const Array& Value::as_array(std::string_view context) const {
    if (const auto* a = std::get_if<Array>(&data)) return *a;
    throw InvalidInput(std::string(context) + ": expected an array");
}

bool Value::as_bool(std::string_view context) const {
    if (const auto* b = std::get_if<bool>(&data)) return *b;
    throw InvalidInput(std::string(context) + ": expected a boolean");
}

const Value* Table::find(std::string_view key) const noexcept {
    for (const auto& [k, v] : entries)
        if (k == key) return &v;
    return nullptr;
}

const Value& Table::at(std::string_view key, std::string_view section) const {
    if (const auto* v = find(key)) return *v;
    throw InvalidInput("missing key '" + std::string(key) + "' in [" + std::string(section) + "]");
}

void Table::set(std::string key, Value value) {
    for (auto& [k, v] : entries)
        if (k == key) {
            v = std::move(value);
            return;
        }
    entries.emplace_back(std::move(key), std::move(value));
}

const Table* Document::find(std::string_view section) const noexcept {
    for (const auto& [name, t] : sections)
        if (name == section) return &t;
    return nullptr;
}

Table& Document::section(std::string_view name) {
    for (auto& [n, t] : sections)
        if (n == name) return t;
    sections.emplace_back(std::string(name), Table{});
    return sections.back().second;
}

Document parse(std::string_view text) { return Parser(text).run(); }

std::string serialize(const Document& doc) {
    std::string out;
    bool first = true;
    for (const auto& [name, table] : doc.sections) {
        if (name.empty() && table.entries.empty()) continue;
        if (!first) out += '\n';
        first = false;
        if (!name.empty()) out += "[" + name + "]\n";
        for (const auto& [key, value] : table.entries) {
            out += key;
            out += " = ";
            write_value(out, value);
            out += '\n';
        }
    }
    return out;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    std::string s(buf, ptr);
    if (s.find_first_of(".eE") == std::string::npos) s += ".0";
    return s;
}

} // namespace hawkes::toml
