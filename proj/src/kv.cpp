#include "sdeconv/kv.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "sdeconv/image_io.hpp"

namespace sdeconv {

std::string format_double(double value) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, value);
        if (std::strtod(buf, nullptr) == value)
            break;
    }
    // %g spells small round values like 20 as 2e+01; prefer the plain
    // integer form when it is no longer.
    if (std::strchr(buf, 'e') && std::fabs(value) < 1e15 && value == std::floor(value)) {
        char fixed[40];
        std::snprintf(fixed, sizeof(fixed), "%.0f", value);
        if (std::strlen(fixed) <= std::strlen(buf) && std::strtod(fixed, nullptr) == value)
            return fixed;
    }
    return buf;
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

void KeyValueFile::set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_)
        if (k == key) {
            v = value;
            return;
        }
    entries_.emplace_back(key, value);
}

void KeyValueFile::set_double(const std::string& key, double value) {
    set(key, format_double(value));
}

void KeyValueFile::set_int(const std::string& key, std::int64_t value) {
    set(key, std::to_string(value));
}

void KeyValueFile::set_uint(const std::string& key, std::uint64_t value) {
    set(key, std::to_string(value));
}

bool KeyValueFile::has(const std::string& key) const {
    return get(key).has_value();
}

std::optional<std::string> KeyValueFile::get(const std::string& key) const {
    for (const auto& [k, v] : entries_)
        if (k == key)
            return v;
    return std::nullopt;
}

std::string KeyValueFile::require(const std::string& key) const {
    auto v = get(key);
    if (!v)
        throw std::invalid_argument("missing required key '" + key + "'");
    return *v;
}

double KeyValueFile::require_double(const std::string& key) const {
    const std::string s = require(key);
    char* end = nullptr;
    double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0')
        throw std::invalid_argument("key '" + key + "' is not a number: " + s);
    return v;
}

std::int64_t KeyValueFile::require_int(const std::string& key) const {
    const std::string s = require(key);
    char* end = nullptr;
    long long v = std::strtoll(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw std::invalid_argument("key '" + key + "' is not an integer: " + s);
    return v;
}

std::uint64_t KeyValueFile::require_uint(const std::string& key) const {
    const std::string s = require(key);
    char* end = nullptr;
    unsigned long long v = std::strtoull(s.c_str(), &end, 10);
    if (end == s.c_str() || *end != '\0')
        throw std::invalid_argument("key '" + key + "' is not an unsigned integer: " + s);
    return v;
}

double KeyValueFile::get_double(const std::string& key, double fallback) const {
    return has(key) ? require_double(key) : fallback;
}

std::string KeyValueFile::to_string() const {
    std::ostringstream out;
    for (const auto& [k, v] : entries_)
        out << k << " = " << v << "\n";
    return out.str();
}

void KeyValueFile::save(const std::string& path) const {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot create file " + path);
    out << to_string();
    if (!out)
        throw IoError("failed writing file " + path);
}

KeyValueFile KeyValueFile::parse(const std::string& text) {
    KeyValueFile kv;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("line " + std::to_string(lineno) +
                                        " is not 'key = value': " + line);
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("empty key on line " + std::to_string(lineno));
        kv.entries_.emplace_back(key, value);
    }
    return kv;
}

KeyValueFile KeyValueFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open file " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

} // namespace sdeconv
