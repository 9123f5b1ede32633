#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sdeconv {

// Ordered "key = value" text records with '#' comments. This is the one
// structured format used for manifests, sidecar parameter records, solver
// reports and sweep specifications.
class KeyValueFile {
public:
    void set(const std::string& key, const std::string& value);
    void set_double(const std::string& key, double value);
    void set_int(const std::string& key, std::int64_t value);
    void set_uint(const std::string& key, std::uint64_t value);

    bool has(const std::string& key) const;
    std::optional<std::string> get(const std::string& key) const;
    std::string require(const std::string& key) const; // throws std::invalid_argument
    double require_double(const std::string& key) const;
    std::int64_t require_int(const std::string& key) const;
    std::uint64_t require_uint(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;

    const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

    std::string to_string() const;
    void save(const std::string& path) const;
    static KeyValueFile parse(const std::string& text);
    static KeyValueFile load(const std::string& path); // IoError on missing file

private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// Shortest decimal form that round-trips the double exactly.
std::string format_double(double value);

} // namespace sdeconv
