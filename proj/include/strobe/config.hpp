#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace strobe {

// Strict `key = value` file with dotted keys (window.T = 10). Full-line #
// comments and blank lines are allowed; duplicate or unknown keys are fatal.
// Every lookup marks its key as known; finish() rejects leftovers with their
// line numbers so typos cannot silently fall back to defaults.
class Config {
public:
    static Config from_file(const std::string& path);
    static Config from_text(const std::string& text, const std::string& origin = "<inline>");

    bool has(const std::string& key) const;

    double get_double(const std::string& key, double fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::size_t get_size(const std::string& key, std::size_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const;
    std::vector<std::uint64_t> get_u64_list(const std::string& key,
                                            const std::vector<std::uint64_t>& fallback) const;

    // Rejects keys that were present but never looked up.
    void finish() const;

    // The raw pairs, for manifest snapshots.
    const std::map<std::string, std::string>& entries() const { return values_; }

private:
    std::string raw(const std::string& key) const;
    [[noreturn]] void fail(const std::string& key, const std::string& what) const;

    std::string origin_;
    std::map<std::string, std::string> values_;
    std::map<std::string, int> lines_;
    mutable std::set<std::string> seen_;
};

}  // namespace strobe
