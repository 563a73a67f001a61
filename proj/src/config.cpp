#include "strobe/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "strobe/errors.hpp"

namespace strobe {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

bool valid_key(const std::string& key) {
    if (key.empty() || key.front() == '.' || key.back() == '.') return false;
    for (char c : key) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
        if (!ok) return false;
    }
    return true;
}

double parse_double(const std::string& text, const std::string& diag) {
    const std::string t = trim(text);
    require(!t.empty(), Errc::config_error, diag + ": empty value");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    require(end == t.c_str() + t.size(), Errc::config_error, diag + ": not a number: '" + t + "'");
    return v;
}

std::uint64_t parse_u64(const std::string& text, const std::string& diag) {
    const std::string t = trim(text);
    require(!t.empty(), Errc::config_error, diag + ": empty value");
    require(t.front() != '-', Errc::config_error, diag + ": must be non-negative: '" + t + "'");
    char* end = nullptr;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    require(end == t.c_str() + t.size(), Errc::config_error,
            diag + ": not an integer: '" + t + "'");
    return static_cast<std::uint64_t>(v);
}

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) parts.push_back(item);
    return parts;
}

}  // namespace

Config Config::from_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), Errc::io_error, "cannot read config file " + path);
    std::ostringstream buf;
    buf << f.rdbuf();
    return from_text(buf.str(), path);
}

Config Config::from_text(const std::string& text, const std::string& origin) {
    Config cfg;
    cfg.origin_ = origin;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped.front() == '#') continue;
        const auto eq = stripped.find('=');
        require(eq != std::string::npos, Errc::config_error,
                origin + ":" + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        require(valid_key(key), Errc::config_error,
                origin + ":" + std::to_string(line_no) + ": malformed key '" + key + "'");
        if (const auto prev = cfg.lines_.find(key); prev != cfg.lines_.end())
            raise(Errc::config_error, origin + ":" + std::to_string(line_no) +
                                          ": duplicate key '" + key + "' (first set on line " +
                                          std::to_string(prev->second) + ")");
        cfg.values_[key] = value;
        cfg.lines_[key] = line_no;
    }
    return cfg;
}

bool Config::has(const std::string& key) const {
    seen_.insert(key);
    return values_.count(key) != 0;
}

std::string Config::raw(const std::string& key) const {
    seen_.insert(key);
    return values_.at(key);
}

void Config::fail(const std::string& key, const std::string& what) const {
    const auto it = lines_.find(key);
    const std::string at = it == lines_.end() ? origin_ : origin_ + ":" + std::to_string(it->second);
    raise(Errc::config_error, at + ": key '" + key + "' " + what);
}

double Config::get_double(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    return parse_double(raw(key), origin_ + ":" + std::to_string(lines_.at(key)));
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    return parse_u64(raw(key), origin_ + ":" + std::to_string(lines_.at(key)));
}

std::size_t Config::get_size(const std::string& key, std::size_t fallback) const {
    return static_cast<std::size_t>(get_u64(key, fallback));
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const std::string v = trim(raw(key));
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(key, "is not a boolean (use true/false)");
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    if (!has(key)) return fallback;
    return raw(key);
}

std::vector<double> Config::get_double_list(const std::string& key,
                                            const std::vector<double>& fallback) const {
    if (!has(key)) return fallback;
    const std::string diag = origin_ + ":" + std::to_string(lines_.at(key));
    std::vector<double> out;
    for (const auto& item : split_list(raw(key))) out.push_back(parse_double(item, diag));
    require(!out.empty(), Errc::config_error, diag + ": empty list for '" + key + "'");
    return out;
}

std::vector<std::uint64_t> Config::get_u64_list(const std::string& key,
                                                const std::vector<std::uint64_t>& fallback) const {
    if (!has(key)) return fallback;
    const std::string diag = origin_ + ":" + std::to_string(lines_.at(key));
    std::vector<std::uint64_t> out;
    for (const auto& item : split_list(raw(key))) out.push_back(parse_u64(item, diag));
    require(!out.empty(), Errc::config_error, diag + ": empty list for '" + key + "'");
    return out;
}

void Config::finish() const {
    for (const auto& [key, value] : values_) {
        if (!seen_.count(key))
            raise(Errc::config_error, origin_ + ":" + std::to_string(lines_.at(key)) +
                                          ": unknown key '" + key + "'");
    }
}

}  // namespace strobe
