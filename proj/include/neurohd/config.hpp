#pragma once

// key = value configuration files. Lines starting with '#' and blank lines
// are ignored; whitespace around keys and values is trimmed.

#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

namespace neurohd {

class ConfigMap {
public:
    ConfigMap() = default;

    static ConfigMap from_stream(std::istream& is) {
        ConfigMap cfg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            const auto eq = line.find('=');
            if (eq == std::string::npos) {
                if (line.find_first_not_of(" \t\r") != std::string::npos) {
                    throw std::runtime_error("config: malformed line " + std::to_string(lineno));
                }
                continue;
            }
            cfg.values_[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
        }
        return cfg;
    }

    static ConfigMap from_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("config: cannot open " + path);
        return from_stream(is);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_str(const std::string& key, const std::string& dflt) const {
        auto it = values_.find(key);
        return it == values_.end() ? dflt : it->second;
    }

    double get_double(const std::string& key, double dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        std::size_t pos = 0;
        const double v = std::stod(it->second, &pos);
        if (pos != it->second.size()) throw std::runtime_error("config: bad number for " + key);
        return v;
    }

    long long get_int(const std::string& key, long long dflt) const {
        auto it = values_.find(key);
        if (it == values_.end()) return dflt;
        std::size_t pos = 0;
        const long long v = std::stoll(it->second, &pos);
        if (pos != it->second.size()) throw std::runtime_error("config: bad integer for " + key);
        return v;
    }

    void set(const std::string& key, const std::string& value) { values_[key] = value; }

    const std::map<std::string, std::string>& values() const { return values_; }

private:
    static std::string trim(std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        if (b == std::string::npos) return "";
        return s.substr(b, e - b + 1);
    }

    std::map<std::string, std::string> values_;
};

}  // namespace neurohd
