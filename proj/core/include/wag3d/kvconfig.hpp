#pragma once

#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "wag3d/common.hpp"

namespace wag3d {

// Flat `section.key = value` text block. '#' starts a comment; blank lines
// are ignored. Serialization is key-sorted so equal maps give equal bytes.
struct KvMap {
    std::map<std::string, std::string> values;

    static KvMap parse(const std::string& text) {
        KvMap kv;
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        while (std::getline(is, line)) {
            ++lineno;
            size_t hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            size_t eq = line.find('=');
            if (eq == std::string::npos) {
                require(trim(line).empty(), "config line ", lineno, " is not 'key = value': ", line);
                continue;
            }
            std::string key = trim(line.substr(0, eq));
            std::string val = trim(line.substr(eq + 1));
            require(!key.empty(), "config line ", lineno, " has an empty key");
            require(!kv.values.count(key), "config key '", key, "' repeated");
            kv.values[key] = val;
        }
        return kv;
    }

    std::string serialize() const {
        std::ostringstream os;
        for (const auto& [k, v] : values) os << k << " = " << v << "\n";
        return os.str();
    }

    bool has(const std::string& key) const { return values.count(key) > 0; }

    const std::string& get(const std::string& key) const {
        auto it = values.find(key);
        require(it != values.end(), "missing config key '", key, "'");
        return it->second;
    }

    std::string get(const std::string& key, const std::string& fallback) const {
        auto it = values.find(key);
        return it == values.end() ? fallback : it->second;
    }

    int64_t get_int(const std::string& key) const { return to_int(get(key), key); }
    int64_t get_int(const std::string& key, int64_t fallback) const {
        return has(key) ? to_int(get(key), key) : fallback;
    }

    double get_double(const std::string& key) const { return to_double(get(key), key); }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? to_double(get(key), key) : fallback;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string& v = get(key);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        fail("config key '", key, "' is not a boolean: ", v);
    }

    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        std::istringstream is(get(key));
        std::string item;
        while (std::getline(is, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        require(!out.empty(), "config key '", key, "' has an empty list");
        return out;
    }

    std::vector<int> get_int_list(const std::string& key) const {
        std::vector<int> out;
        for (const auto& s : get_list(key)) out.push_back(static_cast<int>(to_int(s, key)));
        return out;
    }

    void set(const std::string& key, const std::string& v) { values[key] = v; }
    void set_int(const std::string& key, int64_t v) { values[key] = std::to_string(v); }
    void set_double(const std::string& key, double v) {
        std::ostringstream os;
        os.precision(17);
        os << v;
        values[key] = os.str();
    }

    uint64_t hash() const {
        std::string s = serialize();
        uint64_t h = 1469598103934665603ull;
        for (char c : s) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return h;
    }

private:
    static std::string trim(const std::string& s) {
        size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static int64_t to_int(const std::string& s, const std::string& key) {
        try {
            size_t pos = 0;
            int64_t v = std::stoll(s, &pos);
            require(pos == s.size(), "trailing characters");
            return v;
        } catch (const std::exception&) {
            fail("config key '", key, "' is not an integer: ", s);
        }
    }

    static double to_double(const std::string& s, const std::string& key) {
        try {
            size_t pos = 0;
            double v = std::stod(s, &pos);
            require(pos == s.size(), "trailing characters");
            return v;
        } catch (const std::exception&) {
            fail("config key '", key, "' is not a number: ", s);
        }
    }
};

} // namespace wag3d
