#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "bf/types.hpp"

namespace bf::io {

// Flat "key = value" text grouped under [section] headers.  '#' and ';'
// start comments at the beginning of a line; blank lines are ignored.
// Every value remembers its line so errors can point at it.
class IniFile {
  public:
    struct Entry {
        std::string value;
        int line = 0;
    };

    // Throws ConfigError "<name>:<line>: ..." for syntax errors and repeated keys.
    static IniFile parse(std::string_view text, std::string name = "<config>");
    static IniFile load(const std::string& path);

    const std::string& name() const { return name_; }
    bool has(const std::string& section, const std::string& key) const;
    bool has_section(const std::string& section) const { return sections_.count(section) > 0; }
    const Entry* find(const std::string& section, const std::string& key) const;

    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_double(const std::string& section, const std::string& key, double fallback) const;
    long long get_int(const std::string& section, const std::string& key, long long fallback) const;
    bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
    // "x,y,z; x,y,z; ..." (or whitespace-separated components)
    std::vector<Vec3> get_vectors(const std::string& section, const std::string& key) const;

    // ConfigError for keys in `section` not listed, or sections not listed.
    void require_known(const std::string& section, const std::set<std::string>& keys) const;
    void require_sections(const std::set<std::string>& sections) const;

    [[noreturn]] void fail(const std::string& section, const std::string& key,
                           const std::string& what) const;

  private:
    std::string name_;
    std::map<std::string, std::map<std::string, Entry>> sections_;
    std::map<std::string, int> section_lines_;
};

} // namespace bf::io
