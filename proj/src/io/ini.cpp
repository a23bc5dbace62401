#include "bf/io/ini.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "bf/errors.hpp"

namespace bf::io {

namespace {

std::string trim(std::string_view s) {
    auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
    while (!s.empty() && is_space(s.front()))
        s.remove_prefix(1);
    while (!s.empty() && is_space(s.back()))
        s.remove_suffix(1);
    return std::string(s);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

} // namespace

IniFile IniFile::parse(std::string_view text, std::string name) {
    IniFile ini;
    ini.name_ = std::move(name);
    std::string section;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        const std::string line = trim(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        auto syntax = [&](const std::string& what) {
            throw ConfigError(ini.name_ + ":" + std::to_string(line_no) + ": " + what);
        };
        if (line.empty() || line[0] == '#' || line[0] == ';') {
            if (end == text.size())
                break;
            continue;
        }
        if (line.front() == '[') {
            if (line.back() != ']')
                syntax("unterminated section header");
            section = lower(trim(std::string_view(line).substr(1, line.size() - 2)));
            if (section.empty())
                syntax("empty section name");
            if (ini.section_lines_.count(section))
                syntax("section [" + section + "] repeated");
            ini.section_lines_[section] = line_no;
            ini.sections_[section];
        } else {
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                syntax("expected 'key = value'");
            if (section.empty())
                syntax("key outside any [section]");
            const std::string key = lower(trim(std::string_view(line).substr(0, eq)));
            if (key.empty())
                syntax("empty key");
            auto& entries = ini.sections_[section];
            if (entries.count(key))
                syntax(section + "." + key + " set twice (first on line " +
                       std::to_string(entries[key].line) + ")");
            entries[key] = {trim(std::string_view(line).substr(eq + 1)), line_no};
        }
        if (end == text.size())
            break;
    }
    return ini;
}

IniFile IniFile::load(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError(path + ": cannot open");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
}

bool IniFile::has(const std::string& section, const std::string& key) const {
    return find(section, key) != nullptr;
}

const IniFile::Entry* IniFile::find(const std::string& section, const std::string& key) const {
    auto s = sections_.find(section);
    if (s == sections_.end())
        return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

void IniFile::fail(const std::string& section, const std::string& key,
                   const std::string& what) const {
    const Entry* e = find(section, key);
    const std::string where =
        e ? name_ + ":" + std::to_string(e->line) : name_;
    throw ConfigError(where + ": " + section + "." + key + ": " + what);
}

std::string IniFile::get_string(const std::string& section, const std::string& key,
                                const std::string& fallback) const {
    const Entry* e = find(section, key);
    return e ? e->value : fallback;
}

double IniFile::get_double(const std::string& section, const std::string& key,
                           double fallback) const {
    const Entry* e = find(section, key);
    if (!e)
        return fallback;
    const std::string& v = e->value;
    double out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        fail(section, key, "'" + v + "' is not a number");
    return out;
}

long long IniFile::get_int(const std::string& section, const std::string& key,
                           long long fallback) const {
    const Entry* e = find(section, key);
    if (!e)
        return fallback;
    const std::string& v = e->value;
    long long out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size() || v.empty())
        fail(section, key, "'" + v + "' is not an integer");
    return out;
}

bool IniFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
    const Entry* e = find(section, key);
    if (!e)
        return fallback;
    const std::string v = lower(e->value);
    if (v == "true" || v == "yes" || v == "on" || v == "1")
        return true;
    if (v == "false" || v == "no" || v == "off" || v == "0")
        return false;
    fail(section, key, "'" + e->value + "' is not a boolean");
}

std::vector<Vec3> IniFile::get_vectors(const std::string& section, const std::string& key) const {
    std::vector<Vec3> out;
    const Entry* e = find(section, key);
    if (!e)
        return out;
    std::stringstream groups(e->value);
    std::string group;
    while (std::getline(groups, group, ';')) {
        std::replace(group.begin(), group.end(), ',', ' ');
        if (trim(group).empty())
            continue;
        std::istringstream comps(group);
        Vec3 v{};
        std::string extra;
        if (!(comps >> v[0] >> v[1] >> v[2]) || (comps >> extra))
            fail(section, key, "'" + trim(group) + "' is not an x,y,z triple");
        out.push_back(v);
    }
    return out;
}

void IniFile::require_known(const std::string& section, const std::set<std::string>& keys) const {
    auto s = sections_.find(section);
    if (s == sections_.end())
        return;
    for (const auto& [key, entry] : s->second)
        if (!keys.count(key))
            fail(section, key, "unknown key");
}

void IniFile::require_sections(const std::set<std::string>& sections) const {
    for (const auto& [name, line] : section_lines_)
        if (!sections.count(name))
            throw ConfigError(name_ + ":" + std::to_string(line) + ": unknown section [" + name + "]");
}

} // namespace bf::io
