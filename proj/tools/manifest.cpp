#include "manifest.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace subforest::cli {

std::string format_double(double value) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

Manifest::Manifest(std::string subcommand) : subcommand_(std::move(subcommand)) {
    entries_.emplace_back("tool", "subforest");
    entries_.emplace_back("version", kToolVersion);
    entries_.emplace_back("subcommand", subcommand_);
}

void Manifest::set(const std::string& key, const std::string& value) {
    entries_.emplace_back(key, value);
}

void Manifest::set(const std::string& key, double value) { set(key, format_double(value)); }

void Manifest::set_integer(const std::string& key, long long value) {
    set(key, std::to_string(value));
}

void Manifest::set_unsigned(const std::string& key, unsigned long long value) {
    set(key, std::to_string(value));
}

void Manifest::add_output(const std::string& role, const std::string& path) {
    entries_.emplace_back("output." + role, path);
}

void Manifest::write(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("manifest: cannot write " + path);
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
    if (!out) throw std::runtime_error("manifest: write failed for " + path);
}

Manifest Manifest::read(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("manifest: cannot open " + path);
    Manifest m("");
    m.entries_.clear();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find(" = ");
        if (eq == std::string::npos)
            throw std::runtime_error("manifest: malformed line " + std::to_string(line_no) +
                                     " in " + path);
        std::string key = line.substr(0, eq);
        std::string value = line.substr(eq + 3);
        if (!value.empty() && value.back() == '\r') value.pop_back();
        if (key == "subcommand") m.subcommand_ = value;
        m.entries_.emplace_back(std::move(key), std::move(value));
    }
    if (m.subcommand_.empty())
        throw std::runtime_error("manifest: no subcommand recorded in " + path);
    return m;
}

std::vector<std::string> Manifest::to_argv() const {
    std::vector<std::string> argv;
    argv.push_back(subcommand_);
    for (const auto& [k, v] : entries_) {
        if (k == "tool" || k == "version" || k == "subcommand") continue;
        if (k.rfind("output.", 0) == 0) continue;
        argv.push_back("--" + k + "=" + v);
    }
    return argv;
}

} // namespace subforest::cli
