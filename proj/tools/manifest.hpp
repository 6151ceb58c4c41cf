#ifndef SUBFOREST_TOOLS_MANIFEST_HPP
#define SUBFOREST_TOOLS_MANIFEST_HPP

#include <string>
#include <utility>
#include <vector>

namespace subforest::cli {

inline constexpr const char* kToolVersion = "0.1.0";

// Flat key=value record written next to every artifact. Keys other than
// the bookkeeping ones ("tool", "version", "subcommand", "output.*") are
// exactly the long option names with their resolved values, so a manifest
// doubles as a config file that reproduces the run bit-for-bit.
class Manifest {
public:
    Manifest(std::string subcommand);

    void set(const std::string& key, const std::string& value);
    void set(const std::string& key, double value);
    void set_integer(const std::string& key, long long value);
    void set_unsigned(const std::string& key, unsigned long long value);
    void add_output(const std::string& role, const std::string& path);

    const std::string& subcommand() const { return subcommand_; }
    const std::vector<std::pair<std::string, std::string>>& entries() const {
        return entries_;
    }

    void write(const std::string& path) const;
    static Manifest read(const std::string& path);

    // Reconstructs an argv ("subcommand --key=value ...") from the stored
    // parameters; bookkeeping keys are skipped.
    std::vector<std::string> to_argv() const;

private:
    std::string subcommand_;
    std::vector<std::pair<std::string, std::string>> entries_;
};

std::string format_double(double value); // %.17g, round-trip exact

} // namespace subforest::cli

#endif
