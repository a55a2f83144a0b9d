#pragma once

#include <spreaders/pipeline.hpp>

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace spreaders {

/// Everything a command can be configured with: the run itself plus
/// settings that do not affect results.
struct Settings {
    RunConfig run;
    /// 0 keeps the OpenMP default.
    int threads = 0;
    std::filesystem::path output_dir = ".";
    /// Precomputed inputs for the rank and classify commands.
    std::filesystem::path features_csv;
    std::filesystem::path influence_csv;
};

/// One config key. The command-line flag is "--" + flag.
struct OptionSpec {
    std::string_view section;
    std::string_view key;
    std::string_view flag;
    std::string_view help;
    /// Boolean switch taking no value on the command line.
    bool is_switch = false;
    std::function<void(Settings &, std::string_view)> apply;
    std::function<std::string(const Settings &)> show;
};

const std::vector<OptionSpec> &option_table();

/// Looks up "section.key". Returns nullptr when unknown.
const OptionSpec *find_option(std::string_view section, std::string_view key);

/// Parses INI text ([section] then key = value) into `settings`.
/// Unknown sections or keys and malformed values throw UsageError.
void apply_config(Settings &settings, std::istream &in);
void apply_config_file(Settings &settings, const std::filesystem::path &path);

/// Every key with its current value, in table order, as INI text.
void write_config(std::ostream &out, const Settings &settings);

/// Comma-separated numbers. Throws UsageError.
std::vector<double> parse_double_list(std::string_view text);

} // namespace spreaders
