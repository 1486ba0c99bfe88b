#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace modamp::cli {

inline constexpr const char* kVersion = "1.0.0";

/// Resolved run parameters, kept as the text they were given in.
using Parameters = std::map<std::string, std::string>;

struct ParameterDoc {
  std::string key;
  std::string default_value;
  std::string help;
};

const std::vector<ParameterDoc>& parameter_docs();
Parameters default_parameters();
const std::vector<std::string>& experiments();

/// Config text as INI (`[common]` plus `[<experiment>]`, the latter winning)
/// or as JSON (an object, or a run summary whose "parameters" block is used).
Parameters parse_config_text(const std::string& text, const std::string& experiment);
Parameters load_config(const std::filesystem::path& path, const std::string& experiment);

/// Grid syntax: comma-separated items, each a number, `first:last:step`
/// (inclusive) or `log:first:last:count`.
std::vector<double> parse_grid(const std::string& text);

/// Entry point. Returns 0 on success, 2 on usage or parameter errors and 1
/// on numerical failures.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace modamp::cli
