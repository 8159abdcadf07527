#pragma once

#include "nonllrtv/admm.hpp"
#include "nonllrtv/simnoise.hpp"

#include <json.hpp>

#include <ostream>
#include <string>
#include <vector>

namespace nonllrtv::cli {

inline constexpr const char *kToolVersion = "1.0.0";

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kNumerical = 3,
};

/// Entry point of the `nonllrtv` tool; argv[0] is the program name.
int run(int argc, const char *const *argv, std::ostream &out, std::ostream &err);
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

nlohmann::json config_to_json(const SolverConfig &config);
SolverConfig config_from_json(const nlohmann::json &j);

} // namespace nonllrtv::cli
