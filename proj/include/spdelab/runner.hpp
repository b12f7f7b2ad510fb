#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "spdelab/config.hpp"
#include "spdelab/error_lab.hpp"

namespace spdelab::cli {

// Exit codes: 0 all checks pass, 1 config/runtime error (thrown as
// ConfigError / std::exception by callees), 2 acceptance-check failure.
struct SuiteResult {
    int exit_code = 0;
    std::filesystem::path run_dir;
};

// Builders shared with the test suites.
sde::ModelSpec model_from_config(const Config& cfg);
lab::ExperimentPlan plan_from_config(const Config& cfg);

SuiteResult run_suite(const std::string& subcommand, const Config& cfg, std::ostream& log);

bool known_subcommand(const std::string& name);

}  // namespace spdelab::cli
