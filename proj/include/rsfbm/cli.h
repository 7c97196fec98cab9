#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rsfbm/evopde.h"
#include "rsfbm/fracops.h"
#include "rsfbm/homkernel.h"
#include "rsfbm/randscale.h"

namespace rsfbm::cli {

using Json = nlohmann::ordered_json;

/// Malformed or contradictory configuration (exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"simulate", "moments", "ito-check", "solve",
                                          "kernel-check", "phi-k", "density-check", "report"};
  return c;
}

/// Section of the config tree holding the options of a command ("ito-check" -> "ito_check").
std::string section_of(const std::string& command);

/// Every key with its default value.
Json default_config();
Json load_config_file(const std::filesystem::path& path);
/// Recursively overlays `overlay` onto `base`; unknown keys are rejected.
void merge_into(Json& base, const Json& overlay, const std::string& where = "");
/// Sets the leaf at a dotted path; the value is parsed as JSON when possible, else kept as a string.
void apply_override(Json& config, const std::string& dotted, const std::string& value);
/// FNV-1a of the compact dump of the resolved config.
std::string config_hash(const Json& config);

HurstModel hurst_from(const Json& config);
Integrand integrand_from(const Json& node);
HomogeneousKernel kernel_from(const Json& node);
DiffusionModel model_from(const Json& node);
InitialDatum datum_from(const Json& node);
/// Kernel of the evolution equation that belongs to a model (gamma-grey, Bender-Butko,
/// Mittag-Leffler through the GGBM kernel, Dirac(a0) through the heat kernel).
KernelSpec kernel_spec_for(const DiffusionModel& model, const HurstModel& h);

struct Outcome {
  int exit_code = 0;
  std::string summary;
  std::vector<std::filesystem::path> files;
};

/// Runs the command named in config["command"]; writes artifacts to `out_dir`.
Outcome dispatch(const Json& config, const std::filesystem::path& out_dir);

/// Full command-line entry point; returns the process exit code.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace rsfbm::cli
