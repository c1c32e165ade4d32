#ifndef TVG_EXPERIMENT_HPP
#define TVG_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>

namespace tvg {

// Exit codes shared by the library entry point and the CLI.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSchemaError = 1;
inline constexpr int kExitPreconditionError = 2;
inline constexpr int kExitIoError = 3;

struct ExperimentOverrides {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  int sweep = 1;  // seeds seed .. seed + sweep - 1
};

// Loads a JSON experiment config, runs it deterministically and writes the
// trace CSV(s) plus a run manifest. Returns one of the exit codes above;
// error text goes to stderr.
int run_experiment(const std::string& config_path, const ExperimentOverrides& overrides);

}  // namespace tvg

#endif  // TVG_EXPERIMENT_HPP
