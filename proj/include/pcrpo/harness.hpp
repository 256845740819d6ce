#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace pcrpo {

// Exit codes shared by every subcommand: 0 success, 1 assertion/property
// failure, 2 usage or configuration error. Relative output directories are
// rooted at $PCRPO_OUT_ROOT when that variable is set.

int cmd_train(const std::string& config_path,
              const std::vector<std::string>& overrides, std::ostream& out,
              std::ostream& err);

int cmd_verify_gradients(long samples, const std::vector<int>& dims,
                         std::uint64_t seed, bool parallel, std::ostream& out,
                         std::ostream& err);

int cmd_verify_theorems(long instances, std::uint64_t seed, bool parallel,
                        std::ostream& out, std::ostream& err);

int cmd_sweep(const std::string& sweep_path, int jobs_override,
              std::ostream& out, std::ostream& err);

int cmd_export(const std::vector<std::string>& run_dirs,
               const std::string& combined_out, std::ostream& out,
               std::ostream& err);

}  // namespace pcrpo
