//
// Project molr - Copyright 2026 The molr Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef MOLR_CONFIG_H_
#define MOLR_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "molr/dataset.h"
#include "molr/gateway.h"
#include "molr/grpo.h"
#include "molr/moia.h"
#include "molr/prid.h"
#include "molr/rewards.h"

namespace molr {

inline constexpr std::string_view kConfigSchema = "molr.pipeline/1";

// Error in a config file, naming the offending field as a JSON path such as
// "prid.max_retries".
class ConfigError: public std::invalid_argument {
public:
  ConfigError(const std::string &field, const std::string &message)
      : std::invalid_argument(field + ": " + message), field_(field) { }
  const std::string &field() const { return field_; }

private:
  std::string field_;
};

enum class BackendKind { kMock, kHttp, kToy };

struct BackendConfig {
  BackendKind kind = BackendKind::kMock;
  // Scripted responses; used for kind "mock" and whenever the mock backend
  // is forced from the command line.
  std::optional<std::filesystem::path> mock_fixture;
  HttpBackendConfig http;
};

enum class HookKind { kScripted, kToy, kSubprocess };

struct ToySection {
  std::vector<std::string> vocab;
  std::size_t n_rows = 4096;
  int n_ctx = 3;
  double temperature = 1.0;
  std::vector<TraceRecord> records;
  ToyTrainConfig train;
};

struct MoiaSection {
  MoiaConfig moia;
  HookKind hooks = HookKind::kScripted;
  std::vector<double> em_schedule{ 0.0 };
  SubprocessHookConfig subprocess;
  ToyHookConfig toy;
};

struct PipelineConfig {
  std::filesystem::path source;
  std::uint64_t seed = 0;

  std::optional<std::filesystem::path> raw_path;
  std::optional<std::filesystem::path> r0_path;
  std::optional<std::filesystem::path> work_dir;

  std::map<std::string, BackendConfig> backends;

  RewardConfig reward;
  GrpoConfig grpo;
  PridConfig prid;
  ResampleConfig resample;
  MoiaSection moia;
  std::optional<ToySection> toy;
  GenerationRequest judge_request;

  // Relative paths are resolved against the config file's directory. Throws
  // ConfigError.
  static PipelineConfig load(const std::filesystem::path &path);
  static PipelineConfig parse(std::string_view text,
                              const std::filesystem::path &base_dir);

  // Backend for a stage ("distill", "judge", "resample"); force_mock selects
  // the scripted backend regardless of the configured kind.
  std::shared_ptr<Backend> make_backend(const std::string &stage,
                                        bool force_mock) const;

  // Toy policy described by the toy section. Throws ConfigError when absent.
  ToyPolicy make_toy_policy() const;
};

}  // namespace molr

#endif  // MOLR_CONFIG_H_
