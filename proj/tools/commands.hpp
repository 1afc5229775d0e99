#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace bms::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitVerify = 4;

struct Options {
  std::optional<std::string> config;
  std::optional<std::string> preset;
  std::optional<std::string> format;
  std::optional<int> precision;
  bool full_precision = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> quadrature_nodes;
  std::optional<std::string> out;
  std::optional<long> paths;
  std::optional<int> threads;
  /// "LEVEL:DELTA", verify only.
  std::optional<std::string> perturb;
};

int cmd_relativities(const Options& opts);
int cmd_hmse_scan(const Options& opts);
int cmd_bayes(const Options& opts);
int cmd_simulate(const Options& opts);
int cmd_verify(const Options& opts);
int cmd_reproduce_table(const Options& opts);

/// Runs a command and maps exceptions onto exit codes, printing diagnostics to stderr.
int run_guarded(int (*command)(const Options&), const Options& opts);

}  // namespace bms::cli
