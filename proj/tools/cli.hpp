#pragma once

#include <string>

namespace qrnn::cli {

/// Entry point shared by the binary and the tests.
/// Subcommands: train | eval | generate | inspect.
/// Exit codes: 0 success (train: threshold reached), 1 error,
/// 2 train finished max_steps without reaching the threshold.
int run_cli(int argc, const char* const* argv);

/// Parse a config document and serialize it back with every field made
/// explicit. Canonical text is a fixed point of parse -> serialize.
std::string canonical_config_json(const std::string& json_text);

} // namespace qrnn::cli
