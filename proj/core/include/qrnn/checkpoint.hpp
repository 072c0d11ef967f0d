#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "qrnn/model.hpp"

namespace qrnn {

/// Unreadable, truncated or structurally invalid checkpoint document.
class CheckpointError : public Error {
  public:
    using Error::Error;
};

/// Model plus the run bookkeeping stored next to it.
struct LoadedCheckpoint {
    QrnnModel model;
    std::uint64_t rng_seed = 0;
    std::uint64_t step_count = 0;
};

/// Write a JSON checkpoint. Parameters are grouped as
/// input_neurons / stage_rotations / stage_neurons / output_neurons, every
/// value printed with 17 significant digits so the round-trip is bit-exact.
void save_checkpoint(const QrnnModel& model, std::uint64_t rng_seed,
                     std::uint64_t step_count, std::ostream& out);
void save_checkpoint(const QrnnModel& model, std::uint64_t rng_seed,
                     std::uint64_t step_count,
                     const std::filesystem::path& path);

LoadedCheckpoint load_checkpoint(std::istream& in);
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

} // namespace qrnn
