#pragma once

#include <random>
#include <span>
#include <string_view>

#include "qrnn/tasks/sample.hpp"

namespace qrnn {

/// Candidate classes of a classification task. Entry c holds the words a
/// sample's target-bearing steps would carry if its label were class c.
/// Classes are ordered by ascending label value, which is also the
/// tie-break order of evaluation.
struct LabelSet {
    std::vector<std::vector<Word>> class_words;
    std::size_t num_classes() const { return class_words.size(); }
};

/// Split a little-endian bit value into per-step words of `io_bits` bits,
/// low bits first.
std::vector<Word> split_label_words(unsigned value, unsigned total_bits,
                                    unsigned io_bits);

/// A dataset the trainer can draw batches from. Implementations are
/// immutable after construction; draw() only mutates the caller's
/// generator, so streams may be consumed concurrently by index partition.
class Task {
  public:
    virtual ~Task() = default;

    /// Input word width in bits; must match the model topology's I.
    virtual std::uint32_t input_bits() const = 0;
    /// Draw one training sample.
    virtual TaskSample draw(std::mt19937_64& rng) const = 0;
    /// Fixed held-out set for validation-loss checks.
    virtual std::span<const TaskSample> validation() const = 0;
    /// Candidate labels, or nullptr for unlabeled tasks.
    virtual const LabelSet* labels() const { return nullptr; }
    virtual std::string_view name() const = 0;
};

} // namespace qrnn
