#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qrnn/statevector.hpp"

namespace qrnn {

/// One training example: a sequence of input words with per-step optional
/// targets. Steps without a target skip the output stage entirely. `label`
/// carries the class index for classification tasks.
struct TaskSample {
    std::vector<Word> inputs;
    std::vector<std::optional<Word>> targets;
    std::optional<int> label;
};

/// Fixed-width binary encoding of an ordered symbol alphabet.
class TokenCodec {
  public:
    explicit TokenCodec(std::string alphabet);

    std::uint32_t bits() const { return bits_; }
    std::size_t size() const { return alphabet_.size(); }

    Word encode(char symbol) const;
    char decode(Word word) const;

    std::string_view alphabet() const { return alphabet_; }

  private:
    std::string alphabet_;
    std::uint32_t bits_;
};

} // namespace qrnn
