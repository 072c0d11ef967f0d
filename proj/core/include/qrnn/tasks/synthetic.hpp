#pragma once

#include <random>
#include <string>

#include "qrnn/tasks/task.hpp"

namespace qrnn {

/// Codec of the memorization alphabet {1, 2, 3, 4} (2 bits).
const TokenCodec& memorize_codec();
/// Codec of the sentence-letter alphabet {b, a, d, i, g, u} (3 bits).
const TokenCodec& words_codec();
/// Codec of the DNA alphabet {G, A, T, C, U} (3 bits).
const TokenCodec& dna_codec();

/// Next-token prediction over the cyclically repeated pattern. Every step
/// carries a target.
TaskSample gen_memorize(std::string_view pattern, std::size_t length,
                        const TokenCodec& codec);

/// Bit triplets b1 b2 (b1 xor b2); only the steps whose successor is the
/// derived third bit carry a target (the random bits are unpredictable).
TaskSample gen_xor(std::size_t triplet_count, std::mt19937_64& rng);
/// Same construction from explicit bit pairs.
TaskSample xor_sample_from_pairs(
    std::span<const std::pair<Word, Word>> pairs);

/// Random sentence over the words "ba", "dii", "guuu"; targets are the
/// predictable within-word continuation letters.
TaskSample gen_words(std::size_t sentence_length, std::mt19937_64& rng);
/// Same construction from explicit word choices (indices 0..2).
TaskSample words_sample_from_choices(std::span<const int> choices);

/// Uniform string over {G, A, T, C} with a single 'U' planted in the first
/// half; the label (and the only target, at the final step) is the base
/// that follows the 'U'.
TaskSample gen_dna(std::size_t length, std::mt19937_64& rng);
/// Same construction from an explicit sequence holding exactly one 'U'.
TaskSample dna_sample_from_sequence(std::string_view sequence);

class MemorizeTask : public Task {
  public:
    MemorizeTask(std::string pattern, std::size_t length);

    std::uint32_t input_bits() const override { return 2; }
    TaskSample draw(std::mt19937_64&) const override { return sample_; }
    std::span<const TaskSample> validation() const override {
        return {&sample_, 1};
    }
    std::string_view name() const override { return "memorize"; }

  private:
    TaskSample sample_;
};

class XorTask : public Task {
  public:
    XorTask(std::size_t triplet_count, std::uint64_t validation_seed,
            std::size_t validation_size = 64);

    std::uint32_t input_bits() const override { return 1; }
    TaskSample draw(std::mt19937_64& rng) const override {
        return gen_xor(triplet_count_, rng);
    }
    std::span<const TaskSample> validation() const override {
        return validation_;
    }
    std::string_view name() const override { return "xor"; }

  private:
    std::size_t triplet_count_;
    std::vector<TaskSample> validation_;
};

class WordsTask : public Task {
  public:
    WordsTask(std::size_t sentence_length, std::uint64_t validation_seed,
              std::size_t validation_size = 64);

    std::uint32_t input_bits() const override { return 3; }
    TaskSample draw(std::mt19937_64& rng) const override {
        return gen_words(sentence_length_, rng);
    }
    std::span<const TaskSample> validation() const override {
        return validation_;
    }
    std::string_view name() const override { return "words"; }

  private:
    std::size_t sentence_length_;
    std::vector<TaskSample> validation_;
};

class DnaTask : public Task {
  public:
    DnaTask(std::size_t length, std::uint64_t validation_seed,
            std::size_t validation_size = 64);

    std::uint32_t input_bits() const override { return 3; }
    TaskSample draw(std::mt19937_64& rng) const override {
        return gen_dna(length_, rng);
    }
    std::span<const TaskSample> validation() const override {
        return validation_;
    }
    const LabelSet* labels() const override { return &labels_; }
    std::string_view name() const override { return "dna"; }

  private:
    std::size_t length_;
    std::vector<TaskSample> validation_;
    LabelSet labels_;
};

/// Default seed of held-out validation sets; fixed and disjoint from the
/// training batch stream so seed sweeps compare against one set.
inline constexpr std::uint64_t kValidationSeed = 20210607;

} // namespace qrnn
