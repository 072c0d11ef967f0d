#pragma once

#include <filesystem>

#include "qrnn/tasks/task.hpp"

namespace qrnn {

class IdxError : public Error {
  public:
    using Error::Error;
};
class IdxMagicError : public IdxError {
  public:
    using IdxError::IdxError;
};
class IdxTruncatedError : public IdxError {
  public:
    using IdxError::IdxError;
};
class IdxCountMismatchError : public IdxError {
  public:
    using IdxError::IdxError;
};

/// Raw image/label pairs as stored in the IDX container.
struct RawMnist {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::vector<std::uint8_t>> images; // row-major rows*cols
    std::vector<std::uint8_t> labels;
};

/// Parse the big-endian IDX pair (images magic 0x00000803, labels magic
/// 0x00000801) and validate that the counts match.
RawMnist load_mnist_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path);

struct MnistConfig {
    std::uint32_t crop = 20;       // center crop 28 -> crop
    std::uint32_t downscale = 10;  // mean-pool crop -> downscale
    double threshold = 0.5;        // binarize pooled intensity in [0, 1]
    std::vector<int> digits;       // keep these classes; empty = all
};

/// One preprocessed image: downscale x downscale binary pixels, row-major.
struct MnistExample {
    std::vector<std::uint8_t> pixels;
    int label = 0;
};

std::vector<MnistExample> preprocess_mnist(const RawMnist& raw,
                                           const MnistConfig& config);

/// Scanline encoding: step t presents (row-major pixel t, column-major
/// pixel t) as an io_bits-wide word; the final ceil(4 / io_bits) steps carry
/// the 4-bit label, little endian. io_bits must be 2.
TaskSample mnist_sample(const MnistExample& example, std::uint32_t io_bits);

/// Generative variant: inputs are the digit word followed by the first 99
/// pixel words; every step's target is the current pixel word.
TaskSample mnist_generative_sample(const MnistExample& example);

/// Count of identical preprocessed (pixels, label) pairs shared between two
/// splits; surfaced so small-image duplicate leakage is visible.
std::size_t duplicate_count(std::span<const MnistExample> train,
                            std::span<const MnistExample> test);

/// Pixel-by-pixel classification task over preprocessed examples.
class MnistTask : public Task {
  public:
    MnistTask(std::vector<MnistExample> train, std::vector<MnistExample> val,
              std::vector<MnistExample> test, std::vector<int> class_digits,
              bool generative = false);

    std::uint32_t input_bits() const override { return 2; }
    TaskSample draw(std::mt19937_64& rng) const override;
    std::span<const TaskSample> validation() const override {
        return validation_;
    }
    const LabelSet* labels() const override {
        return generative_ ? nullptr : &labels_;
    }
    std::string_view name() const override {
        return generative_ ? "mnist_gen" : "mnist";
    }

    std::span<const TaskSample> test_set() const { return test_; }
    std::size_t train_size() const { return train_.size(); }
    std::size_t train_test_duplicates() const { return duplicates_; }
    /// Class index of a digit value, per the task's label ordering.
    int class_of(int digit) const;

  private:
    TaskSample encode(const MnistExample& example) const;

    std::vector<MnistExample> train_;
    std::vector<TaskSample> validation_;
    std::vector<TaskSample> test_;
    std::vector<int> class_digits_;
    LabelSet labels_;
    std::size_t duplicates_ = 0;
    bool generative_ = false;
};

} // namespace qrnn
