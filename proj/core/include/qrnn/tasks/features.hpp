#pragma once

#include <filesystem>

#include "qrnn/tasks/task.hpp"

namespace qrnn {

class CsvError : public Error {
  public:
    using Error::Error;
};

/// Mean-centered top-k principal axes of a training matrix. The sign of
/// each component is fixed so its largest-magnitude entry is positive.
struct PcaModel {
    std::vector<double> mean;
    std::vector<std::vector<double>> components; // k rows, orthonormal
    std::vector<double> variances;               // descending eigenvalues
};

/// Fit on the training split only.
PcaModel pca_fit(const std::vector<std::vector<double>>& train,
                 std::size_t k);
std::vector<double> pca_apply(const PcaModel& model,
                              std::span<const double> x);

/// Per-dimension mean and standard deviation of a training matrix.
struct ColumnStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};
ColumnStats fit_column_stats(const std::vector<std::vector<double>>& train);

/// Gaussian-uniformized quantization: u = Phi((x - mean) / std), code =
/// floor(u * 2^bits) clamped to [0, 2^bits - 1]. One code per dimension.
std::vector<Word> discretize(std::span<const double> coords,
                             std::uint32_t bits, const ColumnStats& stats);

struct EmbeddingRecord {
    std::int64_t id = 0;
    std::vector<double> coords;
    int label = 0;
};

struct EmbeddingData {
    std::size_t dims = 0;
    std::vector<EmbeddingRecord> train;
    std::vector<EmbeddingRecord> validate;
    std::vector<EmbeddingRecord> test;
};

/// CSV with header id,dim0..dimK,label,split; duplicate ids and malformed
/// rows are rejected with their line number.
EmbeddingData load_embedding_csv(const std::filesystem::path& path);

/// Classification task over discretized coordinate vectors: step t < bits
/// presents bit t of every dimension's code (one lane per dimension), then
/// the final steps carry the 4-bit label, little endian.
class EncodedCoordinateTask : public Task {
  public:
    /// `stats` must come from the training split. Coordinates are encoded
    /// eagerly; draw() picks uniformly from the training records.
    EncodedCoordinateTask(const std::vector<EmbeddingRecord>& train,
                          const std::vector<EmbeddingRecord>& validate,
                          const std::vector<EmbeddingRecord>& test,
                          std::uint32_t bits, const ColumnStats& stats,
                          std::vector<int> class_digits);

    std::uint32_t input_bits() const override { return dims_; }
    TaskSample draw(std::mt19937_64& rng) const override;
    std::span<const TaskSample> validation() const override {
        return validation_;
    }
    const LabelSet* labels() const override { return &labels_; }
    std::string_view name() const override { return "encoded_coordinates"; }

    std::span<const TaskSample> test_set() const { return test_; }

  private:
    TaskSample encode(const EmbeddingRecord& record,
                      const ColumnStats& stats) const;

    std::uint32_t dims_ = 0;
    std::uint32_t bits_ = 0;
    std::vector<int> class_digits_;
    std::vector<TaskSample> train_;
    std::vector<TaskSample> validation_;
    std::vector<TaskSample> test_;
    LabelSet labels_;
};

} // namespace qrnn
