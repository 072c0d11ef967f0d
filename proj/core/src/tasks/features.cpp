#include "qrnn/tasks/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <Eigen/Dense>

namespace qrnn {

PcaModel pca_fit(const std::vector<std::vector<double>>& train,
                 std::size_t k) {
    if (train.empty())
        throw Error("pca_fit needs a nonempty training set");
    const std::size_t features = train.front().size();
    if (k > features)
        throw Error("pca: " + std::to_string(k) +
                    " components exceed the " + std::to_string(features) +
                    " features");

    Eigen::MatrixXd data(train.size(), features);
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (train[i].size() != features)
            throw Error("pca: ragged training matrix");
        for (std::size_t j = 0; j < features; ++j)
            data(i, j) = train[i][j];
    }
    const Eigen::RowVectorXd mean = data.colwise().mean();
    data.rowwise() -= mean;
    const Eigen::MatrixXd covariance =
        (data.transpose() * data) / std::max<std::size_t>(train.size() - 1, 1);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(covariance);
    if (solver.info() != Eigen::Success)
        throw Error("pca: eigendecomposition failed");

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + features);
    // Eigen returns eigenvalues ascending; take the top k.
    for (std::size_t c = 0; c < k; ++c) {
        const auto column = solver.eigenvectors().col(features - 1 - c);
        std::vector<double> component(column.data(),
                                      column.data() + features);
        // Deterministic sign: largest-magnitude entry positive.
        const auto largest = std::max_element(
            component.begin(), component.end(),
            [](double a, double b) { return std::abs(a) < std::abs(b); });
        if (*largest < 0.0)
            for (double& v : component)
                v = -v;
        model.components.push_back(std::move(component));
        model.variances.push_back(solver.eigenvalues()(features - 1 - c));
    }
    return model;
}

std::vector<double> pca_apply(const PcaModel& model,
                              std::span<const double> x) {
    if (x.size() != model.mean.size())
        throw Error("pca_apply: feature count mismatch");
    std::vector<double> coords(model.components.size(), 0.0);
    for (std::size_t c = 0; c < model.components.size(); ++c)
        for (std::size_t j = 0; j < x.size(); ++j)
            coords[c] += model.components[c][j] * (x[j] - model.mean[j]);
    return coords;
}

ColumnStats fit_column_stats(const std::vector<std::vector<double>>& train) {
    if (train.empty())
        throw Error("column stats need a nonempty training set");
    const std::size_t dims = train.front().size();
    ColumnStats stats;
    stats.mean.assign(dims, 0.0);
    stats.stddev.assign(dims, 0.0);
    for (const auto& row : train)
        for (std::size_t j = 0; j < dims; ++j)
            stats.mean[j] += row[j];
    for (double& m : stats.mean)
        m /= static_cast<double>(train.size());
    for (const auto& row : train)
        for (std::size_t j = 0; j < dims; ++j) {
            const double d = row[j] - stats.mean[j];
            stats.stddev[j] += d * d;
        }
    for (double& s : stats.stddev)
        s = std::sqrt(s / static_cast<double>(train.size()));
    return stats;
}

std::vector<Word> discretize(std::span<const double> coords,
                             std::uint32_t bits, const ColumnStats& stats) {
    if (coords.size() != stats.mean.size())
        throw Error("discretize: dimension mismatch");
    const double levels = static_cast<double>(Word{1} << bits);
    std::vector<Word> codes(coords.size());
    for (std::size_t j = 0; j < coords.size(); ++j) {
        if (stats.stddev[j] <= 0.0)
            throw Error("discretize: dimension " + std::to_string(j) +
                        " has zero standard deviation");
        const double z = (coords[j] - stats.mean[j]) / stats.stddev[j];
        const double u = 0.5 * std::erfc(-z / std::sqrt(2.0));
        const double scaled = std::floor(u * levels);
        codes[j] = static_cast<Word>(
            std::clamp(scaled, 0.0, levels - 1.0));
    }
    return codes;
}

EmbeddingData load_embedding_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw CsvError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line))
        throw CsvError(path.string() + ": missing header");

    const auto split = [](const std::string& text) {
        std::vector<std::string> fields;
        std::stringstream ss(text);
        std::string field;
        while (std::getline(ss, field, ','))
            fields.push_back(field);
        if (!text.empty() && text.back() == ',')
            fields.push_back("");
        return fields;
    };

    const auto header = split(line);
    if (header.size() < 4 || header.front() != "id" ||
        header[header.size() - 2] != "label" || header.back() != "split")
        throw CsvError(path.string() +
                       ": header must be id,dim0..dimK,label,split");
    EmbeddingData data;
    data.dims = header.size() - 3;

    std::set<std::int64_t> ids;
    std::size_t line_number = 1;
    while (std::getline(in, line)) {
        ++line_number;
        if (line.empty())
            continue;
        const auto fields = split(line);
        if (fields.size() != header.size())
            throw CsvError(path.string() + ":" + std::to_string(line_number) +
                           ": expected " + std::to_string(header.size()) +
                           " fields, got " + std::to_string(fields.size()));
        EmbeddingRecord record;
        try {
            record.id = std::stoll(fields[0]);
            for (std::size_t j = 0; j < data.dims; ++j)
                record.coords.push_back(std::stod(fields[1 + j]));
            record.label = std::stoi(fields[1 + data.dims]);
        } catch (const std::exception&) {
            throw CsvError(path.string() + ":" + std::to_string(line_number) +
                           ": malformed numeric field");
        }
        if (!ids.insert(record.id).second)
            throw CsvError(path.string() + ":" + std::to_string(line_number) +
                           ": duplicate id " + std::to_string(record.id));
        const std::string& tag = fields.back();
        if (tag == "train")
            data.train.push_back(std::move(record));
        else if (tag == "validate")
            data.validate.push_back(std::move(record));
        else if (tag == "test")
            data.test.push_back(std::move(record));
        else
            throw CsvError(path.string() + ":" + std::to_string(line_number) +
                           ": unknown split tag '" + tag + "'");
    }
    return data;
}

EncodedCoordinateTask::EncodedCoordinateTask(
    const std::vector<EmbeddingRecord>& train,
    const std::vector<EmbeddingRecord>& validate,
    const std::vector<EmbeddingRecord>& test, std::uint32_t bits,
    const ColumnStats& stats, std::vector<int> class_digits)
    : dims_(static_cast<std::uint32_t>(stats.mean.size())), bits_(bits),
      class_digits_(std::move(class_digits)) {
    std::sort(class_digits_.begin(), class_digits_.end());
    for (const auto& r : train)
        train_.push_back(encode(r, stats));
    for (const auto& r : validate)
        validation_.push_back(encode(r, stats));
    for (const auto& r : test)
        test_.push_back(encode(r, stats));
    for (int digit : class_digits_)
        labels_.class_words.push_back(
            split_label_words(static_cast<unsigned>(digit), 4, dims_));
}

TaskSample EncodedCoordinateTask::encode(const EmbeddingRecord& record,
                                         const ColumnStats& stats) const {
    const auto codes = discretize(record.coords, bits_, stats);
    TaskSample sample;
    for (std::uint32_t t = 0; t < bits_; ++t) {
        Word word = 0;
        for (std::uint32_t j = 0; j < dims_; ++j)
            word |= ((codes[j] >> t) & 1) << j;
        sample.inputs.push_back(word);
    }
    const auto words = split_label_words(
        static_cast<unsigned>(record.label), 4, dims_);
    sample.targets.assign(sample.inputs.size(), std::nullopt);
    for (const Word w : words) {
        sample.inputs.push_back(0);
        sample.targets.push_back(w);
    }
    const auto it = std::find(class_digits_.begin(), class_digits_.end(),
                              record.label);
    if (it == class_digits_.end())
        throw Error("label " + std::to_string(record.label) +
                    " not in the task's class set");
    sample.label = static_cast<int>(it - class_digits_.begin());
    return sample;
}

TaskSample EncodedCoordinateTask::draw(std::mt19937_64& rng) const {
    if (train_.empty())
        throw Error("coordinate task has no training records");
    return train_[rng() % train_.size()];
}

} // namespace qrnn
