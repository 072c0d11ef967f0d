#include "qrnn/tasks/mnist.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace qrnn {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::uint32_t read_u32(std::ifstream& in, const std::filesystem::path& path,
                       std::size_t& offset) {
    unsigned char bytes[4];
    in.read(reinterpret_cast<char*>(bytes), 4);
    if (in.gcount() != 4)
        throw IdxTruncatedError(path.string() + " truncated at byte " +
                                std::to_string(offset + in.gcount()));
    offset += 4;
    return (std::uint32_t(bytes[0]) << 24) | (std::uint32_t(bytes[1]) << 16) |
           (std::uint32_t(bytes[2]) << 8) | std::uint32_t(bytes[3]);
}

} // namespace

RawMnist load_mnist_idx(const std::filesystem::path& images_path,
                        const std::filesystem::path& labels_path) {
    std::ifstream images(images_path, std::ios::binary);
    if (!images)
        throw IdxError("cannot open " + images_path.string());
    std::size_t offset = 0;
    const std::uint32_t magic = read_u32(images, images_path, offset);
    if (magic != kImagesMagic)
        throw IdxMagicError(images_path.string() + ": bad magic " +
                            std::to_string(magic) + ", expected " +
                            std::to_string(kImagesMagic));
    const std::uint32_t count = read_u32(images, images_path, offset);
    const std::uint32_t rows = read_u32(images, images_path, offset);
    const std::uint32_t cols = read_u32(images, images_path, offset);

    RawMnist raw;
    raw.rows = rows;
    raw.cols = cols;
    raw.images.assign(count, std::vector<std::uint8_t>(rows * cols));
    for (std::uint32_t i = 0; i < count; ++i) {
        images.read(reinterpret_cast<char*>(raw.images[i].data()),
                    static_cast<std::streamsize>(rows * cols));
        if (images.gcount() != static_cast<std::streamsize>(rows * cols))
            throw IdxTruncatedError(
                images_path.string() + " truncated at byte " +
                std::to_string(offset + images.gcount()));
        offset += rows * cols;
    }

    std::ifstream labels(labels_path, std::ios::binary);
    if (!labels)
        throw IdxError("cannot open " + labels_path.string());
    std::size_t label_offset = 0;
    const std::uint32_t label_magic = read_u32(labels, labels_path,
                                               label_offset);
    if (label_magic != kLabelsMagic)
        throw IdxMagicError(labels_path.string() + ": bad magic " +
                            std::to_string(label_magic) + ", expected " +
                            std::to_string(kLabelsMagic));
    const std::uint32_t label_count = read_u32(labels, labels_path,
                                               label_offset);
    if (label_count != count)
        throw IdxCountMismatchError(
            "image count " + std::to_string(count) + " != label count " +
            std::to_string(label_count));
    raw.labels.assign(label_count, 0);
    labels.read(reinterpret_cast<char*>(raw.labels.data()), label_count);
    if (labels.gcount() != static_cast<std::streamsize>(label_count))
        throw IdxTruncatedError(labels_path.string() + " truncated at byte " +
                                std::to_string(label_offset +
                                               labels.gcount()));
    return raw;
}

std::vector<MnistExample> preprocess_mnist(const RawMnist& raw,
                                           const MnistConfig& config) {
    if (config.crop > raw.rows || config.crop > raw.cols)
        throw Error("crop size exceeds image size");
    if (config.crop % config.downscale != 0)
        throw Error("crop size must be a multiple of the downscale size");
    const std::uint32_t pool = config.crop / config.downscale;
    const std::size_t row0 = (raw.rows - config.crop) / 2;
    const std::size_t col0 = (raw.cols - config.crop) / 2;
    const std::set<int> keep(config.digits.begin(), config.digits.end());

    std::vector<MnistExample> examples;
    for (std::size_t n = 0; n < raw.images.size(); ++n) {
        const int label = raw.labels[n];
        if (!keep.empty() && !keep.count(label))
            continue;
        MnistExample ex;
        ex.label = label;
        ex.pixels.resize(std::size_t{config.downscale} * config.downscale);
        const auto& img = raw.images[n];
        for (std::uint32_t r = 0; r < config.downscale; ++r) {
            for (std::uint32_t c = 0; c < config.downscale; ++c) {
                double sum = 0.0;
                for (std::uint32_t dr = 0; dr < pool; ++dr)
                    for (std::uint32_t dc = 0; dc < pool; ++dc)
                        sum += img[(row0 + r * pool + dr) * raw.cols +
                                   (col0 + c * pool + dc)];
                const double mean = sum / (pool * pool * 255.0);
                ex.pixels[r * config.downscale + c] =
                    mean > config.threshold ? 1 : 0;
            }
        }
        examples.push_back(std::move(ex));
    }
    return examples;
}

TaskSample mnist_sample(const MnistExample& example, std::uint32_t io_bits) {
    if (io_bits != 2)
        throw Error("scanline encoding presents 2 bits per step");
    const std::size_t side = 10;
    if (example.pixels.size() != side * side)
        throw Error("expected 10x10 preprocessed pixels");
    TaskSample sample;
    const std::size_t steps = side * side;
    sample.inputs.reserve(steps);
    for (std::size_t t = 0; t < steps; ++t) {
        const Word row_major = example.pixels[t];
        const Word col_major = example.pixels[(t % side) * side + t / side];
        sample.inputs.push_back(row_major | (col_major << 1));
    }
    sample.targets.assign(steps, std::nullopt);
    const auto words = split_label_words(
        static_cast<unsigned>(example.label), 4, io_bits);
    for (std::size_t j = 0; j < words.size(); ++j)
        sample.targets[steps - words.size() + j] = words[j];
    sample.label = example.label;
    return sample;
}

TaskSample mnist_generative_sample(const MnistExample& example) {
    const std::size_t side = 10;
    const std::size_t steps = side * side;
    TaskSample sample;
    sample.inputs.reserve(steps);
    sample.targets.reserve(steps);
    const auto pixel_word = [&](std::size_t t) -> Word {
        const Word row_major = example.pixels[t];
        const Word col_major = example.pixels[(t % side) * side + t / side];
        return row_major | (col_major << 1);
    };
    sample.inputs.push_back(static_cast<Word>(example.label) & 3);
    for (std::size_t t = 0; t + 1 < steps; ++t)
        sample.inputs.push_back(pixel_word(t));
    for (std::size_t t = 0; t < steps; ++t)
        sample.targets.push_back(pixel_word(t));
    sample.label = example.label;
    return sample;
}

std::size_t duplicate_count(std::span<const MnistExample> train,
                            std::span<const MnistExample> test) {
    std::set<std::pair<std::vector<std::uint8_t>, int>> seen;
    for (const auto& ex : train)
        seen.insert({ex.pixels, ex.label});
    std::size_t duplicates = 0;
    for (const auto& ex : test)
        if (seen.count({ex.pixels, ex.label}))
            ++duplicates;
    return duplicates;
}

MnistTask::MnistTask(std::vector<MnistExample> train,
                     std::vector<MnistExample> val,
                     std::vector<MnistExample> test,
                     std::vector<int> class_digits, bool generative)
    : train_(std::move(train)), class_digits_(std::move(class_digits)),
      generative_(generative) {
    std::sort(class_digits_.begin(), class_digits_.end());
    duplicates_ = duplicate_count(train_, test);
    for (const auto& ex : val)
        validation_.push_back(encode(ex));
    for (const auto& ex : test)
        test_.push_back(encode(ex));
    for (int digit : class_digits_)
        labels_.class_words.push_back(
            split_label_words(static_cast<unsigned>(digit), 4, 2));
}

TaskSample MnistTask::encode(const MnistExample& example) const {
    TaskSample sample = generative_ ? mnist_generative_sample(example)
                                    : mnist_sample(example, 2);
    if (!generative_)
        sample.label = class_of(example.label);
    return sample;
}

TaskSample MnistTask::draw(std::mt19937_64& rng) const {
    if (train_.empty())
        throw Error("mnist task has no training examples");
    return encode(train_[rng() % train_.size()]);
}

int MnistTask::class_of(int digit) const {
    const auto it = std::find(class_digits_.begin(), class_digits_.end(),
                              digit);
    if (it == class_digits_.end())
        throw Error("digit " + std::to_string(digit) +
                    " not in the task's class set");
    return static_cast<int>(it - class_digits_.begin());
}

} // namespace qrnn
