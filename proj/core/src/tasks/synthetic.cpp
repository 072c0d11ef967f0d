#include "qrnn/tasks/synthetic.hpp"

#include <array>

namespace qrnn {

namespace {

std::uint32_t bits_for(std::size_t alphabet_size) {
    std::uint32_t bits = 1;
    while ((std::size_t{1} << bits) < alphabet_size)
        ++bits;
    return bits;
}

} // namespace

TokenCodec::TokenCodec(std::string alphabet)
    : alphabet_(std::move(alphabet)), bits_(bits_for(alphabet_.size())) {
    if (alphabet_.empty())
        throw Error("empty codec alphabet");
}

Word TokenCodec::encode(char symbol) const {
    const auto pos = alphabet_.find(symbol);
    if (pos == std::string::npos)
        throw Error(std::string("symbol '") + symbol +
                    "' outside codec alphabet \"" + alphabet_ + "\"");
    return static_cast<Word>(pos);
}

char TokenCodec::decode(Word word) const {
    if (word >= alphabet_.size())
        throw Error("word " + std::to_string(word) +
                    " outside codec alphabet of size " +
                    std::to_string(alphabet_.size()));
    return alphabet_[word];
}

const TokenCodec& memorize_codec() {
    static const TokenCodec codec("1234");
    return codec;
}

const TokenCodec& words_codec() {
    static const TokenCodec codec("badigu");
    return codec;
}

const TokenCodec& dna_codec() {
    static const TokenCodec codec("GATCU");
    return codec;
}

TaskSample gen_memorize(std::string_view pattern, std::size_t length,
                        const TokenCodec& codec) {
    if (pattern.empty())
        throw Error("memorize pattern must be nonempty");
    TaskSample sample;
    sample.inputs.reserve(length);
    sample.targets.reserve(length);
    for (std::size_t t = 0; t < length; ++t) {
        sample.inputs.push_back(codec.encode(pattern[t % pattern.size()]));
        sample.targets.push_back(
            codec.encode(pattern[(t + 1) % pattern.size()]));
    }
    return sample;
}

TaskSample xor_sample_from_pairs(
    std::span<const std::pair<Word, Word>> pairs) {
    TaskSample sample;
    std::vector<Word> bits;
    bits.reserve(pairs.size() * 3);
    for (const auto& [b1, b2] : pairs) {
        bits.push_back(b1 & 1);
        bits.push_back(b2 & 1);
        bits.push_back((b1 ^ b2) & 1);
    }
    sample.inputs = bits;
    sample.targets.assign(bits.size(), std::nullopt);
    // Only the xor positions (every third bit) are predictable.
    for (std::size_t t = 0; t + 1 < bits.size(); ++t)
        if ((t + 1) % 3 == 2)
            sample.targets[t] = bits[t + 1];
    return sample;
}

TaskSample gen_xor(std::size_t triplet_count, std::mt19937_64& rng) {
    std::vector<std::pair<Word, Word>> pairs(triplet_count);
    for (auto& [b1, b2] : pairs) {
        b1 = rng() & 1;
        b2 = rng() & 1;
    }
    return xor_sample_from_pairs(pairs);
}

TaskSample words_sample_from_choices(std::span<const int> choices) {
    static const std::array<std::string_view, 3> kWords = {"ba", "dii",
                                                           "guuu"};
    const TokenCodec& codec = words_codec();
    TaskSample sample;
    for (const int choice : choices) {
        const std::string_view word = kWords.at(
            static_cast<std::size_t>(choice));
        for (std::size_t j = 0; j < word.size(); ++j) {
            sample.inputs.push_back(codec.encode(word[j]));
            // Letters within a word are predictable; the next word is not.
            if (j + 1 < word.size())
                sample.targets.push_back(codec.encode(word[j + 1]));
            else
                sample.targets.push_back(std::nullopt);
        }
    }
    return sample;
}

TaskSample gen_words(std::size_t sentence_length, std::mt19937_64& rng) {
    std::vector<int> choices(sentence_length);
    for (int& c : choices)
        c = static_cast<int>(rng() % 3);
    return words_sample_from_choices(choices);
}

TaskSample dna_sample_from_sequence(std::string_view sequence) {
    const TokenCodec& codec = dna_codec();
    const std::size_t u_pos = sequence.find('U');
    if (u_pos == std::string_view::npos ||
        sequence.find('U', u_pos + 1) != std::string_view::npos)
        throw Error("dna sequence must contain exactly one 'U'");
    if (u_pos + 1 >= sequence.size())
        throw Error("'U' must be followed by the base to identify");
    const char label_base = sequence[u_pos + 1];

    TaskSample sample;
    sample.inputs.reserve(sequence.size());
    for (char base : sequence)
        sample.inputs.push_back(codec.encode(base));
    sample.targets.assign(sequence.size(), std::nullopt);
    sample.targets.back() = codec.encode(label_base);
    sample.label = static_cast<int>(codec.encode(label_base));
    return sample;
}

TaskSample gen_dna(std::size_t length, std::mt19937_64& rng) {
    if (length < 4)
        throw Error("dna sequence length must be at least 4");
    static constexpr std::string_view kBases = "GATC";
    std::string sequence(length, ' ');
    for (std::size_t i = 0; i < length; ++i)
        sequence[i] = kBases[rng() % 4];
    const std::size_t half = (length + 1) / 2;
    sequence[rng() % half] = 'U';
    return dna_sample_from_sequence(sequence);
}

MemorizeTask::MemorizeTask(std::string pattern, std::size_t length)
    : sample_(gen_memorize(pattern, length, memorize_codec())) {}

XorTask::XorTask(std::size_t triplet_count, std::uint64_t validation_seed,
                 std::size_t validation_size)
    : triplet_count_(triplet_count) {
    std::mt19937_64 rng(validation_seed);
    for (std::size_t i = 0; i < validation_size; ++i)
        validation_.push_back(gen_xor(triplet_count_, rng));
}

WordsTask::WordsTask(std::size_t sentence_length,
                     std::uint64_t validation_seed,
                     std::size_t validation_size)
    : sentence_length_(sentence_length) {
    std::mt19937_64 rng(validation_seed);
    for (std::size_t i = 0; i < validation_size; ++i)
        validation_.push_back(gen_words(sentence_length_, rng));
}

DnaTask::DnaTask(std::size_t length, std::uint64_t validation_seed,
                 std::size_t validation_size)
    : length_(length) {
    std::mt19937_64 rng(validation_seed);
    for (std::size_t i = 0; i < validation_size; ++i)
        validation_.push_back(gen_dna(length_, rng));
    // Classes G, A, T, C in codec (ascending word) order.
    for (Word base = 0; base < 4; ++base)
        labels_.class_words.push_back({base});
}

} // namespace qrnn
