#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "qrnn/tasks/features.hpp"
#include "qrnn/tasks/mnist.hpp"
#include "qrnn/tasks/synthetic.hpp"

using namespace qrnn;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "qrnn_tasks_test";
    fs::create_directories(dir);
    return dir;
}

void write_u32(std::ofstream& out, std::uint32_t value) {
    const unsigned char bytes[4] = {
        static_cast<unsigned char>(value >> 24),
        static_cast<unsigned char>(value >> 16),
        static_cast<unsigned char>(value >> 8),
        static_cast<unsigned char>(value)};
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

void write_idx_images(const fs::path& path,
                      const std::vector<std::vector<std::uint8_t>>& images) {
    std::ofstream out(path, std::ios::binary);
    write_u32(out, 0x00000803);
    write_u32(out, static_cast<std::uint32_t>(images.size()));
    write_u32(out, 28);
    write_u32(out, 28);
    for (const auto& img : images)
        out.write(reinterpret_cast<const char*>(img.data()),
                  static_cast<std::streamsize>(img.size()));
}

void write_idx_labels(const fs::path& path,
                      const std::vector<std::uint8_t>& labels) {
    std::ofstream out(path, std::ios::binary);
    write_u32(out, 0x00000801);
    write_u32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

std::string decode_inputs(const TaskSample& sample, const TokenCodec& codec) {
    std::string text;
    for (Word w : sample.inputs)
        text += codec.decode(w);
    return text;
}

} // namespace

TEST_CASE("codec round-trips and rejects unknown symbols") {
    for (const TokenCodec* codec :
         {&memorize_codec(), &words_codec(), &dna_codec()}) {
        for (std::size_t i = 0; i < codec->size(); ++i)
            CHECK(codec->encode(codec->decode(i)) == i);
    }
    CHECK(memorize_codec().bits() == 2);
    CHECK(words_codec().bits() == 3);
    CHECK(dna_codec().bits() == 3);
    CHECK_THROWS_AS(memorize_codec().encode('9'), Error);
    CHECK_THROWS_AS(dna_codec().decode(7), Error);
}

TEST_CASE("memorize repeats the pattern with next-token targets") {
    SUBCASE("constant pattern") {
        const TaskSample sample = gen_memorize("4", 5, memorize_codec());
        REQUIRE(sample.inputs.size() == 5);
        for (std::size_t t = 0; t < 5; ++t) {
            CHECK(sample.inputs[t] == memorize_codec().encode('4'));
            CHECK(*sample.targets[t] == memorize_codec().encode('4'));
        }
    }
    SUBCASE("cyclic pattern shifts by one") {
        const TaskSample sample = gen_memorize("123", 6, memorize_codec());
        for (std::size_t t = 0; t < 6; ++t)
            CHECK(*sample.targets[t] == sample.inputs[(t + 1) % 3 == 0
                                                          ? (t + 1) % 6
                                                          : (t + 1) % 6]);
        CHECK(decode_inputs(sample, memorize_codec()) == "123123");
    }
    SUBCASE("length zero is empty") {
        const TaskSample sample = gen_memorize("12", 0, memorize_codec());
        CHECK(sample.inputs.empty());
        CHECK(sample.targets.empty());
    }
    SUBCASE("symbols outside the codec are rejected") {
        CHECK_THROWS_AS(gen_memorize("15", 4, memorize_codec()), Error);
    }
}

TEST_CASE("xor triplets concatenate pairs with their parity") {
    SUBCASE("worked example string") {
        const std::vector<std::pair<Word, Word>> pairs = {
            {0, 0}, {0, 1}, {1, 1}, {0, 1}, {1, 0}};
        const TaskSample sample = xor_sample_from_pairs(pairs);
        std::string bits;
        for (Word w : sample.inputs)
            bits += static_cast<char>('0' + w);
        CHECK(bits == "000011110011101");
        // Predictable positions: the step before every third bit.
        for (std::size_t t = 0; t < sample.targets.size(); ++t) {
            if (t % 3 == 1) {
                REQUIRE(sample.targets[t].has_value());
                CHECK(*sample.targets[t] == sample.inputs[t + 1]);
            } else {
                CHECK_FALSE(sample.targets[t].has_value());
            }
        }
    }
    SUBCASE("generator invariant holds for every seed") {
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            std::mt19937_64 rng(seed);
            const TaskSample sample = gen_xor(6, rng);
            for (std::size_t t = 2; t < sample.inputs.size(); t += 3)
                CHECK(sample.inputs[t] ==
                      (sample.inputs[t - 1] ^ sample.inputs[t - 2]));
        }
    }
    SUBCASE("third-bit marginal is balanced") {
        std::mt19937_64 rng(99);
        std::size_t ones = 0, total = 0;
        for (int i = 0; i < 2500; ++i) {
            const TaskSample sample = gen_xor(4, rng);
            for (std::size_t t = 2; t < sample.inputs.size(); t += 3) {
                ones += sample.inputs[t];
                ++total;
            }
        }
        const double fraction = double(ones) / double(total);
        CHECK(std::abs(fraction - 0.5) <= 0.02);
    }
    SUBCASE("fixed seed reproduces the stream") {
        std::mt19937_64 a(7), b(7);
        CHECK(gen_xor(5, a).inputs == gen_xor(5, b).inputs);
    }
}

TEST_CASE("word sentences spell their letters") {
    SUBCASE("single word d -> dii with targets ii") {
        const int choices[] = {1};
        const TaskSample sample = words_sample_from_choices(choices);
        CHECK(decode_inputs(sample, words_codec()) == "dii");
        CHECK(*sample.targets[0] == words_codec().encode('i'));
        CHECK(*sample.targets[1] == words_codec().encode('i'));
        CHECK_FALSE(sample.targets[2].has_value());
    }
    SUBCASE("ba guuu concatenates") {
        const int choices[] = {0, 2};
        const TaskSample sample = words_sample_from_choices(choices);
        CHECK(decode_inputs(sample, words_codec()) == "baguuu");
    }
    SUBCASE("letters stay in the alphabet") {
        for (std::uint64_t seed = 0; seed < 1000; ++seed) {
            std::mt19937_64 rng(seed);
            const TaskSample sample = gen_words(3, rng);
            for (Word w : sample.inputs)
                CHECK_NOTHROW(words_codec().decode(w));
        }
    }
}

TEST_CASE("dna samples label the base after the U") {
    SUBCASE("worked example") {
        const TaskSample sample = dna_sample_from_sequence("AGAUATTCAGAAT");
        CHECK(*sample.label == dna_codec().encode('A'));
        REQUIRE(sample.targets.back().has_value());
        CHECK(*sample.targets.back() == dna_codec().encode('A'));
        for (std::size_t t = 0; t + 1 < sample.targets.size(); ++t)
            CHECK_FALSE(sample.targets[t].has_value());
    }
    SUBCASE("generator invariants") {
        for (std::uint64_t seed = 0; seed < 200; ++seed) {
            std::mt19937_64 rng(seed);
            const TaskSample sample = gen_dna(9, rng);
            std::size_t u_count = 0, u_index = 0;
            for (std::size_t t = 0; t < sample.inputs.size(); ++t)
                if (sample.inputs[t] == dna_codec().encode('U')) {
                    ++u_count;
                    u_index = t;
                }
            CHECK(u_count == 1);
            CHECK(u_index < 5); // ceil(9 / 2)
            CHECK(*sample.targets.back() == sample.inputs[u_index + 1]);
        }
    }
    SUBCASE("short sequences are rejected") {
        std::mt19937_64 rng(1);
        CHECK_THROWS_AS(gen_dna(3, rng), Error);
    }
}

TEST_CASE("idx files parse and validate") {
    const fs::path dir = temp_dir();
    std::vector<std::vector<std::uint8_t>> images(
        3, std::vector<std::uint8_t>(28 * 28, 0));
    images[1].assign(28 * 28, 200);
    const std::vector<std::uint8_t> labels = {0, 1, 7};
    write_idx_images(dir / "images", images);
    write_idx_labels(dir / "labels", labels);

    SUBCASE("well-formed pair") {
        const RawMnist raw = load_mnist_idx(dir / "images", dir / "labels");
        CHECK(raw.images.size() == 3);
        CHECK(raw.labels.size() == 3);
        CHECK(raw.rows == 28);
        CHECK(raw.labels[2] == 7);
        CHECK(raw.images[1][100] == 200);
    }
    SUBCASE("bad magic") {
        write_idx_labels(dir / "bad_magic_images", labels);
        CHECK_THROWS_AS(
            load_mnist_idx(dir / "bad_magic_images", dir / "labels"),
            IdxMagicError);
    }
    SUBCASE("truncation names the byte offset") {
        fs::copy_file(dir / "images", dir / "truncated",
                      fs::copy_options::overwrite_existing);
        fs::resize_file(dir / "truncated", 16 + 28 * 28 + 100);
        try {
            load_mnist_idx(dir / "truncated", dir / "labels");
            FAIL("expected truncation error");
        } catch (const IdxTruncatedError& e) {
            CHECK(std::string(e.what()).find("byte") != std::string::npos);
            CHECK(std::string(e.what()).find(
                      std::to_string(16 + 28 * 28 + 100)) !=
                  std::string::npos);
        }
    }
    SUBCASE("count mismatch") {
        write_idx_labels(dir / "short_labels", {0, 1});
        CHECK_THROWS_AS(load_mnist_idx(dir / "images", dir / "short_labels"),
                        IdxCountMismatchError);
    }
}

TEST_CASE("preprocessing crops, pools and binarizes") {
    RawMnist raw;
    raw.rows = raw.cols = 28;
    raw.images.assign(2, std::vector<std::uint8_t>(28 * 28, 0));
    raw.labels = {3, 9};
    // Fill the 2x2 block feeding pooled pixel (0, 0) of the crop.
    raw.images[1][4 * 28 + 4] = 255;
    raw.images[1][4 * 28 + 5] = 255;
    raw.images[1][5 * 28 + 4] = 255;
    raw.images[1][5 * 28 + 5] = 255;

    const auto examples = preprocess_mnist(raw, MnistConfig{});
    REQUIRE(examples.size() == 2);
    for (std::uint8_t p : examples[0].pixels)
        CHECK(p == 0);
    CHECK(examples[1].pixels[0] == 1);
    CHECK(examples[1].pixels[1] == 0);

    SUBCASE("digit filter drops other classes") {
        MnistConfig config;
        config.digits = {9};
        const auto filtered = preprocess_mnist(raw, config);
        REQUIRE(filtered.size() == 1);
        CHECK(filtered[0].label == 9);
    }
}

TEST_CASE("scanline samples interleave both passes and carry the label") {
    MnistExample example;
    example.pixels.assign(100, 0);
    example.label = 9;
    SUBCASE("all-zero image gives zero words") {
        const TaskSample sample = mnist_sample(example, 2);
        REQUIRE(sample.inputs.size() == 100);
        for (Word w : sample.inputs)
            CHECK(w == 0);
        // Label 9 = 1001b, little endian: words (1,0) then (0,1).
        REQUIRE(sample.targets[98].has_value());
        CHECK(*sample.targets[98] == 1);
        CHECK(*sample.targets[99] == 2);
        for (std::size_t t = 0; t < 98; ++t)
            CHECK_FALSE(sample.targets[t].has_value());
    }
    SUBCASE("pixel (0,1) appears at steps 1 and 10") {
        example.pixels[1] = 1;
        const TaskSample sample = mnist_sample(example, 2);
        CHECK(sample.inputs[1] == 1);  // row-major bit
        CHECK(sample.inputs[10] == 2); // column-major bit
        for (std::size_t t = 0; t < 100; ++t)
            if (t != 1 && t != 10)
                CHECK(sample.inputs[t] == 0);
    }
}

TEST_CASE("generative samples shift the scanline by the digit primer") {
    MnistExample example;
    example.pixels.assign(100, 0);
    example.pixels[0] = 1;
    example.label = 1;
    const TaskSample sample = mnist_generative_sample(example);
    REQUIRE(sample.inputs.size() == 100);
    CHECK(sample.inputs[0] == 1); // digit word
    CHECK(sample.inputs[1] == 3); // pixel 0 on both scanlines
    CHECK(*sample.targets[0] == 3);
    for (std::size_t t = 1; t < 100; ++t)
        CHECK(*sample.targets[t] == 0);
}

TEST_CASE("duplicate report counts shared preprocessed examples") {
    MnistExample a;
    a.pixels.assign(100, 0);
    a.label = 1;
    MnistExample b = a;
    b.pixels[5] = 1;
    MnistExample c = a;
    c.label = 7;
    const std::vector<MnistExample> train = {a, b};
    const std::vector<MnistExample> test = {a, c};
    CHECK(duplicate_count(train, test) == 1);
}

TEST_CASE("pca fits mean-centered principal axes") {
    SUBCASE("k-dimensional data reconstructs exactly") {
        std::mt19937_64 rng(3);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<std::vector<double>> data(40,
                                              std::vector<double>(2, 0.0));
        for (auto& row : data) {
            row[0] = 1.0 + normal(rng);
            row[1] = -2.0 + 0.5 * normal(rng);
        }
        const PcaModel model = pca_fit(data, 2);
        for (const auto& row : data) {
            const auto coords = pca_apply(model, row);
            std::vector<double> rebuilt = model.mean;
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t j = 0; j < 2; ++j)
                    rebuilt[j] += coords[c] * model.components[c][j];
            CHECK(rebuilt[0] == doctest::Approx(row[0]).epsilon(1e-10));
            CHECK(rebuilt[1] == doctest::Approx(row[1]).epsilon(1e-10));
        }
    }
    SUBCASE("the mean projects to the origin") {
        std::vector<std::vector<double>> data = {
            {1.0, 2.0, 3.0}, {2.0, 1.0, -1.0}, {0.0, 0.0, 1.0}};
        const PcaModel model = pca_fit(data, 2);
        const auto coords = pca_apply(model, model.mean);
        for (double c : coords)
            CHECK(c == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("variances come out in descending order") {
        std::mt19937_64 rng(17);
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<std::vector<double>> data(60,
                                              std::vector<double>(4, 0.0));
        for (auto& row : data)
            for (std::size_t j = 0; j < 4; ++j)
                row[j] = normal(rng) * (1.0 + double(j));
        const PcaModel model = pca_fit(data, 4);
        for (std::size_t c = 1; c < 4; ++c)
            CHECK(model.variances[c - 1] >= model.variances[c]);
    }
    SUBCASE("too many components are rejected") {
        std::vector<std::vector<double>> data = {{1.0, 2.0}, {0.0, 1.0}};
        CHECK_THROWS_AS(pca_fit(data, 3), Error);
    }
}

TEST_CASE("discretize uniformizes through the normal cdf") {
    ColumnStats stats;
    stats.mean = {2.0};
    stats.stddev = {0.5};
    SUBCASE("the mean maps to the midpoint code") {
        const double coords[] = {2.0};
        CHECK(discretize(coords, 8, stats)[0] == 128);
        CHECK(discretize(coords, 1, stats)[0] == 1);
    }
    SUBCASE("one bit splits at the mean") {
        const double below[] = {1.9};
        const double above[] = {2.1};
        CHECK(discretize(below, 1, stats)[0] == 0);
        CHECK(discretize(above, 1, stats)[0] == 1);
    }
    SUBCASE("zero stddev is rejected") {
        ColumnStats degenerate;
        degenerate.mean = {0.0};
        degenerate.stddev = {0.0};
        const double coords[] = {0.0};
        CHECK_THROWS_AS(discretize(coords, 4, degenerate), Error);
    }
    SUBCASE("gaussian data fills 8-bit codes near-uniformly") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> normal(3.0, 1.7);
        std::vector<std::vector<double>> train(50000,
                                               std::vector<double>(1, 0.0));
        for (auto& row : train)
            row[0] = normal(rng);
        const ColumnStats fitted = fit_column_stats(train);
        std::vector<std::size_t> histogram(256, 0);
        for (const auto& row : train)
            ++histogram[discretize(row[0] <= row[0] ? row : row, 8,
                                   fitted)[0]];
        const auto [min_it, max_it] =
            std::minmax_element(histogram.begin(), histogram.end());
        CHECK(*max_it <= 3 * std::max<std::size_t>(*min_it, 1));
    }
}

TEST_CASE("embedding csv parses, partitions and validates") {
    const fs::path dir = temp_dir();
    const fs::path path = dir / "embedding.csv";
    SUBCASE("records partition by split") {
        std::ofstream(path) << "id,dim0,dim1,label,split\n"
                               "0,0.5,-1.25,3,train\n"
                               "1,0.25,2.0,7,test\n"
                               "2,-0.75,0.0,3,validate\n";
        const EmbeddingData data = load_embedding_csv(path);
        CHECK(data.dims == 2);
        REQUIRE(data.train.size() == 1);
        REQUIRE(data.validate.size() == 1);
        REQUIRE(data.test.size() == 1);
        CHECK(data.train[0].coords[1] == -1.25);
        CHECK(data.test[0].label == 7);
    }
    SUBCASE("empty body yields an empty dataset") {
        std::ofstream(path) << "id,dim0,label,split\n";
        const EmbeddingData data = load_embedding_csv(path);
        CHECK(data.dims == 1);
        CHECK(data.train.empty());
        CHECK(data.test.empty());
    }
    SUBCASE("duplicate ids are rejected") {
        std::ofstream(path) << "id,dim0,label,split\n"
                               "4,0.5,1,train\n"
                               "4,0.25,0,train\n";
        CHECK_THROWS_AS(load_embedding_csv(path), CsvError);
    }
    SUBCASE("malformed rows report their line number") {
        std::ofstream(path) << "id,dim0,label,split\n"
                               "0,0.5,1,train\n"
                               "1,not_a_number,0,train\n";
        try {
            load_embedding_csv(path);
            FAIL("expected a csv error");
        } catch (const CsvError& e) {
            CHECK(std::string(e.what()).find(":3") != std::string::npos);
        }
    }
}

TEST_CASE("encoded coordinate task presents code bits low to high") {
    std::vector<EmbeddingRecord> train;
    std::mt19937_64 rng(31);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (std::int64_t i = 0; i < 64; ++i)
        train.push_back({i, {normal(rng), normal(rng)}, i % 2 == 0 ? 3 : 6});
    std::vector<std::vector<double>> coords;
    for (const auto& r : train)
        coords.push_back(r.coords);
    const ColumnStats stats = fit_column_stats(coords);

    const EncodedCoordinateTask task(train, {train[0], train[1]}, {}, 4,
                                     stats, {3, 6});
    CHECK(task.input_bits() == 2);
    const auto validation = task.validation();
    REQUIRE(validation.size() == 2);
    const TaskSample& sample = validation[0];
    // 4 coordinate steps plus 2 label steps.
    REQUIRE(sample.inputs.size() == 6);
    const auto codes = discretize(train[0].coords, 4, stats);
    for (std::uint32_t t = 0; t < 4; ++t) {
        const Word expected =
            ((codes[0] >> t) & 1) | (((codes[1] >> t) & 1) << 1);
        CHECK(sample.inputs[t] == expected);
    }
    // Label 3 = 0011b little endian over 2-bit words: (1,1) then (0,0).
    CHECK(*sample.targets[4] == 3);
    CHECK(*sample.targets[5] == 0);
    CHECK(*sample.label == 0);
    REQUIRE(task.labels() != nullptr);
    CHECK(task.labels()->num_classes() == 2);
}
