#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "qrnn/checkpoint.hpp"
#include "qrnn/tasks/features.hpp"
#include "qrnn/tasks/mnist.hpp"
#include "qrnn/tasks/synthetic.hpp"
#include "qrnn/training.hpp"

namespace qrnn::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct TaskConfig {
    std::string kind = "memorize";
    std::string pattern = "4";
    std::size_t length = 12;       // memorize / dna sequence length
    std::size_t triplets = 4;      // xor
    std::size_t sentence_length = 4;
    std::vector<int> digits = {0, 1};
    std::size_t train_count = 2000;
    std::size_t val_count = 500;
    std::size_t test_count = 500;
    double threshold = 0.5;        // mnist binarization
    std::size_t components = 2;    // mnist_pca
    std::uint32_t bits = 8;        // coordinate precision
    std::string embedding_csv;
    std::uint64_t validation_seed = kValidationSeed;
    std::size_t validation_size = 64;
};

struct RunConfig {
    TaskConfig task;
    CellTopology topology;
    InitConfig init;
    TrainConfig train;
    std::string data_dir = ".";
    std::string checkpoint_out = "checkpoint.json";
    std::string metrics_out = "metrics.csv";
    unsigned workers = 0; // 0 = hardware concurrency
};

ordered_json to_json(const RunConfig& c) {
    ordered_json j;
    j["task"] = {{"kind", c.task.kind},
                 {"pattern", c.task.pattern},
                 {"length", c.task.length},
                 {"triplets", c.task.triplets},
                 {"sentence_length", c.task.sentence_length},
                 {"digits", c.task.digits},
                 {"train_count", c.task.train_count},
                 {"val_count", c.task.val_count},
                 {"test_count", c.task.test_count},
                 {"threshold", c.task.threshold},
                 {"components", c.task.components},
                 {"bits", c.task.bits},
                 {"embedding_csv", c.task.embedding_csv},
                 {"validation_seed", c.task.validation_seed},
                 {"validation_size", c.task.validation_size}};
    j["topology"] = {{"H", c.topology.workspace},
                     {"I", c.topology.io},
                     {"S", c.topology.stages},
                     {"d", c.topology.degree},
                     {"ord", c.topology.order}};
    j["init"] = {{"bias_mean", c.init.bias_mean},
                 {"bias_sigma", c.init.bias_sigma},
                 {"weight_sigma", c.init.weight_sigma},
                 {"unitary_sigma", c.init.unitary_sigma}};
    const char* kind = c.train.optimizer.kind == OptimizerConfig::Kind::sgd
                           ? "sgd"
                           : c.train.optimizer.kind ==
                                     OptimizerConfig::Kind::rmsprop
                                 ? "rmsprop"
                                 : "adam";
    j["train"] = {{"batch_size", c.train.batch_size},
                  {"max_steps", c.train.max_steps},
                  {"validation_threshold", c.train.validation_threshold},
                  {"validation_interval", c.train.validation_interval},
                  {"seed", c.train.seed},
                  {"max_grad_norm", c.train.max_grad_norm},
                  {"optimizer",
                   {{"kind", kind},
                    {"learning_rate", c.train.optimizer.learning_rate},
                    {"beta1", c.train.optimizer.adam_beta1},
                    {"beta2", c.train.optimizer.adam_beta2},
                    {"epsilon", c.train.optimizer.adam_epsilon},
                    {"decay", c.train.optimizer.rmsprop_decay}}}};
    j["paths"] = {{"data_dir", c.data_dir},
                  {"checkpoint_out", c.checkpoint_out},
                  {"metrics_out", c.metrics_out}};
    j["workers"] = c.workers;
    return j;
}

class ConfigErrors {
  public:
    void add(const std::string& field, const std::string& message) {
        errors_.push_back(field + ": " + message);
    }
    bool ok() const { return errors_.empty(); }
    void report() const {
        for (const auto& e : errors_)
            std::cerr << "config error: " << e << '\n';
    }

  private:
    std::vector<std::string> errors_;
};

template <class T>
void read_field(const ordered_json& j, const char* key, T& out,
                ConfigErrors& errors, const std::string& prefix) {
    if (!j.contains(key))
        return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        errors.add(prefix + key, "has the wrong type");
    }
}

RunConfig parse_config(const ordered_json& j, ConfigErrors& errors) {
    RunConfig c;
    if (j.contains("task")) {
        const auto& t = j["task"];
        read_field(t, "kind", c.task.kind, errors, "task.");
        read_field(t, "pattern", c.task.pattern, errors, "task.");
        read_field(t, "length", c.task.length, errors, "task.");
        read_field(t, "triplets", c.task.triplets, errors, "task.");
        read_field(t, "sentence_length", c.task.sentence_length, errors,
                   "task.");
        read_field(t, "digits", c.task.digits, errors, "task.");
        read_field(t, "train_count", c.task.train_count, errors, "task.");
        read_field(t, "val_count", c.task.val_count, errors, "task.");
        read_field(t, "test_count", c.task.test_count, errors, "task.");
        read_field(t, "threshold", c.task.threshold, errors, "task.");
        read_field(t, "components", c.task.components, errors, "task.");
        read_field(t, "bits", c.task.bits, errors, "task.");
        read_field(t, "embedding_csv", c.task.embedding_csv, errors, "task.");
        read_field(t, "validation_seed", c.task.validation_seed, errors,
                   "task.");
        read_field(t, "validation_size", c.task.validation_size, errors,
                   "task.");
    }
    if (j.contains("topology")) {
        const auto& t = j["topology"];
        read_field(t, "H", c.topology.workspace, errors, "topology.");
        read_field(t, "I", c.topology.io, errors, "topology.");
        read_field(t, "S", c.topology.stages, errors, "topology.");
        read_field(t, "d", c.topology.degree, errors, "topology.");
        read_field(t, "ord", c.topology.order, errors, "topology.");
    }
    if (j.contains("init")) {
        const auto& t = j["init"];
        read_field(t, "bias_mean", c.init.bias_mean, errors, "init.");
        read_field(t, "bias_sigma", c.init.bias_sigma, errors, "init.");
        read_field(t, "weight_sigma", c.init.weight_sigma, errors, "init.");
        read_field(t, "unitary_sigma", c.init.unitary_sigma, errors, "init.");
    }
    if (j.contains("train")) {
        const auto& t = j["train"];
        read_field(t, "batch_size", c.train.batch_size, errors, "train.");
        read_field(t, "max_steps", c.train.max_steps, errors, "train.");
        read_field(t, "validation_threshold", c.train.validation_threshold,
                   errors, "train.");
        read_field(t, "validation_interval", c.train.validation_interval,
                   errors, "train.");
        read_field(t, "seed", c.train.seed, errors, "train.");
        read_field(t, "max_grad_norm", c.train.max_grad_norm, errors,
                   "train.");
        if (t.contains("optimizer")) {
            const auto& o = t["optimizer"];
            std::string kind = "adam";
            read_field(o, "kind", kind, errors, "train.optimizer.");
            if (kind == "sgd")
                c.train.optimizer.kind = OptimizerConfig::Kind::sgd;
            else if (kind == "rmsprop")
                c.train.optimizer.kind = OptimizerConfig::Kind::rmsprop;
            else if (kind == "adam")
                c.train.optimizer.kind = OptimizerConfig::Kind::adam;
            else
                errors.add("train.optimizer.kind",
                           "unknown optimizer '" + kind + "'");
            read_field(o, "learning_rate", c.train.optimizer.learning_rate,
                       errors, "train.optimizer.");
            read_field(o, "beta1", c.train.optimizer.adam_beta1, errors,
                       "train.optimizer.");
            read_field(o, "beta2", c.train.optimizer.adam_beta2, errors,
                       "train.optimizer.");
            read_field(o, "epsilon", c.train.optimizer.adam_epsilon, errors,
                       "train.optimizer.");
            read_field(o, "decay", c.train.optimizer.rmsprop_decay, errors,
                       "train.optimizer.");
        }
    }
    if (j.contains("paths")) {
        const auto& t = j["paths"];
        read_field(t, "data_dir", c.data_dir, errors, "paths.");
        read_field(t, "checkpoint_out", c.checkpoint_out, errors, "paths.");
        read_field(t, "metrics_out", c.metrics_out, errors, "paths.");
    }
    read_field(j, "workers", c.workers, errors, "");
    return c;
}

std::uint32_t task_input_bits(const TaskConfig& task) {
    if (task.kind == "memorize")
        return 2;
    if (task.kind == "xor")
        return 1;
    if (task.kind == "words" || task.kind == "dna")
        return 3;
    if (task.kind == "mnist" || task.kind == "mnist_gen")
        return 2;
    if (task.kind == "mnist_pca")
        return static_cast<std::uint32_t>(task.components);
    return 0; // embedding: width comes from the file
}

void validate_config(const RunConfig& c, ConfigErrors& errors) {
    static const std::set<std::string> kKinds = {
        "memorize", "xor",       "words",     "dna",
        "mnist",    "mnist_gen", "mnist_pca", "embedding"};
    if (!kKinds.count(c.task.kind))
        errors.add("task.kind", "unknown task '" + c.task.kind + "'");
    if (c.task.kind == "memorize" && c.task.pattern.empty())
        errors.add("task.pattern", "must be nonempty");
    if (c.task.kind == "memorize" && c.task.length == 0)
        errors.add("task.length", "must be positive");
    if (c.task.kind == "dna" && c.task.length < 4)
        errors.add("task.length", "dna sequences need at least 4 bases");
    if (c.task.kind == "embedding" && c.task.embedding_csv.empty())
        errors.add("task.embedding_csv", "must name the coordinate file");
    if (c.topology.workspace == 0)
        errors.add("topology.H", "must be at least 1");
    if (c.topology.io == 0)
        errors.add("topology.I", "must be at least 1");
    if (c.topology.stages == 0)
        errors.add("topology.S", "must be at least 1");
    if (c.topology.degree == 0)
        errors.add("topology.d", "must be at least 1");
    if (c.topology.order == 0)
        errors.add("topology.ord", "must be at least 1");
    if (c.topology.lanes() > kMaxLanes)
        errors.add("topology", "H + I exceeds the " +
                                   std::to_string(kMaxLanes) +
                                   "-lane capacity");
    const std::uint32_t width = task_input_bits(c.task);
    if (width != 0 && width != c.topology.io)
        errors.add("topology.I",
                   "task '" + c.task.kind + "' presents " +
                       std::to_string(width) + "-bit words, topology has I=" +
                       std::to_string(c.topology.io));
    if (c.init.bias_sigma < 0)
        errors.add("init.bias_sigma", "must be nonnegative");
    if (c.init.weight_sigma < 0)
        errors.add("init.weight_sigma", "must be nonnegative");
    if (c.init.unitary_sigma < 0)
        errors.add("init.unitary_sigma", "must be nonnegative");
    if (c.train.batch_size == 0)
        errors.add("train.batch_size", "must be at least 1");
    if (c.train.validation_threshold <= 0)
        errors.add("train.validation_threshold", "must be positive");
    if (c.train.validation_interval == 0)
        errors.add("train.validation_interval", "must be at least 1");
    if (c.train.optimizer.learning_rate <= 0)
        errors.add("train.optimizer.learning_rate", "must be positive");
    if (c.train.optimizer.adam_beta1 < 0 || c.train.optimizer.adam_beta1 >= 1)
        errors.add("train.optimizer.beta1", "must be in [0, 1)");
    if (c.train.optimizer.adam_beta2 < 0 || c.train.optimizer.adam_beta2 >= 1)
        errors.add("train.optimizer.beta2", "must be in [0, 1)");
    if (c.train.optimizer.rmsprop_decay < 0 ||
        c.train.optimizer.rmsprop_decay >= 1)
        errors.add("train.optimizer.decay", "must be in [0, 1)");
}

struct BuiltTask {
    std::unique_ptr<Task> task;
    // Extra splits for eval; empty for tasks without a test split.
    std::span<const TaskSample> test;
    std::size_t duplicate_count = 0;
    bool has_duplicate_report = false;
};

struct MnistSplits {
    std::vector<MnistExample> train, val, test;
};

MnistSplits load_mnist_splits(const TaskConfig& task, const fs::path& dir) {
    const MnistConfig config{20, 10, task.threshold, task.digits};
    const RawMnist raw_train = load_mnist_idx(dir / "train-images-idx3-ubyte",
                                              dir / "train-labels-idx1-ubyte");
    const RawMnist raw_test = load_mnist_idx(dir / "t10k-images-idx3-ubyte",
                                             dir / "t10k-labels-idx1-ubyte");
    MnistSplits splits;
    auto train_pool = preprocess_mnist(raw_train, config);
    auto test_pool = preprocess_mnist(raw_test, config);
    if (train_pool.size() < task.train_count ||
        test_pool.size() < task.val_count + task.test_count)
        throw Error("not enough examples for the requested split sizes");
    splits.train.assign(train_pool.begin(),
                        train_pool.begin() + task.train_count);
    splits.val.assign(test_pool.begin(), test_pool.begin() + task.val_count);
    splits.test.assign(test_pool.begin() + task.val_count,
                       test_pool.begin() + task.val_count + task.test_count);
    return splits;
}

BuiltTask build_task(const RunConfig& c) {
    const TaskConfig& t = c.task;
    const fs::path dir(c.data_dir);
    BuiltTask built;
    if (t.kind == "memorize") {
        built.task = std::make_unique<MemorizeTask>(t.pattern, t.length);
    } else if (t.kind == "xor") {
        built.task = std::make_unique<XorTask>(t.triplets, t.validation_seed,
                                               t.validation_size);
    } else if (t.kind == "words") {
        built.task = std::make_unique<WordsTask>(
            t.sentence_length, t.validation_seed, t.validation_size);
    } else if (t.kind == "dna") {
        built.task = std::make_unique<DnaTask>(t.length, t.validation_seed,
                                               t.validation_size);
    } else if (t.kind == "mnist" || t.kind == "mnist_gen") {
        MnistSplits splits = load_mnist_splits(t, dir);
        auto task = std::make_unique<MnistTask>(
            std::move(splits.train), std::move(splits.val),
            std::move(splits.test), t.digits, t.kind == "mnist_gen");
        built.test = task->test_set();
        built.duplicate_count = task->train_test_duplicates();
        built.has_duplicate_report = true;
        built.task = std::move(task);
    } else if (t.kind == "mnist_pca") {
        MnistSplits splits = load_mnist_splits(t, dir);
        const auto to_rows = [](const std::vector<MnistExample>& examples) {
            std::vector<std::vector<double>> rows;
            rows.reserve(examples.size());
            for (const auto& ex : examples)
                rows.emplace_back(ex.pixels.begin(), ex.pixels.end());
            return rows;
        };
        const auto train_rows = to_rows(splits.train);
        const PcaModel pca = pca_fit(train_rows, t.components);
        const auto to_records = [&](const std::vector<MnistExample>& examples) {
            std::vector<EmbeddingRecord> records;
            std::int64_t id = 0;
            for (const auto& ex : examples) {
                std::vector<double> pixels(ex.pixels.begin(),
                                           ex.pixels.end());
                records.push_back(
                    {id++, pca_apply(pca, pixels), ex.label});
            }
            return records;
        };
        const auto train_records = to_records(splits.train);
        std::vector<std::vector<double>> train_coords;
        for (const auto& r : train_records)
            train_coords.push_back(r.coords);
        const ColumnStats stats = fit_column_stats(train_coords);
        auto task = std::make_unique<EncodedCoordinateTask>(
            train_records, to_records(splits.val), to_records(splits.test),
            t.bits, stats, t.digits);
        built.test = task->test_set();
        built.task = std::move(task);
    } else if (t.kind == "embedding") {
        const EmbeddingData data = load_embedding_csv(dir / t.embedding_csv);
        std::vector<std::vector<double>> train_coords;
        std::set<int> label_set;
        for (const auto& r : data.train) {
            train_coords.push_back(r.coords);
            label_set.insert(r.label);
        }
        const ColumnStats stats = fit_column_stats(train_coords);
        auto task = std::make_unique<EncodedCoordinateTask>(
            data.train, data.validate, data.test, t.bits, stats,
            std::vector<int>(label_set.begin(), label_set.end()));
        built.test = task->test_set();
        built.task = std::move(task);
    } else {
        throw Error("unknown task kind '" + t.kind + "'");
    }
    return built;
}

ordered_json load_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open config file: " + path.string());
    try {
        return ordered_json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw Error("config parse error in " + path.string() + ": " +
                    e.what());
    }
}

/// Apply `--a.b.c value` overrides onto the config document.
void apply_overrides(ordered_json& doc,
                     const std::vector<std::string>& extras) {
    for (std::size_t i = 0; i < extras.size(); ++i) {
        std::string key = extras[i];
        if (key.rfind("--", 0) != 0)
            throw Error("unexpected argument '" + key +
                        "' (overrides look like --train.seed 3)");
        key = key.substr(2);
        std::string value;
        const auto eq = key.find('=');
        if (eq != std::string::npos) {
            value = key.substr(eq + 1);
            key = key.substr(0, eq);
        } else {
            if (i + 1 >= extras.size())
                throw Error("override --" + key + " is missing a value");
            value = extras[++i];
        }
        ordered_json* node = &doc;
        std::size_t start = 0;
        while (true) {
            const auto dot = key.find('.', start);
            const std::string part = key.substr(
                start, dot == std::string::npos ? std::string::npos
                                                : dot - start);
            if (dot == std::string::npos) {
                ordered_json parsed = ordered_json::parse(value, nullptr,
                                                          false);
                (*node)[part] = parsed.is_discarded() ? ordered_json(value)
                                                      : parsed;
                break;
            }
            node = &(*node)[part];
            start = dot + 1;
        }
    }
}

unsigned effective_workers(unsigned configured) {
    if (configured != 0)
        return configured;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

int cmd_train(const ordered_json& doc) {
    ConfigErrors errors;
    RunConfig config = parse_config(doc, errors);
    validate_config(config, errors);
    if (!errors.ok()) {
        errors.report();
        return 1;
    }
    BuiltTask built = build_task(config);
    if (built.task->input_bits() != config.topology.io) {
        std::cerr << "config error: topology.I: task presents "
                  << built.task->input_bits() << "-bit words, topology has I="
                  << config.topology.io << '\n';
        return 1;
    }
    if (built.has_duplicate_report)
        std::cout << "ingestion report: " << built.duplicate_count
                  << " duplicate train/test examples after preprocessing\n";

    QrnnModel model = QrnnModel::initialized(config.topology, config.init,
                                             config.train.seed);
    const TrainResult result = train(model, *built.task, config.train,
                                     effective_workers(config.workers));
    result.metrics.write_csv(fs::path(config.metrics_out));
    save_checkpoint(model, config.train.seed, result.steps_run,
                    fs::path(config.checkpoint_out));
    const MetricsRow& last = result.metrics.rows.back();
    std::cout << "steps=" << result.steps_run << " val_loss="
              << last.val_loss << " threshold_reached="
              << (result.reached_threshold ? "yes" : "no") << '\n';
    return result.reached_threshold ? 0 : 2;
}

int cmd_eval(const ordered_json& doc,
             const std::vector<std::string>& checkpoints,
             const std::string& split) {
    ConfigErrors errors;
    RunConfig config = parse_config(doc, errors);
    validate_config(config, errors);
    if (!errors.ok()) {
        errors.report();
        return 1;
    }
    if (checkpoints.empty())
        throw Error("eval needs at least one --checkpoint");
    std::vector<LoadedCheckpoint> loaded;
    for (const auto& path : checkpoints)
        loaded.push_back(load_checkpoint(fs::path(path)));
    for (std::size_t i = 1; i < loaded.size(); ++i) {
        const CellTopology& a = loaded.front().model.topology();
        const CellTopology& b = loaded[i].model.topology();
        if (!(a == b))
            throw Error(
                "ensemble topology mismatch: (H=" + std::to_string(a.workspace) +
                ",I=" + std::to_string(a.io) + ",S=" + std::to_string(a.stages) +
                ",d=" + std::to_string(a.degree) + ",ord=" +
                std::to_string(a.order) + ") vs (H=" +
                std::to_string(b.workspace) + ",I=" + std::to_string(b.io) +
                ",S=" + std::to_string(b.stages) + ",d=" +
                std::to_string(b.degree) + ",ord=" + std::to_string(b.order) +
                ")");
    }
    BuiltTask built = build_task(config);
    std::span<const TaskSample> samples = built.task->validation();
    if (split == "test") {
        if (built.test.empty())
            throw Error("task '" + config.task.kind + "' has no test split");
        samples = built.test;
    }
    const unsigned workers = effective_workers(config.workers);
    double accuracy = std::nan("");
    double loss;
    std::vector<const QrnnModel*> members;
    for (const auto& l : loaded)
        members.push_back(&l.model);
    if (const LabelSet* labels = built.task->labels()) {
        const EvalResult result = evaluate(members, samples, *labels, workers);
        accuracy = result.accuracy;
        loss = result.mean_loss;
    } else {
        if (members.size() > 1)
            throw Error("ensembles need a labeled task");
        loss = validation_stats(loaded.front().model, samples, workers)
                   .mean_loss;
    }
    char line[96];
    std::snprintf(line, sizeof(line), "accuracy=%.17g loss=%.17g", accuracy,
                  loss);
    std::cout << line << '\n';
    return 0;
}

int cmd_generate(const std::string& checkpoint_path, Word primer,
                 std::size_t steps, std::uint64_t seed,
                 const std::string& out_path) {
    if (steps == 0)
        throw Error("generate needs a positive step count");
    const LoadedCheckpoint loaded = load_checkpoint(fs::path(checkpoint_path));
    std::mt19937_64 rng(seed);
    const Word primer_words[] = {primer};
    const std::vector<Word> words =
        generate(loaded.model, primer_words, steps, rng);

    std::ofstream out(out_path);
    if (!out)
        throw Error("cannot open output file: " + out_path);
    for (Word w : words)
        out << w << '\n';
    out.close();

    // Scanline-shaped runs render as an image: bit 0 is the row-major line.
    if (steps == 100 && loaded.model.topology().io == 2) {
        const std::string pgm_path = out_path + ".pgm";
        std::ofstream pgm(pgm_path, std::ios::binary);
        if (!pgm)
            throw Error("cannot open output file: " + pgm_path);
        pgm << "P5\n10 10\n255\n";
        for (Word w : words)
            pgm.put((w & 1) ? static_cast<char>(255) : 0);
        pgm.close();
        std::cout << "wrote " << pgm_path << '\n';
    }
    std::cout << "wrote " << out_path << '\n';
    return 0;
}

struct GroupStats {
    std::size_t count = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

GroupStats stats_of(std::span<const double> values) {
    GroupStats s;
    s.count = values.size();
    if (values.empty())
        return s;
    for (double v : values)
        s.mean += v;
    s.mean /= static_cast<double>(values.size());
    for (double v : values)
        s.stddev += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(s.stddev / static_cast<double>(values.size()));
    return s;
}

int cmd_inspect(const std::string& checkpoint_path) {
    const LoadedCheckpoint loaded = load_checkpoint(fs::path(checkpoint_path));
    const QrnnModel& model = loaded.model;
    const CellTopology& t = model.topology();
    std::cout << "topology: H=" << t.workspace << " I=" << t.io
              << " S=" << t.stages << " d=" << t.degree << " ord=" << t.order
              << '\n';
    std::cout << "parameters: " << model.parameter_count() << '\n';
    std::cout << "rng_seed: " << loaded.rng_seed
              << " step_count: " << loaded.step_count << '\n';

    const auto params = model.parameters();
    const auto print = [](const char* name, const GroupStats& s) {
        char line[128];
        std::snprintf(line, sizeof(line), "group %s: count=%zu mean=%.6g "
                                          "std=%.6g",
                      name, s.count, s.mean, s.stddev);
        std::cout << line << '\n';
    };
    std::vector<double> group;
    std::vector<double> biases;
    for (std::uint32_t h = 0; h < t.workspace; ++h) {
        const auto block = params.subspan(model.input_neuron_base(h),
                                          model.input_param_count());
        group.insert(group.end(), block.begin(), block.end());
        biases.push_back(block.front());
    }
    print("input_neurons", stats_of(group));
    group.clear();
    for (std::uint32_t s = 0; s < t.stages; ++s)
        for (std::uint32_t h = 0; h < t.workspace; ++h)
            group.push_back(params[model.stage_rotation_slot(s, h)]);
    print("stage_rotations", stats_of(group));
    group.clear();
    for (std::uint32_t s = 0; s < t.stages; ++s)
        for (std::uint32_t h = 0; h < t.workspace; ++h) {
            const auto block = params.subspan(model.stage_neuron_base(s, h),
                                              model.stage_param_count());
            group.insert(group.end(), block.begin(), block.end());
            biases.push_back(block.front());
        }
    print("stage_neurons", stats_of(group));
    group.clear();
    for (std::uint32_t i = 0; i < t.io; ++i) {
        const auto block = params.subspan(model.output_neuron_base(i),
                                          model.output_param_count());
        group.insert(group.end(), block.begin(), block.end());
        biases.push_back(block.front());
    }
    print("output_neurons", stats_of(group));
    print("biases", stats_of(biases));
    return 0;
}

} // namespace

std::string canonical_config_json(const std::string& json_text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("config parse error: ") + e.what());
    }
    ConfigErrors errors;
    const RunConfig config = parse_config(doc, errors);
    if (!errors.ok())
        throw Error("config has invalid fields");
    return to_json(config).dump(2) + "\n";
}

int run_cli(int argc, const char* const* argv) {
    CLI::App app{"qrnn: quantum recurrent neural network simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> checkpoints;
    std::string metrics_path;
    std::string data_dir;
    std::string out_path = "generated.txt";
    std::string split = "validation";
    std::uint64_t seed = 0;
    bool seed_given = false;
    unsigned workers = 0;
    bool workers_given = false;
    Word primer = 0;
    std::size_t steps = 100;

    CLI::App* train_cmd = app.add_subcommand("train", "train a model");
    train_cmd->add_option("--config", config_path, "config JSON")->required();
    train_cmd->add_option("--seed", seed, "train.seed override")
        ->each([&](const std::string&) { seed_given = true; });
    train_cmd->add_option("--workers", workers, "worker thread count")
        ->each([&](const std::string&) { workers_given = true; });
    train_cmd->add_option("--metrics", metrics_path, "metrics CSV path");
    train_cmd->add_option("--checkpoint", checkpoints,
                          "checkpoint output path");
    train_cmd->add_option("--data-dir", data_dir, "dataset directory");
    train_cmd->allow_extras();

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate checkpoints");
    eval_cmd->add_option("--config", config_path, "config JSON")->required();
    eval_cmd->add_option("--checkpoint", checkpoints,
                         "checkpoint path (repeat for an ensemble)")
        ->required();
    eval_cmd->add_option("--split", split, "validation|test");
    eval_cmd->add_option("--workers", workers, "worker thread count")
        ->each([&](const std::string&) { workers_given = true; });
    eval_cmd->add_option("--data-dir", data_dir, "dataset directory");
    eval_cmd->allow_extras();

    CLI::App* gen_cmd = app.add_subcommand("generate", "sample a sequence");
    gen_cmd->add_option("--checkpoint", checkpoints, "checkpoint path")
        ->required();
    gen_cmd->add_option("--primer", primer, "first input word");
    gen_cmd->add_option("--steps", steps, "number of sampled steps");
    gen_cmd->add_option("--seed", seed, "sampling seed");
    gen_cmd->add_option("--out", out_path, "output word file");

    CLI::App* inspect_cmd =
        app.add_subcommand("inspect", "describe a checkpoint");
    inspect_cmd->add_option("--checkpoint", checkpoints, "checkpoint path")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (app.got_subcommand(train_cmd) || app.got_subcommand(eval_cmd)) {
            CLI::App* active = app.got_subcommand(train_cmd) ? train_cmd
                                                             : eval_cmd;
            ordered_json doc = load_json_file(config_path);
            apply_overrides(doc, active->remaining());
            if (seed_given)
                doc["train"]["seed"] = seed;
            if (workers_given)
                doc["workers"] = workers;
            if (!metrics_path.empty())
                doc["paths"]["metrics_out"] = metrics_path;
            if (!data_dir.empty())
                doc["paths"]["data_dir"] = data_dir;
            if (app.got_subcommand(train_cmd)) {
                if (!checkpoints.empty())
                    doc["paths"]["checkpoint_out"] = checkpoints.front();
                return cmd_train(doc);
            }
            return cmd_eval(doc, checkpoints, split);
        }
        if (app.got_subcommand(gen_cmd))
            return cmd_generate(checkpoints.front(), primer, steps, seed,
                                out_path);
        if (app.got_subcommand(inspect_cmd))
            return cmd_inspect(checkpoints.front());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}

} // namespace qrnn::cli
