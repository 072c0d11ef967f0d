#include "qrnn/checkpoint.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace qrnn {

namespace {

constexpr int kFormatVersion = 1;

std::string format_double(double value) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_block(std::ostream& out, std::span<const double> values) {
    out << '[';
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i)
            out << ',';
        out << format_double(values[i]);
    }
    out << ']';
}

std::vector<double> read_block(const nlohmann::json& node,
                               std::size_t expected,
                               const char* what) {
    if (!node.is_array() || node.size() != expected)
        throw CheckpointError(std::string("checkpoint group '") + what +
                              "' has wrong shape");
    std::vector<double> values;
    values.reserve(expected);
    for (const auto& v : node) {
        if (!v.is_number())
            throw CheckpointError(std::string("non-numeric entry in '") +
                                  what + "'");
        values.push_back(v.get<double>());
    }
    return values;
}

} // namespace

void save_checkpoint(const QrnnModel& model, std::uint64_t rng_seed,
                     std::uint64_t step_count, std::ostream& out) {
    const CellTopology& t = model.topology();
    const auto params = model.parameters();
    out << "{\n";
    out << "  \"format_version\": " << kFormatVersion << ",\n";
    out << "  \"topology\": {\"H\": " << t.workspace << ", \"I\": " << t.io
        << ", \"S\": " << t.stages << ", \"d\": " << t.degree
        << ", \"ord\": " << t.order << "},\n";
    out << "  \"groups\": {\n";
    out << "    \"input_neurons\": [";
    for (std::uint32_t h = 0; h < t.workspace; ++h) {
        if (h)
            out << ',';
        write_block(out, params.subspan(model.input_neuron_base(h),
                                        model.input_param_count()));
    }
    out << "],\n    \"stage_rotations\": [";
    for (std::uint32_t s = 0; s < t.stages; ++s) {
        if (s)
            out << ',';
        write_block(out, params.subspan(model.stage_rotation_slot(s, 0),
                                        t.workspace));
    }
    out << "],\n    \"stage_neurons\": [";
    for (std::uint32_t s = 0; s < t.stages; ++s) {
        if (s)
            out << ',';
        out << '[';
        for (std::uint32_t h = 0; h < t.workspace; ++h) {
            if (h)
                out << ',';
            write_block(out, params.subspan(model.stage_neuron_base(s, h),
                                            model.stage_param_count()));
        }
        out << ']';
    }
    out << "],\n    \"output_neurons\": [";
    for (std::uint32_t i = 0; i < t.io; ++i) {
        if (i)
            out << ',';
        write_block(out, params.subspan(model.output_neuron_base(i),
                                        model.output_param_count()));
    }
    out << "]\n  },\n";
    out << "  \"rng_seed\": " << rng_seed << ",\n";
    out << "  \"step_count\": " << step_count << "\n";
    out << "}\n";
}

void save_checkpoint(const QrnnModel& model, std::uint64_t rng_seed,
                     std::uint64_t step_count,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw CheckpointError("cannot open checkpoint for writing: " +
                              path.string());
    save_checkpoint(model, rng_seed, step_count, out);
    if (!out.flush())
        throw CheckpointError("failed writing checkpoint: " + path.string());
}

LoadedCheckpoint load_checkpoint(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("corrupt checkpoint: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("format_version") ||
        !doc.contains("topology") || !doc.contains("groups"))
        throw CheckpointError("corrupt checkpoint: missing required fields");
    if (doc["format_version"].get<int>() != kFormatVersion)
        throw CheckpointError("unsupported checkpoint format_version");

    const auto& topo = doc["topology"];
    CellTopology t;
    try {
        t.workspace = topo.at("H").get<std::uint32_t>();
        t.io = topo.at("I").get<std::uint32_t>();
        t.stages = topo.at("S").get<std::uint32_t>();
        t.degree = topo.at("d").get<std::uint32_t>();
        t.order = topo.at("ord").get<std::uint32_t>();
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError(std::string("corrupt topology: ") + e.what());
    }
    if (t.workspace == 0 || t.io == 0 || t.stages == 0 || t.degree == 0 ||
        t.order == 0 || t.lanes() > kMaxLanes)
        throw CheckpointError("checkpoint topology out of range");

    QrnnModel model(t);
    auto params = model.parameters();
    const auto& groups = doc["groups"];
    const auto group = [&](const char* name) -> const nlohmann::json& {
        if (!groups.contains(name))
            throw CheckpointError(std::string("checkpoint missing group '") +
                                  name + "'");
        return groups[name];
    };

    const auto& input = group("input_neurons");
    if (!input.is_array() || input.size() != t.workspace)
        throw CheckpointError("input_neurons has wrong shape");
    for (std::uint32_t h = 0; h < t.workspace; ++h) {
        auto block =
            read_block(input[h], model.input_param_count(), "input_neurons");
        std::copy(block.begin(), block.end(),
                  params.begin() + model.input_neuron_base(h));
    }
    const auto& rotations = group("stage_rotations");
    if (!rotations.is_array() || rotations.size() != t.stages)
        throw CheckpointError("stage_rotations has wrong shape");
    for (std::uint32_t s = 0; s < t.stages; ++s) {
        auto block =
            read_block(rotations[s], t.workspace, "stage_rotations");
        std::copy(block.begin(), block.end(),
                  params.begin() + model.stage_rotation_slot(s, 0));
    }
    const auto& stage = group("stage_neurons");
    if (!stage.is_array() || stage.size() != t.stages)
        throw CheckpointError("stage_neurons has wrong shape");
    for (std::uint32_t s = 0; s < t.stages; ++s) {
        if (!stage[s].is_array() || stage[s].size() != t.workspace)
            throw CheckpointError("stage_neurons has wrong shape");
        for (std::uint32_t h = 0; h < t.workspace; ++h) {
            auto block = read_block(stage[s][h], model.stage_param_count(),
                                    "stage_neurons");
            std::copy(block.begin(), block.end(),
                      params.begin() + model.stage_neuron_base(s, h));
        }
    }
    const auto& output = group("output_neurons");
    if (!output.is_array() || output.size() != t.io)
        throw CheckpointError("output_neurons has wrong shape");
    for (std::uint32_t i = 0; i < t.io; ++i) {
        auto block = read_block(output[i], model.output_param_count(),
                                "output_neurons");
        std::copy(block.begin(), block.end(),
                  params.begin() + model.output_neuron_base(i));
    }

    LoadedCheckpoint loaded{std::move(model), 0, 0};
    if (doc.contains("rng_seed"))
        loaded.rng_seed = doc["rng_seed"].get<std::uint64_t>();
    if (doc.contains("step_count"))
        loaded.step_count = doc["step_count"].get<std::uint64_t>();
    return loaded;
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw CheckpointError("cannot open checkpoint: " + path.string());
    return load_checkpoint(in);
}

} // namespace qrnn
