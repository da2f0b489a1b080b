#include "iic/nn/checkpoint.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "iic/errors.hpp"

namespace iic::nn {

using ordered_json = nlohmann::ordered_json;

std::string model_to_json(const Model& model) {
    const auto& spec = model.spec();
    ordered_json doc;
    doc["format"] = "ckpt_v1";
    ordered_json js;
    js["arch"] = std::string(arch_name(spec.arch));
    js["hidden_size"] = spec.hidden_size;
    js["num_layers"] = spec.num_layers;
    js["num_heads"] = spec.num_heads;
    js["input_length"] = spec.input_length;
    js["input_channels"] = spec.input_channels;
    js["num_classes"] = spec.num_classes;
    js["seed"] = spec.seed;
    doc["spec"] = std::move(js);

    ordered_json scaling;
    scaling["shift"] = ordered_json::array();
    scaling["scale"] = ordered_json::array();
    for (Eigen::Index c = 0; c < model.input_shift().size(); ++c) {
        scaling["shift"].push_back(model.input_shift()[c]);
        scaling["scale"].push_back(model.input_scale()[c]);
    }
    doc["input_scaling"] = std::move(scaling);

    ordered_json params = ordered_json::object();
    model.visit_tensors([&](const std::string& name, const auto& m) {
        ordered_json arr = ordered_json::array();
        for (Eigen::Index i = 0; i < m.size(); ++i) arr.push_back(m.data()[i]);
        params[name] = std::move(arr);
    });
    doc["params"] = std::move(params);
    return doc.dump(2) + "\n";
}

Model model_from_json(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw ParseError(std::string("checkpoint JSON parse error: ") + e.what());
    }
    if (!doc.is_object() || doc.value("format", "") != "ckpt_v1") {
        throw SchemaMismatch("checkpoint is not a ckpt_v1 document");
    }
    if (!doc.contains("spec") || !doc.contains("params")) {
        throw SchemaMismatch("checkpoint missing 'spec' or 'params'");
    }
    const auto& js = doc["spec"];
    ModelSpec spec;
    const auto arch = arch_from_name(js.value("arch", ""));
    if (!arch) throw SchemaMismatch("checkpoint has unknown arch '" + js.value("arch", "") + "'");
    spec.arch = *arch;
    spec.hidden_size = js.value("hidden_size", 0);
    spec.num_layers = js.value("num_layers", -1);
    spec.num_heads = js.value("num_heads", 0);
    spec.input_length = js.value("input_length", 0);
    spec.input_channels = js.value("input_channels", 0);
    spec.num_classes = js.value("num_classes", 0);
    spec.seed = js.value("seed", std::uint64_t{0});
    validate_spec(spec);

    Model model = Model::init(spec);
    std::vector<double> flat;
    flat.reserve(model.parameter_count());
    const auto& params = doc["params"];
    model.visit_tensors([&](const std::string& name, const auto& m) {
        if (!params.contains(name)) {
            throw SchemaMismatch("checkpoint missing tensor '" + name + "'");
        }
        const auto& arr = params[name];
        if (!arr.is_array() || static_cast<Eigen::Index>(arr.size()) != m.size()) {
            throw SchemaMismatch("checkpoint tensor '" + name + "' has wrong length");
        }
        for (const auto& v : arr) {
            if (!v.is_number()) {
                throw SchemaMismatch("checkpoint tensor '" + name + "' has a non-numeric entry");
            }
            flat.push_back(v.get<double>());
        }
    });
    model.set_parameters(flat);

    if (doc.contains("input_scaling")) {
        const auto& sc = doc["input_scaling"];
        if (!sc.is_object() || !sc.contains("shift") || !sc.contains("scale") ||
            !sc["shift"].is_array() || !sc["scale"].is_array() ||
            sc["shift"].size() != static_cast<std::size_t>(spec.input_channels) ||
            sc["scale"].size() != sc["shift"].size()) {
            throw SchemaMismatch("checkpoint input_scaling must hold per-channel shift/scale");
        }
        Eigen::VectorXd shift(spec.input_channels), scale(spec.input_channels);
        for (Eigen::Index c = 0; c < shift.size(); ++c) {
            const auto& sh = sc["shift"][static_cast<std::size_t>(c)];
            const auto& sl = sc["scale"][static_cast<std::size_t>(c)];
            if (!sh.is_number() || !sl.is_number()) {
                throw SchemaMismatch("checkpoint input_scaling has a non-numeric entry");
            }
            shift[c] = sh.get<double>();
            scale[c] = sl.get<double>();
        }
        model.set_input_scaling(shift, scale);
    }
    return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw MissingInput("cannot open '" + path.string() + "' for writing");
    out << model_to_json(model);
}

Model load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingInput("cannot open '" + path.string() + "' for reading");
    std::stringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str());
}

} // namespace iic::nn
