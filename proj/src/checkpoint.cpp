#include "trifuse/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

namespace trifuse {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "trifuse-checkpoint";
constexpr int kVersion = 1;

json tensor_to_json(const Tensor& t) {
    json j;
    j["shape"] = t.shape();
    j["data"] = std::vector<Scalar>(t.data(), t.data() + t.size());
    return j;
}

Tensor tensor_from_json(const json& j) {
    Shape shape = j.at("shape").get<Shape>();
    std::vector<Scalar> data = j.at("data").get<std::vector<Scalar>>();
    Array a(static_cast<Index>(data.size()));
    for (Index i = 0; i < a.size(); ++i) a[i] = data[static_cast<std::size_t>(i)];
    Tensor t = Tensor::from_flat(std::move(shape), std::move(a));
    if (!t.all_finite()) throw DataError("checkpoint holds non-finite parameter values");
    return t;
}

json vector_to_json(const Vector& v) { return std::vector<Scalar>(v.data(), v.data() + v.size()); }

Vector vector_from_json(const json& j) {
    std::vector<Scalar> data = j.get<std::vector<Scalar>>();
    Vector v(static_cast<Index>(data.size()));
    for (Index i = 0; i < v.size(); ++i) v[i] = data[static_cast<std::size_t>(i)];
    return v;
}

std::string unit_name(const FusionModel& m, std::size_t idx) {
    if (m.strategy == FusionStrategy::UnifiedAttention) return "unified";
    auto pr = m.pairs().at(idx);
    return std::string(to_string(pr.first)) + "_" + std::string(to_string(pr.second));
}

}  // namespace

std::string checkpoint_to_json(const FusionModel& m) {
    json j;
    j["format"] = kFormat;
    j["version"] = kVersion;
    j["strategy"] = to_string(m.strategy);
    std::vector<std::string> mods;
    for (ModalityId mod : m.modalities) mods.emplace_back(to_string(mod));
    j["modalities"] = mods;
    j["model_width"] = m.model_width;
    j["hidden_width"] = m.hidden_width;
    json widths;
    for (auto& [mod, w] : m.modality_widths) widths[std::string(to_string(mod))] = w;
    j["modality_widths"] = widths;

    json params;
    for (ModalityId mod : m.modalities) {
        std::string name(to_string(mod));
        params["projector." + name + ".weight"] = tensor_to_json(m.projectors.at(mod).weight);
        params["projector." + name + ".bias"] = tensor_to_json(m.projectors.at(mod).bias);
        params["scaler." + name + ".shift"] = vector_to_json(m.scalers.at(mod).shift);
        params["scaler." + name + ".scale"] = vector_to_json(m.scalers.at(mod).scale);
    }
    for (std::size_t u = 0; u < m.attention.size(); ++u) {
        std::string base = "attention." + unit_name(m, u);
        params[base + ".query"] = tensor_to_json(m.attention[u].w_query);
        params[base + ".key"] = tensor_to_json(m.attention[u].w_key);
        params[base + ".value"] = tensor_to_json(m.attention[u].w_value);
    }
    params["fc.weight"] = tensor_to_json(m.fc_weight);
    params["fc.bias"] = tensor_to_json(m.fc_bias);
    params["classifier.weight"] = tensor_to_json(m.cls_weight);
    params["classifier.bias"] = tensor_to_json(m.cls_bias);
    j["params"] = params;
    return j.dump(1);
}

FusionModel checkpoint_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format") != kFormat) throw DataError("not a trifuse checkpoint");
        if (j.at("version") != kVersion)
            throw DataError("unsupported checkpoint version " + j.at("version").dump());
        FusionModel m;
        m.strategy = parse_strategy(j.at("strategy").get<std::string>());
        for (const auto& name : j.at("modalities")) m.modalities.push_back(parse_modality(name.get<std::string>()));
        m.modalities = canonical_modalities(std::move(m.modalities));
        m.model_width = j.at("model_width").get<Index>();
        m.hidden_width = j.at("hidden_width").get<Index>();
        for (ModalityId mod : m.modalities)
            m.modality_widths[mod] = j.at("modality_widths").at(std::string(to_string(mod))).get<Index>();

        const json& params = j.at("params");
        for (ModalityId mod : m.modalities) {
            std::string name(to_string(mod));
            Projector p;
            p.weight = tensor_from_json(params.at("projector." + name + ".weight"));
            p.bias = tensor_from_json(params.at("projector." + name + ".bias"));
            m.projectors[mod] = std::move(p);
            FeatureScaler sc;
            sc.shift = vector_from_json(params.at("scaler." + name + ".shift"));
            sc.scale = vector_from_json(params.at("scaler." + name + ".scale"));
            m.scalers[mod] = std::move(sc);
        }
        std::size_t n_units = 0;
        if (m.strategy == FusionStrategy::UnifiedAttention) n_units = 1;
        if (m.strategy == FusionStrategy::CombinatorialAttention) n_units = m.pairs().size();
        for (std::size_t u = 0; u < n_units; ++u) {
            std::string base = "attention." + unit_name(m, u);
            AttentionUnit unit;
            unit.w_query = tensor_from_json(params.at(base + ".query"));
            unit.w_key = tensor_from_json(params.at(base + ".key"));
            unit.w_value = tensor_from_json(params.at(base + ".value"));
            m.attention.push_back(std::move(unit));
        }
        m.fc_weight = tensor_from_json(params.at("fc.weight"));
        m.fc_bias = tensor_from_json(params.at("fc.bias"));
        m.cls_weight = tensor_from_json(params.at("classifier.weight"));
        m.cls_bias = tensor_from_json(params.at("classifier.bias"));

        // structural sanity before anyone runs a forward pass
        if (m.fc_weight.rows() != m.fused_width())
            throw DataError("checkpoint fc width " + std::to_string(m.fc_weight.rows()) +
                            " does not match fused width " + std::to_string(m.fused_width()));
        if (m.cls_weight.cols() != 2) throw DataError("checkpoint classifier width must be 2");
        return m;
    } catch (const json::exception& e) {
        throw DataError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const FusionModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open checkpoint for writing: " + path.string());
    out << checkpoint_to_json(model) << "\n";
    if (!out) throw DataError("failed writing checkpoint: " + path.string());
}

FusionModel load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return checkpoint_from_json(text);
}

}  // namespace trifuse
