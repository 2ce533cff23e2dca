#include "fpvolseg/toy_model.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "fpvolseg/text_io.hpp"

namespace fpvolseg {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_input(const PatchTensor& input) {
    if (input.channels != 2)
        throw DimensionError("toy model expects a 2-channel (CT, PET) patch");
}

} // namespace

std::vector<double> ToyModel::predict(const PatchTensor& input) const {
    check_input(input);
    const auto ct = input.channel_view(0);
    const auto pet = input.channel_view(1);
    std::vector<double> probs(ct.size());
    for (std::size_t i = 0; i < ct.size(); ++i)
        probs[i] = sigmoid(w_ct * static_cast<double>(ct[i]) +
                           w_pet * static_cast<double>(pet[i]) + bias);
    return probs;
}

ToyModel::ParamGrad ToyModel::backward(const PatchTensor& input, std::span<const double> probs,
                                       std::span<const double> grad_p) const {
    check_input(input);
    const auto ct = input.channel_view(0);
    const auto pet = input.channel_view(1);
    if (probs.size() != ct.size() || grad_p.size() != ct.size())
        throw DimensionError("probability or gradient size differs from the patch");

    ParamGrad g;
    for (std::size_t i = 0; i < ct.size(); ++i) {
        const double common = grad_p[i] * probs[i] * (1.0 - probs[i]);
        g.w_ct += common * static_cast<double>(ct[i]);
        g.w_pet += common * static_cast<double>(pet[i]);
        g.bias += common;
    }
    return g;
}

void ToyModel::set_params(std::span<const double> p) {
    if (p.size() != 3) throw DimensionError("toy model has exactly 3 parameters");
    w_ct = p[0];
    w_pet = p[1];
    bias = p[2];
}

PatchPredictor ToyModel::predictor() const {
    const ToyModel copy = *this;
    return [copy](const PatchTensor& patch) {
        const std::vector<double> probs = copy.predict(patch);
        std::vector<float> out(probs.size());
        for (std::size_t i = 0; i < probs.size(); ++i) out[i] = static_cast<float>(probs[i]);
        return out;
    };
}

void save_model(const ToyModel& model, const std::filesystem::path& path) {
    nlohmann::json doc;
    doc["model"] = "toy-logistic";
    doc["w_ct"] = model.w_ct;
    doc["w_pet"] = model.w_pet;
    doc["bias"] = model.bias;
    write_text_atomic(path, doc.dump() + "\n");
}

ToyModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    try {
        nlohmann::json doc;
        in >> doc;
        if (doc.at("model").get<std::string>() != "toy-logistic")
            throw FormatError("unsupported model type in " + path.string());
        ToyModel m;
        m.w_ct = doc.at("w_ct").get<double>();
        m.w_pet = doc.at("w_pet").get<double>();
        m.bias = doc.at("bias").get<double>();
        if (!std::isfinite(m.w_ct) || !std::isfinite(m.w_pet) || !std::isfinite(m.bias))
            throw CorruptFileError("non-finite model parameters in " + path.string());
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("bad model checkpoint: ") + e.what());
    }
}

} // namespace fpvolseg
