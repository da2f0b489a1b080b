#include "iic/core/types.hpp"

#include <cmath>

#include "iic/errors.hpp"

namespace iic::core {

std::string_view modality_name(Modality m) {
    switch (m) {
        case Modality::ACC: return "ACC";
        case Modality::HR: return "HR";
        case Modality::EDA: return "EDA";
        case Modality::TEMP: return "TEMP";
    }
    return "?";
}

std::string_view modality_unit(Modality m) {
    switch (m) {
        case Modality::ACC: return "g";
        case Modality::HR: return "bpm";
        case Modality::EDA: return "microsiemens";
        case Modality::TEMP: return "degC";
    }
    return "?";
}

std::optional<Modality> modality_from_name(std::string_view name) {
    for (Modality m : kAllModalities) {
        if (modality_name(m) == name) return m;
    }
    return std::nullopt;
}

std::vector<Modality> MultimodalWindow::modalities() const {
    std::vector<Modality> out;
    out.reserve(channels.size());
    for (const auto& [m, _] : channels) out.push_back(m);
    return out;
}

void validate_window(const MultimodalWindow& w) {
    if (w.channels.empty()) {
        throw InvalidWindow("window '" + w.window_id + "' has no channels");
    }
    const std::size_t t = w.length();
    if (t < 2) {
        throw InvalidWindow("window '" + w.window_id + "' has length " + std::to_string(t) +
                            ", need at least 2");
    }
    if (w.sample_rate_hz <= 0.0) {
        throw InvalidWindow("window '" + w.window_id + "' has non-positive sample rate");
    }
    for (const auto& [m, samples] : w.channels) {
        if (samples.size() != t) {
            throw InvalidWindow("window '" + w.window_id + "' channel " +
                                std::string(modality_name(m)) + " has length " +
                                std::to_string(samples.size()) + ", expected " + std::to_string(t));
        }
        for (std::size_t i = 0; i < samples.size(); ++i) {
            if (!std::isfinite(samples[i])) {
                throw InvalidWindow("window '" + w.window_id + "' channel " +
                                    std::string(modality_name(m)) + " sample " + std::to_string(i) +
                                    " is not finite");
            }
            if (m == Modality::HR && samples[i] <= 0.0) {
                throw NonPositiveHeartRate("window '" + w.window_id + "' HR sample " +
                                           std::to_string(i) + " is not strictly positive");
            }
        }
    }
}

void validate_dataset(const Dataset& ds) {
    if (ds.windows.empty()) return;
    validate_window(ds.windows.front());
    const std::size_t t = ds.windows.front().length();
    const double rate = ds.windows.front().sample_rate_hz;
    const auto mods = ds.windows.front().modalities();
    for (const auto& w : ds.windows) {
        validate_window(w);
        if (w.length() != t) {
            throw InvalidWindow("dataset windows disagree on length: '" + w.window_id + "'");
        }
        if (w.sample_rate_hz != rate) {
            throw InvalidWindow("dataset windows disagree on sample rate: '" + w.window_id + "'");
        }
        if (w.modalities() != mods) {
            throw InvalidWindow("dataset windows disagree on modality set: '" + w.window_id + "'");
        }
        if (w.label) {
            if (*w.label < 0 || static_cast<std::size_t>(*w.label) >= ds.class_names.size()) {
                throw InvalidWindow("window '" + w.window_id + "' label " +
                                    std::to_string(*w.label) + " outside [0, " +
                                    std::to_string(ds.class_names.size()) + ")");
            }
        }
    }
}

double BaselineSet::at(Modality m) const {
    auto it = b.find(m);
    if (it == b.end()) {
        throw MissingModality("no baseline for modality " + std::string(modality_name(m)));
    }
    return it->second;
}

} // namespace iic::core
