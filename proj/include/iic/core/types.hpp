#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace iic::core {

/// Sensor modalities recorded by the wearable. The enum order is the
/// canonical channel order used everywhere (serialization, model input
/// layout, component ordering).
enum class Modality : int { ACC = 0, HR = 1, EDA = 2, TEMP = 3 };

inline constexpr std::array<Modality, 4> kAllModalities = {
    Modality::ACC, Modality::HR, Modality::EDA, Modality::TEMP};

std::string_view modality_name(Modality m);
std::string_view modality_unit(Modality m);
std::optional<Modality> modality_from_name(std::string_view name);

using Samples = std::vector<double>;

/// One fixed-length, fixed-rate multimodal time-series window: the unit of
/// classification and explanation. Channels are keyed by modality; all
/// present channels share the same length.
struct MultimodalWindow {
    std::string window_id;
    std::string subject_id;
    std::optional<int> label;
    double sample_rate_hz = 0.0;
    std::map<Modality, Samples> channels;

    std::size_t length() const {
        return channels.empty() ? 0 : channels.begin()->second.size();
    }
    bool has(Modality m) const { return channels.count(m) > 0; }
    std::vector<Modality> modalities() const;
};

/// Throws InvalidWindow / NonPositiveHeartRate on violated invariants:
/// equal channel lengths, t >= 2, finite samples, HR strictly positive.
void validate_window(const MultimodalWindow& w);

enum class Split { Train, Eval };

struct Dataset {
    std::vector<MultimodalWindow> windows;
    Split split = Split::Train;
    std::vector<std::string> class_names;

    std::size_t size() const { return windows.size(); }
    bool empty() const { return windows.empty(); }
};

/// Throws if windows disagree on t, sample rate, or modality set, or if a
/// label falls outside [0, |class_names|).
void validate_dataset(const Dataset& ds);

/// Per-modality scalar baseline b, the mean of all training samples of that
/// modality. Excluded from weight optimization; broadcast at reconstruction.
struct BaselineSet {
    std::map<Modality, double> b;

    bool has(Modality m) const { return b.count(m) > 0; }
    double at(Modality m) const;
};

} // namespace iic::core
