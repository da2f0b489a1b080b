#pragma once

#include <filesystem>
#include <string>

#include "iic/core/types.hpp"

namespace iic::core {

enum class DataFormat { Csv, Json };

DataFormat format_from_extension(const std::filesystem::path& path);

/// CSV: header `window_id,subject_id,label,sample_rate_hz,modality,idx,value`,
/// one row per sample. JSON: array of window objects
/// `{window_id, subject_id, label, sample_rate_hz, channels:{ACC:[...],...}}`.
///
/// Both writers are canonical: fixed field order, windows in dataset order,
/// modalities in enum order, samples by index, floats as shortest
/// round-trippable decimals. save -> load -> save is byte-identical and
/// load(save(d)) reproduces every sample bit-exactly.
void save_dataset(const Dataset& ds, const std::filesystem::path& path, DataFormat format);

/// `class_names` may be empty, in which case names class_0..class_K are
/// derived from the labels found in the file.
Dataset load_dataset(const std::filesystem::path& path, DataFormat format,
                     std::vector<std::string> class_names = {}, Split split = Split::Train);

std::string dataset_to_csv(const Dataset& ds);
std::string dataset_to_json(const Dataset& ds);
Dataset dataset_from_csv(const std::string& text, std::vector<std::string> class_names = {},
                         Split split = Split::Train);
Dataset dataset_from_json(const std::string& text, std::vector<std::string> class_names = {},
                          Split split = Split::Train);

/// Shortest decimal representation that parses back to exactly `v`.
std::string format_double(double v);

} // namespace iic::core
