#pragma once

#include <filesystem>
#include <string>

#include "iic/nn/model.hpp"

namespace iic::nn {

/// Versioned JSON checkpoint ("ckpt_v1"): spec plus named flat float64
/// parameter arrays in the canonical tensor order. Writing is canonical, so
/// identical models produce byte-identical files.
std::string model_to_json(const Model& model);
Model model_from_json(const std::string& text);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

} // namespace iic::nn
