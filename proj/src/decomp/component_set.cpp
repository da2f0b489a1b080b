#include "iic/decomp/component_set.hpp"

#include <cmath>

#include "iic/errors.hpp"

namespace iic::decomp {

int ComponentSet::index_of(std::string_view name) const {
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (components[i].name == name) return static_cast<int>(i);
    }
    return -1;
}

std::vector<std::string> ComponentSet::names() const {
    std::vector<std::string> out;
    out.reserve(components.size());
    for (const auto& c : components) out.push_back(c.name);
    return out;
}

void validate_weights(const WeightVector& w, std::size_t expected_dim) {
    if (w.w.size() != expected_dim) {
        throw DimensionMismatch("weight vector has dimension " + std::to_string(w.w.size()) +
                                ", expected " + std::to_string(expected_dim));
    }
    for (std::size_t i = 0; i < w.w.size(); ++i) {
        const double v = w.w[i];
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            throw WeightOutOfRange("weight " + std::to_string(i) + " = " + std::to_string(v) +
                                   " is outside [0, 1]");
        }
    }
}

} // namespace iic::decomp
