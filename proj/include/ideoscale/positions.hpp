#pragma once

#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace ideoscale {

// Entities x named dimensions, row-major. Used for follower, MP and
// ground-truth position sets alike; MP tables additionally carry
// name/party columns.
struct PositionTable {
    std::vector<std::string> ids;
    std::vector<std::string> dimensions; // e.g. "lrgen_19"
    std::vector<double> values;          // ids.size() x dimensions.size()

    std::vector<std::string> names;   // optional, parallel to ids
    std::vector<std::string> parties; // optional, parallel to ids

    std::size_t n_rows() const { return ids.size(); }
    std::size_t n_dims() const { return dimensions.size(); }

    double at(std::size_t row, std::size_t dim) const { return values[row * dimensions.size() + dim]; }
    double& at(std::size_t row, std::size_t dim) { return values[row * dimensions.size() + dim]; }

    // dimension index by name; throws if absent
    std::size_t dim_index(const std::string& name) const {
        for (std::size_t i = 0; i < dimensions.size(); ++i)
            if (dimensions[i] == name) return i;
        throw std::runtime_error("positions: unknown dimension '" + name + "'");
    }
    bool has_dim(const std::string& name) const {
        for (const auto& d : dimensions)
            if (d == name) return true;
        return false;
    }

    // id -> row lookup built on first use
    const std::unordered_map<std::string, std::size_t>& id_rows() const {
        if (id_rows_.size() != ids.size()) {
            id_rows_.clear();
            id_rows_.reserve(ids.size());
            for (std::size_t i = 0; i < ids.size(); ++i) id_rows_.emplace(ids[i], i);
        }
        return id_rows_;
    }

private:
    mutable std::unordered_map<std::string, std::size_t> id_rows_;
};

} // namespace ideoscale
