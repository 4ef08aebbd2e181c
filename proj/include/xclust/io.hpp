#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "xclust/core.hpp"

namespace xclust {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double v);

// CSV with header x0,...,x{d-1}; one point per row.  Values are written in
// round-trip form so a write/read cycle is bit-stable.
void write_points_csv(const std::filesystem::path& path, const PointSet& pts);
PointSet read_points_csv(const std::filesystem::path& path);

// Tree files: {"format_version": 1, "k": ..., "d": ..., "root": ...,
// "nodes": [...]} with internal nodes {id, dim, threshold, left, right} and
// leaves {id, center}.  Builders' split audits ride along under "splits"
// when present.  Loading validates the structural invariants.
nlohmann::json tree_to_json(const ThresholdTree& tree);
ThresholdTree tree_from_json(const nlohmann::json& j);
void write_tree_json(const std::filesystem::path& path,
                     const ThresholdTree& tree);
ThresholdTree read_tree_json(const std::filesystem::path& path);

}  // namespace xclust
