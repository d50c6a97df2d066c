#pragma once

#include <string>

#include "core/harness.hpp"

namespace modmetric {

// Compact-set spec: {"type":"ball","center":[..],"radius":r},
// {"type":"box","min":[..],"max":[..]} or
// {"type":"polyline","vertices":[[..],[..],...]}.  Shape masks take every
// cell whose center satisfies the predicate; all cells must lie in D.
CellSet mask_from_shape_json(const GridDomain& domain, const std::string& json_text);

// VTK legacy structured-points export of a potential field (cell centers as
// points).  provenance lands in the title line.
std::string field_to_vtk(const PotentialField& field, const std::string& provenance);
std::string field_to_csv(const PotentialField& field, const std::string& provenance);

std::string capacity_result_to_json(const CapacityResult& result, const std::string& config_json);
std::string metric_result_to_json(const MetricResult& result, int dim,
                                  const std::string& config_json);
std::string levelset_to_csv(const LevelSet& ls, const std::string& provenance);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace modmetric
