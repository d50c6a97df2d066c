#include "core/io.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace modmetric {

using nlohmann::json;

CellSet mask_from_shape_json(const GridDomain& domain, const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mask spec: invalid JSON: ") + e.what());
  }
  const GridSpec& spec = domain.spec();
  try {
    const std::string type = j.at("type").get<std::string>();
    if (type == "polyline") {
      std::vector<Vec> verts;
      for (const json& v : j.at("vertices")) {
        Vec p{v.at(0).get<double>(), v.at(1).get<double>(),
              spec.dim == 3 ? v.at(2).get<double>() : 0.0};
        verts.push_back(p);
      }
      return rasterize_polyline(verts, domain).set;
    }
    std::vector<uint32_t> cells;
    if (type == "ball") {
      Vec center{j.at("center").at(0).get<double>(), j.at("center").at(1).get<double>(),
                 spec.dim == 3 ? j.at("center").at(2).get<double>() : 0.0};
      const double radius = j.at("radius").get<double>();
      for (std::size_t c = 0; c < spec.cell_count(); ++c)
        if (dist(spec.center(static_cast<uint32_t>(c)), center) <= radius)
          cells.push_back(static_cast<uint32_t>(c));
    } else if (type == "box") {
      Vec lo{j.at("min").at(0).get<double>(), j.at("min").at(1).get<double>(),
             spec.dim == 3 ? j.at("min").at(2).get<double>() : -1.0};
      Vec hi{j.at("max").at(0).get<double>(), j.at("max").at(1).get<double>(),
             spec.dim == 3 ? j.at("max").at(2).get<double>() : 1.0};
      for (std::size_t c = 0; c < spec.cell_count(); ++c) {
        const Vec p = spec.center(static_cast<uint32_t>(c));
        if (p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
            (spec.dim == 2 || (p.z >= lo.z && p.z <= hi.z)))
          cells.push_back(static_cast<uint32_t>(c));
      }
    } else {
      throw ConfigError("mask spec: type must be ball, box or polyline");
    }
    if (cells.empty()) throw ConfigError("mask spec: empty cell set");
    for (const uint32_t c : cells)
      if (!domain.inside(c)) throw GeometryError("mask spec: set leaves the domain");
    return CellSet::from(std::move(cells));
  } catch (const json::exception& e) {
    throw ConfigError(std::string("mask spec: ") + e.what());
  }
}

std::string field_to_vtk(const PotentialField& field, const std::string& provenance) {
  const GridSpec& spec = field.domain->spec();
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n";
  out << (provenance.empty() ? "potential field" : provenance) << "\n";
  out << "ASCII\nDATASET STRUCTURED_POINTS\n";
  out << "DIMENSIONS " << spec.nx << " " << spec.ny << " " << spec.nz << "\n";
  out << std::setprecision(17);
  out << "ORIGIN " << spec.origin.x + 0.5 * spec.h << " " << spec.origin.y + 0.5 * spec.h << " "
      << (spec.dim == 3 ? spec.origin.z + 0.5 * spec.h : 0.0) << "\n";
  out << "SPACING " << spec.h << " " << spec.h << " " << spec.h << "\n";
  out << "POINT_DATA " << spec.cell_count() << "\n";
  out << "SCALARS u double 1\nLOOKUP_TABLE default\n";
  for (std::size_t c = 0; c < spec.cell_count(); ++c) out << field.values[c] << "\n";
  return out.str();
}

std::string field_to_csv(const PotentialField& field, const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "index,value\n";
  out << std::setprecision(17);
  for (std::size_t c = 0; c < field.values.size(); ++c) out << c << "," << field.values[c] << "\n";
  return out.str();
}

std::string capacity_result_to_json(const CapacityResult& result, const std::string& config_json) {
  json j;
  j["value"] = result.value;
  j["iterations"] = result.iterations;
  j["residual"] = result.residual;
  j["h"] = result.h;
  j["n"] = result.n_exp;
  if (!config_json.empty()) j["config"] = json::parse(config_json, nullptr, false);
  return j.dump(2);
}

std::string metric_result_to_json(const MetricResult& result, int dim,
                                  const std::string& config_json) {
  json j;
  j["value"] = result.value;
  json verts = json::array();
  for (const Vec& v : result.vertices) {
    json p = json::array();
    p.push_back(v.x);
    p.push_back(v.y);
    if (dim == 3) p.push_back(v.z);
    verts.push_back(p);
  }
  j["vertices"] = verts;
  j["evals"] = result.evals;
  j["converged"] = result.converged;
  if (!config_json.empty()) j["config"] = json::parse(config_json, nullptr, false);
  return j.dump(2);
}

std::string levelset_to_csv(const LevelSet& ls, const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << std::setprecision(17);
  out << "dir_x,dir_y,dir_z,radius,achieved_mu\n";
  for (const LevelSetSample& s : ls.samples)
    out << s.direction.x << "," << s.direction.y << "," << s.direction.z << "," << s.radius << ","
        << s.achieved << "\n";
  return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
  if (!out) throw ConfigError("write failed: " + path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace modmetric
