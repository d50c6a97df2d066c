#include "core/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace modmetric {

using nlohmann::json;

int64_t GridSpec::locate(const Vec& p) const {
  const int ix = static_cast<int>(std::floor((p.x - origin.x) / h));
  const int iy = static_cast<int>(std::floor((p.y - origin.y) / h));
  const int iz = dim == 3 ? static_cast<int>(std::floor((p.z - origin.z) / h)) : 0;
  if (ix < 0 || ix >= nx || iy < 0 || iy >= ny || iz < 0 || iz >= nz) return -1;
  return index(ix, iy, iz);
}

GridSpec make_grid_spec(int dim, const Vec& origin, const Vec& extent, int nx, int ny, int nz) {
  if (dim != 2 && dim != 3) throw ParamError("grid: dim must be 2 or 3");
  if (nx <= 0 || ny <= 0 || (dim == 3 && nz <= 0)) throw ParamError("grid: cell counts must be positive");
  GridSpec spec;
  spec.dim = dim;
  spec.origin = origin;
  spec.extent = extent;
  spec.nx = nx;
  spec.ny = ny;
  spec.nz = dim == 3 ? nz : 1;
  const double hx = extent.x / nx;
  const double hy = extent.y / ny;
  spec.h = hx;
  if (std::fabs(hy - hx) > 1e-12 * std::fmax(1.0, std::fabs(hx)))
    throw ParamError("grid: spacing must be uniform across axes");
  if (dim == 3) {
    const double hz = extent.z / spec.nz;
    if (std::fabs(hz - hx) > 1e-12 * std::fmax(1.0, std::fabs(hx)))
      throw ParamError("grid: spacing must be uniform across axes");
  }
  if (!(spec.h > 0.0)) throw ParamError("grid: extent must be positive");
  if (spec.cell_count() > (1ull << 31))
    throw ParamError("grid: cell budget exceeded");
  return spec;
}

namespace {

// Face neighbors of cell c; writes up to 2*dim indices, returns count.
int face_neighbors(const GridSpec& spec, uint32_t c, uint32_t* out) {
  int ix, iy, iz;
  spec.coords(c, ix, iy, iz);
  int n = 0;
  if (ix > 0) out[n++] = spec.index(ix - 1, iy, iz);
  if (ix + 1 < spec.nx) out[n++] = spec.index(ix + 1, iy, iz);
  if (iy > 0) out[n++] = spec.index(ix, iy - 1, iz);
  if (iy + 1 < spec.ny) out[n++] = spec.index(ix, iy + 1, iz);
  if (spec.dim == 3) {
    if (iz > 0) out[n++] = spec.index(ix, iy, iz - 1);
    if (iz + 1 < spec.nz) out[n++] = spec.index(ix, iy, iz + 1);
  }
  return n;
}

bool mask_connected(const GridSpec& spec, const std::vector<uint8_t>& member,
                    std::size_t member_count) {
  if (member_count == 0) return false;
  uint32_t start = 0;
  while (start < member.size() && !member[start]) ++start;
  std::vector<uint8_t> seen(member.size(), 0);
  std::deque<uint32_t> queue{start};
  seen[start] = 1;
  std::size_t reached = 0;
  uint32_t nbr[6];
  while (!queue.empty()) {
    const uint32_t c = queue.front();
    queue.pop_front();
    ++reached;
    const int n = face_neighbors(spec, c, nbr);
    for (int i = 0; i < n; ++i)
      if (member[nbr[i]] && !seen[nbr[i]]) {
        seen[nbr[i]] = 1;
        queue.push_back(nbr[i]);
      }
  }
  return reached == member_count;
}

}  // namespace

GridDomain::GridDomain(GridSpec spec, std::vector<uint8_t> inside, bool require_connected)
    : spec_(spec), inside_(std::move(inside)) {
  if (inside_.size() != spec_.cell_count()) throw ParamError("domain: mask size mismatch");
  for (std::size_t c = 0; c < inside_.size(); ++c)
    if (inside_[c]) ++inside_count_;
  if (inside_count_ == 0) throw ConfigError("domain is empty");
  if (inside_count_ == inside_.size())
    throw ConfigError("domain fills the bounding box; boundary layer required");
  if (require_connected && !mask_connected(spec_, inside_, inside_count_))
    throw GeometryError("domain not connected");
  outside_cells_.reserve(inside_.size() - inside_count_);
  bool outside_touches_box = false;
  for (std::size_t c = 0; c < inside_.size(); ++c)
    if (!inside_[c]) {
      outside_cells_.push_back(static_cast<uint32_t>(c));
      if (!outside_touches_box) {
        int ix, iy, iz;
        spec_.coords(static_cast<uint32_t>(c), ix, iy, iz);
        outside_touches_box = ix == 0 || ix == spec_.nx - 1 || iy == 0 || iy == spec_.ny - 1 ||
                              (spec_.dim == 3 && (iz == 0 || iz == spec_.nz - 1));
      }
    }
  if (!outside_touches_box)
    throw ConfigError("domain: outside layer must reach the bounding box boundary");
}

double GridDomain::boundary_distance(const Vec& p) const {
  double best = std::numeric_limits<double>::infinity();
  for (const uint32_t c : outside_cells_) {
    const double d = dist(p, spec_.center(c));
    if (d < best) best = d;
  }
  return best - 0.5 * spec_.h;
}

bool GridDomain::strictly_inside(const Vec& p) const {
  const int64_t c = spec_.locate(p);
  return c >= 0 && inside_[static_cast<uint32_t>(c)];
}

CellSet CellSet::from(std::vector<uint32_t> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return CellSet{std::move(v)};
}

bool CellSet::contains(uint32_t c) const {
  return std::binary_search(cells.begin(), cells.end(), c);
}

bool is_connected(const GridSpec& spec, const CellSet& set) {
  if (set.empty()) return false;
  if (set.size() == 1) return true;
  std::vector<uint8_t> member(spec.cell_count(), 0);
  for (const uint32_t c : set.cells) member[c] = 1;
  return mask_connected(spec, member, set.size());
}

CompactMask make_compact_mask(const GridDomain& domain, CellSet set) {
  if (set.empty()) throw GeometryError("compact mask must be nonempty");
  for (const uint32_t c : set.cells)
    if (!domain.inside(c)) throw GeometryError("compact mask leaves the domain");
  if (!is_connected(domain.spec(), set)) throw GeometryError("compact mask not connected");
  return CompactMask{std::move(set)};
}

namespace {

Vec parse_vec(const json& j, int dim, const char* what) {
  if (!j.is_array() || static_cast<int>(j.size()) < dim)
    throw ConfigError(std::string("config: ") + what + " must be an array of length dim");
  Vec v;
  v.x = j.at(0).get<double>();
  v.y = j.at(1).get<double>();
  if (dim == 3) v.z = j.at(2).get<double>();
  return v;
}

}  // namespace

DomainConfig parse_domain_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  try {
    const int dim = j.at("dim").get<int>();
    const json& g = j.at("grid");
    const Vec origin = parse_vec(g.at("origin"), dim, "grid.origin");
    const Vec extent = parse_vec(g.at("extent"), dim, "grid.extent");
    const json& cells = g.at("cells");
    const int nx = cells.at(0).get<int>();
    const int ny = cells.at(1).get<int>();
    const int nz = dim == 3 ? cells.at(2).get<int>() : 1;
    DomainConfig cfg;
    cfg.grid = make_grid_spec(dim, origin, extent, nx, ny, nz);
    for (const json& s : j.at("shapes")) {
      ShapeOp op;
      const std::string kind = s.at("op").get<std::string>();
      if (kind == "union")
        op.subtract = false;
      else if (kind == "difference")
        op.subtract = true;
      else
        throw ConfigError("config: shape op must be union or difference");
      const std::string type = s.at("type").get<std::string>();
      if (type == "ball") {
        op.is_ball = true;
        op.center = parse_vec(s.at("center"), dim, "ball.center");
        op.radius = s.at("radius").get<double>();
      } else if (type == "box") {
        op.is_ball = false;
        op.box_min = parse_vec(s.at("min"), dim, "box.min");
        op.box_max = parse_vec(s.at("max"), dim, "box.max");
      } else {
        throw ConfigError("config: shape type must be ball or box");
      }
      cfg.shapes.push_back(op);
    }
    if (cfg.shapes.empty()) throw ConfigError("config: at least one shape required");
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

DomainConfig load_domain_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_domain_config(ss.str());
}

GridDomain build_domain(const DomainConfig& config) {
  const GridSpec& spec = config.grid;
  std::vector<uint8_t> inside(spec.cell_count(), 0);
  for (std::size_t c = 0; c < inside.size(); ++c) {
    const Vec p = spec.center(static_cast<uint32_t>(c));
    bool in = false;
    for (const ShapeOp& s : config.shapes) {
      bool hit;
      if (s.is_ball) {
        hit = dist(p, s.center) <= s.radius;
      } else {
        hit = p.x >= s.box_min.x && p.x <= s.box_max.x && p.y >= s.box_min.y &&
              p.y <= s.box_max.y &&
              (spec.dim == 2 || (p.z >= s.box_min.z && p.z <= s.box_max.z));
      }
      if (hit) in = !s.subtract;
    }
    inside[c] = in ? 1 : 0;
  }
  return GridDomain(spec, std::move(inside), /*require_connected=*/true);
}

CompactMask rasterize_polyline(const std::vector<Vec>& vertices, const GridDomain& domain) {
  if (vertices.empty()) throw ParamError("polyline: empty vertex list");
  const GridSpec& spec = domain.spec();
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    if (!domain.strictly_inside(vertices[i]))
      throw GeometryError("polyline vertex outside domain");
    if (i > 0 && dist(vertices[i], vertices[i - 1]) == 0.0)
      throw ParamError("polyline: consecutive vertices coincide");
  }

  // Boundary-inclusive supercover; the epsilon keeps cells whose centers sit
  // exactly at the tube radius (exact 45-degree segments) from dropping out.
  const double tube = 0.5 * spec.h * std::sqrt(static_cast<double>(spec.dim)) * (1.0 + 1e-9);
  std::vector<uint32_t> cells;

  // Bounding window per segment, then the exact center-to-segment test.
  const std::size_t nseg = vertices.size() > 1 ? vertices.size() - 1 : 1;
  for (std::size_t i = 0; i < nseg; ++i) {
    const Vec a = vertices[i];
    const Vec b = vertices.size() == 1 ? a : vertices[i + 1];
    const double pad = tube + 0.5 * spec.h;
    const auto clampi = [](int v, int lo, int hi) { return std::max(lo, std::min(hi, v)); };
    const int ix0 = clampi(static_cast<int>(std::floor((std::fmin(a.x, b.x) - pad - spec.origin.x) / spec.h)), 0, spec.nx - 1);
    const int ix1 = clampi(static_cast<int>(std::floor((std::fmax(a.x, b.x) + pad - spec.origin.x) / spec.h)), 0, spec.nx - 1);
    const int iy0 = clampi(static_cast<int>(std::floor((std::fmin(a.y, b.y) - pad - spec.origin.y) / spec.h)), 0, spec.ny - 1);
    const int iy1 = clampi(static_cast<int>(std::floor((std::fmax(a.y, b.y) + pad - spec.origin.y) / spec.h)), 0, spec.ny - 1);
    int iz0 = 0, iz1 = 0;
    if (spec.dim == 3) {
      iz0 = clampi(static_cast<int>(std::floor((std::fmin(a.z, b.z) - pad - spec.origin.z) / spec.h)), 0, spec.nz - 1);
      iz1 = clampi(static_cast<int>(std::floor((std::fmax(a.z, b.z) + pad - spec.origin.z) / spec.h)), 0, spec.nz - 1);
    }
    for (int iz = iz0; iz <= iz1; ++iz)
      for (int iy = iy0; iy <= iy1; ++iy)
        for (int ix = ix0; ix <= ix1; ++ix) {
          const uint32_t c = spec.index(ix, iy, iz);
          if (dist_point_segment(spec.center(c), a, b) <= tube) cells.push_back(c);
        }
  }

  // Endpoint cells belong to the mask by contract.
  for (const Vec& v : {vertices.front(), vertices.back()}) {
    const int64_t c = spec.locate(v);
    if (c >= 0) cells.push_back(static_cast<uint32_t>(c));
  }

  CellSet set = CellSet::from(std::move(cells));
  for (const uint32_t c : set.cells)
    if (!domain.inside(c)) throw GeometryError("curve leaves domain");
  if (!is_connected(spec, set)) throw GeometryError("polyline rasterization disconnected");
  return CompactMask{std::move(set)};
}

CellSet polarize_mask(const GridDomain& domain, const CellSet& mask, const Sphere& s,
                      std::size_t* off_grid) {
  const GridSpec& spec = domain.spec();
  if (mask.empty()) throw ParamError("polarize_mask: empty mask");

  Sphere sphere = s;
  // Keep the center off cell boundaries so reflected-cell snapping is stable.
  for (int a = 0; a < spec.dim; ++a) {
    const double frac = (sphere.center[a] - spec.origin[a]) / spec.h;
    if (std::fabs(frac - std::round(frac)) < 1e-9) sphere.center[a] += spec.h * 1e-6;
  }

  // Standing assumption: the closed ball lies in D (cell-center test).
  for (std::size_t c = 0; c < spec.cell_count(); ++c) {
    if (dist(spec.center(static_cast<uint32_t>(c)), sphere.center) <= sphere.radius &&
        !domain.inside(static_cast<uint32_t>(c)))
      throw GeometryError("polarize_mask: closed ball not contained in domain");
  }

  std::vector<uint8_t> in_mask(spec.cell_count(), 0);
  for (const uint32_t c : mask.cells) in_mask[c] = 1;

  const auto in_estar = [&](uint32_t c, bool& off) {
    const Vec p = spec.center(c);
    if (dist(p, sphere.center) < 1e-12 * sphere.radius) {
      // The center's symmetric point is infinity: never on the grid.
      off = true;
      return false;
    }
    const Vec q = invert_point(p, sphere);
    const int64_t cq = spec.locate(q);
    if (cq < 0) {
      off = true;
      return false;
    }
    return in_mask[static_cast<uint32_t>(cq)] != 0;
  };

  std::size_t dropped = 0;
  std::vector<uint32_t> out;

  // Inside the closed ball membership in E u E* can gain cells anywhere, so
  // scan the ball window; outside it only cells of E can survive.
  const auto clampi = [](int v, int lo, int hi) { return std::max(lo, std::min(hi, v)); };
  const int bx0 = clampi(static_cast<int>(std::floor((sphere.center.x - sphere.radius - spec.origin.x) / spec.h)) - 1, 0, spec.nx - 1);
  const int bx1 = clampi(static_cast<int>(std::ceil((sphere.center.x + sphere.radius - spec.origin.x) / spec.h)) + 1, 0, spec.nx - 1);
  const int by0 = clampi(static_cast<int>(std::floor((sphere.center.y - sphere.radius - spec.origin.y) / spec.h)) - 1, 0, spec.ny - 1);
  const int by1 = clampi(static_cast<int>(std::ceil((sphere.center.y + sphere.radius - spec.origin.y) / spec.h)) + 1, 0, spec.ny - 1);
  int bz0 = 0, bz1 = 0;
  if (spec.dim == 3) {
    bz0 = clampi(static_cast<int>(std::floor((sphere.center.z - sphere.radius - spec.origin.z) / spec.h)) - 1, 0, spec.nz - 1);
    bz1 = clampi(static_cast<int>(std::ceil((sphere.center.z + sphere.radius - spec.origin.z) / spec.h)) + 1, 0, spec.nz - 1);
  }
  for (int iz = bz0; iz <= bz1; ++iz)
    for (int iy = by0; iy <= by1; ++iy)
      for (int ix = bx0; ix <= bx1; ++ix) {
        const uint32_t c = spec.index(ix, iy, iz);
        if (dist(spec.center(c), sphere.center) > sphere.radius) continue;
        bool off = false;
        if (in_mask[c] || in_estar(c, off)) out.push_back(c);
        if (off) ++dropped;
      }
  for (const uint32_t c : mask.cells) {
    if (dist(spec.center(c), sphere.center) <= sphere.radius) continue;  // handled above
    bool off = false;
    if (in_estar(c, off)) out.push_back(c);
    if (off) ++dropped;
  }
  if (off_grid) *off_grid = dropped;
  return CellSet::from(std::move(out));
}

CompactMask restrict_polarized(const GridDomain& domain, const CellSet& mask_p, const Sphere& s,
                               const Vec& anchor) {
  const GridSpec& spec = domain.spec();
  const int64_t anchor_cell = spec.locate(anchor);
  std::vector<uint32_t> restricted;
  for (const uint32_t c : mask_p.cells)
    if (dist(spec.center(c), s.center) <= s.radius) restricted.push_back(c);
  CellSet base = CellSet::from(std::move(restricted));
  if (anchor_cell < 0 || !base.contains(static_cast<uint32_t>(anchor_cell)))
    throw GeometryError("restrict_polarized: anchor not in restricted set");

  std::vector<uint8_t> member(spec.cell_count(), 0);
  for (const uint32_t c : base.cells) member[c] = 1;
  std::vector<uint8_t> seen(spec.cell_count(), 0);
  std::deque<uint32_t> queue{static_cast<uint32_t>(anchor_cell)};
  seen[anchor_cell] = 1;
  std::vector<uint32_t> component;
  uint32_t nbr[6];
  while (!queue.empty()) {
    const uint32_t c = queue.front();
    queue.pop_front();
    component.push_back(c);
    const int n = face_neighbors(spec, c, nbr);
    for (int i = 0; i < n; ++i)
      if (member[nbr[i]] && !seen[nbr[i]]) {
        seen[nbr[i]] = 1;
        queue.push_back(nbr[i]);
      }
  }
  return make_compact_mask(domain, CellSet::from(std::move(component)));
}

std::string mask_to_rle_csv(const CellSet& set, const std::string& provenance) {
  std::ostringstream out;
  if (!provenance.empty()) out << "# " << provenance << "\n";
  out << "start,end\n";
  std::size_t i = 0;
  while (i < set.cells.size()) {
    std::size_t j = i;
    while (j + 1 < set.cells.size() && set.cells[j + 1] == set.cells[j] + 1) ++j;
    out << set.cells[i] << "," << set.cells[j] << "\n";
    i = j + 1;
  }
  return out.str();
}

CellSet mask_from_rle_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::vector<uint32_t> cells;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line.rfind("start", 0) == 0) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("rle csv: malformed row");
    const uint64_t a = std::stoull(line.substr(0, comma));
    const uint64_t b = std::stoull(line.substr(comma + 1));
    for (uint64_t c = a; c <= b; ++c) cells.push_back(static_cast<uint32_t>(c));
  }
  return CellSet::from(std::move(cells));
}

}  // namespace modmetric
