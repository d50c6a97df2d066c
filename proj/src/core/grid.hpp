#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "core/common.hpp"
#include "core/geometry.hpp"

namespace modmetric {

struct GridSpec {
  int dim = 2;       // 2 or 3
  Vec origin;        // minimum corner of the bounding box
  Vec extent;        // box size per axis (z ignored for dim 2)
  int nx = 0, ny = 0, nz = 1;
  double h = 0.0;    // uniform spacing, extent_i / cells_i

  std::size_t cell_count() const {
    return static_cast<std::size_t>(nx) * ny * nz;
  }
  uint32_t index(int ix, int iy, int iz) const {
    return static_cast<uint32_t>(ix + nx * (iy + static_cast<std::size_t>(ny) * iz));
  }
  void coords(uint32_t c, int& ix, int& iy, int& iz) const {
    ix = static_cast<int>(c % nx);
    iy = static_cast<int>((c / nx) % ny);
    iz = static_cast<int>(c / (static_cast<std::size_t>(nx) * ny));
  }
  Vec center(uint32_t c) const {
    int ix, iy, iz;
    coords(c, ix, iy, iz);
    return {origin.x + h * (ix + 0.5), origin.y + h * (iy + 0.5),
            dim == 3 ? origin.z + h * (iz + 0.5) : 0.0};
  }
  // Cell containing p, or -1 if p lies outside the bounding box.
  int64_t locate(const Vec& p) const;
};

// Validates uniform spacing and positive cell counts; fills spec.h.
GridSpec make_grid_spec(int dim, const Vec& origin, const Vec& extent, int nx, int ny, int nz);

// Rasterized bounded domain: boolean inside mask over the bounding box.
class GridDomain {
 public:
  GridDomain(GridSpec spec, std::vector<uint8_t> inside, bool require_connected);

  const GridSpec& spec() const { return spec_; }
  bool inside(uint32_t c) const { return inside_[c] != 0; }
  const std::vector<uint8_t>& inside_mask() const { return inside_; }
  std::size_t inside_count() const { return inside_count_; }

  // Distance from p to the closest outside cell center, minus h/2; the
  // grid surrogate for dist(p, boundary of D).
  double boundary_distance(const Vec& p) const;

  bool strictly_inside(const Vec& p) const;

 private:
  GridSpec spec_;
  std::vector<uint8_t> inside_;
  std::size_t inside_count_ = 0;
  std::vector<uint32_t> outside_cells_;  // cells of the box not in D
};

// A raw cell set over a domain's bounding box (possibly disconnected).
struct CellSet {
  std::vector<uint32_t> cells;  // sorted, unique

  static CellSet from(std::vector<uint32_t> v);
  bool contains(uint32_t c) const;
  std::size_t size() const { return cells.size(); }
  bool empty() const { return cells.empty(); }
};

// Face-adjacency connectivity over the cells of the set.
bool is_connected(const GridSpec& spec, const CellSet& set);

// Validated compact subset of a domain: nonempty, inside D, face-connected.
struct CompactMask {
  CellSet set;
};

CompactMask make_compact_mask(const GridDomain& domain, CellSet set);

// Domain construction from the shape-list config (see parse_domain_config).
struct ShapeOp {
  bool subtract = false;       // union when false
  bool is_ball = true;         // ball or axis box
  Vec center;                  // ball
  double radius = 0.0;         // ball
  Vec box_min, box_max;        // box
};

struct DomainConfig {
  GridSpec grid;
  std::vector<ShapeOp> shapes;
};

// Parses {"dim":2|3, "grid":{"origin":[..],"extent":[..],"cells":[..]},
//         "shapes":[{"op":"union"|"difference","type":"ball"|"box", ...}]}.
DomainConfig parse_domain_config(const std::string& json_text);
DomainConfig load_domain_config(const std::string& path);

// A cell is inside iff its center satisfies the folded shape predicate.
// Throws ConfigError for an empty result and GeometryError ("domain not
// connected") when the inside region is not face-connected.
GridDomain build_domain(const DomainConfig& config);

// Cells whose centers lie within h/2*sqrt(dim) of the polyline (supercover).
// All vertices must be strictly inside D and the cell tube must stay in D.
CompactMask rasterize_polyline(const std::vector<Vec>& vertices, const GridDomain& domain);

// Cell-center realization of polarization: a cell c is in the output iff
//   center(c) in ((E u E*) n closed ball) u ((E n E*) \ closed ball),
// where membership in E* snaps the reflected center to its containing cell.
// Requires the closed ball to lie in D (cell-center test).  Reflections that
// leave the bounding box are dropped; off_grid counts them when non-null.
CellSet polarize_mask(const GridDomain& domain, const CellSet& mask, const Sphere& s,
                      std::size_t* off_grid = nullptr);

// Face-connected component of mask_p intersected with the closed ball that
// contains the anchor cell.
CompactMask restrict_polarized(const GridDomain& domain, const CellSet& mask_p, const Sphere& s,
                               const Vec& anchor);

// Run-length-encoded CSV of linear cell indices ("start,end" inclusive rows).
std::string mask_to_rle_csv(const CellSet& set, const std::string& provenance);
CellSet mask_from_rle_csv(const std::string& text);

}  // namespace modmetric
