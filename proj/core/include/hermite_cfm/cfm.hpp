#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "hermite_cfm/fields.hpp"
#include "hermite_cfm/hermite.hpp"
#include "hermite_cfm/linalg.hpp"
#include "hermite_cfm/mesh.hpp"
#include "hermite_cfm/polynomial.hpp"

namespace hcfm {

enum class BcKind { PEC, PMC, Impedance };

const char* to_string(BcKind k);
/// Accepts "pec", "pmc", "impedance"; throws InvalidArgument otherwise.
BcKind parse_bc_kind(const std::string& name);

/// Boundary condition kind and the data source. With an exact solution the
/// data is g = B U_exact (non-homogeneous); without one g = 0.
struct BoundarySpec {
  BcKind kind = BcKind::PEC;
  const SeparableField* exact = nullptr;
};

/// Boundary operator rows at a point with outward normal (nx, ny) and
/// impedance z. rows[r][f] multiplies field f. Returns the row count.
int boundary_operator(BcKind kind, int dim, double nx, double ny, double z,
                      std::array<std::array<double, 3>, 2>& rows);

struct CfmParams {
  int k = 2;               ///< correction function degree (k >= 2m)
  double c_h = 1.0;        ///< Hermite-matching weight, 0 < c_h <= 1
  double beta = 1.5;       ///< 2-D characteristic length factor, ell = beta h
  int quad_points = 0;     ///< Gauss points per axis; 0 selects k + 3
  int quadrature() const { return quad_points > 0 ? quad_points : k + 3; }
};

enum class PatchKind { End, Edge, Corner, Reentrant };

const char* to_string(PatchKind k);

/// One CF node and the orientation of its canonical patch. The frame is a
/// signed permutation F (row-major 2x2, 1-D uses frame[0] = +-1) mapping
/// canonical offsets to physical offsets in units of (dx, dy).
struct PatchDescriptor {
  std::size_t node_id = 0;
  PatchKind kind = PatchKind::Edge;
  std::array<int, 4> frame{1, 0, 0, 1};
};

/// Classifies every boundary primal node. Throws InvalidArgument when the
/// mesh has no boundary nodes of a supported kind.
std::vector<PatchDescriptor> classify_cf_nodes(const StaggeredMesh& mesh);

struct BoundarySegment {
  double xa = 0.0, ya = 0.0, xb = 0.0, yb = 0.0;  ///< a point in 1-D
  double nx = 0.0, ny = 0.0;
};

/// A Hermite-matching sub-domain: a primal cell (dual window) or the dual
/// cell around a primal node (primal window). `id` is the cell or node id.
struct HermitePiece {
  Rect rect;
  std::size_t id = 0;
};

struct PatchGeometry {
  int dim = 2;
  double node_x = 0.0, node_y = 0.0;
  Rect box;                       ///< bounding box of S (polynomial chart)
  std::vector<Rect> regions;      ///< S as disjoint rectangles
  std::vector<BoundarySegment> boundary;
  std::vector<HermitePiece> dual_pieces;    ///< window [t_{n-1}, t_{n-1/2}]
  std::vector<HermitePiece> primal_pieces;  ///< window [t_{n-1/2}, t_n]
  double ell = 0.0;
};

PatchGeometry patch_geometry(const PatchDescriptor& d, const StaggeredMesh& mesh, double beta = 1.5);

/// Normal-equation matrix of the functional (PDE residual scaled by ell over
/// S x I_n, boundary residual over Gamma x I_n, c_H-weighted match over the
/// Hermite pieces) for a step of size dt. Unknown order: field, then the
/// space-time Legendre index (x, y, t) with t fastest.
DenseMatrix assemble_matrix(const PatchGeometry& g, const Material& material, BcKind bc,
                            const CfmParams& params, double dt);

/// Factored matrix and the tables shared by patches with identical geometry.
struct PatchOperator {
  int dim = 2, k = 2, m = 1, q = 1;
  double dt = 0.0;
  DenseMatrix matrix;
  LuFactors lu;
  DenseMatrix extraction;  ///< node DOFs from coefficients
  ExtendedMatrix gain;     ///< extraction * matrix^{-1}
  /// Per piece: 1-D projection tables (x, y, t), (k+1) x (extent) row-major.
  struct Tables {
    std::vector<double> x, y, t;
  };
  std::vector<Tables> dual_tables, primal_tables;

  std::size_t unknowns() const { return matrix.rows(); }
};

/// A time-separable right-hand-side contribution: space moment (per space
/// basis index) times the time moment of `time` (or of its derivative test
/// function when `time_derivative`).
struct SeparableLoad {
  int field = 0;
  std::vector<double> space;
  TimeFunction time;
  bool time_derivative = false;
};

struct CfmPatch {
  PatchDescriptor descriptor;
  PatchGeometry geometry;
  std::shared_ptr<const PatchOperator> op;
  std::vector<SeparableLoad> loads;
  double c_h = 1.0;
};

/// Cache of operators keyed by patch kind and frame (constant coefficients).
class PatchCache {
 public:
  std::shared_ptr<const PatchOperator> find(const PatchDescriptor& d) const;
  void insert(const PatchDescriptor& d, std::shared_ptr<const PatchOperator> op);
  std::size_t size() const { return ops_.size(); }

 private:
  std::map<std::array<int, 5>, std::shared_ptr<const PatchOperator>> ops_;
};

/// Builds the patch for a step of size dt with Hermite degree m and Taylor
/// degree q. Requires k >= 2m. Reuses `cache` entries when the material is
/// constant (cache may be null).
CfmPatch build_patch(const PatchDescriptor& d, const StaggeredMesh& mesh, const Material& material,
                     const BoundarySpec& bc, const SeparableField* source, const CfmParams& params,
                     int m, int q, double dt, PatchCache* cache = nullptr);

/// Right-hand side b for the step [t_prev, t_prev + dt]: Hermite-matching
/// moments of the stored polynomials of `dual` (pieces of the dual window)
/// and `primal` (pieces of the primal window), boundary data and source
/// moments. Throws InvalidArgument when a stored polynomial is missing.
std::vector<double> assemble_rhs(const CfmPatch& patch, const GridState& dual,
                                 const GridState& primal, double t_prev);

/// Solves M c = b and returns one Legendre polynomial per field on the patch
/// box x [t_prev, t_prev + dt].
std::vector<SpaceTimePoly> solve_correction(const CfmPatch& patch, std::span<const double> rhs,
                                            double t_prev);

/// d^alpha of each correction polynomial at (node, t) for alpha_axis <= m.
std::vector<double> extract_dofs(std::span<const SpaceTimePoly> correction,
                                 std::span<const double> node, double t, int m);

/// Node DOFs directly from the right-hand side (gain * b).
std::vector<double> cfm_node_dofs(const CfmPatch& patch, std::span<const double> rhs);

/// Store masks (by cell id, by node id) covering every patch piece.
std::pair<std::vector<char>, std::vector<char>> store_masks(const StaggeredMesh& mesh,
                                                            std::span<const CfmPatch> patches);

}  // namespace hcfm
