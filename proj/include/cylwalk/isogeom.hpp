#pragma once

// Constructive geometry on lattice boxes: projection and directional
// boundary inequalities, localization of a disconnecting set to a
// sub-box, and extraction of surface certificates (a well-spread family of
// sub-cubes in each of which the damaged set projects onto a surface-order
// point set).

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cylwalk/connectivity.hpp"
#include "cylwalk/lattice.hpp"

namespace cylwalk {

struct ProjectionCheck {
    int best_axis = 1;  // 1-based, the projection with the largest image
    int64_t best_size = 0;
    bool holds = true;  // |A| <= best_size^{(d+1)/d}
    double ratio = 0.0; // |A| / best_size^{(d+1)/d}
};

// Loomis-Whitney: some coordinate projection of A has size at least
// |A|^{d/(d+1)}; returns the largest one.
ProjectionCheck loomis_whitney_best(const SiteSet& A);

struct BoundaryBest {
    int best_axis = 1;        // 1-based
    int64_t proj_size = 0;    // |pi_i(directional boundary)|
    double ratio = 0.0;       // proj_size / |A|^{d/(d+1)}
};

// Directional-boundary (surface order) bound: for A inside a box filling
// at most a (1-kappa) fraction, the best direction i has
// |pi_i(boundary_i(A))| of order |A|^{d/(d+1)}. The constant is recorded,
// positivity is asserted by callers.
BoundaryBest directional_boundary_best(const SiteSet& A, const Region& box, double kappa);

struct LocatedCell {
    bool found = false;
    Site x_star;
    double t_value = 0.0;          // fraction of the box lying in the upper component
    std::vector<Site> witness;     // I = Top component intersected with the box
    std::string diagnostic;
};

// Given K disconnecting the cylinder, finds a translate of the standard
// box that K kappa-disconnects by scanning the upper-component density
// along vertical lines; the recentered witness is re-validated directly.
LocatedCell locate_disconnected_box(const SiteSet& K, double alpha, double kappa, const CylinderGeom& g);

struct LocalizedCube {
    bool found = false;
    Site x_star;               // base point; the cube is x_star + [0, L-1]^{d+1}
    double fraction = 0.0;     // |C_{x*}(L) cap I| / L^{d+1}
    std::string diagnostic;
};

// Propagates 1/3-disconnection of the central ball to 1/4-disconnection of
// an L-cube: walks the sub-box grid from an underfilled box toward an
// overfilled one along an axis-ordered lattice path and returns the first
// box whose witness fraction crosses 1/4.
LocalizedCube localize_to_subcube(const SiteSet& K, int64_t L, const CylinderGeom& g,
                                  const std::vector<Site>* witness = nullptr);

struct SurfaceCertificate {
    // host box: either the cube [0, L-1]^{d+1} or the standard flat box
    enum class Host { Cube, FlatBox };
    Host host = Host::Cube;
    int64_t L = 0;          // cube host side
    double alpha = 0.0;     // flat-box host parameter
    int64_t side = 0;       // l, the sub-cube side
    int pi_star = 1;        // 1-based projection indices
    int pi_star_star = 1;
    std::vector<Site> base_points;         // the family E, sorted
    std::vector<int64_t> per_cube_counts;  // |pi_**(K cap C_y(l))| per base point
    int64_t projected_base_count = 0;      // |pi_*(E)|
    double c_prime = 0.0;        // measured surface-density constant
    double c_double_prime = 0.0; // measured per-cube density constant
    std::string case_taken;      // "sparse" or "dense" occupation case
    std::vector<std::string> shortfalls;  // small-N threshold diagnostics
    int64_t candidate_count = 0;          // |E'| before the majority filter
};

// Surface extraction inside the cube host: requires K inside the cube and
// a 1/4-disconnection witness I.
SurfaceCertificate extract_surface_cube(const SiteSet& K, const std::vector<Site>& witness_I, int64_t L,
                                        int64_t l, const CylinderGeom& g);

// Flat-box variant for d*alpha < 1: the box is much flatter than it is
// wide, so copies of the sub-grid are piled vertically before the
// directional-boundary step, then the construction descends to one copy.
SurfaceCertificate extract_surface_box(const SiteSet& K, const std::vector<Site>& witness_I, double alpha,
                                       int64_t l, const CylinderGeom& g);

// thickness of the flat-box subgrid: the exact vertical extent sup|v - v'|
int64_t piled_thickness(int64_t half_height, int64_t l);
// the closed-form expression for the same quantity
int64_t piled_thickness_formula(int64_t half_height, int64_t l);

struct CertificateValidation {
    bool ok = true;
    std::vector<std::string> failures;
};

// Re-derives every certificate claim from scratch against K: sublattice
// membership of the projected base points, interior placement,
// l-separation, and the stored per-cube projection counts.
CertificateValidation validate_surface_certificate(const SurfaceCertificate& cert, const SiteSet& K,
                                                   const CylinderGeom& g);

std::string certificate_to_json(const SurfaceCertificate& cert);
SurfaceCertificate certificate_from_json(const std::string& text, const CylinderGeom& g);

}  // namespace cylwalk
