#pragma once

#include <vector>

#include "fpsi/grid.hpp"

namespace fpsi {

// Discrete Ciarlet-Necas bookkeeping on the piecewise-linear view of the
// deformation (each grid cell split into two triangles). For that view
//   integral of det = sum of signed triangle areas = shoelace of the
//   deformed boundary polygon (exact identity),
// so for an orientation-preserving deformation with a simple boundary curve
// the gap |eta(Q)| - int det vanishes identically; a positive gap measures
// multiply covered (overlapping) area.
struct InjectivityReport {
  Scalar deformed_area = 0;   // |eta(Q)|, overlaps counted once
  Scalar det_integral = 0;    // signed triangle-area sum
  Scalar gap = 0;             // det_integral - deformed_area, >= 0
  Scalar min_boundary_clearance = 0;
  bool boundary_simple = true;
  bool orientation_ok = true;  // all triangle areas positive
};

// The container, when given, enters the clearance as the distance of the
// free part of the deformed boundary to the container walls; self-clearance
// is the minimum midpoint distance between non-neighboring free boundary
// segments.
InjectivityReport ciarlet_necas_gap(const DeformationField& eta,
                                    const RectGrid* container = nullptr);

// Boundary node indices of Q in counter-clockwise order (closed loop,
// first != last).
std::vector<Index> boundary_loop(const RectGrid& grid);

struct GuardTols {
  Scalar gap_tol = 1e-6;        // relative to |Q|
  Scalar clearance_tol = 0.0;   // absolute length; scheme sets one fluid cell
};

enum class GuardVerdict { Pass, Halt };

// Halt iff gap > gap_tol * |Q| or the clearance dropped below clearance_tol.
GuardVerdict collision_guard(const InjectivityReport& report, Scalar area_q,
                             const GuardTols& tols);

}  // namespace fpsi
