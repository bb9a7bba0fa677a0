#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fpsi/scheme.hpp"

namespace fpsi {

// All violations found while parsing/validating a config, not just the first.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

struct RunConfig {
  // [solid] reference domain Q
  Index solid_nx = 17, solid_ny = 17;
  Scalar solid_x0 = 0, solid_y0 = 0, solid_lx = 0.3, solid_ly = 0.3;
  std::string pin = "none";  // none | left | bottom | boundary

  // [fluid] container Omega
  Index fluid_nx = 33, fluid_ny = 33;
  Scalar fluid_x0 = 0, fluid_y0 = 0, fluid_lx = 1, fluid_ly = 1;

  // [physics]
  Scalar rho_s = 1, rho_f = 1, nu = 0.1, drag_a0 = 1;
  Scalar mu = 1, lambda = 1, a = 9, q = 4, a0 = 0.5;

  // [scheme]
  Scalar tau = 1e-3, h = 2e-2, horizon = 2e-1;
  Scalar gtol = 1e-8, ftol = 1e-12;
  int max_iterations = 500;
  bool warm_start = false;
  Scalar gap_tol = 1e-6;
  Scalar clearance_tol = 0;  // 0 = one fluid cell

  // [initial]
  std::string eta0 = "identity-embed";  // identity-embed | stretch | file
  Scalar stretch = 1.0;
  bool offset_given = false;
  Scalar offset_x = 0, offset_y = 0;  // default centers Q in Omega
  std::string eta0_file;
  std::string b = "zero";  // zero | file
  std::string b_file;
  std::string v0 = "zero";  // zero | file
  std::string v0_file;

  // [force]
  std::string force = "none";  // none | stir
  Scalar force_amplitude = 0;
  bool force_center_given = false;
  Scalar force_cx = 0, force_cy = 0;

  // [output]
  std::string out_dir = "out";
  int snapshot_every = 0;

  // [toy]
  std::string toy_energy = "double-well";  // quadratic | double-well | zero
  Scalar toy_x0x = 1, toy_x0y = 0, toy_v0x = 0, toy_v0y = 0;
  Scalar toy_tau = 1e-4, toy_h = 1e-2, toy_horizon = 6.283185307179586;

  // [study]
  std::vector<Scalar> study_h_list = {0.1, 0.05, 0.025};
  std::vector<Scalar> study_tau_list = {4e-3, 2e-3, 1e-3};  // at fixed toy h
  std::vector<Scalar> study_fpsi_tau_list = {4e-3, 2e-3, 1e-3};

  std::uint64_t seed = 1;

  // Derived objects.
  SolidGrid make_solid_grid() const;
  FluidGrid make_fluid_grid() const;
  SchemeParams make_scheme_params() const;
  Vec2 embed_offset() const;  // applied to eta0 construction
  DeformationField make_eta0(const SolidGrid& grid) const;
  NodeField make_b(const SolidGrid& grid) const;
  VectorX make_psi0(const FluidGrid& grid) const;
  ForceFn make_force() const;
};

// Parses the key = value section format; throws ConfigError carrying every
// parse error and constraint violation (with line numbers where known).
RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);

// Canonical echo of the effective configuration; re-parsing it reproduces
// the config exactly.
std::string echo_config(const RunConfig& c);

// FNV-1a content hash used by the run manifest.
std::uint64_t fnv1a_hash(const std::string& data);

// Writes out_dir/manifest.txt with the effective config and its hash.
void write_manifest(const std::string& out_dir, const RunConfig& c);

}  // namespace fpsi
