#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "collision_spin/central_config.hpp"
#include "collision_spin/collision_dynamics.hpp"
#include "collision_spin/mass_system.hpp"
#include "collision_spin/spin_demo.hpp"

namespace cspin {

/// Ready-made blown-up initial data for equal masses (1, 1, 1).
struct CollisionPreset {
  std::string name;
  MassSystem mass;
  CentralConfig cc;
  BlownUpState initial;
  double h = -1.0;
  /// Smallest decay rate of the stable shape directions, -max Re lambda_-.
  double expected_decay_rate = 0.0;
};

struct PerturbationOptions {
  double epsilon = 1e-6;       // size of the stable-eigenvector offset
  double r_start = 1e-8;
  double backward_time = 4.0;  // blown-up time integrated backwards
  double rtol = 1e-13;
  double atol = 1e-16;
};

/// "lagrange-homothetic", "euler-homothetic", "near-homothetic-perturbed";
/// "spiral-demo" is a curve preset, see spiral_preset().
std::vector<std::string> preset_names();
bool is_collision_preset(std::string_view name);

CollisionPreset lagrange_homothetic();
CollisionPreset euler_homothetic();
/// An approximate stable-manifold orbit of the Lagrange restpoint: an offset
/// along a stable eigenvector at tiny r, integrated backwards in tau.
CollisionPreset near_homothetic_perturbed(const PerturbationOptions& options = {});
CollisionPreset collision_preset(std::string_view name);

ShapeCurve spiral_preset(double c = 1.0, double t_end = 1e4);

}  // namespace cspin
