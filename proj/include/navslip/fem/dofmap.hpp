#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <memory>
#include <vector>

#include "navslip/fem/mesh.hpp"

namespace navslip {

using SpMat = Eigen::SparseMatrix<double>;

/// Gauss order along x1 shared by the divergence form and the wall-edge flux
/// slaving; the discrete wall flux vanishes only if both use the same rule.
constexpr int kDivergenceOrder = 8;

/// Wall node whose velocity is stored in its (normal, tangential) frame.
struct WallRotation {
  int node = 0;
  Facet wall = Facet::Top;
  WallFrame frame;
};

/// Q2 velocity (2 unknowns per node, index 2 node + c) and discontinuous P1
/// pressure (3 per cell: 1, (x1 − xc)/hx, (x2 − yc)/hy) on a Mesh.
///
/// Constraints are encoded as a prolongation P from reduced to full
/// coefficients: end-section nodes carry no unknown, wall nodes carry only
/// their tangential component, and the normal component at each wall-edge
/// midpoint is slaved so that the edge flux ∫ v·n ds vanishes under the
/// assembly quadrature. The constant pressure of cell 0 is pinned.
class DofMap {
 public:
  explicit DofMap(std::shared_ptr<const Mesh> mesh);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }

  int num_velocity() const { return 2 * mesh_->num_nodes(); }
  int num_pressure() const { return 3 * mesh_->num_cells(); }
  int num_full() const { return num_velocity() + num_pressure(); }
  int num_reduced_velocity() const { return n_red_vel_; }
  int num_reduced_pressure() const { return num_pressure() - 1; }
  int num_reduced() const { return n_red_vel_ + num_reduced_pressure(); }
  int pressure_dof(int cell, int k) const { return num_velocity() + 3 * cell + k; }
  int pinned_pressure() const { return pressure_dof(0, 0); }

  bool is_end(int node) const;
  bool is_wall(int node) const;
  int num_wall_nodes() const { return static_cast<int>(rotations_.size()); }
  int num_end_nodes() const { return 2 * mesh_->nodes_y(); }
  const std::vector<WallRotation>& rotations() const { return rotations_; }
  /// Index into rotations() or −1.
  int rotation_index(int node) const { return rot_index_[static_cast<std::size_t>(node)]; }

  Eigen::Vector2d to_wall_frame(int node, const Eigen::Vector2d& v) const;
  Eigen::Vector2d from_wall_frame(int node, const Eigen::Vector2d& nt) const;

  struct Entry {
    int col;
    double w;
  };
  /// Row of P for a full dof index.
  const Entry* row_begin(int full) const { return entries_.data() + row_ptr_[static_cast<std::size_t>(full)]; }
  const Entry* row_end(int full) const { return entries_.data() + row_ptr_[static_cast<std::size_t>(full) + 1]; }

  SpMat prolongation() const;
  /// x_full = P y.
  Eigen::VectorXd expand(const Eigen::VectorXd& reduced) const;
  /// Reduced coordinates of a full vector that satisfies the constraints
  /// (tangential wall components, pressure shifted so the pinned dof is 0).
  Eigen::VectorXd reduce(const Eigen::VectorXd& full) const;
  /// Pᵀ f.
  Eigen::VectorXd restrict_load(const Eigen::VectorXd& full) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  int n_red_vel_ = 0;
  std::vector<WallRotation> rotations_;
  std::vector<int> rot_index_;
  std::vector<int> row_ptr_;
  std::vector<Entry> entries_;
};

}  // namespace navslip
