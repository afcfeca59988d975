#include "navslip/fem/dofmap.hpp"

#include "navslip/error.hpp"
#include "navslip/quadrature.hpp"

namespace navslip {

DofMap::DofMap(std::shared_ptr<const Mesh> mesh) : mesh_(std::move(mesh)) {
  const Mesh& m = *mesh_;
  const int nn = m.num_nodes();
  const int ny = m.nodes_y();
  rot_index_.assign(static_cast<std::size_t>(nn), -1);

  // column index of each node's unknowns: interior → (c0, c0 + 1), wall → tangential c0
  std::vector<int> first_col(static_cast<std::size_t>(nn), -1);
  int col = 0;
  for (int I = 0; I < m.nodes_x(); ++I)
    for (int J = 0; J < ny; ++J) {
      const int node = m.node(I, J);
      if (is_end(node)) continue;
      first_col[static_cast<std::size_t>(node)] = col;
      if (is_wall(node)) {
        const Facet side = J == 0 ? Facet::Bottom : Facet::Top;
        rot_index_[static_cast<std::size_t>(node)] = static_cast<int>(rotations_.size());
        rotations_.push_back({node, side, wall_frame(m.profile(), side, m.node_x1(I))});
        col += 1;
      } else {
        col += 2;
      }
    }
  n_red_vel_ = col;

  // rows of P, velocity part
  std::vector<std::vector<Entry>> rows(static_cast<std::size_t>(num_full()));
  const GaussRule& g = gauss_legendre(kDivergenceOrder);
  for (int I = 0; I < m.nodes_x(); ++I)
    for (int J = 0; J < ny; ++J) {
      const int node = m.node(I, J);
      if (is_end(node)) continue;
      const int c0 = first_col[static_cast<std::size_t>(node)];
      auto& r0 = rows[static_cast<std::size_t>(2 * node)];
      auto& r1 = rows[static_cast<std::size_t>(2 * node + 1)];
      if (!is_wall(node)) {
        r0.push_back({c0, 1.0});
        r1.push_back({c0 + 1, 1.0});
        continue;
      }
      const WallFrame& fr = rotations_[static_cast<std::size_t>(rot_index_[static_cast<std::size_t>(node)])].frame;
      r0.push_back({c0, fr.t[0]});
      r1.push_back({c0, fr.t[1]});
      if (I % 2 == 0) continue;
      // edge-midpoint: v = v_t t + v_n n with v_n chosen so that Σ_k v_k·m_k = 0,
      // m_k = ∫_edge N_k n ds by the ξ quadrature used in assembly
      const bool top = J != 0;
      const int i = (I - 1) / 2;
      Eigen::Vector2d mk[3] = {Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero(), Eigen::Vector2d::Zero()};
      for (int q = 0; q < g.size(); ++q) {
        const double xi = g.nodes[q];
        const double x1 = m.x_edge(i) + xi * m.hx();
        const double d = top ? m.profile().upper(x1).d : m.profile().lower(x1).d;
        const Eigen::Vector2d nds = top ? Eigen::Vector2d(-d, 1.0) : Eigen::Vector2d(d, -1.0);
        const auto L = lagrange2(xi);
        for (int k = 0; k < 3; ++k) mk[k] += g.weights[q] * m.hx() * L[k] * nds;
      }
      const double nm = fr.n.dot(mk[1]);
      for (int k = 0; k < 3; ++k) {
        const int nb = m.node(2 * i + k, J);
        if (is_end(nb)) continue;
        const WallFrame& fk = rotations_[static_cast<std::size_t>(rot_index_[static_cast<std::size_t>(nb)])].frame;
        const double coef = -fk.t.dot(mk[k]) / nm;
        if (coef == 0.0) continue;
        const int ck = first_col[static_cast<std::size_t>(nb)];
        r0.push_back({ck, coef * fr.n[0]});
        r1.push_back({ck, coef * fr.n[1]});
      }
    }
  // pressure
  int pcol = n_red_vel_;
  for (int p = num_velocity(); p < num_full(); ++p) {
    if (p == pinned_pressure()) continue;
    rows[static_cast<std::size_t>(p)].push_back({pcol++, 1.0});
  }

  row_ptr_.assign(1, 0);
  for (auto& r : rows) {
    // merge duplicate columns (midpoint tangential plus its own slaving term)
    std::vector<Entry> merged;
    for (const Entry& e : r) {
      bool found = false;
      for (Entry& x : merged)
        if (x.col == e.col) {
          x.w += e.w;
          found = true;
        }
      if (!found) merged.push_back(e);
    }
    entries_.insert(entries_.end(), merged.begin(), merged.end());
    row_ptr_.push_back(static_cast<int>(entries_.size()));
  }
}

bool DofMap::is_end(int node) const {
  const int I = node / mesh_->nodes_y();
  return I == 0 || I == mesh_->nodes_x() - 1;
}

bool DofMap::is_wall(int node) const {
  if (is_end(node)) return false;
  const int J = node % mesh_->nodes_y();
  return J == 0 || J == mesh_->nodes_y() - 1;
}

Eigen::Vector2d DofMap::to_wall_frame(int node, const Eigen::Vector2d& v) const {
  const int r = rotation_index(node);
  if (r < 0) throw Error(ErrorCode::ConfigInvalid, "node " + std::to_string(node) + " is not a wall node");
  const WallFrame& fr = rotations_[static_cast<std::size_t>(r)].frame;
  return {fr.n.dot(v), fr.t.dot(v)};
}

Eigen::Vector2d DofMap::from_wall_frame(int node, const Eigen::Vector2d& nt) const {
  const int r = rotation_index(node);
  if (r < 0) throw Error(ErrorCode::ConfigInvalid, "node " + std::to_string(node) + " is not a wall node");
  const WallFrame& fr = rotations_[static_cast<std::size_t>(r)].frame;
  return nt[0] * fr.n + nt[1] * fr.t;
}

SpMat DofMap::prolongation() const {
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(entries_.size());
  for (int r = 0; r < num_full(); ++r)
    for (const Entry* e = row_begin(r); e != row_end(r); ++e) t.emplace_back(r, e->col, e->w);
  SpMat P(num_full(), num_reduced());
  P.setFromTriplets(t.begin(), t.end());
  return P;
}

Eigen::VectorXd DofMap::expand(const Eigen::VectorXd& reduced) const {
  if (reduced.size() != num_reduced())
    throw Error(ErrorCode::ConfigInvalid, "expand: reduced vector has wrong size");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_full());
  for (int r = 0; r < num_full(); ++r)
    for (const Entry* e = row_begin(r); e != row_end(r); ++e) x[r] += e->w * reduced[e->col];
  return x;
}

Eigen::VectorXd DofMap::reduce(const Eigen::VectorXd& full) const {
  if (full.size() != num_full()) throw Error(ErrorCode::ConfigInvalid, "reduce: full vector has wrong size");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(num_reduced());
  for (int node = 0; node < mesh_->num_nodes(); ++node) {
    if (is_end(node)) continue;
    const Eigen::Vector2d v(full[2 * node], full[2 * node + 1]);
    const Entry* e0 = row_begin(2 * node);
    const int r = rotation_index(node);
    if (r < 0) {
      y[e0->col] = v[0];
      y[row_begin(2 * node + 1)->col] = v[1];
    } else {
      y[e0->col] = rotations_[static_cast<std::size_t>(r)].frame.t.dot(v);
    }
  }
  // wall columns were set from their own node; midpoint rows only add slaved entries
  const double shift = full[pinned_pressure()];
  for (int p = num_velocity(); p < num_full(); ++p) {
    if (p == pinned_pressure()) continue;
    const bool constant = (p - num_velocity()) % 3 == 0;
    y[row_begin(p)->col] = full[p] - (constant ? shift : 0.0);
  }
  return y;
}

Eigen::VectorXd DofMap::restrict_load(const Eigen::VectorXd& full) const {
  if (full.size() != num_full()) throw Error(ErrorCode::ConfigInvalid, "restrict_load: full vector has wrong size");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(num_reduced());
  for (int r = 0; r < num_full(); ++r)
    for (const Entry* e = row_begin(r); e != row_end(r); ++e) y[e->col] += e->w * full[r];
  return y;
}

}  // namespace navslip
