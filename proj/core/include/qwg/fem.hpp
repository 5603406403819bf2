#pragma once

#include <iosfwd>
#include <vector>

#include "qwg/mesh.hpp"
#include "qwg/numerics.hpp"

namespace qwg {

class FemError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Node <-> unknown numbering after eliminating homogeneous Dirichlet nodes.
struct DofMap {
    std::vector<int> node_to_dof; // -1 for eliminated nodes
    std::vector<int> dof_to_node;

    int size() const { return static_cast<int>(dof_to_node.size()); }
    static DofMap build(const Mesh& mesh, const std::vector<BoundaryTag>& dirichlet);

    VecC expand(const VecC& u) const;   // dof vector -> node vector, zeros on eliminated nodes
    VecC restrict(const VecC& u) const; // node vector -> dof vector
};

struct SparseOperatorPair {
    SpMat K;
    SpMat M;
    int n_dof = 0;
    bool constrained = false;
    DofMap dofs;
};

const std::vector<BoundaryTag>& default_dirichlet_tags(); // wall and lid

// Stiffness and mass with exact quadrature for the mesh order.
SparseOperatorPair assemble(const Mesh& mesh, const std::vector<BoundaryTag>& dirichlet = default_dirichlet_tags());

// coefficient * face mass on edges carrying `tag`.
SpMat assemble_robin(const Mesh& mesh, const DofMap& dofs, BoundaryTag tag, cplx coefficient);

// Weak right-hand side of the Robin-truncated incident wave on a vertical face.
VecC assemble_incident_load(const Mesh& mesh, const DofMap& dofs, BoundaryTag tag, double L);

// Transverse profile sqrt(2) cos(pi y) of the first strip mode.
double transverse_mode(double y);

// integral over the tagged face of u(y) phi(y) dy, no conjugation
cplx trace_projection(const VecC& u, const Mesh& mesh, const DofMap& dofs, BoundaryTag tag);

// Same projection along an interior vertical grid line x = x0.
cplx line_projection(const VecC& u, const Mesh& mesh, const DofMap& dofs, double x0);

// integral over the tagged boundary of |du/dn|^2
double boundary_flux_energy(const VecC& u, const Mesh& mesh, const DofMap& dofs, BoundaryTag tag);

struct QuasiPeriodicOperators {
    SpMat K;
    SpMat M;
    SpMat P; // prolongation from reduced to full unknowns
    double eta = 0.0;
};

// Eliminates left-face unknowns through u_left = exp(i eta) u_right.
QuasiPeriodicOperators apply_quasi_periodic(const SparseOperatorPair& ops, const Mesh& mesh, double eta);
QuasiPeriodicOperators apply_quasi_periodic(const SparseOperatorPair& ops,
                                            const std::vector<std::pair<int, int>>& dof_pairs, double eta);

// Uniform 1D mesh of [0, length] with n elements; unknowns are all nodes.
SparseOperatorPair interval_operators(double length, int n, int order);

// Coordinate export: "row col re im" per stored entry, 0-based.
void write_coo(std::ostream& os, const SpMat& A);

} // namespace qwg
