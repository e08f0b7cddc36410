#pragma once

#include <string>
#include <vector>

#include "nlmol/assembly.hpp"
#include "nlmol/fe_space.hpp"
#include "nlmol/kernel.hpp"
#include "nlmol/mesh.hpp"

namespace nlmol {

/// Per-partition view of the decomposition.
///
/// Omega_I are the owned elements in Omega, Pi_I the owned elements in Gamma.
/// ghosts[J] is Gamma_JI: the elements of partition J whose box lies within
/// the interaction radius of partition I's box. ghosts[I] is Pi_I.
struct PartitionContext {
  int id = 0;
  std::vector<int> owned;       ///< Omega_I and Pi_I, sorted
  std::vector<int> omega;       ///< Omega_I
  std::vector<int> pi;          ///< Pi_I
  std::vector<int> owned_rows;  ///< DOFs whose rows this partition writes, sorted
  std::vector<std::vector<int>> ghosts;
  double t_a = 0.0;  ///< wall seconds spent assembling this partition
  AssemblyStats stats;

  /// Union of ghosts[J] over J != I.
  [[nodiscard]] std::vector<int> ghost_elements() const;
};

/// Partition owning each DOF row: the owner of the DOF's first element.
[[nodiscard]] std::vector<int> row_owners(const FESpace& space, const PartitionMap& partition);

/// Builds the contexts (without timings) for every partition.
[[nodiscard]] std::vector<PartitionContext> ghost_regions(const FESpace& space,
                                                          const PartitionMap& partition,
                                                          double radius);

/// Result of the set-relation audit; `failures` lists every violated relation.
struct SetAudit {
  std::vector<std::string> failures;
  [[nodiscard]] bool ok() const { return failures.empty(); }
};

/// Checks Gamma_JI disjointness over J, Gamma_II = Pi_I, union of Pi_I = Gamma,
/// Pi_I disjoint, every row owned exactly once, and that each outer element
/// needed by an owned inner element is owned or a ghost.
[[nodiscard]] SetAudit audit_partitions(const FESpace& space,
                                        const std::vector<PartitionContext>& parts,
                                        const std::vector<std::vector<int>>& neighbors);

struct ParallelOptions {
  int n_parts = 1;
  /// One worker thread per partition; false runs the partitions in turn.
  bool threads = true;
  /// Run audit_partitions and throw std::logic_error on any failure.
  bool audit = true;
};

struct ParallelResult {
  SparseMatrix matrix;
  AssemblyStats stats;  ///< summed over partitions
  std::vector<PartitionContext> parts;
  double t_a = 0.0;  ///< wall seconds for the whole assembly
};

/// Partitioned assembly. Every partition assembles the fragments of its own
/// inner elements using owned and ghost outer elements; fragments of rows
/// owned elsewhere are handed to the owner, which sums all fragments of a
/// row in inner-element order. The matrix is therefore identical for every
/// partition count.
[[nodiscard]] ParallelResult parallel_assemble(const FESpace& space, const KernelParams& kernel,
                                               const AssemblyConfig& config,
                                               const ParallelOptions& options);

/// Physical cores of the machine (distinct core ids), at least 1.
[[nodiscard]] int physical_cores();

}  // namespace nlmol
