#include <doctest.h>

#include <stdexcept>

#include <algorithm>

#include "nlmol/parallel.hpp"
#include "nlmol/solver.hpp"

using namespace nlmol;

namespace {

BoundingBox omega2() {
  BoundingBox b;
  b.lo = {-0.6, -0.4, 0};
  b.hi = {0.6, 0.4, 0};
  return b;
}

}  // namespace

TEST_CASE("partitioned matrices are identical to the serial one") {
  const auto kernel = KernelParams::make(2, 0.2, 0.0125);
  for (auto kind : {MeshKind::quad, MeshKind::mixed}) {
    const auto mesh = build_mesh(2, omega2(), 0.1, kernel.support(), kind);
    const FESpace space(mesh, 1);
    for (auto rows : {RowSet::free, RowSet::all}) {
      AssemblyConfig cfg;
      cfg.rows = rows;
      const auto serial = assemble(space, kernel, cfg);
      for (int n : {1, 2, 3, 4, 8}) {
        for (bool threads : {false, true}) {
          ParallelOptions po;
          po.n_parts = n;
          po.threads = threads;
          const auto par = parallel_assemble(space, kernel, cfg, po);
          CHECK(par.matrix.row_ptr == serial.matrix.row_ptr);
          CHECK(par.matrix.cols == serial.matrix.cols);
          CHECK(par.matrix.vals == serial.matrix.vals);
          CHECK(par.stats.integrations == serial.stats.integrations);
        }
      }
    }
  }
}

TEST_CASE("ghost regions against a direct oracle") {
  const auto kernel = KernelParams::make(2, 0.2, 0.0125);
  const auto mesh = build_mesh(2, omega2(), 0.1, kernel.support(), MeshKind::quad);
  const FESpace space(mesh, 2);
  const double radius = kernel.support();
  const auto nb = neighbor_sets(mesh, radius);
  for (int n : {2, 4, 8}) {
    const auto part = partition_geometric(mesh, n);
    const auto ctx = ghost_regions(space, part, radius);
    CHECK(audit_partitions(space, ctx, nb).ok());
    for (int i = 0; i < n; ++i) {
      CHECK(ctx[i].ghosts[i] == ctx[i].pi);
      // every outer element of an owned inner element is owned or a ghost
      std::vector<char> reach(mesh.size(), 0);
      for (int e : ctx[i].owned) reach[e] = 1;
      for (int e : ctx[i].ghost_elements()) reach[e] = 1;
      for (int m : ctx[i].owned)
        for (int l : nb[m]) CHECK(reach[l]);
      // ghosts are within the radius of the partition box
      for (int e : ctx[i].ghost_elements()) {
        CHECK(part.owner[e] != i);
        CHECK(aprx_min_dist(mesh.elements[e].bbox, part.part_bbox[i]) < radius);
      }
    }
  }
}

TEST_CASE("the audit reports broken decompositions") {
  const auto kernel = KernelParams::make(2, 0.2, 0.0125);
  const auto mesh = build_mesh(2, omega2(), 0.1, kernel.support(), MeshKind::quad);
  const FESpace space(mesh, 1);
  const auto nb = neighbor_sets(mesh, kernel.support());
  const auto part = partition_geometric(mesh, 4);
  auto ctx = ghost_regions(space, part, kernel.support());
  REQUIRE(audit_partitions(space, ctx, nb).ok());

  auto dropped_ghost = ctx;
  dropped_ghost[0].ghosts[1].clear();
  CHECK_FALSE(audit_partitions(space, dropped_ghost, nb).ok());

  auto double_owner = ctx;
  double_owner[1].owned_rows.push_back(ctx[0].owned_rows.front());
  CHECK_FALSE(audit_partitions(space, double_owner, nb).ok());

  auto lost_pi = ctx;
  for (auto& c : lost_pi)
    if (!c.pi.empty()) {
      c.pi.pop_back();
      break;
    }
  CHECK_FALSE(audit_partitions(space, lost_pi, nb).ok());
}

TEST_CASE("row owners hold the first element of each DOF") {
  const auto mesh = build_mesh(2, omega2(), 0.1, 0.2, MeshKind::tri);
  const FESpace space(mesh, 2);
  const auto part = partition_geometric(mesh, 4);
  const auto owner = row_owners(space, part);
  for (std::size_t d = 0; d < space.n_dofs(); ++d) CHECK(owner[d] == part.owner[space.first_element()[d]]);
}

TEST_CASE("physical core count is positive") { CHECK(physical_cores() >= 1); }
