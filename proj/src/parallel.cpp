#include "nlmol/parallel.hpp"

#include <algorithm>
#include <chrono>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <set>
#include <stdexcept>
#include <thread>
#include <utility>

namespace nlmol {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

bool contains_sorted(const std::vector<int>& v, int x) {
  return std::binary_search(v.begin(), v.end(), x);
}

// Splits a fragment by row owner; the piece for `self` is returned through
// `mine`, the others through `foreign` as (owner, fragment).
void split_by_owner(RowFragment&& f, const std::vector<int>& owner, int self, RowFragment& mine,
                    std::vector<std::pair<int, RowFragment>>& foreign) {
  bool all_mine = true;
  for (int r : f.rows)
    if (owner[r] != self) all_mine = false;
  if (all_mine) {
    mine = std::move(f);
    return;
  }
  const std::size_t nc = f.cols.size();
  std::vector<int> targets;
  for (int r : f.rows) targets.push_back(owner[r]);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (int t : targets) {
    RowFragment part{f.source, {}, f.cols, {}};
    for (std::size_t k = 0; k < f.rows.size(); ++k) {
      if (owner[f.rows[k]] != t) continue;
      part.rows.push_back(f.rows[k]);
      part.vals.insert(part.vals.end(), f.vals.begin() + static_cast<std::ptrdiff_t>(k * nc),
                       f.vals.begin() + static_cast<std::ptrdiff_t>((k + 1) * nc));
    }
    if (t == self)
      mine = std::move(part);
    else
      foreign.emplace_back(t, std::move(part));
  }
}

}  // namespace

std::vector<int> PartitionContext::ghost_elements() const {
  std::vector<int> out;
  for (std::size_t j = 0; j < ghosts.size(); ++j)
    if (static_cast<int>(j) != id) out.insert(out.end(), ghosts[j].begin(), ghosts[j].end());
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> row_owners(const FESpace& space, const PartitionMap& partition) {
  std::vector<int> owner(space.n_dofs());
  const auto& first = space.first_element();
  for (std::size_t d = 0; d < owner.size(); ++d) owner[d] = partition.owner[first[d]];
  return owner;
}

std::vector<PartitionContext> ghost_regions(const FESpace& space, const PartitionMap& partition,
                                            double radius) {
  const Mesh& mesh = space.mesh();
  const int n = partition.n_parts;
  std::vector<PartitionContext> parts(n);
  for (int i = 0; i < n; ++i) {
    parts[i].id = i;
    parts[i].ghosts.resize(n);
  }
  for (const auto& e : mesh.elements) {
    auto& p = parts[partition.owner[e.id]];
    p.owned.push_back(e.id);
    (e.region == Region::omega ? p.omega : p.pi).push_back(e.id);
  }
  const auto owner = row_owners(space, partition);
  for (std::size_t d = 0; d < owner.size(); ++d) parts[owner[d]].owned_rows.push_back(static_cast<int>(d));
  for (int i = 0; i < n; ++i) {
    parts[i].ghosts[i] = parts[i].pi;
    for (const auto& e : mesh.elements) {
      const int j = partition.owner[e.id];
      if (j != i && aprx_min_dist(e.bbox, partition.part_bbox[i]) < radius)
        parts[i].ghosts[j].push_back(e.id);
    }
  }
  return parts;
}

SetAudit audit_partitions(const FESpace& space, const std::vector<PartitionContext>& parts,
                          const std::vector<std::vector<int>>& neighbors) {
  const Mesh& mesh = space.mesh();
  SetAudit audit;
  auto fail = [&](std::string msg) { audit.failures.push_back(std::move(msg)); };
  std::vector<int> owner(mesh.size(), -1);
  for (const auto& p : parts)
    for (int e : p.owned) {
      if (owner[e] != -1) fail("element " + std::to_string(e) + " owned twice");
      owner[e] = p.id;
    }
  for (std::size_t e = 0; e < mesh.size(); ++e)
    if (owner[e] == -1) fail("element " + std::to_string(e) + " has no owner");

  std::vector<int> gamma_seen(mesh.size(), 0);
  for (const auto& p : parts) {
    const std::string tag = "partition " + std::to_string(p.id) + ": ";
    if (p.ghosts[p.id] != p.pi) fail(tag + "Gamma_II differs from Pi_I");
    std::vector<int> both = p.omega;
    both.insert(both.end(), p.pi.begin(), p.pi.end());
    std::sort(both.begin(), both.end());
    if (both != p.owned) fail(tag + "Omega_I and Pi_I do not make up the owned elements");
    for (int e : p.pi) {
      if (mesh.elements[e].region != Region::gamma) fail(tag + "Pi_I holds an Omega element");
      ++gamma_seen[e];
    }
    // Gamma_JI over J are disjoint because each one only holds J's elements.
    for (std::size_t j = 0; j < p.ghosts.size(); ++j)
      for (int e : p.ghosts[j])
        if (owner[e] != static_cast<int>(j)) fail(tag + "ghost set of a peer holds a foreign element");
    // Gamma_I is covered by the ghost sets.
    for (int m : p.owned)
      for (int l : neighbors[m]) {
        if (owner[l] == p.id) continue;
        if (!contains_sorted(p.ghosts[owner[l]], l))
          fail(tag + "outer element " + std::to_string(l) + " is neither owned nor a ghost");
      }
  }
  for (std::size_t e = 0; e < mesh.size(); ++e) {
    const bool gamma = mesh.elements[e].region == Region::gamma;
    if (gamma && gamma_seen[e] != 1) fail("Gamma element " + std::to_string(e) + " not in exactly one Pi_I");
  }
  std::vector<int> rows(space.n_dofs(), 0);
  for (const auto& p : parts)
    for (int r : p.owned_rows) ++rows[r];
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r] != 1) fail("row " + std::to_string(r) + " owned " + std::to_string(rows[r]) + " times");
  return audit;
}

ParallelResult parallel_assemble(const FESpace& space, const KernelParams& kernel,
                                 const AssemblyConfig& config, const ParallelOptions& options) {
  config.validate();
  if (options.n_parts < 1) throw std::invalid_argument("n_parts must be >= 1");
  const auto t0 = Clock::now();
  const Mesh& mesh = space.mesh();
  const double radius = interaction_radius(kernel, config);
  const auto partition = partition_geometric(mesh, options.n_parts);
  const auto neighbors = neighbor_sets(mesh, radius);

  ParallelResult result;
  result.parts = ghost_regions(space, partition, radius);
  auto& parts = result.parts;
  if (options.audit) {
    const auto audit = audit_partitions(space, parts, neighbors);
    if (!audit.ok()) throw std::logic_error("partition audit failed: " + audit.failures.front());
  }

  const int n = options.n_parts;
  const auto owner = row_owners(space, partition);
  std::vector<int> all(mesh.size());
  for (std::size_t e = 0; e < mesh.size(); ++e) all[e] = static_cast<int>(e);
  const auto counts = fragment_counts(space, config.rows, all);

  std::vector<std::unique_ptr<RowAssembler>> assemblers(n);
  std::vector<std::vector<RowFragment>> stash(n);
  std::vector<std::mutex> stash_lock(n);
  std::vector<SparseMatrix> local(n);

  auto phase_assemble = [&](int i) {
    const auto start = Clock::now();
    auto& ctx = parts[i];
    std::vector<int> expected(space.n_dofs(), 0);
    for (int r : ctx.owned_rows) expected[r] = counts[r];
    assemblers[i] = std::make_unique<RowAssembler>(space.n_dofs(), space.n_dofs(), std::move(expected));
    std::vector<char> allowed(mesh.size(), 0);
    for (int e : ctx.owned) allowed[e] = 1;
    for (int e : ctx.ghost_elements()) allowed[e] = 1;
    InnerAssembler worker(space, kernel, config, neighbors);
    std::vector<std::pair<int, RowFragment>> foreign;
    for (int m : ctx.owned) {
      RowFragment f = worker.assemble_inner(m, &allowed);
      if (f.rows.empty()) continue;
      RowFragment mine;
      split_by_owner(std::move(f), owner, i, mine, foreign);
      if (!mine.rows.empty()) assemblers[i]->add(std::move(mine));
      for (auto& [t, part] : foreign) {
        std::lock_guard<std::mutex> lock(stash_lock[t]);
        stash[t].push_back(std::move(part));
      }
      foreign.clear();
    }
    ctx.stats = worker.stats();
    ctx.t_a += seconds_since(start);
  };
  auto phase_merge = [&](int i) {
    const auto start = Clock::now();
    for (auto& f : stash[i]) assemblers[i]->add(std::move(f));
    stash[i].clear();
    local[i] = assemblers[i]->finish();
    assemblers[i].reset();
    parts[i].t_a += seconds_since(start);
  };

  auto run_phase = [&](const auto& phase) {
    if (!options.threads || n == 1) {
      for (int i = 0; i < n; ++i) phase(i);
      return;
    }
    std::vector<std::exception_ptr> errors(n);
    std::vector<std::thread> pool;
    pool.reserve(n);
    for (int i = 0; i < n; ++i)
      pool.emplace_back([&, i] {
        try {
          phase(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      });
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  };
  run_phase(phase_assemble);
  run_phase(phase_merge);

  // Rows are disjoint across partitions: concatenate them in row order.
  SparseMatrix& a = result.matrix;
  a.n_rows = a.n_cols = space.n_dofs();
  std::size_t nnz = 0;
  for (const auto& m : local) nnz += m.nnz();
  a.cols.reserve(nnz);
  a.vals.reserve(nnz);
  a.row_ptr.assign(1, 0);
  for (std::size_t r = 0; r < a.n_rows; ++r) {
    const auto& m = local[owner[r]];
    const auto c = m.row_cols(r);
    const auto v = m.row_vals(r);
    a.cols.insert(a.cols.end(), c.begin(), c.end());
    a.vals.insert(a.vals.end(), v.begin(), v.end());
    a.row_ptr.push_back(a.cols.size());
  }
  for (const auto& p : parts) result.stats += p.stats;
  if (config.rows == RowSet::all) result.stats.asymmetry = asymmetry_inf_norm(a);
  if (config.symmetrize) a = symmetrize(a);
  result.t_a = seconds_since(t0);
  return result;
}

int physical_cores() {
  namespace fs = std::filesystem;
  std::set<std::pair<std::string, std::string>> cores;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator("/sys/devices/system/cpu", ec)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("cpu", 0) != 0 || name.size() < 4 ||
        name.find_first_not_of("0123456789", 3) != std::string::npos)
      continue;
    std::ifstream core(entry.path() / "topology/core_id");
    std::ifstream pkg(entry.path() / "topology/physical_package_id");
    std::string c, p;
    if (core >> c && pkg >> p) cores.emplace(p, c);
  }
  if (!cores.empty()) return static_cast<int>(cores.size());
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace nlmol
