#pragma once

// Hand-built reference matrices for the two-zone grid walk model, used as
// golden targets across the matrix, bisimulation, and analysis tests. All
// rates were derived on paper from the movement kernel and the infection
// constants (H = 3/5, ii = 4/5) and are written down here as literals.
// Also hosts the random generator for lumpable instances and an independent
// brute-force refinement oracle, shared by several suites.

#include <map>
#include <random>
#include <string>
#include <vector>

#include "piff/bisim.hpp"
#include "piff/polymatrix.hpp"
#include "piff/quadform.hpp"

namespace fixtures {

// movement kernel over sites A,B,C,D (row = from, column = to)
inline piff::Rational jmove(int from, int to) {
  using piff::Rational;
  static const Rational j[4][4] = {
      {{3, 5}, {1, 5}, {0}, {1, 5}},
      {{3, 10}, {2, 5}, {3, 10}, {0}},
      {{0}, {1, 5}, {3, 5}, {1, 5}},
      {{3, 10}, {0}, {3, 10}, {2, 5}},
  };
  return j[from][to];
}

inline const piff::Rational kInfStay{4, 5};  // infected stays infected
inline const piff::Rational kInfHeal{1, 5};

// 8-state matrix over (agent, site) pairs: susceptibles turn infected at the
// infected fraction and keep susceptible at the susceptible fraction, both
// multiplied by the movement kernel; infected rows are constant.
inline piff::PolyMatrix ptm_matrix() {
  using namespace piff;
  const char* sites = "ABCD";
  PolyMatrix m;
  for (int a = 0; a < 2; ++a)
    for (int g = 0; g < 4; ++g) {
      std::string name = (a == 0 ? "S" : "I") + std::string(1, sites[g]);
      m.state_idx[name] = m.dim();
      m.states.push_back(name);
      m.agent.emplace_back(a == 0 ? "S" : "I");
      m.store.push_back(std::map<std::string, std::string>{{"loc", std::string(1, sites[g])}});
    }
  m.init = {{0, 90}, {4, 10}};
  m.rows.resize(8);

  const RawPoly frc_s = RawPoly::frc_sum(8, {0, 1, 2, 3});
  const RawPoly frc_i = RawPoly::frc_sum(8, {4, 5, 6, 7});
  auto put = [&](int r, int c, const RawPoly& p) {
    if (p.is_zero()) return;
    MatrixEntry e;
    e.raw_nonneg = true;
    e.form = QuadForm::canonicalize(p);
    m.rows[r].emplace(c, std::move(e));
  };
  for (int g = 0; g < 4; ++g) {
    for (int g2 = 0; g2 < 4; ++g2) {
      put(g, g2, frc_s.scaled(jmove(g, g2)));                                  // S -> S
      put(g, 4 + g2, frc_i.scaled(jmove(g, g2)));                              // S -> I
      put(4 + g, g2, RawPoly::constant_poly(8, kInfHeal * jmove(g, g2)));      // I -> S
      put(4 + g, 4 + g2, RawPoly::constant_poly(8, kInfStay * jmove(g, g2)));  // I -> I
    }
  }
  return m;
}

// 4-state quotient over {susceptible, infected} x {sticky, fluid} with the
// site detail folded away; sticky sites always receive mass H = 3/5.
inline piff::PolyMatrix rptm_matrix() {
  using namespace piff;
  const Rational h{3, 5}, l{2, 5};
  PolyMatrix m;
  m.states = {"QSh", "QSl", "QIh", "QIl"};
  for (int i = 0; i < 4; ++i) m.state_idx[m.states[i]] = i;
  m.agent = {std::string("S"), std::string("S"), std::string("I"), std::string("I")};
  m.store.assign(4, std::nullopt);
  m.labels = {{"Sh"}, {"Sl"}, {"Ih"}, {"Il"}};
  m.init = {{0, 90}, {2, 10}};
  m.rows.resize(4);

  const RawPoly frc_s = RawPoly::frc_sum(4, {0, 1});
  const RawPoly frc_i = RawPoly::frc_sum(4, {2, 3});
  auto put = [&](int r, int c, const RawPoly& p) {
    MatrixEntry e;
    e.raw_nonneg = true;
    e.form = QuadForm::canonicalize(p);
    m.rows[r].emplace(c, std::move(e));
  };
  for (int r : {0, 1}) {
    put(r, 0, frc_s.scaled(h));
    put(r, 1, frc_s.scaled(l));
    put(r, 2, frc_i.scaled(h));
    put(r, 3, frc_i.scaled(l));
  }
  for (int r : {2, 3}) {
    put(r, 0, RawPoly::constant_poly(4, kInfHeal * h));
    put(r, 1, RawPoly::constant_poly(4, kInfHeal * l));
    put(r, 2, RawPoly::constant_poly(4, kInfStay * h));
    put(r, 3, RawPoly::constant_poly(4, kInfStay * l));
  }
  return m;
}

// ---------------------------------------------------------------------------
// Random lumpable instances.
//
// Construction: pick a partition of up to six states; give every block a
// quotient row of the shape d1 * M0 + d2 * (1 - M0), where M0 is the
// aggregate occupancy of the first block and d1, d2 are random stochastic
// rows over the blocks; then spread each block-to-block mass over the target
// block's members with per-source weights. Class sums collapse back to the
// quotient row by design, so the partition is an exact bisimulation whatever
// the weights are. The first block carries a private proposition, which
// keeps its aggregate expressible in any coarser refinement the labels
// allow.

struct RandomLumpable {
  piff::PolyMatrix m;
  piff::LabelMap labels;
  piff::Partition intended;
};

inline RandomLumpable random_lumpable(std::mt19937& rng) {
  using namespace piff;
  auto ri = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = ri(2, 6);
  const int b = ri(1, n);

  std::vector<std::vector<int>> raw_blocks(b);
  for (int i = 0; i < n; ++i) raw_blocks[i < b ? i : ri(0, b - 1)].push_back(i);

  RandomLumpable out;
  out.intended = make_partition(std::move(raw_blocks), n);
  const auto& blocks = out.intended.blocks;

  // two random stochastic rows over the blocks per source block
  auto stochastic_row = [&]() {
    std::vector<Rational> row(b);
    long total = 0;
    std::vector<int> g(b);
    for (int q = 0; q < b; ++q) total += (g[q] = ri(0, 6));
    if (total == 0) total = g[0] = 1;
    for (int q = 0; q < b; ++q) row[q] = Rational(g[q], total);
    return row;
  };
  std::vector<std::vector<Rational>> d1(b), d2(b);
  for (int p = 0; p < b; ++p) {
    d1[p] = stochastic_row();
    d2[p] = stochastic_row();
  }

  PolyMatrix& m = out.m;
  for (int i = 0; i < n; ++i) {
    m.states.push_back("s" + std::to_string(i + 1));
    m.state_idx[m.states.back()] = i;
  }
  m.agent.assign(n, std::nullopt);
  m.store.assign(n, std::nullopt);
  m.rows.resize(n);

  long placed = 0;
  for (int i = 0; i < n; ++i) {
    long count = ri(0, 5);
    if (i == n - 1 && placed == 0) count = 1;
    placed += count;
    if (count > 0) m.init.emplace_back(i, count);
  }

  const RawPoly m0 = RawPoly::frc_sum(n, blocks[0]);
  const RawPoly rest0 = RawPoly::constant_poly(n, 1) - m0;
  for (int i = 0; i < n; ++i) {
    const int p = out.intended.block_of[i];
    for (int q = 0; q < b; ++q) {
      // per-source split of the block mass over the target block's members
      std::vector<Rational> w(blocks[q].size());
      long total = 0;
      std::vector<int> g(w.size());
      for (size_t x = 0; x < w.size(); ++x) total += (g[x] = ri(1, 5));
      for (size_t x = 0; x < w.size(); ++x) w[x] = Rational(g[x], total);

      for (size_t x = 0; x < blocks[q].size(); ++x) {
        RawPoly entry = m0.scaled(d1[p][q] * w[x]) + rest0.scaled(d2[p][q] * w[x]);
        if (entry.is_zero()) continue;
        MatrixEntry e;
        e.raw_nonneg = d1[p][q] >= d2[p][q]; // constant part: d2 w, slope: (d1 - d2) w
        e.form = QuadForm::canonicalize(entry);
        m.rows[i].emplace(blocks[q][x], std::move(e));
      }
    }
  }

  // labels: the pivot block is private, the rest may share proposition names
  std::vector<std::string> ap(b);
  ap[0] = "pivot";
  const int shared = b > 1 ? ri(1, b - 1) : 1;
  for (int q = 1; q < b; ++q) ap[q] = "L" + std::to_string(q % shared);
  out.labels.resize(n);
  for (int i = 0; i < n; ++i) out.labels[i] = {ap[out.intended.block_of[i]]};
  return out;
}

// keeps the instance stochastic but moves mass between two target blocks for
// a single source, which breaks its equivalence with any block sibling
inline void perturb_instance(RandomLumpable& inst) {
  using namespace piff;
  if (inst.intended.size() < 2) return;
  int source = -1;
  for (const auto& blk : inst.intended.blocks)
    if (blk.size() >= 2) {
      source = blk[1];
      break;
    }
  if (source < 0) return;
  const int n = inst.m.dim();
  const QuadForm delta =
      QuadForm::canonicalize(RawPoly::frc_sum(n, inst.intended.blocks[0]).scaled({1, 7}));
  auto bump = [&](int col, const QuadForm& d) {
    auto it = inst.m.rows[source].find(col);
    QuadForm cur = it == inst.m.rows[source].end() ? QuadForm::zero(n) : it->second.form;
    MatrixEntry e;
    e.form = cur + d;
    e.raw_nonneg = false;
    inst.m.rows[source][col] = std::move(e);
  };
  bump(inst.intended.blocks[0].front(), delta);
  bump(inst.intended.blocks[1].front(), delta.scaled(-1));
}

// initial occupancy from the stored population counts
inline std::vector<double> occupancy_from_init(const piff::PolyMatrix& m) {
  long total = 0;
  for (const auto& [z, c] : m.init) total += c;
  std::vector<double> mu(m.dim(), 0.0);
  for (const auto& [z, c] : m.init) mu[z] = static_cast<double>(c) / total;
  return mu;
}

inline std::vector<piff::Rational> occupancy_from_init_exact(const piff::PolyMatrix& m) {
  long total = 0;
  for (const auto& [z, c] : m.init) total += c;
  std::vector<piff::Rational> mu(m.dim(), piff::Rational(0));
  for (const auto& [z, c] : m.init) mu[z] = piff::Rational(c, total);
  return mu;
}

// Reference refinement: restart from scratch each round, splitting every
// block by the full vector of class sums towards all current blocks, until
// nothing moves. Quadratic and slow, but independent of the splitter queue.
inline piff::Partition naive_refine(const piff::PolyMatrix& m, const piff::LabelMap& labels) {
  using namespace piff;
  Partition p = initial_partition(labels, m.dim());
  for (;;) {
    bool changed = false;
    std::vector<std::vector<int>> next;
    for (const auto& blk : p.blocks) {
      std::map<std::vector<std::string>, std::vector<int>> groups;
      for (int s : blk) {
        std::vector<std::string> sig;
        sig.reserve(p.blocks.size());
        for (const auto& q : p.blocks) sig.push_back(class_row_sum(m, s, q).str());
        groups[std::move(sig)].push_back(s);
      }
      if (groups.size() > 1) changed = true;
      for (auto& [sig, members] : groups) next.push_back(std::move(members));
    }
    p = make_partition(std::move(next), m.dim());
    if (!changed) return p;
  }
}

} // namespace fixtures
