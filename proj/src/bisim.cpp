#include "piff/bisim.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace piff {

Partition make_partition(std::vector<std::vector<int>> blocks, int n_states) {
  for (auto& b : blocks) {
    if (b.empty()) throw std::invalid_argument("empty partition block");
    std::sort(b.begin(), b.end());
  }
  std::sort(blocks.begin(), blocks.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  Partition p;
  p.block_of.assign(n_states, -1);
  for (size_t k = 0; k < blocks.size(); ++k) {
    for (int z : blocks[k]) {
      if (z < 0 || z >= n_states || p.block_of[z] != -1)
        throw std::invalid_argument("partition blocks must disjointly cover the states");
      p.block_of[z] = static_cast<int>(k);
    }
  }
  for (int z = 0; z < n_states; ++z)
    if (p.block_of[z] == -1)
      throw std::invalid_argument("partition blocks must disjointly cover the states");
  p.blocks = std::move(blocks);
  return p;
}

Partition initial_partition(const LabelMap& labels, int n_states) {
  if (!labels.empty() && static_cast<int>(labels.size()) != n_states)
    throw std::invalid_argument("label map does not cover the state space");
  std::map<std::vector<std::string>, std::vector<int>> groups;
  for (int z = 0; z < n_states; ++z)
    groups[labels.empty() ? std::vector<std::string>{} : labels[z]].push_back(z);
  std::vector<std::vector<int>> blocks;
  blocks.reserve(groups.size());
  for (auto& [aps, members] : groups) blocks.push_back(std::move(members));
  return make_partition(std::move(blocks), n_states);
}

Partition refine_partition(const PolyMatrix& m, const LabelMap& labels) {
  const int n = m.dim();
  Partition init = initial_partition(labels, n);

  // blocks keyed by their smallest member; pending splitters in id order
  std::map<int, std::vector<int>> blocks;
  std::set<int> pending;
  for (const auto& b : init.blocks) {
    blocks[b.front()] = b;
    pending.insert(b.front());
  }

  while (!pending.empty()) {
    int q = *pending.begin();
    pending.erase(pending.begin());
    const std::vector<int> splitter = blocks.at(q); // snapshot

    std::vector<int> ids;
    ids.reserve(blocks.size());
    for (const auto& [id, members] : blocks) ids.push_back(id);
    for (int b : ids) {
      auto bit = blocks.find(b);
      if (bit == blocks.end() || bit->second.size() == 1) continue;

      std::map<QuadForm, std::vector<int>, QuadFormLess> groups;
      for (int z : bit->second) groups[class_row_sum(m, z, splitter)].push_back(z);
      if (groups.size() <= 1) continue;

      blocks.erase(bit);
      pending.erase(b);
      for (auto& [sig, members] : groups) {
        int id = members.front();
        pending.insert(id);
        blocks[id] = std::move(members);
      }
    }
  }

  std::vector<std::vector<int>> out;
  out.reserve(blocks.size());
  for (auto& [id, members] : blocks) out.push_back(std::move(members));
  return make_partition(std::move(out), n);
}

QuadForm rewrite_in_classes(const QuadForm& p, const Partition& part) {
  const int k = part.size();
  std::map<std::pair<int, int>, Rational> reduced;

  for (int a = 0; a < k; ++a) {
    for (int b = a; b < k; ++b) {
      const auto& abk = part.blocks[a];
      const auto& bbk = part.blocks[b];
      bool first = true;
      Rational c = 0;
      std::pair<int, int> witness{-1, -1};
      auto visit = [&](int i, int j, const Rational& divisor) {
        auto ij = std::minmax(i, j);
        Rational implied = p.at(ij.first, ij.second) / divisor;
        if (first) {
          c = implied;
          witness = {ij.first, ij.second};
          first = false;
        } else if (implied != c) {
          std::ostringstream os;
          os << "NOT_LUMPABLE: coefficient of m" << ij.first + 1 << "*m" << ij.second + 1
             << " implies a block coefficient of " << to_string(implied)
             << ", but m" << witness.first + 1 << "*m" << witness.second + 1
             << " implied " << to_string(c);
          throw NotLumpable(os.str());
        }
      };
      if (a == b) {
        for (size_t x = 0; x < abk.size(); ++x) {
          visit(abk[x], abk[x], 1);
          for (size_t y = x + 1; y < abk.size(); ++y) visit(abk[x], abk[y], 2);
        }
      } else {
        for (int i : abk)
          for (int j : bbk) visit(i, j, 1);
      }
      if (c != 0) reduced[{a, b}] = c;
    }
  }
  return QuadForm{k, std::move(reduced)};
}

std::vector<std::string> block_names(const Partition& part, const LabelMap& labels) {
  std::vector<std::string> base(part.size());
  std::map<std::string, int> uses;
  for (int b = 0; b < part.size(); ++b) {
    std::string name = "Q";
    const auto& aps = labels.empty() ? std::vector<std::string>{} : labels[part.blocks[b].front()];
    if (aps.empty()) {
      name += "none";
    } else {
      for (size_t i = 0; i < aps.size(); ++i) {
        if (i) name += "_";
        name += aps[i];
      }
    }
    base[b] = name;
    ++uses[name];
  }
  std::map<std::string, int> counter;
  for (int b = 0; b < part.size(); ++b)
    if (uses[base[b]] > 1) base[b] += "_" + std::to_string(++counter[base[b]]);
  return base;
}

Quotient quotient_model(const PolyMatrix& m, const LabelMap& labels, const Partition& part) {
  const int n = m.dim();
  const int k = part.size();
  if (!labels.empty() && static_cast<int>(labels.size()) != n)
    throw std::invalid_argument("label map does not cover the state space");

  Quotient q;
  q.partition = part;
  PolyMatrix& red = q.matrix;
  red.states = block_names(part, labels);
  for (int b = 0; b < k; ++b) red.state_idx[red.states[b]] = b;

  for (int b = 0; b < k; ++b) {
    const auto& members = part.blocks[b];
    // a label or metadata field survives only if every member agrees on it
    if (!labels.empty())
      for (int z : members)
        if (labels[z] != labels[members.front()])
          throw std::invalid_argument("partition is not label-constant on block '" +
                                      red.states[b] + "'");
    std::optional<std::string> agent = m.agent[members.front()];
    for (int z : members)
      if (m.agent[z] != agent) agent = std::nullopt;
    std::map<std::string, std::string> common;
    if (m.store[members.front()]) common = *m.store[members.front()];
    for (int z : members) {
      if (!m.store[z]) {
        common.clear();
        break;
      }
      for (auto it = common.begin(); it != common.end();) {
        auto other = m.store[z]->find(it->first);
        if (other == m.store[z]->end() || other->second != it->second)
          it = common.erase(it);
        else
          ++it;
      }
    }
    red.agent.push_back(agent);
    red.store.push_back(common.empty()
                            ? std::nullopt
                            : std::optional<std::map<std::string, std::string>>(common));
  }
  if (!labels.empty()) {
    red.labels.resize(k);
    for (int b = 0; b < k; ++b) red.labels[b] = labels[part.blocks[b].front()];
  }
  if (!m.init.empty()) {
    std::map<int, long> sums;
    for (const auto& [z, count] : m.init) sums[part.block_of[z]] += count;
    for (const auto& [b, count] : sums) red.init.emplace_back(b, count);
  }

  red.rows.resize(k);
  for (int a = 0; a < k; ++a) {
    int rep = part.blocks[a].front();
    for (int b = 0; b < k; ++b) {
      QuadForm cs = class_row_sum(m, rep, part.blocks[b]);
      if (cs.coeff.empty()) continue;
      QuadForm form = [&] {
        try {
          return rewrite_in_classes(cs, part);
        } catch (const NotLumpable& ex) {
          throw NotLumpable(std::string(ex.what()) + " (entry '" + red.states[a] +
                            "' -> '" + red.states[b] + "')");
        }
      }();
      if (form.coeff.empty()) continue;
      MatrixEntry e;
      e.raw_nonneg = true;
      for (const auto& [ij, v] : form.coeff)
        if (v < 0) e.raw_nonneg = false;
      e.form = std::move(form);
      red.rows[a].emplace(b, std::move(e));
    }
  }
  return q;
}

nlohmann::json partition_to_json(const Partition& part, const PolyMatrix& m,
                                 const std::vector<std::string>& names) {
  nlohmann::json blocks = nlohmann::json::array();
  for (int b = 0; b < part.size(); ++b) {
    nlohmann::json members = nlohmann::json::array();
    for (int z : part.blocks[b]) members.push_back(m.states[z]);
    blocks.push_back({{"name", names[b]}, {"members", std::move(members)}});
  }
  return nlohmann::json{{"blocks", std::move(blocks)}};
}

} // namespace piff
