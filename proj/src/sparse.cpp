#include "mpcmm/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <tuple>

#include "mpcmm/intmath.hpp"

namespace mpcmm {

// ---------------------------------------------------------------- masks

void OutputMask::validate() const {
  if (rows.size() != n) throw std::invalid_argument("mask violation: expected " + std::to_string(n) + " rows");
  std::vector<std::size_t> per_col(n, 0);
  for (std::size_t p = 0; p < n; ++p) {
    const auto& r = rows[p];
    if (r.size() > d) throw std::invalid_argument("mask violation: row " + std::to_string(p) + " has more than d positions");
    for (std::size_t x = 0; x < r.size(); ++x) {
      if (r[x] >= n) throw std::invalid_argument("mask violation: column out of range in row " + std::to_string(p));
      if (x > 0 && r[x] <= r[x - 1]) throw std::invalid_argument("mask violation: row " + std::to_string(p) + " not strictly ascending");
      if (++per_col[r[x]] > d) {
        throw std::invalid_argument("mask violation: column " + std::to_string(r[x]) + " has more than d positions");
      }
    }
  }
}

std::optional<std::size_t> OutputMask::index_of(std::size_t p, std::size_t j) const {
  const auto& r = rows.at(p);
  auto it = std::lower_bound(r.begin(), r.end(), j);
  if (it == r.end() || *it != j) return std::nullopt;
  return static_cast<std::size_t>(it - r.begin());
}

std::size_t OutputMask::size() const {
  std::size_t s = 0;
  for (const auto& r : rows) s += r.size();
  return s;
}

namespace {

struct Supports {
  std::vector<std::vector<std::size_t>> a_cols;  // k with A[p][k] != 0, per row p
  std::vector<std::vector<std::size_t>> b_rows;  // k with B[k][j] != 0, per column j
  std::vector<std::vector<std::size_t>> b_cols;  // j with B[k][j] != 0, per row k
};

Supports supports(const SparseMatrix& a, const SparseMatrix& b) {
  Supports s;
  s.a_cols.resize(a.rows());
  s.b_rows.resize(b.cols());
  s.b_cols.resize(b.rows());
  for (const auto& t : a.entries()) s.a_cols[t.row].push_back(t.col);
  for (const auto& t : b.entries()) {
    s.b_rows[t.col].push_back(t.row);
    s.b_cols[t.row].push_back(t.col);
  }
  for (auto& v : s.b_rows) std::sort(v.begin(), v.end());
  return s;
}

std::vector<std::size_t> intersect(const std::vector<std::size_t>& x, const std::vector<std::size_t>& y) {
  std::vector<std::size_t> out;
  std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
  return out;
}

bool contains_sorted(const std::vector<std::size_t>& v, std::size_t x) { return std::binary_search(v.begin(), v.end(), x); }

void check_square_sparse(const char* who, std::size_t n, std::size_t d, const SparseMatrix& a, const SparseMatrix& b) {
  if (d == 0) throw std::invalid_argument(std::string(who) + ": d must be >= 1");
  if (a.rows() != n || a.cols() != n || b.rows() != n || b.cols() != n) {
    throw std::invalid_argument(std::string(who) + ": inputs must be " + std::to_string(n) + "x" + std::to_string(n));
  }
  if (!check_d_sparse(a, d) || !check_d_sparse(b, d)) {
    throw std::invalid_argument(std::string(who) + ": sparsity violation, inputs must be " + std::to_string(d) + "-sparse");
  }
}

void check_mask(const OutputMask& mask, std::size_t n, std::size_t d) {
  if (mask.n != n) throw std::invalid_argument("mask violation: mask is for n = " + std::to_string(mask.n));
  if (mask.d > d) throw std::invalid_argument("mask violation: mask allows more than d positions");
  OutputMask m = mask;
  m.d = d;
  m.validate();
}

}  // namespace

OutputMask default_mask(const SparseMatrix& a, const SparseMatrix& b, std::size_t d) {
  const std::size_t n = a.rows();
  const Supports sp = supports(a, b);
  std::vector<std::tuple<std::size_t, std::size_t, std::size_t>> cands;  // (terms, p, j)
  std::vector<std::size_t> count(b.cols(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t p = 0; p < n; ++p) {
    for (auto k : sp.a_cols[p]) {
      for (auto j : sp.b_cols[k]) {
        if (count[j]++ == 0) touched.push_back(j);
      }
    }
    for (auto j : touched) {
      cands.emplace_back(count[j], p, j);
      count[j] = 0;
    }
    touched.clear();
  }
  std::sort(cands.begin(), cands.end(), [](const auto& x, const auto& y) {
    if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
    return std::make_pair(std::get<1>(x), std::get<2>(x)) < std::make_pair(std::get<1>(y), std::get<2>(y));
  });
  OutputMask m;
  m.n = n;
  m.d = d;
  m.rows.resize(n);
  std::vector<std::size_t> per_col(b.cols(), 0);
  for (const auto& [terms, p, j] : cands) {
    if (m.rows[p].size() < d && per_col[j] < d) {
      m.rows[p].push_back(j);
      ++per_col[j];
    }
  }
  for (auto& r : m.rows) std::sort(r.begin(), r.end());
  return m;
}

DenseMatrix apply_mask(const DenseMatrix& c, const OutputMask& mask, const SemiringSpec& s) {
  DenseMatrix out(c.rows(), c.cols(), s.zero);
  for (std::size_t p = 0; p < mask.rows.size() && p < c.rows(); ++p) {
    for (auto j : mask.rows[p]) out(p, j) = c(p, j);
  }
  return out;
}

// ---------------------------------------------------------------- ledger

TermLedger::TermLedger(const SparseMatrix& a, const SparseMatrix& b, const OutputMask& mask) {
  const Supports sp = supports(a, b);
  pending_.resize(mask.rows.size());
  required_.resize(mask.rows.size());
  for (std::size_t p = 0; p < mask.rows.size(); ++p) {
    for (auto j : mask.rows[p]) {
      auto ks = intersect(sp.a_cols.at(p), sp.b_rows.at(j));
      total_ += ks.size();
      required_[p].push_back(ks.size());
      pending_[p].push_back(std::move(ks));
    }
  }
  remaining_ = total_;
}

void TermLedger::cover_all(std::size_t p, std::size_t idx) {
  remaining_ -= pending_[p][idx].size();
  pending_[p][idx].clear();
}

std::vector<Term> TermLedger::remaining(const OutputMask& mask) const {
  std::vector<Term> out;
  out.reserve(remaining_);
  for (std::size_t p = 0; p < pending_.size(); ++p) {
    for (std::size_t idx = 0; idx < pending_[p].size(); ++idx) {
      for (auto k : pending_[p][idx]) out.push_back({p, mask.rows[p][idx], k});
    }
  }
  return out;
}

bool TermLedger::consistent() const {
  std::size_t sum = 0;
  for (const auto& row : pending_) {
    for (const auto& ks : row) sum += ks.size();
  }
  return sum == remaining_;
}

// ---------------------------------------------------------------- budgets

IterationBudget iteration_budget(double eps1, double eps2, std::size_t d, double c) {
  if (d == 0) throw std::invalid_argument("iteration_budget: d must be >= 1");
  if (eps1 == 0.0 && eps2 == 0.0) return {};
  if (!(eps1 >= 0.0 && eps1 < eps2)) throw std::invalid_argument("iteration_budget: need 0 <= eps1 < eps2");
  IterationBudget b;
  const double dd = static_cast<double>(d);
  b.improved_real = c * std::pow(dd, 4.0 * eps2);
  b.old_real = c * std::pow(dd, 5.0 * eps2 - eps1);
  b.improved = static_cast<std::size_t>(std::ceil(b.improved_real - 1e-9));
  b.old = static_cast<std::size_t>(std::ceil(b.old_real - 1e-9));
  return b;
}

std::size_t sparse_block_grid(std::size_t d) { return std::max<std::size_t>(1, isqrt(d)); }

// ---------------------------------------------------------------- decomposition

Decomposition decompose(const SparseMatrix& a, const SparseMatrix& b, const OutputMask& mask, std::size_t d,
                        const EpsilonSchedule& eps) {
  const std::size_t n = a.rows();
  check_square_sparse("decompose", n, d, a, b);
  check_mask(mask, n, d);
  const Supports sp = supports(a, b);
  TermLedger ledger(a, b, mask);

  Decomposition dec;
  dec.total_terms = ledger.total_terms();
  const IterationBudget budget = iteration_budget(eps.eps1, eps.eps2, d, eps.layer_constant);
  const double dd = static_cast<double>(d);
  dec.layer_budget = budget.improved_real;
  dec.residual_budget = eps.residual_constant * static_cast<double>(n) * std::pow(dd, 2.0 - eps.eps2);
  const double min_layer_terms = static_cast<double>(n) * std::pow(dd, 2.0 - eps.eps2) / static_cast<double>(budget.improved);
  const std::size_t max_layers = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(budget.improved_real + 1e-9)));
  const std::size_t g = sparse_block_grid(d);
  const std::size_t max_triples = n / (g * g);
  const std::size_t min_box_terms = ceil_div(d * d * d, 8);
  const std::size_t min_rows = ceil_div(d, 2);

  // Rows with identical A-support, cut into chunks of at most d.
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t p = 0; p < n; ++p) {
    if (!sp.a_cols[p].empty()) groups[sp.a_cols[p]].push_back(p);
  }
  std::vector<std::pair<const std::vector<std::size_t>*, std::vector<std::size_t>>> chunks;
  for (const auto& [support, rows] : groups) {
    for (std::size_t x = 0; x < rows.size(); x += d) {
      std::vector<std::size_t> r(rows.begin() + static_cast<std::ptrdiff_t>(x),
                                 rows.begin() + static_cast<std::ptrdiff_t>(std::min(rows.size(), x + d)));
      if (r.size() >= min_rows) chunks.emplace_back(&support, std::move(r));
    }
  }

  while (dec.layers.size() < max_layers && max_triples > 0) {
    std::vector<Triple> cands;
    for (const auto& [support, rows] : chunks) {
      // Every required term of (p, j) with p in rows lies inside the box, so
      // a column is usable only if none of its positions was partly covered.
      std::map<std::size_t, std::pair<std::size_t, bool>> cols;  // j -> (pending terms, blocked)
      for (auto p : rows) {
        for (std::size_t idx = 0; idx < mask.rows[p].size(); ++idx) {
          auto& c = cols[mask.rows[p][idx]];
          if (!ledger.untouched(p, idx)) c.second = true;
          c.first += ledger.pending(p, idx).size();
        }
      }
      std::vector<std::pair<std::size_t, std::size_t>> usable;  // (terms, j)
      for (const auto& [j, c] : cols) {
        if (!c.second && c.first > 0) usable.emplace_back(c.first, j);
      }
      std::sort(usable.begin(), usable.end(), [](const auto& x, const auto& y) {
        return x.first != y.first ? x.first > y.first : x.second < y.second;
      });
      if (usable.size() > d) usable.resize(d);
      Triple t;
      t.rows = rows;
      t.inner = *support;
      for (const auto& [terms, j] : usable) {
        t.cols.push_back(j);
        t.terms += terms;
      }
      std::sort(t.cols.begin(), t.cols.end());
      if (t.terms >= min_box_terms) cands.push_back(std::move(t));
    }
    std::stable_sort(cands.begin(), cands.end(), [](const Triple& x, const Triple& y) {
      return x.terms != y.terms ? x.terms > y.terms : x.rows.front() < y.rows.front();
    });

    std::vector<Triple> layer;
    std::vector<bool> used_col(n, false);
    std::size_t layer_terms = 0;
    for (auto& t : cands) {
      if (layer.size() == max_triples) break;
      if (std::any_of(t.cols.begin(), t.cols.end(), [&](std::size_t j) { return used_col[j]; })) continue;
      for (auto j : t.cols) used_col[j] = true;
      layer_terms += t.terms;
      layer.push_back(std::move(t));
    }
    if (layer.empty() || static_cast<double>(layer_terms) < min_layer_terms) break;
    for (const auto& t : layer) {
      for (auto p : t.rows) {
        for (auto j : t.cols) {
          if (auto idx = mask.index_of(p, j)) ledger.cover_all(p, *idx);
        }
      }
    }
    dec.layer_terms += layer_terms;
    dec.layers.push_back(std::move(layer));
  }

  dec.residual = ledger.remaining(mask);
  dec.layer_budget_met = static_cast<double>(dec.layers.size()) <= dec.layer_budget + 1e-9;
  dec.residual_budget_met = static_cast<double>(dec.residual.size()) <= dec.residual_budget;
  return dec;
}

TermCensus census(const Decomposition& dec, const SparseMatrix& a, const SparseMatrix& b, const OutputMask& mask) {
  const Supports sp = supports(a, b);
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, std::size_t> hits;
  TermCensus c;
  for (std::size_t p = 0; p < mask.rows.size(); ++p) {
    for (auto j : mask.rows[p]) {
      for (auto k : intersect(sp.a_cols[p], sp.b_rows[j])) hits[{p, j, k}] = 0;
    }
  }
  c.required = hits.size();
  auto hit = [&](std::size_t p, std::size_t j, std::size_t k) {
    auto it = hits.find({p, j, k});
    if (it == hits.end()) return false;
    if (++it->second > 1) ++c.duplicates;
    return true;
  };
  for (const auto& layer : dec.layers) {
    for (const auto& t : layer) {
      for (auto p : t.rows) {
        for (auto j : t.cols) {
          if (!mask.index_of(p, j)) continue;
          for (auto k : t.inner) {
            if (contains_sorted(sp.a_cols[p], k) && contains_sorted(sp.b_rows[j], k) && hit(p, j, k)) ++c.layer_terms;
          }
        }
      }
    }
  }
  for (const auto& t : dec.residual) {
    if (hit(t.p, t.j, t.k)) ++c.residual_terms;
  }
  for (const auto& [key, count] : hits) {
    if (count == 0) ++c.missing;
  }
  return c;
}

// ---------------------------------------------------------------- schedules

namespace {

// Colours the edges of a bipartite multigraph with max-degree colours by
// flipping alternating paths.
std::vector<std::size_t> colour_bipartite(std::size_t left, std::size_t right,
                                          const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                                          std::size_t& max_degree) {
  std::vector<std::size_t> dl(left, 0), dr(right, 0);
  for (const auto& [u, v] : edges) {
    ++dl[u];
    ++dr[v];
  }
  std::size_t D = 0;
  for (auto x : dl) D = std::max(D, x);
  for (auto x : dr) D = std::max(D, x);
  max_degree = D;
  std::vector<std::size_t> colour(edges.size(), 0);
  if (D == 0) return colour;
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> at_l(left * D, kNone), at_r(right * D, kNone);
  auto free_at = [&](const std::vector<std::size_t>& tab, std::size_t x) {
    for (std::size_t c = 0; c < D; ++c) {
      if (tab[x * D + c] == kNone) return c;
    }
    throw std::logic_error("edge colouring: no free colour");
  };
  std::vector<std::size_t> path;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [u, v] = edges[e];
    const std::size_t ca = free_at(at_l, u);
    const std::size_t cb = free_at(at_r, v);
    if (at_r[v * D + ca] != kNone) {
      // Swap ca and cb along the alternating path that starts at v with ca.
      path.clear();
      std::size_t x = v;
      bool on_right = true;
      std::size_t c = ca;
      while (true) {
        const std::size_t f = on_right ? at_r[x * D + c] : at_l[x * D + c];
        if (f == kNone) break;
        path.push_back(f);
        x = on_right ? edges[f].first : edges[f].second;
        on_right = !on_right;
        c = c == ca ? cb : ca;
      }
      for (auto f : path) {
        at_l[edges[f].first * D + colour[f]] = kNone;
        at_r[edges[f].second * D + colour[f]] = kNone;
      }
      for (auto f : path) {
        colour[f] = colour[f] == ca ? cb : ca;
        at_l[edges[f].first * D + colour[f]] = f;
        at_r[edges[f].second * D + colour[f]] = f;
      }
    }
    colour[e] = ca;
    at_l[u * D + ca] = e;
    at_r[v * D + ca] = e;
  }
  return colour;
}

struct TermSend {
  std::size_t dst;
  std::size_t k;
  std::size_t idx;  // position in dst's mask row
};

struct Role {
  std::size_t triple;
  std::size_t index;
};

struct SparsePlan {
  std::size_t n = 0;
  std::size_t d = 0;
  std::size_t g = 1;
  std::size_t t = 1;
  OutputMask mask;
  Supports sp;
  std::vector<std::vector<Triple>> layers;
  std::vector<std::vector<std::optional<Role>>> row_role;  // [layer][p]
  std::vector<std::vector<std::optional<Role>>> col_role;  // [layer][p]
  std::vector<std::vector<std::vector<TermSend>>> residual;  // [round][sender]
  std::size_t residual_rounds = 0;
  std::size_t total_rounds = 1;
};

std::size_t residual_rounds_for(std::size_t n, std::size_t d, const std::vector<Term>& terms) {
  std::vector<std::size_t> out(n, 0), in(n, 0);
  std::size_t D = 0;
  for (const auto& t : terms) {
    D = std::max({D, ++out[t.j], ++in[t.p]});
  }
  return ceil_div(D, d);
}

std::size_t layered_rounds(std::size_t layers, std::size_t g, std::size_t residual_rounds) {
  const std::size_t tail = std::max<std::size_t>(residual_rounds, layers > 0 ? 1 : 0);
  return std::max<std::size_t>(1, layers * g + tail);
}

std::shared_ptr<const SparsePlan> make_plan(std::size_t n, std::size_t d, const SparseMatrix& a,
                                            const SparseMatrix& b, const OutputMask& mask,
                                            std::vector<std::vector<Triple>> layers,
                                            const std::vector<Term>& residual) {
  auto plan = std::make_shared<SparsePlan>();
  plan->n = n;
  plan->d = d;
  plan->g = sparse_block_grid(d);
  plan->t = ceil_div(d, plan->g);
  plan->mask = mask;
  plan->sp = supports(a, b);
  plan->layers = std::move(layers);

  for (const auto& layer : plan->layers) {
    if (layer.size() * plan->g * plan->g > n) throw std::logic_error("sparse: layer needs more than n processors");
    auto& rr = plan->row_role.emplace_back(n);
    auto& cr = plan->col_role.emplace_back(n);
    for (std::size_t tau = 0; tau < layer.size(); ++tau) {
      const auto& tr = layer[tau];
      if (tr.rows.size() > d || tr.inner.size() > d || tr.cols.size() > d) throw std::logic_error("sparse: oversized triple");
      for (std::size_t x = 0; x < tr.rows.size(); ++x) {
        if (rr[tr.rows[x]] || plan->sp.a_cols[tr.rows[x]] != tr.inner) throw std::logic_error("sparse: invalid layer rows");
        rr[tr.rows[x]] = Role{tau, x};
      }
      for (std::size_t x = 0; x < tr.cols.size(); ++x) {
        if (cr[tr.cols[x]]) throw std::logic_error("sparse: layer columns overlap");
        cr[tr.cols[x]] = Role{tau, x};
      }
    }
  }

  // Residual transfers: B[k][j] travels from the owner of column j to the owner of row p.
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  edges.reserve(residual.size());
  for (const auto& t : residual) edges.emplace_back(t.j, t.p);
  std::size_t max_degree = 0;
  const auto colour = colour_bipartite(n, n, edges, max_degree);
  plan->residual_rounds = ceil_div(max_degree, d);
  plan->residual.assign(plan->residual_rounds, std::vector<std::vector<TermSend>>(n));
  for (std::size_t e = 0; e < residual.size(); ++e) {
    const auto& t = residual[e];
    const auto idx = mask.index_of(t.p, t.j);
    if (!idx) throw std::logic_error("sparse: residual term outside the mask");
    plan->residual[colour[e] / d][t.j].push_back({t.p, t.k, *idx});
  }
  plan->total_rounds = layered_rounds(plan->layers.size(), plan->g, plan->residual_rounds);
  return plan;
}

enum : std::uint8_t { kARow = 1, kBCol, kOutRow, kGatherA, kGatherB, kAIn, kBIn, kCTile, kResult, kTerm };

std::vector<Element> pairs_of(const std::vector<Triplet>& list, bool by_col) {
  std::vector<Element> out;
  out.reserve(2 * list.size());
  for (const auto& t : list) {
    out.push_back(by_col ? t.col : t.row);
    out.push_back(t.value);
  }
  return out;
}

// Value for index k in a sorted (index, value) list, or zero.
Element lookup(const std::vector<Element>& pairs, std::size_t k, Element zero) {
  std::size_t lo = 0;
  std::size_t hi = pairs.size() / 2;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (pairs[2 * mid] < k) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo < pairs.size() / 2 && pairs[2 * lo] == k ? pairs[2 * lo + 1] : zero;
}

Schedule build_program(const char* name, std::shared_ptr<const SparsePlan> plan, const SparseMatrix& a,
                       const SparseMatrix& b, const SemiringSpec& s, const ScheduleOptions& options) {
  const std::size_t n = plan->n;
  auto rows = std::make_shared<const std::vector<std::vector<Triplet>>>(a.row_lists());
  auto cols = std::make_shared<const std::vector<std::vector<Triplet>>>(b.col_lists());

  Schedule sched;
  sched.name = name;
  sched.config = detail::make_config(n, 4 * plan->d, options, name);
  sched.predicted_rounds = plan->total_rounds;

  sched.program.init = [plan, rows, cols, s](ProcessorId p) {
    LocalStore st;
    st.put(make_tag(kARow), pairs_of((*rows)[p], true));
    st.put(make_tag(kBCol), pairs_of((*cols)[p], false));
    st.put(make_tag(kOutRow), std::vector<Element>(plan->mask.rows[p].size(), s.zero), true);
    return st;
  };

  sched.program.step = [plan, s](Context& ctx) {
    const std::size_t p = ctx.self();
    const std::size_t r = ctx.round();
    const std::size_t g = plan->g;
    const std::size_t t = plan->t;
    const std::size_t layers = plan->layers.size();
    auto& st = ctx.state();
    const auto& arow = st.at(make_tag(kARow));
    const auto& bcol = st.at(make_tag(kBCol));

    // Layer results and residual terms for this processor's output row.
    {
      auto& out = st.at(make_tag(kOutRow));
      for (const auto& m : ctx.inbox()) {
        if (tag_kind(m.tag) == kResult) {
          out[tag_a(m.tag)] = s.add(out[tag_a(m.tag)], m.payload.at(0));
        } else if (tag_kind(m.tag) == kTerm) {
          out[tag_a(m.tag)] = s.add(out[tag_a(m.tag)], s.mul(lookup(arow, tag_b(m.tag), s.zero), m.payload.at(0)));
        }
      }
    }

    // Cannon iteration x of layer l on the triple this processor serves.
    if (r >= 1 && r <= layers * g) {
      const std::size_t l = (r - 1) / g;
      const std::size_t x = (r - 1) % g + 1;
      const std::size_t tau = p / (g * g);
      if (tau < plan->layers[l].size()) {
        const Triple& tr = plan->layers[l][tau];
        const std::size_t base = tau * g * g;
        const std::size_t pos = p % (g * g);
        const std::size_t gi = pos / g;
        const std::size_t gj = pos % g;
        std::vector<Element> at(t * t, s.zero), bt(t * t, s.zero);
        if (x == 1) {
          for (const auto& m : ctx.inbox()) {
            if (tag_kind(m.tag) == kGatherA) {
              const std::size_t row = tag_a(m.tag) - gi * t;
              std::copy(m.payload.begin(), m.payload.end(), at.begin() + static_cast<std::ptrdiff_t>(row * t));
            } else if (tag_kind(m.tag) == kGatherB) {
              const std::size_t col = tag_a(m.tag) - gj * t;
              for (std::size_t e = 0; e < m.payload.size(); ++e) bt[e * t + col] = m.payload[e];
            }
          }
          st.put(make_tag(kCTile), std::vector<Element>(t * t, s.zero));
        } else {
          for (const auto& m : ctx.inbox()) {
            if (tag_kind(m.tag) == kAIn) at = m.payload;
            if (tag_kind(m.tag) == kBIn) bt = m.payload;
          }
        }
        multiply_accumulate(st.at(make_tag(kCTile)), at, bt, t, t, t, s);
        if (x < g) {
          ctx.send(base + gi * g + (gj + g - 1) % g, make_tag(kAIn), std::move(at));
          ctx.send(base + ((gi + g - 1) % g) * g + gj, make_tag(kBIn), std::move(bt));
        } else {
          auto ct = st.take(make_tag(kCTile));
          for (std::size_t rr = 0; rr < t; ++rr) {
            const std::size_t ri = gi * t + rr;
            if (ri >= tr.rows.size()) break;
            for (std::size_t cc = 0; cc < t; ++cc) {
              const std::size_t ci = gj * t + cc;
              if (ci >= tr.cols.size()) break;
              if (auto idx = plan->mask.index_of(tr.rows[ri], tr.cols[ci])) {
                ctx.send(tr.rows[ri], make_tag(kResult, *idx), {ct[rr * t + cc]});
              }
            }
          }
        }
      }
    }

    // Gather for layer r / g: rows and columns go straight to their skewed tiles.
    if (r % g == 0 && r / g < layers) {
      const std::size_t l = r / g;
      if (const auto& role = plan->row_role[l][p]) {
        const Triple& tr = plan->layers[l][role->triple];
        const std::size_t gi = role->index / t;
        for (std::size_t kt = 0; kt < g; ++kt) {
          const std::size_t lo = kt * t;
          const std::size_t hi = std::min(tr.inner.size(), lo + t);
          if (lo >= hi) break;
          std::vector<Element> vals;
          for (std::size_t ki = lo; ki < hi; ++ki) vals.push_back(arow[2 * ki + 1]);
          const std::size_t dst = role->triple * g * g + gi * g + (kt + g - gi) % g;
          ctx.send(dst, make_tag(kGatherA, role->index, kt), std::move(vals));
        }
      }
      if (const auto& role = plan->col_role[l][p]) {
        const Triple& tr = plan->layers[l][role->triple];
        const std::size_t gj = role->index / t;
        for (std::size_t kt = 0; kt < g; ++kt) {
          const std::size_t lo = kt * t;
          const std::size_t hi = std::min(tr.inner.size(), lo + t);
          if (lo >= hi) break;
          std::vector<Element> vals;
          for (std::size_t ki = lo; ki < hi; ++ki) vals.push_back(lookup(bcol, tr.inner[ki], s.zero));
          const std::size_t dst = role->triple * g * g + ((kt + g - gj) % g) * g + gj;
          ctx.send(dst, make_tag(kGatherB, role->index, kt), std::move(vals));
        }
      }
    }

    // Residual terms, overlapping the return of the last layer.
    if (r >= layers * g && r - layers * g < plan->residual_rounds) {
      for (const auto& snd : plan->residual[r - layers * g][p]) {
        ctx.send(snd.dst, make_tag(kTerm, snd.idx, snd.k), {lookup(bcol, snd.k, s.zero)});
      }
    }

    if (r >= plan->total_rounds) ctx.halt();
  };

  sched.assemble = [plan, s](std::span<const LocalStore> states) {
    DenseMatrix c(plan->n, plan->n, s.zero);
    for (std::size_t p = 0; p < plan->n; ++p) {
      const auto& out = states[p].at(make_tag(kOutRow));
      for (std::size_t idx = 0; idx < out.size(); ++idx) c(p, plan->mask.rows[p][idx]) = out[idx];
    }
    return c;
  };
  return sched;
}

std::vector<Term> all_terms(const SparseMatrix& a, const SparseMatrix& b, const OutputMask& mask) {
  return TermLedger(a, b, mask).remaining(mask);
}

}  // namespace

Schedule schedule_sparse_trivial(std::size_t n, std::size_t d, const SparseMatrix& a, const SparseMatrix& b,
                                 const OutputMask& mask, const SemiringSpec& s, const ScheduleOptions& options) {
  check_square_sparse("schedule_sparse_trivial", n, d, a, b);
  check_mask(mask, n, d);
  auto plan = make_plan(n, d, a, b, mask, {}, all_terms(a, b, mask));
  return build_program("sparse-trivial", std::move(plan), a, b, s, options);
}

TwoPhaseSchedule schedule_sparse_twophase(std::size_t n, std::size_t d, const SparseMatrix& a,
                                          const SparseMatrix& b, const OutputMask& mask, const SemiringSpec& s,
                                          const EpsilonSchedule& eps, const ScheduleOptions& options) {
  TwoPhaseSchedule out;
  out.decomposition = decompose(a, b, mask, d, eps);
  const auto terms = all_terms(a, b, mask);
  out.trivial_rounds = layered_rounds(0, 1, residual_rounds_for(n, d, terms));
  const std::size_t layered =
      layered_rounds(out.decomposition.layers.size(), sparse_block_grid(d),
                     residual_rounds_for(n, d, out.decomposition.residual));
  std::shared_ptr<const SparsePlan> plan;
  if (layered <= out.trivial_rounds) {
    plan = make_plan(n, d, a, b, mask, out.decomposition.layers, out.decomposition.residual);
  } else {
    out.fell_back = true;
    plan = make_plan(n, d, a, b, mask, {}, terms);
  }
  out.schedule = build_program("sparse-twophase", std::move(plan), a, b, s, options);
  return out;
}

}  // namespace mpcmm
