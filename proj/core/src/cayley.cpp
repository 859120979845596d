#include "soficspin/cayley.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace soficspin {

std::string to_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

// ---------------------------------------------------------------------------
// GroupSpec
// ---------------------------------------------------------------------------

void GroupSpec::validate() const {
  if (r < 1) throw ConfigError("GroupSpec: generator count r must be >= 1");
  if (max_radius < 0) throw ConfigError("GroupSpec: max_radius must be >= 0");
  switch (family) {
    case GroupFamily::FreeGroup:
    case GroupFamily::FreeAbelian:
      break;
    case GroupFamily::FreeProductCyclic:
      if (static_cast<int>(orders.size()) != r)
        throw ConfigError("GroupSpec: need one cyclic order per generator");
      for (int m : orders)
        if (m < 2) throw ConfigError("GroupSpec: cyclic orders must be >= 2");
      break;
    case GroupFamily::FinitePresented:
      for (const Word& w : relators) {
        if (w.empty()) throw ConfigError("GroupSpec: empty relator");
        for (int l : w)
          if (l < 0 || l >= 2 * r) throw ConfigError("GroupSpec: relator letter out of range");
        for (size_t i = 0; i + 1 < w.size(); ++i)
          if (w[i + 1] == inverse_letter(w[i], r))
            throw ConfigError("GroupSpec: relator not freely reduced");
      }
      break;
  }
}

std::vector<Word> GroupSpec::defining_relators() const {
  std::vector<Word> rel;
  switch (family) {
    case GroupFamily::FreeGroup:
      break;
    case GroupFamily::FreeAbelian:
      for (int i = 0; i < r; ++i)
        for (int j = i + 1; j < r; ++j)
          rel.push_back({i, j, i + r, j + r});  // [s_i, s_j]
      break;
    case GroupFamily::FreeProductCyclic:
      for (int i = 0; i < r; ++i) rel.push_back(Word(orders[i], i));  // s_i^{m_i}
      break;
    case GroupFamily::FinitePresented:
      rel = relators;
      break;
  }
  return rel;
}

GroupSpec GroupSpec::free_group(int r) {
  GroupSpec s;
  s.family = GroupFamily::FreeGroup;
  s.r = r;
  s.validate();
  return s;
}

GroupSpec GroupSpec::free_abelian(int r) {
  GroupSpec s;
  s.family = GroupFamily::FreeAbelian;
  s.r = r;
  s.validate();
  return s;
}

GroupSpec GroupSpec::free_product_cyclic(std::vector<int> orders) {
  GroupSpec s;
  s.family = GroupFamily::FreeProductCyclic;
  s.r = static_cast<int>(orders.size());
  s.orders = std::move(orders);
  s.validate();
  return s;
}

GroupSpec GroupSpec::finitely_presented(int r, std::vector<Word> relators) {
  GroupSpec s;
  s.family = GroupFamily::FinitePresented;
  s.r = r;
  s.relators = std::move(relators);
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------
// Normal forms: closed-form families
// ---------------------------------------------------------------------------

namespace {

Word free_reduce(const Word& w, int r) {
  Word out;
  out.reserve(w.size());
  for (int l : w) {
    if (!out.empty() && out.back() == inverse_letter(l, r)) {
      out.pop_back();
    } else {
      out.push_back(l);
    }
  }
  return out;
}

Word abelian_normal_form(const Word& w, int r) {
  std::vector<long long> e(r, 0);
  for (int l : w) {
    if (l < r) ++e[l];
    else --e[l - r];
  }
  Word out;
  for (int i = 0; i < r; ++i) {
    if (e[i] > 0) out.insert(out.end(), e[i], i);
    else if (e[i] < 0) out.insert(out.end(), -e[i], i + r);
  }
  return out;
}

// Syllable form for free products of cyclic groups: alternating powers of
// distinct generators, exponent in [1, m-1]. The geodesic representative of
// s_j^e uses min(e, m-e) letters, stepping backward when that is shorter.
Word cyclic_product_normal_form(const Word& w, const std::vector<int>& orders, int r) {
  std::vector<std::pair<int, int>> syll;  // (generator, exponent mod order)
  for (int l : w) {
    int j = l < r ? l : l - r;
    int d = l < r ? 1 : -1;
    if (!syll.empty() && syll.back().first == j) {
      int m = orders[j];
      int e = (syll.back().second + d % m + m) % m;
      if (e == 0) syll.pop_back();
      else syll.back().second = e;
    } else {
      int m = orders[j];
      int e = ((d % m) + m) % m;
      if (e != 0) syll.emplace_back(j, e);
    }
  }
  Word out;
  for (auto [j, e] : syll) {
    int m = orders[j];
    if (e <= m - e) out.insert(out.end(), e, j);
    else out.insert(out.end(), m - e, j + r);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Budgeted Knuth-Bendix completion (shortlex) for finite presentations
// ---------------------------------------------------------------------------

bool shortlex_less(const Word& a, const Word& b) {
  if (a.size() != b.size()) return a.size() < b.size();
  return a < b;
}

struct Rule {
  Word lhs, rhs;  // lhs > rhs in shortlex
};

class RewriteSystem {
 public:
  RewriteSystem(const std::vector<Word>& relators, int r, const RewriteBudget& budget)
      : budget_(budget) {
    // Free-reduction rules, then the presentation's relators as equations.
    for (int l = 0; l < 2 * r; ++l) add_equation({l, inverse_letter(l, r)}, {});
    for (const Word& w : relators) add_equation(w, {});
    complete();
  }

  Word reduce(Word w) const {
    long steps = budget_.max_steps;
    return reduce_with_budget(std::move(w), steps);
  }

 private:
  struct LiveRule : Rule {
    bool dead = false;
  };

  Word reduce_with_budget(Word w, long& steps) const {
    bool changed = true;
    while (changed) {
      changed = false;
      for (const LiveRule& rule : rules_) {
        if (rule.dead) continue;
        const Word& l = rule.lhs;
        if (l.size() > w.size()) continue;
        for (size_t p = 0; p + l.size() <= w.size(); ++p) {
          if (--steps < 0)
            throw UndecidableAtBudget("rewriting step budget exhausted");
          if (std::equal(l.begin(), l.end(), w.begin() + p)) {
            Word next;
            next.reserve(w.size() - l.size() + rule.rhs.size());
            next.insert(next.end(), w.begin(), w.begin() + p);
            next.insert(next.end(), rule.rhs.begin(), rule.rhs.end());
            next.insert(next.end(), w.begin() + p + l.size(), w.end());
            w = std::move(next);
            changed = true;
            break;
          }
        }
        if (changed) break;
      }
    }
    return w;
  }

  void add_equation(Word a, Word b) { pending_.emplace_back(std::move(a), std::move(b)); }

  void add_rule(Word lhs, Word rhs) {
    if (static_cast<int>(lhs.size()) > budget_.max_word_len)
      throw UndecidableAtBudget("rewriting rule exceeds word-length budget");
    LiveRule rule;
    rule.lhs = std::move(lhs);
    rule.rhs = std::move(rhs);
    rules_.push_back(std::move(rule));
    int live = 0;
    for (const auto& r : rules_)
      if (!r.dead) ++live;
    if (live > budget_.max_rules)
      throw UndecidableAtBudget("rewriting rule budget exhausted");
    size_t n = rules_.size() - 1;
    for (size_t i = 0; i < rules_.size(); ++i) {
      pairs_.emplace_back(i, n);
      if (i != n) pairs_.emplace_back(n, i);
    }
    // Interreduce: older rules whose lhs now reduces get re-queued as equations.
    for (size_t i = 0; i + 1 < rules_.size(); ++i) {
      if (rules_[i].dead) continue;
      if (contains(rules_[i].lhs, rules_.back().lhs)) {
        rules_[i].dead = true;
        add_equation(rules_[i].lhs, rules_[i].rhs);
      }
    }
  }

  static bool contains(const Word& w, const Word& sub) {
    if (sub.size() > w.size()) return false;
    for (size_t p = 0; p + sub.size() <= w.size(); ++p)
      if (std::equal(sub.begin(), sub.end(), w.begin() + p)) return true;
    return false;
  }

  void process_equation(Word a, Word b, long& steps) {
    a = reduce_with_budget(std::move(a), steps);
    b = reduce_with_budget(std::move(b), steps);
    if (a == b) return;
    if (shortlex_less(a, b)) std::swap(a, b);
    add_rule(std::move(a), std::move(b));
  }

  void complete() {
    long steps = budget_.max_steps;
    while (!pending_.empty() || !pairs_.empty()) {
      while (!pending_.empty()) {
        auto [a, b] = std::move(pending_.front());
        pending_.pop_front();
        process_equation(std::move(a), std::move(b), steps);
      }
      if (pairs_.empty()) break;
      auto [i, j] = pairs_.front();
      pairs_.pop_front();
      if (i >= rules_.size() || j >= rules_.size()) continue;
      if (rules_[i].dead || rules_[j].dead) continue;
      overlap_equations(rules_[i], rules_[j]);
    }
  }

  // Critical pairs from overlaps "suffix of l1 == prefix of l2" and from l2
  // occurring inside l1.
  void overlap_equations(const Rule& r1, const Rule& r2) {
    const Word& l1 = r1.lhs;
    const Word& l2 = r2.lhs;
    size_t maxk = std::min(l1.size(), l2.size());
    for (size_t k = 1; k < maxk; ++k) {
      if (!std::equal(l2.begin(), l2.begin() + k, l1.end() - k)) continue;
      // w = l1 . l2[k:]
      Word left = r1.rhs;
      left.insert(left.end(), l2.begin() + k, l2.end());
      Word right(l1.begin(), l1.end() - k);
      right.insert(right.end(), r2.rhs.begin(), r2.rhs.end());
      add_equation(std::move(left), std::move(right));
    }
    if (l2.size() <= l1.size()) {
      for (size_t p = 0; p + l2.size() <= l1.size(); ++p) {
        if (p == 0 && l2.size() == l1.size()) continue;
        if (!std::equal(l2.begin(), l2.end(), l1.begin() + p)) continue;
        Word right(l1.begin(), l1.begin() + p);
        right.insert(right.end(), r2.rhs.begin(), r2.rhs.end());
        right.insert(right.end(), l1.begin() + p + l2.size(), l1.end());
        add_equation(r1.rhs, std::move(right));
      }
    }
  }

  RewriteBudget budget_;
  std::vector<LiveRule> rules_;
  std::deque<std::pair<Word, Word>> pending_;
  std::deque<std::pair<size_t, size_t>> pairs_;
};

}  // namespace

// ---------------------------------------------------------------------------
// GroupContext
// ---------------------------------------------------------------------------

struct GroupContext::Impl {
  RewriteSystem rs;
};

GroupContext::GroupContext(GroupSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  if (spec_.family == GroupFamily::FinitePresented) {
    impl_ = std::make_unique<Impl>(Impl{RewriteSystem(spec_.relators, spec_.r, spec_.budget)});
  }
}

GroupContext::~GroupContext() = default;
GroupContext::GroupContext(GroupContext&&) noexcept = default;
GroupContext& GroupContext::operator=(GroupContext&&) noexcept = default;

Word GroupContext::normal_form(const Word& w) const {
  for (int l : w)
    if (l < 0 || l >= 2 * spec_.r) throw ConfigError("word letter out of range");
  switch (spec_.family) {
    case GroupFamily::FreeGroup:
      return free_reduce(w, spec_.r);
    case GroupFamily::FreeAbelian:
      return abelian_normal_form(w, spec_.r);
    case GroupFamily::FreeProductCyclic:
      return cyclic_product_normal_form(w, spec_.orders, spec_.r);
    case GroupFamily::FinitePresented:
      return impl_->rs.reduce(w);
  }
  return {};
}

Word GroupContext::multiply(const Word& a, const Word& b) const {
  Word w;
  w.reserve(a.size() + b.size());
  w.insert(w.end(), a.begin(), a.end());
  w.insert(w.end(), b.begin(), b.end());
  return normal_form(w);
}

// ---------------------------------------------------------------------------
// Ball construction
// ---------------------------------------------------------------------------

int CayleyBall::index_of(const Word& nf) const {
  auto it = index.find(nf);
  return it == index.end() ? -1 : it->second;
}

CayleyBall build_ball(const GroupContext& ctx, int R) {
  const GroupSpec& spec = ctx.spec();
  if (R < 0) throw ConfigError("build_ball: negative radius");
  if (R > spec.max_radius) throw BudgetExceeded("build_ball: R exceeds spec.max_radius");

  CayleyBall ball;
  ball.radius = R;
  ball.r = spec.r;
  ball.vertices.push_back({});
  ball.depth.push_back(0);
  ball.parent.push_back(-1);
  ball.parent_letter.push_back(-1);
  ball.index[{}] = 0;
  ball.sphere_start = {0, 1};

  int layer_begin = 0, layer_end = 1;
  for (int d = 1; d <= R; ++d) {
    // Candidate next-layer elements: unseen neighbors s * gamma of the
    // previous layer. Track the (parent, letter) giving each first discovery;
    // ties resolved toward the lexicographically smallest (parent, letter).
    std::map<Word, std::pair<int, int>> fresh;
    for (int v = layer_begin; v < layer_end; ++v) {
      for (int l = 0; l < 2 * spec.r; ++l) {
        Word nf = ctx.multiply(Word{l}, ball.vertices[v]);
        if (ball.index.count(nf)) continue;
        auto it = fresh.find(nf);
        if (it == fresh.end() || std::pair(v, l) < it->second) {
          fresh[nf] = {v, l};
        }
      }
    }
    for (auto& [nf, via] : fresh) {  // std::map iterates lexicographically
      int id = ball.size();
      ball.index[nf] = id;
      ball.vertices.push_back(nf);
      ball.depth.push_back(d);
      ball.parent.push_back(via.first);
      ball.parent_letter.push_back(via.second);
    }
    layer_begin = layer_end;
    layer_end = ball.size();
    ball.sphere_start.push_back(layer_end);
    if (layer_begin == layer_end) {
      // Finite group exhausted before reaching R; pad the prefix table.
      while (static_cast<int>(ball.sphere_start.size()) < R + 2)
        ball.sphere_start.push_back(layer_end);
      break;
    }
  }
  while (static_cast<int>(ball.sphere_start.size()) < R + 2)
    ball.sphere_start.push_back(ball.size());

  ball.out.assign(spec.r, std::vector<int>(ball.size(), -1));
  ball.in.assign(spec.r, std::vector<int>(ball.size(), -1));
  for (int v = 0; v < ball.size(); ++v) {
    for (int i = 0; i < spec.r; ++i) {
      Word nf = ctx.multiply(Word{i}, ball.vertices[v]);
      int dst = ball.index_of(nf);
      if (dst < 0) continue;
      ball.edges.push_back({v, i, dst});
      ball.out[i][v] = dst;
      ball.in[i][dst] = v;
    }
  }
  return ball;
}

CayleyBall build_ball(const GroupSpec& spec, int R) {
  GroupContext ctx(spec);
  return build_ball(ctx, R);
}

std::vector<long long> sphere_sizes(const GroupSpec& spec, int R) {
  CayleyBall ball = build_ball(spec, R);
  std::vector<long long> s(R + 1, 0);
  for (int d : ball.depth) ++s[d];
  return s;
}

// ---------------------------------------------------------------------------
// Metric tails
// ---------------------------------------------------------------------------

std::optional<double> sphere_size_closed_form(const GroupSpec& spec, int n) {
  if (n == 0) return 1.0;
  const int r = spec.r;
  switch (spec.family) {
    case GroupFamily::FreeGroup:
      return 2.0 * r * std::pow(2.0 * r - 1.0, n - 1);
    case GroupFamily::FreeAbelian: {
      // Lattice points at L1 distance n: sum_k 2^k C(r,k) C(n-1,k-1).
      double total = 0.0;
      for (int k = 1; k <= std::min(r, n); ++k) {
        double c_rk = 1.0, c_n = 1.0;
        for (int t = 0; t < k; ++t) c_rk = c_rk * (r - t) / (t + 1);
        for (int t = 0; t < k - 1; ++t) c_n = c_n * (n - 1 - t) / (t + 1);
        total += std::ldexp(c_rk * c_n, k);
      }
      return total;
    }
    case GroupFamily::FreeProductCyclic: {
      // DP over alternating syllables; a[j] counts elements of length m whose
      // leading syllable uses generator j.
      std::vector<std::vector<double>> a(n + 1, std::vector<double>(r, 0.0));
      auto syllables_of_length = [&](int j, int len) -> double {
        int m = spec.orders[j];
        if (len < 1 || 2 * len > m) return 0.0;
        return 2 * len < m ? 2.0 : 1.0;
      };
      for (int len = 1; len <= n; ++len) {
        for (int j = 0; j < r; ++j) {
          double cnt = 0.0;
          for (int l = 1; l <= len; ++l) {
            double w = syllables_of_length(j, l);
            if (w == 0.0) continue;
            if (l == len) {
              cnt += w;
            } else {
              for (int k = 0; k < r; ++k)
                if (k != j) cnt += w * a[len - l][k];
            }
          }
          a[len][j] = cnt;
        }
      }
      double total = 0.0;
      for (int j = 0; j < r; ++j) total += a[n][j];
      return total;
    }
    case GroupFamily::FinitePresented:
      return std::nullopt;
  }
  return std::nullopt;
}

double metric_tail(const GroupSpec& spec, int R) {
  spec.validate();
  if (R < 0) throw ConfigError("metric_tail: negative radius");
  const int r = spec.r;
  const double x = 1.0 / (3.0 * r);
  const double universal = 3.0 * std::pow(2.0 / 3.0, R + 1);

  if (spec.family == GroupFamily::FinitePresented) {
    // |S_n| <= 2r(2r-1)^{n-1}: geometric closed form.
    const double q = (2.0 * r - 1.0) * x;
    double bound = (2.0 * r / (2.0 * r - 1.0)) * std::pow(q, R + 1) / (1.0 - q);
    return std::min(bound, universal);
  }

  // Exact sum of |S_n| (3r)^{-n} for n > R, with a geometric certificate for
  // the truncated remainder (term ratio is at most 2rx = 2/3).
  double acc = 0.0;
  double term = 0.0;
  int n = R;
  for (int count = 0; count < 600; ++count) {
    ++n;
    term = *sphere_size_closed_form(spec, n) * std::pow(x, n);
    acc += term;
    if (term < 1e-18 * (acc + 1e-300)) break;
  }
  acc += 2.0 * term;  // remainder <= term * sum_k (2/3)^k = 2 * term
  return std::min(acc, universal);
}

}  // namespace soficspin
