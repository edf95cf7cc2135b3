#include "editgauge/diff.hpp"

#include <algorithm>
#include <cassert>

#include "editgauge/text.hpp"

namespace editgauge {

char diff_label_char(DiffLabel l) {
  switch (l) {
    case DiffLabel::Keep: return '=';
    case DiffLabel::Add: return '+';
    case DiffLabel::Del: return '-';
  }
  return '?';
}

std::vector<std::string> Alignment::old_side() const {
  std::vector<std::string> out;
  for (const auto& op : ops)
    if (op.label != DiffLabel::Add) out.push_back(op.token);
  return out;
}

std::vector<std::string> Alignment::new_side() const {
  std::vector<std::string> out;
  for (const auto& op : ops)
    if (op.label != DiffLabel::Del) out.push_back(op.token);
  return out;
}

std::size_t Alignment::edit_cost() const {
  std::size_t c = 0;
  for (const auto& op : ops)
    if (op.label != DiffLabel::Keep) ++c;
  return c;
}

namespace {

// Label script over index space; tokens are attached by the callers.
using Script = std::vector<DiffLabel>;

// Myers greedy O(ND) with a compact per-round trace for backtracking.
// Returns false when the edit distance exceeds max_d.
bool myers(const std::vector<std::string>& a, const std::vector<std::string>& b,
           std::size_t max_d, Script* out) {
  const long n = static_cast<long>(a.size());
  const long m = static_cast<long>(b.size());
  out->clear();

  long pre = 0;
  while (pre < n && pre < m && a[pre] == b[pre]) ++pre;
  long post = 0;
  while (post < n - pre && post < m - pre &&
         a[n - 1 - post] == b[m - 1 - post])
    ++post;

  const long an = n - pre - post;
  const long bm = m - pre - post;
  Script mid;
  if (an == 0) {
    mid.assign(static_cast<std::size_t>(bm), DiffLabel::Add);
  } else if (bm == 0) {
    mid.assign(static_cast<std::size_t>(an), DiffLabel::Del);
  } else {
    const long d_cap = std::min<long>(an + bm, static_cast<long>(max_d));
    std::vector<long> v(static_cast<std::size_t>(2 * d_cap + 3), 0);
    const long off = d_cap + 1;
    // trace[d][i] = end x for diagonal k = -d + 2i after round d
    std::vector<std::vector<long>> trace;
    trace.reserve(static_cast<std::size_t>(d_cap) + 1);
    long found_d = -1;
    for (long d = 0; d <= d_cap && found_d < 0; ++d) {
      for (long k = -d; k <= d; k += 2) {
        long x;
        if (k == -d || (k != d && v[static_cast<std::size_t>(off + k - 1)] <
                                      v[static_cast<std::size_t>(off + k + 1)]))
          x = v[static_cast<std::size_t>(off + k + 1)];
        else
          x = v[static_cast<std::size_t>(off + k - 1)] + 1;
        long y = x - k;
        while (x < an && y < bm &&
               a[static_cast<std::size_t>(pre + x)] ==
                   b[static_cast<std::size_t>(pre + y)])
          ++x, ++y;
        v[static_cast<std::size_t>(off + k)] = x;
        if (x >= an && y >= bm) {
          found_d = d;
          break;
        }
      }
      std::vector<long> row(static_cast<std::size_t>(d) + 1);
      for (long k = -d, i = 0; k <= d; k += 2, ++i)
        row[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(off + k)];
      trace.push_back(std::move(row));
    }
    if (found_d < 0) return false;

    auto trace_at = [&](long d, long k) {
      return trace[static_cast<std::size_t>(d)][static_cast<std::size_t>((k + d) / 2)];
    };

    Script rev;
    long x = an, y = bm;
    for (long d = found_d; d > 0; --d) {
      const long k = x - y;
      long prev_k;
      if (k == -d ||
          (k != d && trace_at(d - 1, k - 1) < trace_at(d - 1, k + 1)))
        prev_k = k + 1;
      else
        prev_k = k - 1;
      const long prev_x = trace_at(d - 1, prev_k);
      const long prev_y = prev_x - prev_k;
      const long snake_to_x = (prev_k == k + 1) ? prev_x : prev_x + 1;
      while (x > snake_to_x) {
        rev.push_back(DiffLabel::Keep);
        --x, --y;
      }
      rev.push_back(prev_k == k + 1 ? DiffLabel::Add : DiffLabel::Del);
      x = prev_x;
      y = prev_y;
    }
    while (x > 0) {
      rev.push_back(DiffLabel::Keep);
      --x, --y;
    }
    assert(y == 0);
    mid.assign(rev.rbegin(), rev.rend());
  }

  out->reserve(static_cast<std::size_t>(n + m));
  out->insert(out->end(), static_cast<std::size_t>(pre), DiffLabel::Keep);
  out->insert(out->end(), mid.begin(), mid.end());
  out->insert(out->end(), static_cast<std::size_t>(post), DiffLabel::Keep);
  return true;
}

// Within each maximal run of changes, deletions come before insertions.
Script canonicalize(const Script& s) {
  Script out;
  out.reserve(s.size());
  std::size_t i = 0;
  while (i < s.size()) {
    if (s[i] == DiffLabel::Keep) {
      out.push_back(s[i++]);
      continue;
    }
    std::size_t dels = 0, adds = 0;
    while (i < s.size() && s[i] != DiffLabel::Keep) {
      if (s[i] == DiffLabel::Del)
        ++dels;
      else
        ++adds;
      ++i;
    }
    out.insert(out.end(), dels, DiffLabel::Del);
    out.insert(out.end(), adds, DiffLabel::Add);
  }
  return out;
}

Script whole_replacement(std::size_t n, std::size_t m) {
  Script s;
  s.reserve(n + m);
  s.insert(s.end(), n, DiffLabel::Del);
  s.insert(s.end(), m, DiffLabel::Add);
  return s;
}

}  // namespace

std::vector<Hunk> line_diff(const std::vector<std::string>& old_lines,
                            const std::vector<std::string>& new_lines,
                            std::size_t max_d) {
  Script script;
  if (!myers(old_lines, new_lines, max_d, &script))
    script = whole_replacement(old_lines.size(), new_lines.size());
  script = canonicalize(script);

  std::vector<Hunk> hunks;
  std::size_t oi = 0, ni = 0, i = 0;
  while (i < script.size()) {
    if (script[i] == DiffLabel::Keep) {
      ++oi, ++ni, ++i;
      continue;
    }
    Hunk h;
    h.old_start = oi;
    h.new_start = ni;
    while (i < script.size() && script[i] != DiffLabel::Keep) {
      if (script[i] == DiffLabel::Del)
        h.removed_lines.push_back(old_lines[oi++]);
      else
        h.added_lines.push_back(new_lines[ni++]);
      ++i;
    }
    hunks.push_back(std::move(h));
  }
  return hunks;
}

Alignment token_diff(const std::vector<std::string>& old_tokens,
                     const std::vector<std::string>& new_tokens) {
  Script script;
  // Cap at n+m: token sequences come from single sentences, always exact.
  myers(old_tokens, new_tokens, old_tokens.size() + new_tokens.size() + 1,
        &script);
  script = canonicalize(script);

  Alignment a;
  a.ops.reserve(script.size());
  std::size_t oi = 0, ni = 0;
  for (DiffLabel l : script) {
    switch (l) {
      case DiffLabel::Keep:
        a.ops.push_back({l, old_tokens[oi]});
        ++oi, ++ni;
        break;
      case DiffLabel::Del:
        a.ops.push_back({l, old_tokens[oi++]});
        break;
      case DiffLabel::Add:
        a.ops.push_back({l, new_tokens[ni++]});
        break;
    }
  }
  return a;
}

std::vector<std::string> apply_alignment(const Alignment& a) {
  return a.new_side();
}

std::size_t lcs_length_chars(const std::string& a, const std::string& b) {
  std::vector<char32_t> x = utf8_decode(a);
  std::vector<char32_t> y = utf8_decode(b);
  // Degenerate monster lines (wikitext tables): compare bounded prefixes.
  constexpr std::size_t kMax = 4096;
  if (x.size() > kMax) x.resize(kMax);
  if (y.size() > kMax) y.resize(kMax);
  if (x.empty() || y.empty()) return 0;
  std::vector<std::size_t> prev(y.size() + 1, 0), cur(y.size() + 1, 0);
  for (std::size_t i = 1; i <= x.size(); ++i) {
    for (std::size_t j = 1; j <= y.size(); ++j) {
      if (x[i - 1] == y[j - 1])
        cur[j] = prev[j - 1] + 1;
      else
        cur[j] = std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[y.size()];
}

double similarity_ratio(const std::string& a, const std::string& b) {
  const std::size_t la = count_codepoints(a);
  const std::size_t lb = count_codepoints(b);
  if (la == 0 || lb == 0) return 0.0;
  return 2.0 * static_cast<double>(lcs_length_chars(a, b)) /
         static_cast<double>(la + lb);
}

}  // namespace editgauge
