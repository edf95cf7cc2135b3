#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace editgauge {

enum class DiffLabel { Keep, Add, Del };

char diff_label_char(DiffLabel l);  // '=', '+', '-'

struct DiffOp {
  DiffLabel label;
  std::string token;
  bool operator==(const DiffOp&) const = default;
};

// Token-level edit script. Projecting on {Keep, Del} reproduces the old
// sequence; projecting on {Keep, Add} reproduces the new one.
struct Alignment {
  std::vector<DiffOp> ops;

  std::vector<std::string> old_side() const;
  std::vector<std::string> new_side() const;
  std::size_t edit_cost() const;  // Add + Del count
};

struct Hunk {
  std::vector<std::string> removed_lines;
  std::vector<std::string> added_lines;
  std::size_t old_start = 0;  // index into the old line list
  std::size_t new_start = 0;  // index into the new line list
};

// Minimal edit script (Myers O(ND)) grouped into maximal runs of consecutive
// changes, context 0. Identical inputs give an empty list. Inputs whose edit
// distance exceeds max_d collapse into one whole-file hunk.
std::vector<Hunk> line_diff(const std::vector<std::string>& old_lines,
                            const std::vector<std::string>& new_lines,
                            std::size_t max_d = 1u << 14);

// LCS-minimal token alignment; inside a mixed run deletions are emitted
// before insertions.
Alignment token_diff(const std::vector<std::string>& old_tokens,
                     const std::vector<std::string>& new_tokens);

// Applies the script to old tokens; equals the new side by construction.
std::vector<std::string> apply_alignment(const Alignment& a);

// Length of the longest common subsequence of two code point sequences.
std::size_t lcs_length_chars(const std::string& a, const std::string& b);

// 2*LCS_chars / (|a|+|b|); 0 when either side is empty.
double similarity_ratio(const std::string& a, const std::string& b);

}  // namespace editgauge
