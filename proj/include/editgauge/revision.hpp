#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "editgauge/edit.hpp"

namespace editgauge {

// Seconds since the Unix epoch, UTC.
using Instant = std::int64_t;

// Parses MediaWiki timestamps, e.g. "2003-11-07T00:43:23Z".
Instant parse_timestamp(const std::string& iso8601);
std::string format_timestamp(Instant t);

// (year, month) of an instant, for monthly statistics.
std::pair<int, int> year_month(Instant t);

struct Revision {
  std::int64_t rev_id = 0;
  std::optional<std::int64_t> parent_id;
  Instant timestamp = 0;
  std::string wikitext;
  std::string message;
  std::optional<std::string> contributor;
  // Dump page the revision belongs to; pairing never crosses pages.
  std::optional<std::string> page_title;
};

struct QualityDistribution {
  std::vector<std::string> class_names;
  std::vector<double> probs;
  bool renormalized = false;  // |sum-1| was in (1e-6, 1e-2] at parse time

  std::size_t argmax() const;
  double sum() const;
};

// Default English 6-class ORES set, best to worst.
const std::vector<std::string>& default_quality_classes();

enum class Split { train, valid, test };

const char* split_name(Split s);
Split split_from_string(const std::string& name);

struct CorpusRecord {
  std::int64_t source_rev_id = 0;
  Edit edit;
  std::vector<std::string> message;  // tokenized, non-empty
  QualityDistribution quality;       // empty class_names until labeled
  bool gold = false;                 // one-hot gold label (Wikiclass-style)
  std::optional<Split> split;
};

}  // namespace editgauge
