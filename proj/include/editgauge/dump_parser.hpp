#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "editgauge/revision.hpp"

namespace editgauge {

struct DumpStats {
  std::size_t pages = 0;
  std::size_t revisions = 0;
  std::size_t skipped_missing_id = 0;
};

using RevisionSink = std::function<void(Revision&&)>;

// Streams a MediaWiki XML export, emitting one Revision per <revision>
// element in document order. Throws DataError on malformed XML, reporting
// the byte offset. Revisions without an <id> are counted and skipped.
DumpStats parse_dump(std::istream& xml_stream, const RevisionSink& sink);

// File variant; gzip/bzip2 compression is sniffed from magic bytes.
DumpStats parse_dump_file(const std::string& path, const RevisionSink& sink);

// Convenience for small inputs and tests.
std::vector<Revision> parse_dump_to_vector(std::istream& xml_stream,
                                           DumpStats* stats = nullptr);
std::vector<Revision> parse_dump_file_to_vector(const std::string& path,
                                                DumpStats* stats = nullptr);

// Lossless re-serialization of a revision list as a minimal export document.
void write_dump(std::ostream& out, const std::vector<Revision>& revisions,
                const std::string& page_title = "Page");

}  // namespace editgauge
