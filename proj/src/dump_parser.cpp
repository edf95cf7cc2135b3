#include "editgauge/dump_parser.hpp"

#include <expat.h>
#include <zlib.h>

#include <array>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>

#include "editgauge/errors.hpp"

namespace editgauge {

namespace {

// SAX state for the <mediawiki><page><revision> structure. Element content
// is accumulated only while inside fields we care about.
struct ParserState {
  const RevisionSink* sink = nullptr;
  DumpStats stats;

  std::vector<std::string> stack;
  std::string text;
  bool capture = false;

  std::string page_title;
  Revision rev;
  bool rev_has_id = false;
  bool in_contributor = false;
  std::string contributor_name;

  std::string error;

  bool in(const char* a, const char* b) const {
    const std::size_t n = stack.size();
    return n >= 2 && stack[n - 2] == a && stack[n - 1] == b;
  }
};

void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char**) {
  auto* st = static_cast<ParserState*>(user);
  st->stack.emplace_back(name);
  st->text.clear();

  const std::string& el = st->stack.back();
  if (el == "revision") {
    st->rev = Revision{};
    st->rev.page_title = st->page_title.empty()
                             ? std::optional<std::string>{}
                             : std::optional<std::string>{st->page_title};
    st->rev_has_id = false;
  } else if (el == "page") {
    st->page_title.clear();
    ++st->stats.pages;
  } else if (el == "contributor") {
    st->in_contributor = true;
    st->contributor_name.clear();
  }
  st->capture = true;
}

void XMLCALL on_text(void* user, const XML_Char* s, int len) {
  auto* st = static_cast<ParserState*>(user);
  if (st->capture) st->text.append(s, static_cast<std::size_t>(len));
}

void XMLCALL on_end(void* user, const XML_Char* name) {
  auto* st = static_cast<ParserState*>(user);
  const std::string el = name;
  const std::string content = st->text;

  if (st->in("page", "title")) {
    st->page_title = content;
  } else if (st->in("revision", "id")) {
    st->rev.rev_id = std::strtoll(content.c_str(), nullptr, 10);
    st->rev_has_id = true;
  } else if (st->in("revision", "parentid")) {
    st->rev.parent_id = std::strtoll(content.c_str(), nullptr, 10);
  } else if (st->in("revision", "timestamp")) {
    try {
      st->rev.timestamp = parse_timestamp(content);
    } catch (const DataError&) {
      st->rev.timestamp = 0;
    }
  } else if (st->in("revision", "text")) {
    st->rev.wikitext = content;
  } else if (st->in("revision", "comment")) {
    st->rev.message = content;
  } else if (st->in_contributor &&
             (st->in("contributor", "username") || st->in("contributor", "ip"))) {
    st->contributor_name = content;
  } else if (el == "contributor") {
    st->in_contributor = false;
    if (!st->contributor_name.empty()) st->rev.contributor = st->contributor_name;
  } else if (el == "revision") {
    if (st->rev_has_id) {
      ++st->stats.revisions;
      (*st->sink)(std::move(st->rev));
    } else {
      ++st->stats.skipped_missing_id;
    }
  }

  if (!st->stack.empty()) st->stack.pop_back();
  st->text.clear();
}

DumpStats run_expat(const std::function<std::size_t(char*, std::size_t)>& read,
                    const RevisionSink& sink) {
  ParserState st;
  st.sink = &sink;

  XML_Parser parser = XML_ParserCreate(nullptr);
  if (!parser) throw std::runtime_error("XML_ParserCreate failed");
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)>
      guard(parser, XML_ParserFree);

  XML_SetUserData(parser, &st);
  XML_SetElementHandler(parser, on_start, on_end);
  XML_SetCharacterDataHandler(parser, on_text);

  constexpr std::size_t kChunk = 1 << 16;
  std::array<char, kChunk> buf;
  for (;;) {
    const std::size_t got = read(buf.data(), buf.size());
    const bool final = got < buf.size();
    if (XML_Parse(parser, buf.data(), static_cast<int>(got), final) ==
        XML_STATUS_ERROR) {
      std::ostringstream msg;
      msg << "malformed XML at byte offset "
          << XML_GetCurrentByteIndex(parser) << ": "
          << XML_ErrorString(XML_GetErrorCode(parser));
      throw DataError(msg.str());
    }
    if (final) break;
  }
  return st.stats;
}

}  // namespace

DumpStats parse_dump(std::istream& xml_stream, const RevisionSink& sink) {
  return run_expat(
      [&](char* buf, std::size_t n) {
        xml_stream.read(buf, static_cast<std::streamsize>(n));
        return static_cast<std::size_t>(xml_stream.gcount());
      },
      sink);
}

namespace {

enum class Compression { none, gzip, bzip2 };

Compression sniff(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  unsigned char magic[3] = {0, 0, 0};
  f.read(reinterpret_cast<char*>(magic), 3);
  if (magic[0] == 0x1F && magic[1] == 0x8B) return Compression::gzip;
  if (magic[0] == 'B' && magic[1] == 'Z' && magic[2] == 'h')
    return Compression::bzip2;
  return Compression::none;
}

}  // namespace

DumpStats parse_dump_file(const std::string& path, const RevisionSink& sink) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open dump file: " + path);
  probe.close();

  switch (sniff(path)) {
    case Compression::gzip: {
      gzFile gz = gzopen(path.c_str(), "rb");
      if (!gz) throw DataError("cannot open gzip dump: " + path);
      auto stats = run_expat(
          [gz](char* buf, std::size_t n) {
            const int got = gzread(gz, buf, static_cast<unsigned>(n));
            if (got < 0) throw DataError("gzip read error");
            return static_cast<std::size_t>(got);
          },
          sink);
      gzclose(gz);
      return stats;
    }
    case Compression::bzip2: {
      // No bzip2 dev headers on the build host; stream through bzcat.
      const std::string cmd = "bzcat -- '" + path + "'";
      FILE* pipe = popen(cmd.c_str(), "r");
      if (!pipe) throw DataError("cannot spawn bzcat for: " + path);
      DumpStats stats;
      try {
        stats = run_expat(
            [pipe](char* buf, std::size_t n) { return fread(buf, 1, n, pipe); },
            sink);
      } catch (...) {
        pclose(pipe);
        throw;
      }
      if (pclose(pipe) != 0) throw DataError("bzcat failed for: " + path);
      return stats;
    }
    case Compression::none:
      break;
  }
  std::ifstream f(path, std::ios::binary);
  return parse_dump(f, sink);
}

std::vector<Revision> parse_dump_to_vector(std::istream& xml_stream,
                                           DumpStats* stats) {
  std::vector<Revision> out;
  auto st = parse_dump(xml_stream, [&](Revision&& r) { out.push_back(std::move(r)); });
  if (stats) *stats = st;
  return out;
}

std::vector<Revision> parse_dump_file_to_vector(const std::string& path,
                                                DumpStats* stats) {
  std::vector<Revision> out;
  auto st = parse_dump_file(path, [&](Revision&& r) { out.push_back(std::move(r)); });
  if (stats) *stats = st;
  return out;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

void write_dump(std::ostream& out, const std::vector<Revision>& revisions,
                const std::string& page_title) {
  out << "<mediawiki xmlns=\"http://www.mediawiki.org/xml/export-0.10/\">\n";
  out << "  <page>\n    <title>" << xml_escape(page_title)
      << "</title>\n    <ns>0</ns>\n    <id>1</id>\n";
  for (const auto& r : revisions) {
    out << "    <revision>\n";
    out << "      <id>" << r.rev_id << "</id>\n";
    if (r.parent_id) out << "      <parentid>" << *r.parent_id << "</parentid>\n";
    out << "      <timestamp>" << format_timestamp(r.timestamp)
        << "</timestamp>\n";
    if (r.contributor)
      out << "      <contributor><username>" << xml_escape(*r.contributor)
          << "</username></contributor>\n";
    if (!r.message.empty())
      out << "      <comment>" << xml_escape(r.message) << "</comment>\n";
    out << "      <text>" << xml_escape(r.wikitext) << "</text>\n";
    out << "    </revision>\n";
  }
  out << "  </page>\n</mediawiki>\n";
}

}  // namespace editgauge
