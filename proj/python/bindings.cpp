#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "editgauge/corpus.hpp"
#include "editgauge/dump_parser.hpp"
#include "editgauge/errors.hpp"
#include "editgauge/metrics.hpp"
#include "editgauge/model.hpp"
#include "editgauge/train.hpp"

namespace py = pybind11;
using namespace editgauge;

namespace {

py::dict edit_to_dict(const Edit& e) {
  py::list sentences;
  for (const auto& s : e.sentences) {
    py::dict d;
    d["tokens"] = s.tokens;
    d["labels"] = s.label_string();
    sentences.append(d);
  }
  py::dict out;
  out["sentences"] = sentences;
  out["n_hunks"] = e.n_hunks;
  out["chars_added"] = e.chars_added;
  out["chars_removed"] = e.chars_removed;
  return out;
}

py::dict revision_to_dict(const Revision& r) {
  py::dict d;
  d["rev_id"] = r.rev_id;
  if (r.parent_id) d["parent_id"] = *r.parent_id;
  d["timestamp"] = format_timestamp(r.timestamp);
  d["wikitext"] = r.wikitext;
  d["message"] = r.message;
  if (r.contributor) d["contributor"] = *r.contributor;
  if (r.page_title) d["page_title"] = *r.page_title;
  return d;
}

}  // namespace

PYBIND11_MODULE(editgauge, m) {
  m.doc() = "Edit-level Wikipedia article quality assessment";

  m.def("tokenize", &tokenize, py::arg("text"),
        "Whitespace tokenization with punctuation detached and wikitext "
        "markup atoms kept intact");

  m.def(
      "segment_sentences",
      [](const std::string& text, const std::string& lang) {
        return segment_sentences(text, lang_from_string(lang));
      },
      py::arg("text"), py::arg("lang") = "en");

  m.def(
      "line_diff",
      [](const std::vector<std::string>& old_lines,
         const std::vector<std::string>& new_lines) {
        py::list out;
        for (const auto& h : line_diff(old_lines, new_lines)) {
          py::dict d;
          d["removed"] = h.removed_lines;
          d["added"] = h.added_lines;
          d["old_start"] = h.old_start;
          d["new_start"] = h.new_start;
          out.append(d);
        }
        return out;
      },
      py::arg("old_lines"), py::arg("new_lines"));

  m.def(
      "token_diff",
      [](const std::vector<std::string>& old_tokens,
         const std::vector<std::string>& new_tokens) {
        py::list out;
        for (const auto& op : token_diff(old_tokens, new_tokens).ops)
          out.append(py::make_tuple(std::string(1, diff_label_char(op.label)),
                                    op.token));
        return out;
      },
      py::arg("old_tokens"), py::arg("new_tokens"));

  m.def(
      "extract_edit",
      [](const std::string& before, const std::string& after,
         const std::string& lang, double match_threshold) {
        ExtractConfig cfg;
        cfg.lang = lang_from_string(lang);
        cfg.match_threshold = match_threshold;
        return edit_to_dict(extract_edit(before, after, cfg));
      },
      py::arg("before"), py::arg("after"), py::arg("lang") = "en",
      py::arg("match_threshold") = 0.5);

  m.def("bleu4_sentence", &bleu4_sentence, py::arg("candidate"),
        py::arg("reference"));

  m.def("similarity_ratio", &similarity_ratio, py::arg("a"), py::arg("b"));

  m.def(
      "parse_dump",
      [](const std::string& path) {
        py::list out;
        for (const auto& r : parse_dump_file_to_vector(path))
          out.append(revision_to_dict(r));
        return out;
      },
      py::arg("path"), "Parse a MediaWiki XML export (plain, .gz or .bz2)");

  m.def(
      "predict",
      [](const std::string& checkpoint, const std::string& before,
         const std::string& after, const std::string& lang) {
        EditQualityModel model = EditQualityModel::load(checkpoint);
        if (model.config().combine_message)
          throw DataError(
              "checkpoint was trained with the message-combination head; "
              "predict has no edit message to feed it");
        ExtractConfig cfg;
        cfg.lang = lang_from_string(lang);
        Edit edit = extract_edit(before, after, cfg);
        nn::Graph g;
        EncoderOutput enc = model.encode(g, edit);
        nn::Var logp = model.classify(g, enc);
        py::dict out;
        for (std::size_t c = 0; c < model.config().class_names.size(); ++c)
          out[py::str(model.config().class_names[c])] =
              std::exp(logp->val[c]);
        return out;
      },
      py::arg("checkpoint"), py::arg("before"), py::arg("after"),
      py::arg("lang") = "en",
      "Class probabilities for the edit between two revision texts");

  m.def(
      "describe",
      [](const std::string& checkpoint, const std::string& before,
         const std::string& after, const std::string& lang) {
        EditQualityModel model = EditQualityModel::load(checkpoint);
        ExtractConfig cfg;
        cfg.lang = lang_from_string(lang);
        return model.beam_search(extract_edit(before, after, cfg));
      },
      py::arg("checkpoint"), py::arg("before"), py::arg("after"),
      py::arg("lang") = "en",
      "Beam-search an edit message for two revision texts");
}
