"""Smoke tests for the editgauge python module."""

import math
import os
import tempfile

import editgauge


def test_tokenize():
    assert editgauge.tokenize("A cat.") == ["A", "cat", "."]
    assert editgauge.tokenize("[[Category:Foo]]") == ["[[", "Category", ":", "Foo", "]]"]
    assert editgauge.tokenize("") == []


def test_segment_sentences():
    assert editgauge.segment_sentences("A cat. A dog.") == ["A cat.", "A dog."]
    assert editgauge.segment_sentences("Dr. Smith arrived.") == ["Dr. Smith arrived."]


def test_line_diff():
    hunks = editgauge.line_diff(["a", "b", "c"], ["a", "x", "c"])
    assert len(hunks) == 1
    assert hunks[0]["removed"] == ["b"]
    assert hunks[0]["added"] == ["x"]
    assert hunks[0]["old_start"] == 1
    assert editgauge.line_diff(["a"], ["a"]) == []


def test_token_diff():
    ops = editgauge.token_diff(["the", "cat", "sat"], ["the", "big", "cat", "sat"])
    assert ops == [("=", "the"), ("+", "big"), ("=", "cat"), ("=", "sat")]


def test_extract_edit():
    edit = editgauge.extract_edit("A cat sat.", "A big cat sat.")
    assert edit["n_hunks"] == 1
    assert len(edit["sentences"]) == 1
    sent = edit["sentences"][0]
    assert len(sent["tokens"]) == len(sent["labels"])
    assert sent["labels"].count("+") == 1
    # Identical texts produce an empty edit.
    assert editgauge.extract_edit("same", "same")["sentences"] == []


def test_bleu():
    assert editgauge.bleu4_sentence(["a", "b", "c", "d"], ["a", "b", "c", "d"]) == 1.0
    got = editgauge.bleu4_sentence(["a", "b"], ["a", "b", "c", "d"])
    assert abs(got - math.exp(-1.0)) < 1e-9
    assert editgauge.bleu4_sentence([], ["a"]) == 0.0


def test_similarity_ratio():
    assert editgauge.similarity_ratio("", "abc") == 0.0
    assert abs(editgauge.similarity_ratio("abc", "abc") - 1.0) < 1e-12


def test_parse_dump():
    xml = """<mediawiki><page><title>T</title>
      <revision><id>5</id><timestamp>2020-03-04T05:06:07Z</timestamp>
        <comment>hello</comment><text>Some text.</text></revision>
    </page></mediawiki>"""
    with tempfile.NamedTemporaryFile("w", suffix=".xml", delete=False) as f:
        f.write(xml)
        path = f.name
    try:
        revs = editgauge.parse_dump(path)
        assert len(revs) == 1
        assert revs[0]["rev_id"] == 5
        assert revs[0]["message"] == "hello"
        assert revs[0]["timestamp"] == "2020-03-04T05:06:07Z"
        assert revs[0]["wikitext"] == "Some text."
    finally:
        os.unlink(path)


def main():
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_")]
    for test in tests:
        test()
        print(f"ok {test.__name__}")
    print(f"{len(tests)} smoke tests passed")


if __name__ == "__main__":
    main()
