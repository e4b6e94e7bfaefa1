#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "coheval/synth/build.hpp"
#include "coheval/text/segment.hpp"

using namespace coheval;
using namespace coheval::synth;
using text::Corpus;
using text::Essay;

namespace {

Essay make_essay(const std::string& id, int prompt, double score,
                 int sentences) {
  static const char* bodies[] = {
      "The river rose quickly.",      "Everyone watched from the bridge.",
      "Boats strained at their ropes.", "By dusk the water had crested.",
      "Crews worked through the night.", "Morning brought a quiet calm.",
      "Repairs began almost at once.",  "The town remembered for years."};
  Essay e;
  e.id = id;
  e.prompt_id = prompt;
  e.gold_score = score;
  std::string text;
  for (int i = 0; i < sentences; ++i) {
    if (!text.empty()) text += ' ';
    text += bodies[i % 8];
  }
  e.raw_text = text;
  return e;
}

std::multiset<std::string> token_multiset(const std::string& raw) {
  std::multiset<std::string> out;
  for (const auto& sent : text::tokenized_sentences(raw)) {
    for (const auto& tok : sent) out.insert(tok);
  }
  return out;
}

}  // namespace

TEST_CASE("selection respects threshold and sentence count") {
  PromptSpec spec{1, 2, 12, 10};
  Corpus corpus;
  corpus.push_back(make_essay("hi", 1, 11, 4));
  corpus.push_back(make_essay("low", 1, 9, 4));
  corpus.push_back(make_essay("edge", 1, 10, 4));  // threshold is inclusive
  corpus.push_back(make_essay("short", 1, 12, 1)); // unpermutable
  corpus.push_back(make_essay("other", 2, 12, 4)); // different prompt

  auto selected = select_high_scoring(corpus, spec);
  REQUIRE(selected.size() == 2);
  CHECK(selected[0]->id == "hi");
  CHECK(selected[1]->id == "edge");

  PromptSpec impossible{1, 2, 12, 13};
  CHECK(select_high_scoring(corpus, impossible).empty());
}

TEST_CASE("two-sentence essays only ever swap") {
  Essay e = make_essay("e2", 1, 11, 2);
  auto records = permute_essay(e, 10, 7);
  REQUIRE(records.size() == 10);
  for (const auto& r : records) {
    CHECK(r.sentence_order == std::vector<std::size_t>{1, 0});
  }
}

TEST_CASE("three-sentence permutations cover only non-identity orders") {
  Essay e = make_essay("e3", 1, 11, 3);
  auto records = permute_essay(e, 10, 7);
  REQUIRE(records.size() == 10);
  std::set<std::vector<std::size_t>> seen;
  for (const auto& r : records) {
    CHECK(r.sentence_order != std::vector<std::size_t>{0, 1, 2});
    seen.insert(r.sentence_order);
  }
  // S3 minus identity has 5 elements.
  CHECK(seen.size() <= 5);
  CHECK(seen.size() >= 2);
}

TEST_CASE("permutation generation is deterministic per seed and essay id") {
  Essay e = make_essay("det", 1, 11, 5);
  auto a = permute_essay(e, 10, 99);
  auto b = permute_essay(e, 10, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sentence_order == b[i].sentence_order);
  }
  auto c = permute_essay(e, 10, 100);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].sentence_order != c[i].sentence_order) any_diff = true;
  }
  CHECK(any_diff);
}

TEST_CASE("single-sentence essays cannot be permuted") {
  Essay e = make_essay("e1", 1, 11, 1);
  CHECK_THROWS_AS(permute_essay(e, 10, 7), std::invalid_argument);
}

TEST_CASE("materialized permutations preserve the token multiset") {
  Essay e = make_essay("mat", 1, 11, 6);
  auto records = permute_essay(e, 10, 3);
  const auto origin_tokens = token_multiset(e.raw_text);
  for (const auto& r : records) {
    Essay perm = materialize_permutation(e, r);
    CHECK(token_multiset(perm.raw_text) == origin_tokens);
    CHECK(perm.raw_text != e.raw_text);
    CHECK(perm.coherence_label == 0.0);
    CHECK(perm.is_synthetic);
    CHECK(perm.origin_id == e.id);
    CHECK(perm.gold_score == e.gold_score);
    // Re-splitting the permuted text recovers the same sentence count.
    CHECK(text::split_sentences(perm.raw_text).size() ==
          text::split_sentences(e.raw_text).size());
  }
}

TEST_CASE("fold construction follows the 4-in-train / 10-in-test policy") {
  PromptSpecTable specs;
  specs[1] = {1, 2, 12, 10};

  Corpus train = {make_essay("tr1", 1, 11, 4)};
  Corpus dev = {make_essay("dv1", 1, 11, 4)};
  Corpus test = {make_essay("te1", 1, 11, 4)};

  SynthesisOptions options;
  options.seed = 5;
  auto set = build_synthetic_set(train, dev, test, specs, options);

  CHECK(set.train.size() == 1 + 4);
  CHECK(set.dev.size() == 1 + 10);
  CHECK(set.test.size() == 1 + 10);

  // Originals carry coherence 1; permutations 0 with provenance.
  std::size_t originals = 0;
  for (const auto& e : set.train) {
    if (!e.is_synthetic) {
      ++originals;
      CHECK(e.coherence_label == 1.0);
    } else {
      CHECK(e.coherence_label == 0.0);
      CHECK(e.origin_id == "tr1");
      CHECK(e.permutation_index.has_value());
    }
  }
  CHECK(originals == 1);
}

TEST_CASE("permutations stay in their origin's fold") {
  PromptSpecTable specs;
  specs[1] = {1, 0, 4, 3};
  Corpus train = {make_essay("a", 1, 4, 4), make_essay("b", 1, 3, 3)};
  Corpus dev = {make_essay("c", 1, 4, 4)};
  Corpus test = {make_essay("d", 1, 4, 5)};

  auto set = build_synthetic_set(train, dev, test, specs, {});
  auto fold_ids = [](const Corpus& fold) {
    std::set<std::string> ids;
    for (const auto& e : fold) {
      if (!e.is_synthetic) ids.insert(e.id);
    }
    return ids;
  };
  const auto train_ids = fold_ids(set.train);
  const auto dev_ids = fold_ids(set.dev);
  const auto test_ids = fold_ids(set.test);
  auto check_fold = [](const Corpus& fold, const std::set<std::string>& ids) {
    for (const auto& e : fold) {
      if (e.is_synthetic) CHECK(ids.count(*e.origin_id) == 1);
    }
  };
  check_fold(set.train, train_ids);
  check_fold(set.dev, dev_ids);
  check_fold(set.test, test_ids);
}

TEST_CASE("empty selection produces an empty set without error") {
  PromptSpecTable specs;
  specs[1] = {1, 0, 4, 4};
  Corpus train = {make_essay("low", 1, 2, 4)};
  auto set = build_synthetic_set(train, {}, {}, specs, {});
  CHECK(set.train.empty());
  CHECK(set.dev.empty());
  CHECK(set.test.empty());
}

TEST_CASE("a corpus prompt without a spec is an error") {
  PromptSpecTable specs;
  specs[1] = {1, 0, 4, 4};
  Corpus train = {make_essay("x", 2, 4, 4)};
  CHECK_THROWS_AS(build_synthetic_set(train, {}, {}, specs, {}),
                  std::runtime_error);
}

TEST_CASE("full-set totals follow the selected * 11 arithmetic") {
  // Count fixtures for two bundled prompts: 472 selected essays expand to
  // 5192 rows and 72 to 792.
  PromptSpecTable specs = asap_prompt_specs();

  SUBCASE("prompt 1: 472 selected") {
    Corpus fold;
    for (int i = 0; i < 472; ++i) {
      fold.push_back(make_essay("p1-" + std::to_string(i), 1, 10, 3));
    }
    for (int i = 0; i < 50; ++i) {
      fold.push_back(make_essay("p1-low-" + std::to_string(i), 1, 9, 3));
    }
    SynthesisOptions options;
    options.test_subset = 10;
    auto set = build_synthetic_set({}, {}, fold, specs, options);
    CHECK(set.test.size() == 5192);
  }

  SUBCASE("prompt 8: 72 selected") {
    Corpus fold;
    for (int i = 0; i < 72; ++i) {
      fold.push_back(make_essay("p8-" + std::to_string(i), 8, 45, 3));
    }
    for (int i = 0; i < 30; ++i) {
      fold.push_back(make_essay("p8-low-" + std::to_string(i), 8, 44, 3));
    }
    auto set = build_synthetic_set({}, {}, fold, specs, {});
    CHECK(set.test.size() == 792);
  }
}

TEST_CASE("bundled prompt table carries the expected ranges") {
  auto specs = asap_prompt_specs();
  REQUIRE(specs.size() == 8);
  CHECK(specs[1].min_score == 2);
  CHECK(specs[1].max_score == 12);
  CHECK(specs[1].selection_threshold == 10);
  CHECK(specs[7].max_score == 30);
  CHECK(specs[7].selection_threshold == 23);
  CHECK(specs[8].max_score == 60);
  CHECK(specs[8].selection_threshold == 45);
}
