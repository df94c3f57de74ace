#include <catch2/catch_amalgamated.hpp>

#include "mwsumm/sentences.hpp"

using mwsumm::segment_sentences;

TEST_CASE("empty and degenerate input yields no sentences", "[sentences]") {
    CHECK(segment_sentences("").empty());
    CHECK(segment_sentences("   \n\t  ").empty());
    CHECK(segment_sentences("...").empty());
}

TEST_CASE("two plain sentences split on terminal punctuation", "[sentences]") {
    auto sentences = segment_sentences("Cats purr. Dogs bark.");
    REQUIRE(sentences == std::vector<std::string>{"Cats purr.", "Dogs bark."});
}

TEST_CASE("markup-only revisions yield no sentences", "[sentences]") {
    // Hand-built list of markup-only fixtures; each must produce zero
    // sentences because nothing in it is prose.
    const std::vector<std::string> fixtures = {
        "[[Category:Birds]]",
        "[[Category:Birds]]\n[[Category:Mammals]]",
        "{{Infobox bird|name=Robin|genus=Turdus}}",
        "{| class=\"wikitable\"\n|-\n| cell || cell\n|}",
        "[[File:Robin.jpg|thumb|right]]",
        "[[Image:Robin.jpg]]",
        "== History ==",
        "<!-- hidden note -->",
        "<ref>Smith 2001</ref>",
        "{{cite web|url=https://example.org|title=T}}",
    };
    for (const auto& fixture : fixtures) {
        INFO(fixture);
        CHECK(segment_sentences(fixture).empty());
    }
}

TEST_CASE("wiki links resolve to their visible label", "[sentences]") {
    CHECK(segment_sentences("The [[domestic cat|cat]] purrs.") ==
          std::vector<std::string>{"The cat purrs."});
    CHECK(segment_sentences("The [[cat]] purrs.") ==
          std::vector<std::string>{"The cat purrs."});
    CHECK(segment_sentences("See [https://example.org the site] for more.") ==
          std::vector<std::string>{"See the site for more."});
}

TEST_CASE("templates and refs are dropped from within prose", "[sentences]") {
    CHECK(segment_sentences(
              "Robins sing.{{citation needed}} They nest in spring.") ==
          std::vector<std::string>{"Robins sing.", "They nest in spring."});
    CHECK(segment_sentences("Robins sing.<ref>Smith 2001</ref> They nest.") ==
          std::vector<std::string>{"Robins sing.", "They nest."});
    CHECK(segment_sentences("Robins sing<ref name=\"s\"/> loudly.") ==
          std::vector<std::string>{"Robins sing loudly."});
}

TEST_CASE("emphasis markup is removed", "[sentences]") {
    CHECK(segment_sentences("'''Bold''' and ''italic'' text here.") ==
          std::vector<std::string>{"Bold and italic text here."});
}

TEST_CASE("abbreviations do not split sentences", "[sentences]") {
    CHECK(segment_sentences("Dr. Smith arrived. He sat down.") ==
          std::vector<std::string>{"Dr. Smith arrived.", "He sat down."});
    CHECK(segment_sentences("J. R. Hartley wrote it.") ==
          std::vector<std::string>{"J. R. Hartley wrote it."});
}

TEST_CASE("question and exclamation marks end sentences", "[sentences]") {
    CHECK(segment_sentences("Is it true? It is! Good.") ==
          std::vector<std::string>{"Is it true?", "It is!", "Good."});
}

TEST_CASE("newlines separate prose blocks", "[sentences]") {
    CHECK(segment_sentences("First block\nSecond block.") ==
          std::vector<std::string>{"First block", "Second block."});
    CHECK(segment_sentences("* item one\n* item two.") ==
          std::vector<std::string>{"item one", "item two."});
}

TEST_CASE("whitespace is collapsed inside sentences", "[sentences]") {
    CHECK(segment_sentences("Cats   purr\t loudly.") ==
          std::vector<std::string>{"Cats purr loudly."});
}
