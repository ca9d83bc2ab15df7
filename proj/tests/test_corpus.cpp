#include <doctest.h>

#include "norq/corpus.hpp"

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

using namespace norq;

namespace {

std::string fixture(const std::string& name) {
    return std::string(NORQ_FIXTURES_DIR) + "/" + name;
}

Transcript make_transcript(const std::string& id, const std::string& firm,
                           const std::string& quarter, int version) {
    std::ostringstream doc;
    doc << "#id: " << id << "\n#firm: " << firm << "\n#quarter: " << quarter
        << "\n#version: " << version << "\n[PRESENTATION]\nSome presentation text here.\n"
        << "[QA]\n[Analyst][A]: Question?\n[Manager][M]: Answer.\n";
    std::istringstream in(doc.str());
    return parse_transcript(in);
}

}  // namespace

TEST_CASE("two analysts asking once each produce two exchanges") {
    const Transcript t = parse_transcript_file(fixture("call_two_analysts.txt"));
    CHECK(t.transcript_id == "T0001");
    CHECK(t.firm_id == "F001");
    CHECK(t.fiscal_quarter.str() == "2020Q3");
    CHECK(t.version == 1);
    REQUIRE(t.exchanges.size() == 2);
    CHECK(t.exchanges[0].conver_id == "T0001-1");
    CHECK(t.exchanges[0].order == 1);
    CHECK(t.exchanges[1].conver_id == "T0001-2");
    CHECK(t.exchanges[1].order == 2);
    // operator turns dropped from exchanges, kept in the raw record
    for (const auto& x : t.exchanges)
        for (const auto& turn : x.turns)
            CHECK(turn.speaker_role != SpeakerRole::Operator);
    CHECK(t.raw_turns.size() == 6);
}

TEST_CASE("same-analyst follow-up stays in one exchange") {
    const Transcript t = parse_transcript_file(fixture("call_followup.txt"));
    REQUIRE(t.exchanges.size() == 1);
    CHECK(t.exchanges[0].turns.size() == 4);
    CHECK(t.exchanges[0].turns[0].speaker_role == SpeakerRole::Analyst);
    CHECK(t.exchanges[0].turns[3].speaker_role == SpeakerRole::Manager);
}

TEST_CASE("operator between same-name analyst turns splits the exchange") {
    std::istringstream in(
        "#id: T9\n#firm: F9\n#quarter: 2021Q1\n#version: 1\n"
        "[PRESENTATION]\nWords.\n[QA]\n"
        "[Analyst][Jane Roe]: First question?\n"
        "[Manager][John Doe]: First answer.\n"
        "[Operator][]: We will requeue.\n"
        "[Analyst][Jane Roe]: Second question?\n"
        "[Manager][John Doe]: Second answer.\n");
    const Transcript t = parse_transcript(in);
    CHECK(t.exchanges.size() == 2);
}

TEST_CASE("missing header fields abort the file") {
    std::istringstream missing_quarter(
        "#id: T1\n#firm: F1\n#version: 1\n[PRESENTATION]\nx y z.\n[QA]\n"
        "[Analyst][A]: Q?\n[Manager][M]: A.\n");
    CHECK_THROWS_AS(parse_transcript(missing_quarter), MalformedDocument);

    std::istringstream untagged(
        "#id: T1\n#firm: F1\n#quarter: 2020Q1\n#version: 1\n[PRESENTATION]\nx.\n[QA]\n"
        "[Analyst][A]: Q?\nthis line has no speaker tag\n");
    CHECK_THROWS_AS(parse_transcript(untagged), MalformedDocument);

    std::istringstream empty_presentation(
        "#id: T1\n#firm: F1\n#quarter: 2020Q1\n#version: 1\n[PRESENTATION]\n[QA]\n"
        "[Analyst][A]: Q?\n[Manager][M]: A.\n");
    CHECK_THROWS_AS(parse_transcript(empty_presentation), MalformedDocument);
}

TEST_CASE("exchange order values are 1..K with no gaps") {
    const Transcript t = parse_transcript_file(fixture("call_two_analysts.txt"));
    for (std::size_t i = 0; i < t.exchanges.size(); ++i)
        CHECK(t.exchanges[i].order == static_cast<int>(i) + 1);
}

TEST_CASE("dedupe keeps the highest version") {
    std::vector<Transcript> corpus = {
        make_transcript("T1", "F1", "2020Q1", 1),
        make_transcript("T1", "F1", "2020Q1", 3),
        make_transcript("T1", "F1", "2020Q1", 2),
    };
    DedupeLog log;
    const auto out = dedupe_corpus(corpus, &log);
    REQUIRE(out.size() == 1);
    CHECK(out[0].version == 3);
    CHECK(log.superseded_dropped == 2);
    CHECK(log.multi_firm_dropped == 0);
}

TEST_CASE("transcripts attached to two firms are dropped entirely") {
    std::vector<Transcript> corpus = {
        make_transcript("T1", "F1", "2020Q1", 1),
        make_transcript("T1", "F2", "2020Q1", 2),
        make_transcript("T2", "F1", "2020Q1", 1),
    };
    DedupeLog log;
    const auto out = dedupe_corpus(corpus, &log);
    REQUIRE(out.size() == 1);
    CHECK(out[0].transcript_id == "T2");
    CHECK(log.multi_firm_dropped == 2);
}

TEST_CASE("dedupe of a disjoint corpus is the identity and idempotent") {
    std::vector<Transcript> corpus = {
        make_transcript("T1", "F1", "2020Q1", 1),
        make_transcript("T2", "F2", "2020Q1", 1),
        make_transcript("T3", "F3", "2020Q2", 1),
    };
    const auto once = dedupe_corpus(corpus);
    CHECK(once.size() == 3);
    const auto twice = dedupe_corpus(once);
    REQUIRE(twice.size() == once.size());
    for (std::size_t i = 0; i < once.size(); ++i)
        CHECK(twice[i].transcript_id == once[i].transcript_id);
}

TEST_CASE("exchange word counts") {
    QAExchange x;
    x.turns = {{SpeakerRole::Analyst, "A", "How much?"},
               {SpeakerRole::Manager, "M", "Ten dollars."}};
    CHECK(exchange_word_count(x) == 4);

    QAExchange additive;
    additive.turns = {{SpeakerRole::Analyst, "A", "one two three"},
                      {SpeakerRole::Manager, "M", "four five"}};
    CHECK(exchange_word_count(additive) == 5);
}

TEST_CASE("per-part word counts add up to the whole document") {
    const Transcript t = parse_transcript_file(fixture("call_two_analysts.txt"));
    std::size_t total = word_count(t.presentation);
    for (const auto& x : t.exchanges) total += exchange_word_count(x);
    CHECK(total == transcript_word_count(t));

    std::size_t by_turn = word_count(t.presentation);
    for (const auto& x : t.exchanges)
        for (const auto& turn : x.turns) by_turn += word_count(turn.text);
    CHECK(by_turn == transcript_word_count(t));
}

TEST_CASE("canonical serialization round-trips") {
    const Transcript t = parse_transcript_file(fixture("call_two_analysts.txt"));
    for (const auto& x : t.exchanges) {
        const auto j = exchange_to_json(x);
        const QAExchange back = exchange_from_json(j);
        CHECK(back.conver_id == x.conver_id);
        CHECK(back.order == x.order);
        REQUIRE(back.turns.size() == x.turns.size());
        for (std::size_t i = 0; i < x.turns.size(); ++i) {
            CHECK(back.turns[i].speaker_role == x.turns[i].speaker_role);
            CHECK(back.turns[i].speaker_name == x.turns[i].speaker_name);
            CHECK(back.turns[i].text == x.turns[i].text);
        }
        // canonical form is stable under a second round trip
        CHECK(exchange_to_json(back).dump() == j.dump());
    }
}

TEST_CASE("serialize(parse(doc)) matches the stored canonical golden") {
    const Transcript t1 = parse_transcript_file(fixture("call_two_analysts.txt"));
    const Transcript t2 = parse_transcript_file(fixture("call_followup.txt"));
    const std::string serialized = corpus_to_jsonl({t1, t2});

    std::ifstream golden(fixture("corpus_canonical.golden.jsonl"), std::ios::binary);
    REQUIRE(golden.good());
    std::ostringstream expected;
    expected << golden.rdbuf();
    CHECK(serialized == expected.str());
}

TEST_CASE("conver_id helpers") {
    CHECK(transcript_of("T0001-12") == "T0001");
    CHECK(order_of("T0001-12") == 12);
}
