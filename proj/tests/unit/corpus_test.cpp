#include "doctest.h"

#include <filesystem>
#include <fstream>

#include "finrag/corpus.hpp"
#include "finrag/errors.hpp"
#include "finrag/util.hpp"

using namespace finrag;

namespace {
const std::filesystem::path kFixtures{FINRAG_FIXTURES_DIR};

std::filesystem::path write_temp_report_dir(const std::string& name,
                                            const std::string& content) {
    const auto dir = std::filesystem::temp_directory_path() / ("finrag_corpus_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", content);
    return dir;
}
}  // namespace

TEST_CASE("report corpus loads with expected shape") {
    const ReportStore store = load_reports(kFixtures / "reports");
    CHECK(store.reports().size() == 5);
    CHECK(store.page_count() == 11);

    const Report* aapl = store.find("AAPL", 2009);
    REQUIRE(aapl != nullptr);
    REQUIRE(aapl->pages.size() == 3);
    CHECK(aapl->pages[1].page_no == 41);
    CHECK(aapl->pages[1].tables.size() == 1);
    CHECK(store.find("AAPL", 1999) == nullptr);
    CHECK(store.gazetteer().name_for("AAPL") == "Apple");
    CHECK(store.gazetteer().name_for("ZZZZ") == "ZZZZ");  // unknown -> itself
}

TEST_CASE("report validation rejects structural problems") {
    CHECK_THROWS_AS(load_reports(write_temp_report_dir(
                        "nopages", R"({"ticker":"T","fiscal_year":2000})")),
                    MissingField);
    CHECK_THROWS_AS(
        load_reports(write_temp_report_dir(
            "order",
            R"({"ticker":"T","fiscal_year":2000,"pages":[{"page_no":5,"text":"two words"},{"page_no":3,"text":"more words"}]})")),
        MissingField);
    CHECK_THROWS_AS(
        load_reports(write_temp_report_dir(
            "empty", R"({"ticker":"T","fiscal_year":2000,"pages":[{"page_no":1,"text":"  "}]})")),
        EmptyPage);
    CHECK_THROWS_AS(
        load_reports(write_temp_report_dir(
            "ragged",
            R"({"ticker":"T","fiscal_year":2000,"pages":[{"page_no":1,"text":"two words","tables":[{"row_names":["r"],"column_names":["c1","c2"],"cells":[["x"]]}]}]})")),
        NonRectangularTable);
    CHECK_THROWS_AS(load_reports("/nonexistent/finrag/dir"), IoError);
}

TEST_CASE("sentence splitting keeps decimals together and drops fragments") {
    const auto s = split_sentences(
        "Net sales were $42,905 million, up 14.4 percent. Growth continued! Short. "
        "Was it repeatable? 3.5 million units shipped.");
    REQUIRE(s.size() == 4);
    CHECK(s[0] == "Net sales were $42,905 million, up 14.4 percent.");
    CHECK(s[1] == "Growth continued!");
    // "Short." has a single token and is dropped
    CHECK(s[2] == "Was it repeatable?");
    CHECK(s[3] == "3.5 million units shipped.");
}

TEST_CASE("table rows linearize cell by cell") {
    Table t;
    t.row_names = {"net income"};
    t.column_names = {"2009", "2008"};
    t.cells = {{"8235", "6119"}};
    const SourceRef src{"AAPL", 2009, 41};
    const auto units = linearize_table(t, src);
    REQUIRE(units.size() == 1);
    CHECK(units[0].id == "AAPL/2009/41/table_row/0");
    CHECK(units[0].kind == UnitKind::table_row);
    CHECK(units[0].content == "the 2009 of net income is 8235 ; the 2008 of net income is 6119");
}

TEST_CASE("context units combine sentences then table rows with stable ids") {
    const ReportStore store = load_reports(kFixtures / "reports");
    const Report* aapl = store.find("AAPL", 2009);
    REQUIRE(aapl != nullptr);
    const Page& page = aapl->pages[2];  // page 55
    const auto units = extract_context_units(page, SourceRef{"AAPL", 2009, 55});
    REQUIRE(units.size() == 6);  // 3 sentences + 3 table rows
    CHECK(units[0].id == "AAPL/2009/55/text_sentence/0");
    CHECK(units[0].content ==
          "Net sales for fiscal 2009 were $42,905 million, compared to $37,491 million in "
          "fiscal 2008.");
    CHECK(units[3].id == "AAPL/2009/55/table_row/0");
    CHECK(units[3].content.find("the 2009 of net sales is 42905") == 0);

    const auto all_units = report_context_units(*aapl);
    CHECK(all_units.size() > units.size());
}

TEST_CASE("qa records load with ids, programs, and mapped gold indices") {
    const auto records = load_finqa(kFixtures / "test.json");
    REQUIRE(records.size() == 10);
    CHECK(records[0].id == "AAPL/2009/page_41.pdf-1");
    CHECK(records[0].split == Split::test);
    CHECK(records[0].gold_page.resolved);
    CHECK(records[0].gold_page.ticker == "AAPL");
    CHECK(records[0].gold_page.fiscal_year == 2009);
    CHECK(records[0].gold_page.page_no == 41);
    CHECK(records[0].program_parseable);
    REQUIRE(records[0].gold_context_ids.size() == 1);
    CHECK(records[0].gold_context_ids[0] == "AAPL/2009/41/table_row/1");

    // text_k maps to sentence k; table_k maps to linearized row k-1
    const auto& pct = records[9];
    REQUIRE(pct.gold_context_ids.size() == 2);
    CHECK(pct.gold_context_ids[0] == "AAPL/2009/55/table_row/0");
    CHECK(pct.gold_context_ids[1] == "AAPL/2009/55/text_sentence/0");

    // numeric and boolean exe answers arrive as display strings
    CHECK(records[4].exe_answer == "31921");
    CHECK(records[8].exe_answer == "yes");

    const auto train = load_finqa(kFixtures / "train.json");
    CHECK(train.size() == 6);
    CHECK(train[0].split == Split::train);
}

TEST_CASE("gold references all resolve against the fixture corpus") {
    const ReportStore store = load_reports(kFixtures / "reports");
    const auto notes = check_gold_references(store, load_finqa(kFixtures / "test.json"));
    CHECK(notes.empty());
}

TEST_CASE("question augmentation appends company and year only when missing") {
    const Gazetteer g = Gazetteer::builtin();
    CHECK(augment_question("What was the basic earnings per share for AAPL in 2009?", "AAPL",
                           2009, g) ==
          "What was the basic earnings per share for AAPL in 2009?");
    CHECK(augment_question("What was the percentage change in net sales for Apple from 2008 "
                           "to 2009?",
                           "AAPL", 2009, g) ==
          "What was the percentage change in net sales for Apple from 2008 to 2009?");
    CHECK(augment_question("What was the revenue growth?", "UPS", 2006, g) ==
          "What was the revenue growth? (for UPS in 2006)");
    CHECK(augment_question("What was revenue in 2006?", "UPS", 2006, g) ==
          "What was revenue in 2006? (for UPS in 2006)");
}

TEST_CASE("gazetteer files extend the builtin set") {
    const Gazetteer extra = Gazetteer::from_file(std::filesystem::path(FINRAG_DATA_DIR) /
                                                 "ticker_names.json");
    Gazetteer g = Gazetteer::builtin();
    g.merge(extra);
    CHECK(g.name_for("SNOW") == "Snowflake");
    CHECK(g.name_for("AAPL") == "Apple");
}
