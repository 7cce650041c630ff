#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace finrag {

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

struct Table {
    std::vector<std::string> row_names;
    std::vector<std::string> column_names;
    std::vector<std::vector<std::string>> cells;  // cells[row][col], rectangular
};

struct Page {
    int page_no = 0;  // >= 1; empty text allowed only when tables exist
    std::string text;
    std::vector<Table> tables;
};

struct Report {
    std::string ticker;  // uppercase symbol
    int fiscal_year = 0;
    std::vector<Page> pages;  // page numbers strictly increasing
};

enum class UnitKind { text_sentence, table_row };

std::string_view unit_kind_name(UnitKind kind);

struct SourceRef {
    std::string ticker;
    int fiscal_year = 0;
    int page_no = 0;
};

// One retrievable fragment: a sentence of page text or a linearized table row.
struct ContextUnit {
    std::string id;  // "<ticker>/<year>/<page>/<kind>/<index>", unique corpus-wide
    UnitKind kind = UnitKind::text_sentence;
    std::string content;
    SourceRef source;
    int index = 0;  // position within kind on the page
};

std::string unit_id(const SourceRef& source, UnitKind kind, int index);
std::string page_id(const std::string& ticker, int fiscal_year, int page_no);

struct GoldPageRef {
    std::string ticker;
    int fiscal_year = 0;
    int page_no = 0;
    bool resolved = false;
};

enum class Split { train, dev, test };

struct QARecord {
    std::string id;
    std::string question;
    std::string program;  // raw program expression; may be unparseable
    std::string answer;
    std::string exe_answer;
    GoldPageRef gold_page;
    std::vector<std::string> gold_context_ids;
    Split split = Split::test;
    bool program_parseable = true;
    std::vector<std::string> gold_mapping_notes;  // unmappable gold_inds entries
};

// ---------------------------------------------------------------------------
// Ticker -> company name gazetteer
// ---------------------------------------------------------------------------

class Gazetteer {
public:
    // A modest built-in S&P map; callers extend it from a JSON data file
    // ({"AAPL": "Apple", ...}) shipped alongside the binary.
    static Gazetteer builtin();
    static Gazetteer from_file(const std::filesystem::path& path);

    void add(std::string ticker, std::string name);
    void merge(const Gazetteer& other);  // other wins on conflicts

    // Company name for a ticker; the ticker itself when unknown.
    std::string name_for(const std::string& ticker) const;

    const std::map<std::string, std::string>& entries() const { return names_; }

private:
    std::map<std::string, std::string> names_;  // TICKER -> display name
};

// ---------------------------------------------------------------------------
// Report store
// ---------------------------------------------------------------------------

class ReportStore {
public:
    ReportStore() = default;
    ReportStore(std::vector<Report> reports, Gazetteer gazetteer);

    const Report* find(const std::string& ticker, int fiscal_year) const;
    const std::vector<Report>& reports() const { return reports_; }
    const Gazetteer& gazetteer() const { return gazetteer_; }
    std::size_t page_count() const;

private:
    std::vector<Report> reports_;  // sorted by (ticker, fiscal_year)
    std::map<std::pair<std::string, int>, std::size_t> by_key_;
    Gazetteer gazetteer_;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Loads every *.json report in a directory. Malformed files surface as
// MissingField / NonRectangularTable / DuplicateReportKey / EmptyPage with the
// file name in the message.
ReportStore load_reports(const std::filesystem::path& dir,
                         Gazetteer gazetteer = Gazetteer::builtin());

// Parses one FinQA-release JSON array. The split comes from the file name
// (train/dev/test); the gold page from ids shaped like
// "AAPL/2010/page_41.pdf-2". Unparseable programs are kept but flagged.
std::vector<QARecord> load_finqa(const std::filesystem::path& file);

// One unit per table row; each cell rendered as
// "the <column name> of <row name> is <cell value>", cell sentences of a row
// joined with " ; ".
std::vector<ContextUnit> linearize_table(const Table& table, const SourceRef& source,
                                         int first_index = 0);

// Splits on '.', '!', '?' followed by whitespace or end of text. A period
// flanked by digits is not a boundary. Fragments shorter than two
// whitespace-separated tokens are dropped.
std::vector<std::string> split_sentences(std::string_view text);

// Text sentences first, then table rows in document order. Throws EmptyPage
// when nothing survives.
std::vector<ContextUnit> extract_context_units(const Page& page, const SourceRef& source);

// All units of every page of a report, page order.
std::vector<ContextUnit> report_context_units(const Report& report);

// Appends " (for <ticker> in <year>)" unless the question already names the
// company (ticker or gazetteer name) and the year. Idempotent.
std::string augment_question(const std::string& question, const std::string& ticker,
                             int year, const Gazetteer& gazetteer);

// Mismatch notes for gold context ids / gold pages that do not exist in the
// store. Empty means every reference resolves.
std::vector<std::string> check_gold_references(const ReportStore& store,
                                               const std::vector<QARecord>& records);

}  // namespace finrag
