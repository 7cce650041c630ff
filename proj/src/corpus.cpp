#include "finrag/corpus.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "json.hpp"

#include "finrag/errors.hpp"
#include "finrag/program.hpp"
#include "finrag/util.hpp"

namespace finrag {

using nlohmann::json;

std::string_view unit_kind_name(UnitKind kind) {
    return kind == UnitKind::text_sentence ? "text_sentence" : "table_row";
}

std::string unit_id(const SourceRef& source, UnitKind kind, int index) {
    return source.ticker + "/" + std::to_string(source.fiscal_year) + "/" +
           std::to_string(source.page_no) + "/" + std::string(unit_kind_name(kind)) + "/" +
           std::to_string(index);
}

std::string page_id(const std::string& ticker, int fiscal_year, int page_no) {
    return ticker + "/" + std::to_string(fiscal_year) + "/" + std::to_string(page_no);
}

// ---------------------------------------------------------------------------
// Gazetteer
// ---------------------------------------------------------------------------

Gazetteer Gazetteer::builtin() {
    Gazetteer g;
    static const std::pair<const char*, const char*> kNames[] = {
        {"AAPL", "Apple"},         {"ABT", "Abbott"},
        {"ADBE", "Adobe"},         {"AMZN", "Amazon"},
        {"BAC", "Bank of America"},{"CRM", "Salesforce"},
        {"CSCO", "Cisco"},         {"CVX", "Chevron"},
        {"DIS", "Disney"},         {"GE", "General Electric"},
        {"GOOGL", "Alphabet"},     {"GS", "Goldman Sachs"},
        {"HD", "Home Depot"},      {"IBM", "IBM"},
        {"INTC", "Intel"},         {"JNJ", "Johnson & Johnson"},
        {"JPM", "JPMorgan Chase"}, {"KO", "Coca-Cola"},
        {"MA", "Mastercard"},      {"MCD", "McDonald's"},
        {"MMM", "3M"},             {"MSFT", "Microsoft"},
        {"NFLX", "Netflix"},       {"NKE", "Nike"},
        {"ORCL", "Oracle"},        {"PEP", "PepsiCo"},
        {"PG", "Procter & Gamble"},{"T", "AT&T"},
        {"UNH", "UnitedHealth"},   {"UPS", "United Parcel Service"},
        {"V", "Visa"},             {"VZ", "Verizon"},
        {"WMT", "Walmart"},        {"XOM", "Exxon Mobil"},
    };
    for (const auto& [ticker, name] : kNames) g.add(ticker, name);
    return g;
}

Gazetteer Gazetteer::from_file(const std::filesystem::path& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw IoError("bad gazetteer file " + path.string() + ": " + e.what());
    }
    Gazetteer g;
    for (const auto& [ticker, name] : j.items()) {
        if (!name.is_string()) throw IoError("gazetteer values must be strings: " + ticker);
        g.add(ticker, name.get<std::string>());
    }
    return g;
}

void Gazetteer::add(std::string ticker, std::string name) {
    std::string key = lower_ascii(ticker);
    std::transform(key.begin(), key.end(), key.begin(),
                   [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); });
    names_[key] = std::move(name);
}

void Gazetteer::merge(const Gazetteer& other) {
    for (const auto& [ticker, name] : other.names_) names_[ticker] = name;
}

std::string Gazetteer::name_for(const std::string& ticker) const {
    auto it = names_.find(ticker);
    return it != names_.end() ? it->second : ticker;
}

// ---------------------------------------------------------------------------
// ReportStore
// ---------------------------------------------------------------------------

ReportStore::ReportStore(std::vector<Report> reports, Gazetteer gazetteer)
    : reports_(std::move(reports)), gazetteer_(std::move(gazetteer)) {
    std::sort(reports_.begin(), reports_.end(), [](const Report& a, const Report& b) {
        return std::tie(a.ticker, a.fiscal_year) < std::tie(b.ticker, b.fiscal_year);
    });
    for (std::size_t i = 0; i < reports_.size(); ++i) {
        by_key_[{reports_[i].ticker, reports_[i].fiscal_year}] = i;
    }
}

const Report* ReportStore::find(const std::string& ticker, int fiscal_year) const {
    auto it = by_key_.find({ticker, fiscal_year});
    return it != by_key_.end() ? &reports_[it->second] : nullptr;
}

std::size_t ReportStore::page_count() const {
    std::size_t n = 0;
    for (const auto& r : reports_) n += r.pages.size();
    return n;
}

// ---------------------------------------------------------------------------
// Report loading
// ---------------------------------------------------------------------------

namespace {

const json& require_field(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end()) throw MissingField(where + ": missing field '" + key + "'");
    return *it;
}

Table parse_table(const json& j, const std::string& where) {
    Table t;
    t.row_names = require_field(j, "row_names", where).get<std::vector<std::string>>();
    t.column_names = require_field(j, "column_names", where).get<std::vector<std::string>>();
    if (t.row_names.empty() || t.column_names.empty()) {
        throw NonRectangularTable(where + ": row/column name lists must be non-empty");
    }
    const json& cells = require_field(j, "cells", where);
    if (cells.size() != t.row_names.size()) {
        throw NonRectangularTable(where + ": " + std::to_string(cells.size()) +
                                  " cell rows for " + std::to_string(t.row_names.size()) +
                                  " row names");
    }
    for (std::size_t r = 0; r < cells.size(); ++r) {
        auto row = cells[r].get<std::vector<std::string>>();
        if (row.size() != t.column_names.size()) {
            throw NonRectangularTable(where + ": row " + std::to_string(r) + " has " +
                                      std::to_string(row.size()) + " cells, expected " +
                                      std::to_string(t.column_names.size()));
        }
        t.cells.push_back(std::move(row));
    }
    return t;
}

Report parse_report(const json& j, const std::string& where) {
    Report report;
    report.ticker = require_field(j, "ticker", where).get<std::string>();
    std::transform(report.ticker.begin(), report.ticker.end(), report.ticker.begin(),
                   [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); });
    report.fiscal_year = require_field(j, "fiscal_year", where).get<int>();

    int last_page_no = 0;
    for (const json& pj : require_field(j, "pages", where)) {
        Page page;
        const std::string pwhere = where + ": page " + std::to_string(report.pages.size());
        page.page_no = require_field(pj, "page_no", pwhere).get<int>();
        if (page.page_no < 1) throw MissingField(pwhere + ": page_no must be >= 1");
        if (page.page_no <= last_page_no) {
            throw MissingField(pwhere + ": page numbers must be strictly increasing");
        }
        last_page_no = page.page_no;
        page.text = require_field(pj, "text", pwhere).get<std::string>();
        if (auto it = pj.find("tables"); it != pj.end()) {
            for (std::size_t t = 0; t < it->size(); ++t) {
                page.tables.push_back(
                    parse_table((*it)[t], pwhere + " table " + std::to_string(t)));
            }
        }
        if (trim(page.text).empty() && page.tables.empty()) {
            throw EmptyPage(pwhere + ": page has neither text nor tables");
        }
        report.pages.push_back(std::move(page));
    }
    return report;
}

}  // namespace

ReportStore load_reports(const std::filesystem::path& dir, Gazetteer gazetteer) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());

    std::vector<Report> reports;
    std::set<std::pair<std::string, int>> keys;
    for (const auto& file : files) {
        const std::string where = file.filename().string();
        json j;
        try {
            j = json::parse(read_file(file));
        } catch (const json::exception& e) {
            throw MissingField(where + ": invalid JSON: " + e.what());
        }
        try {
            Report report = parse_report(j, where);
            if (!keys.insert({report.ticker, report.fiscal_year}).second) {
                throw DuplicateReportKey(where + ": duplicate report key (" + report.ticker +
                                         ", " + std::to_string(report.fiscal_year) + ")");
            }
            reports.push_back(std::move(report));
        } catch (const json::exception& e) {
            throw MissingField(where + ": " + e.what());
        }
    }
    return ReportStore(std::move(reports), std::move(gazetteer));
}

// ---------------------------------------------------------------------------
// FinQA loading
// ---------------------------------------------------------------------------

namespace {

Split split_from_filename(const std::filesystem::path& file) {
    const std::string stem = lower_ascii(file.stem().string());
    if (stem.find("train") != std::string::npos) return Split::train;
    if (stem.find("dev") != std::string::npos) return Split::dev;
    return Split::test;
}

GoldPageRef parse_gold_page(const std::string& id) {
    static const std::regex kIdPattern(R"(^([A-Za-z.\-]+)/(\d{4})/page_(\d+)\.pdf-(\d+)$)");
    std::smatch m;
    if (!std::regex_match(id, m, kIdPattern)) {
        throw UnparseableId("cannot parse gold page from id: " + id);
    }
    GoldPageRef ref;
    ref.ticker = m[1].str();
    std::transform(ref.ticker.begin(), ref.ticker.end(), ref.ticker.begin(),
                   [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); });
    ref.fiscal_year = static_cast<int>(*parse_long(m[2].str()));
    ref.page_no = static_cast<int>(*parse_long(m[3].str()));
    ref.resolved = true;
    return ref;
}

std::string json_to_answer_string(const json& j) {
    if (j.is_string()) return j.get<std::string>();
    if (j.is_number()) return format_double(j.get<double>());
    if (j.is_boolean()) return j.get<bool>() ? "yes" : "no";
    return j.dump();
}

// FinQA gold_inds keys look like "text_4" or "table_2". Text indices count
// the pre_text + post_text sentences; table indices count raw table rows with
// row 0 being the header, so "table_k" is linearized row k-1.
void map_gold_inds(const json& gold_inds, const GoldPageRef& gold_page, QARecord& record) {
    std::vector<std::string> keys;
    if (gold_inds.is_object()) {
        for (const auto& [key, value] : gold_inds.items()) keys.push_back(key);
    } else if (gold_inds.is_array()) {
        for (const auto& v : gold_inds) {
            if (v.is_string()) keys.push_back(v.get<std::string>());
        }
    }
    std::sort(keys.begin(), keys.end());
    const SourceRef src{gold_page.ticker, gold_page.fiscal_year, gold_page.page_no};
    for (const auto& key : keys) {
        if (key.rfind("text_", 0) == 0) {
            if (auto idx = parse_long(std::string_view(key).substr(5)); idx && *idx >= 0) {
                record.gold_context_ids.push_back(
                    unit_id(src, UnitKind::text_sentence, static_cast<int>(*idx)));
                continue;
            }
        } else if (key.rfind("table_", 0) == 0) {
            if (auto idx = parse_long(std::string_view(key).substr(6)); idx && *idx >= 1) {
                record.gold_context_ids.push_back(
                    unit_id(src, UnitKind::table_row, static_cast<int>(*idx) - 1));
                continue;
            }
        }
        record.gold_mapping_notes.push_back("unmappable gold index '" + key + "'");
    }
}

}  // namespace

std::vector<QARecord> load_finqa(const std::filesystem::path& file) {
    json j;
    try {
        j = json::parse(read_file(file));
    } catch (const json::exception& e) {
        throw IoError("bad FinQA file " + file.string() + ": " + e.what());
    }
    if (!j.is_array()) throw IoError("FinQA file must be a JSON array: " + file.string());

    const Split split = split_from_filename(file);
    std::vector<QARecord> records;
    for (const json& entry : j) {
        QARecord record;
        record.split = split;
        record.id = json_to_answer_string(require_field(entry, "id", file.filename().string()));
        record.gold_page = parse_gold_page(record.id);

        auto qa = entry.find("qa");
        if (qa == entry.end() || !qa->is_object()) {
            throw MissingQuestion(record.id + ": entry has no 'qa' object");
        }
        auto question = qa->find("question");
        if (question == qa->end() || !question->is_string() ||
            trim(question->get<std::string>()).empty()) {
            throw MissingQuestion(record.id + ": qa has no question");
        }
        record.question = question->get<std::string>();
        record.program = qa->value("program", "");
        record.answer = qa->contains("answer") ? json_to_answer_string((*qa)["answer"]) : "";
        record.exe_answer = qa->contains("exe_ans") ? json_to_answer_string((*qa)["exe_ans"]) : "";
        record.program_parseable = !record.program.empty() && is_parseable_program(record.program);
        if (qa->contains("gold_inds")) map_gold_inds((*qa)["gold_inds"], record.gold_page, record);
        records.push_back(std::move(record));
    }
    return records;
}

// ---------------------------------------------------------------------------
// Linearization and sentence splitting
// ---------------------------------------------------------------------------

std::vector<ContextUnit> linearize_table(const Table& table, const SourceRef& source,
                                         int first_index) {
    std::vector<ContextUnit> units;
    units.reserve(table.row_names.size());
    for (std::size_t r = 0; r < table.row_names.size(); ++r) {
        std::string content;
        for (std::size_t c = 0; c < table.column_names.size(); ++c) {
            if (c > 0) content += " ; ";
            content += "the " + table.column_names[c] + " of " + table.row_names[r] + " is " +
                       table.cells[r][c];
        }
        const int index = first_index + static_cast<int>(r);
        units.push_back({unit_id(source, UnitKind::table_row, index), UnitKind::table_row,
                         std::move(content), source, index});
    }
    return units;
}

std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> sentences;
    auto flush = [&](std::string_view fragment) {
        const std::string s = trim(fragment);
        if (s.empty()) return;
        // keep only fragments of at least two whitespace-separated tokens
        std::size_t tokens = 0;
        bool in_token = false;
        for (char c : s) {
            const bool space = std::isspace(static_cast<unsigned char>(c)) != 0;
            if (!space && !in_token) ++tokens;
            in_token = !space;
        }
        if (tokens >= 2) sentences.push_back(s);
    };

    std::size_t start = 0;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (c != '.' && c != '!' && c != '?') continue;
        const bool at_end = i + 1 >= text.size();
        const bool before_space =
            !at_end && std::isspace(static_cast<unsigned char>(text[i + 1])) != 0;
        if (!at_end && !before_space) continue;
        if (c == '.' && i > 0 && !at_end && is_ascii_digit(text[i - 1]) &&
            is_ascii_digit(text[i + 1])) {
            continue;  // decimal point, not a boundary
        }
        flush(text.substr(start, i - start + 1));
        start = i + 1;
    }
    if (start < text.size()) flush(text.substr(start));
    return sentences;
}

std::vector<ContextUnit> extract_context_units(const Page& page, const SourceRef& source) {
    std::vector<ContextUnit> units;
    int text_index = 0;
    for (auto& sentence : split_sentences(page.text)) {
        units.push_back({unit_id(source, UnitKind::text_sentence, text_index),
                         UnitKind::text_sentence, sentence, source, text_index});
        ++text_index;
    }
    int row_index = 0;
    for (const Table& table : page.tables) {
        auto rows = linearize_table(table, source, row_index);
        row_index += static_cast<int>(rows.size());
        for (auto& row : rows) units.push_back(std::move(row));
    }
    if (units.empty()) {
        throw EmptyPage("page " + page_id(source.ticker, source.fiscal_year, source.page_no) +
                        " yields no context units");
    }
    return units;
}

std::vector<ContextUnit> report_context_units(const Report& report) {
    std::vector<ContextUnit> units;
    for (const Page& page : report.pages) {
        SourceRef src{report.ticker, report.fiscal_year, page.page_no};
        for (auto& unit : extract_context_units(page, src)) units.push_back(std::move(unit));
    }
    return units;
}

// ---------------------------------------------------------------------------
// Question augmentation
// ---------------------------------------------------------------------------

std::string augment_question(const std::string& question, const std::string& ticker,
                             int year, const Gazetteer& gazetteer) {
    const std::string year_str = std::to_string(year);
    const bool has_year = question.find(year_str) != std::string::npos;
    const bool has_company = contains_word_ci(question, ticker) ||
                             contains_word_ci(question, gazetteer.name_for(ticker));
    if (has_year && has_company) return question;
    return question + " (for " + ticker + " in " + year_str + ")";
}

// ---------------------------------------------------------------------------
// Gold reference validation
// ---------------------------------------------------------------------------

std::vector<std::string> check_gold_references(const ReportStore& store,
                                               const std::vector<QARecord>& records) {
    std::set<std::string> known_units;
    for (const Report& report : store.reports()) {
        for (const auto& unit : report_context_units(report)) known_units.insert(unit.id);
    }
    std::vector<std::string> notes;
    for (const QARecord& record : records) {
        if (!record.gold_page.resolved) continue;
        const Report* report = store.find(record.gold_page.ticker, record.gold_page.fiscal_year);
        if (!report) {
            notes.push_back(record.id + ": gold report not in store");
            continue;
        }
        const bool page_present =
            std::any_of(report->pages.begin(), report->pages.end(),
                        [&](const Page& p) { return p.page_no == record.gold_page.page_no; });
        if (!page_present) {
            notes.push_back(record.id + ": gold page " +
                            std::to_string(record.gold_page.page_no) + " not in report");
            continue;
        }
        for (const auto& gid : record.gold_context_ids) {
            if (!known_units.count(gid)) {
                notes.push_back(record.id + ": gold context " + gid + " not found");
            }
        }
        for (const auto& note : record.gold_mapping_notes) {
            notes.push_back(record.id + ": " + note);
        }
    }
    return notes;
}

}  // namespace finrag
