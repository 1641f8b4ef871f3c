#include "ttharness/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>
#include <set>
#include <sstream>

#include <json.hpp>

#include "ttharness/error.hpp"
#include "ttharness/prompts.hpp"

namespace ttharness {

using json = nlohmann::json;

void ConversationPair::check() const {
    if (machine_side.mode != mode || human_side.mode != mode)
        throw Error(ErrorCode::bad_request, "pair " + id + ": dialogue modes differ");
    if (machine_side.topic && human_side.topic && *machine_side.topic != *human_side.topic)
        throw Error(ErrorCode::bad_request, "pair " + id + ": topics differ");
    const auto machine_turns = count_turns(machine_side);
    const auto human_turns = count_turns(human_side);
    if (machine_turns != turns || human_turns != turns)
        throw Error(ErrorCode::bad_request,
                    "pair " + id + ": turn counts " + std::to_string(machine_turns) + " and " +
                        std::to_string(human_turns) + " do not match X=" + std::to_string(turns));
}

const char* to_string(Presentation p) noexcept {
    return p == Presentation::machine_first ? "machine_first" : "human_first";
}

const char* to_string(JudgeOption o) noexcept { return o == JudgeOption::A ? "A" : "B"; }

const char* to_string(JudgeKind k) noexcept { return k == JudgeKind::human ? "human" : "llm"; }

JudgeOption option_from_string(std::string_view text) {
    if (text == "A" || text == "a" || text == "(A)") return JudgeOption::A;
    if (text == "B" || text == "b" || text == "(B)") return JudgeOption::B;
    throw Error(ErrorCode::bad_request, "unknown option '" + std::string(text) + "'");
}

std::string QuestionnaireItem::rendered(int which) const {
    TranscriptOptions opts;
    opts.labels = TranscriptLabels::judge();
    opts.timestamps = false;
    return render_transcript(which == 1 ? conversation1 : conversation2, opts);
}

QuestionnaireItem assemble_questionnaire(const ConversationPair& pair, Rng& rng,
                                         std::string item_id) {
    pair.check();
    QuestionnaireItem item;
    item.id = item_id.empty() ? pair.id : std::move(item_id);
    item.pair_id = pair.id;
    std::bernoulli_distribution coin(0.5);
    item.order = coin(rng) ? Presentation::machine_first : Presentation::human_first;
    const bool machine_first = item.order == Presentation::machine_first;
    item.conversation1 = machine_first ? pair.machine_side : pair.human_side;
    item.conversation2 = machine_first ? pair.human_side : pair.machine_side;
    item.answer_key = machine_first ? JudgeOption::A : JudgeOption::B;
    return item;
}

QuestionnaireItem swap_presentation(const QuestionnaireItem& item) {
    QuestionnaireItem out = item;
    std::swap(out.conversation1, out.conversation2);
    out.order = item.order == Presentation::machine_first ? Presentation::human_first
                                                          : Presentation::machine_first;
    out.answer_key = item.answer_key == JudgeOption::A ? JudgeOption::B : JudgeOption::A;
    return out;
}

JudgmentRecord make_record(const QuestionnaireItem& item, std::string judge_id, JudgeKind kind,
                           std::optional<JudgeOption> chosen) {
    JudgmentRecord rec;
    rec.item_id = item.id;
    rec.judge_id = std::move(judge_id);
    rec.kind = kind;
    rec.chosen = chosen;
    rec.correct = chosen && *chosen == item.answer_key;
    return rec;
}

std::optional<JudgeOption> parse_verdict(std::string_view reply) {
    const std::string text(reply);
    auto single = [](const std::set<char>& found) -> std::optional<JudgeOption> {
        if (found.size() != 1) return std::nullopt;
        return *found.begin() == 'A' ? JudgeOption::A : JudgeOption::B;
    };
    auto upper = [](char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); };

    static const std::regex parenthesized(R"(\(\s*([abAB])\s*\))");
    std::set<char> found;
    for (std::sregex_iterator it(text.begin(), text.end(), parenthesized), end; it != end; ++it)
        found.insert(upper((*it)[1].str()[0]));
    if (!found.empty()) return single(found);

    static const std::regex labelled(R"(\b(?:option|answer|choice)\b\s*(?:is\s*)?[:=]?\s*([ab])\b)",
                                     std::regex::icase);
    std::smatch match;
    if (std::regex_search(text, match, labelled)) return single({upper(match[1].str()[0])});

    std::string bare;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c)) && !std::ispunct(static_cast<unsigned char>(c)))
            bare += c;
    if (bare.size() == 1) {
        const char c = upper(bare[0]);
        if (c == 'A' || c == 'B') return single({c});
    }

    static const std::regex letter(R"((^|[^A-Za-z])([AB])(?![A-Za-z]))");
    for (std::sregex_iterator it(text.begin(), text.end(), letter), end; it != end; ++it) {
        const auto pos = static_cast<std::size_t>((*it).position(2));
        if (pos >= 5 && text.compare(pos - 5, 5, "User ") == 0) continue;
        found.insert((*it)[2].str()[0]);
    }
    return single(found);
}

JudgmentRecord run_llm_judge(ChatBackend& backend, const QuestionnaireItem& item,
                             const RetryPolicy& retry) {
    const std::string prompt = build_judge_prompt(item.conversation1, item.conversation2);
    const std::string reply =
        complete_with_retry(backend, {prompt, {}, "judge:" + item.id}, retry).text;
    JudgmentRecord rec = make_record(item, backend.label(), JudgeKind::llm, parse_verdict(reply));
    if (!rec.valid()) rec.diagnostic = "no option in reply: " + reply.substr(0, 200);
    return rec;
}

double pass_rate(std::span<const int> correct, int judges) {
    if (judges < 1) throw Error(ErrorCode::domain, "K must be positive");
    std::vector<int> ks(correct.size(), judges);
    return pass_rate(correct, ks);
}

double pass_rate(std::span<const int> correct, std::span<const int> judges) {
    if (correct.empty()) throw Error(ErrorCode::domain, "C is empty");
    if (correct.size() != judges.size())
        throw Error(ErrorCode::domain, "C and K have different lengths");
    double sum = 0.0;
    for (std::size_t i = 0; i < correct.size(); ++i) {
        if (judges[i] < 1) throw Error(ErrorCode::domain, "K must be positive");
        if (correct[i] < 0 || correct[i] > judges[i])
            throw Error(ErrorCode::domain, "C_" + std::to_string(i + 1) + " outside [0, K]");
        sum += static_cast<double>(correct[i]) / static_cast<double>(judges[i]);
    }
    return 1.0 - sum / static_cast<double>(correct.size());
}

std::string format_percent(double rate) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", std::round(rate * 1000.0) / 10.0);
    return buf;
}

bool is_group_key(std::string_view key) {
    return std::find(std::begin(kGroupKeys), std::end(kGroupKeys), key) != std::end(kGroupKeys);
}

std::string judge_label(const JudgmentRecord& record) {
    return record.kind == JudgeKind::human ? "human" : record.judge_id;
}

namespace {

std::string group_value(std::string_view key, const ConversationPair& pair,
                        const JudgmentRecord& rec) {
    if (key == "model") return pair.model;
    if (key == "mode") return to_string(pair.mode);
    if (key == "X") return std::to_string(pair.turns);
    if (key == "duration") return std::to_string(pair.duration());
    if (key == "history") return std::to_string(pair.history_turns);
    if (key == "judge") return judge_label(rec);
    if (key == "topic") return pair.topic;
    throw Error(ErrorCode::bad_request, "unknown group key '" + std::string(key) + "'");
}

}  // namespace

std::vector<PassRateReport> aggregate(std::span<const JudgmentRecord> records,
                                      const EvaluationIndex& index,
                                      std::span<const std::string> group_by) {
    for (const auto& key : group_by)
        if (!is_group_key(key))
            throw Error(ErrorCode::bad_request, "unknown group key '" + key + "'");

    // group -> pair id -> (correct, judges)
    std::map<std::map<std::string, std::string>, std::map<std::string, std::pair<int, int>>> tally;
    for (const JudgmentRecord& rec : records) {
        if (!rec.valid()) continue;
        const auto item = index.items.find(rec.item_id);
        if (item == index.items.end()) continue;
        const auto pair = index.pairs.find(item->second.pair_id);
        if (pair == index.pairs.end()) continue;
        std::map<std::string, std::string> group;
        for (const auto& key : group_by) group[key] = group_value(key, pair->second, rec);
        auto& counts = tally[group][pair->first];
        counts.first += rec.correct ? 1 : 0;
        counts.second += 1;
    }

    std::vector<PassRateReport> reports;
    for (const auto& [group, per_pair] : tally) {
        PassRateReport report;
        report.group = group;
        for (const auto& [pair_id, counts] : per_pair) {
            report.pair_ids.push_back(pair_id);
            report.correct.push_back(counts.first);
            report.judges.push_back(counts.second);
        }
        report.pass_rate = pass_rate(report.correct, report.judges);
        reports.push_back(std::move(report));
    }
    return reports;
}

std::vector<SummaryRow> summary_table(std::span<const JudgmentRecord> records,
                              const EvaluationIndex& index) {
    const std::vector<std::string> by_mode{"model", "duration", "judge", "mode"};
    const std::vector<std::string> by_union{"model", "duration", "judge"};
    std::map<std::pair<std::string, std::size_t>, SummaryRow> rows;
    auto row_for = [&rows](const PassRateReport& r) -> SummaryRow& {
        const std::string& model = r.group.at("model");
        const std::size_t duration = std::stoul(r.group.at("duration"));
        auto& row = rows[{model, duration}];
        row.model = model;
        row.duration = duration;
        return row;
    };
    for (const auto& r : aggregate(records, index, by_mode)) {
        const std::string column = r.group.at("mode") == "burst" ? "Burst" : "P-P";
        row_for(r).cells[r.group.at("judge")][column] = r.pass_rate;
    }
    for (const auto& r : aggregate(records, index, by_union))
        row_for(r).cells[r.group.at("judge")]["Avg."] = r.pass_rate;

    std::vector<SummaryRow> out;
    for (auto& [key, row] : rows) out.push_back(std::move(row));
    return out;
}

std::string render_summary_csv(std::span<const SummaryRow> rows) {
    std::set<std::string> judges;
    for (const auto& row : rows)
        for (const auto& [judge, cells] : row.cells) judges.insert(judge);
    static const char* const kColumns[] = {"P-P", "Burst", "Avg."};

    std::ostringstream out;
    out << "model,duration";
    for (const auto& judge : judges)
        for (const char* col : kColumns) out << ',' << judge << ' ' << col;
    out << '\n';
    for (const auto& row : rows) {
        out << row.model << ',' << row.duration << "-Turn";
        for (const auto& judge : judges) {
            const auto cells = row.cells.find(judge);
            for (const char* col : kColumns) {
                out << ',';
                if (cells == row.cells.end()) continue;
                if (auto it = cells->second.find(col); it != cells->second.end())
                    out << format_percent(it->second);
            }
        }
        out << '\n';
    }
    return out.str();
}

std::string render_reports_csv(std::span<const PassRateReport> reports,
                               std::span<const std::string> group_by) {
    std::ostringstream out;
    for (const auto& key : group_by) out << key << ',';
    out << "N,K,pass_rate\n";
    for (const auto& r : reports) {
        for (const auto& key : group_by) out << r.group.at(key) << ',';
        const bool uniform = std::adjacent_find(r.judges.begin(), r.judges.end(),
                                                std::not_equal_to<>()) == r.judges.end();
        out << r.pairs() << ',';
        if (uniform && !r.judges.empty())
            out << r.judges.front();
        else
            out << "varies";
        out << ',' << format_percent(r.pass_rate) << '\n';
    }
    return out.str();
}

std::string render_reports_json(std::span<const PassRateReport> reports) {
    json doc = json::array();
    for (const auto& r : reports) {
        doc.push_back({{"group", r.group},
                       {"N", r.pairs()},
                       {"pairs", r.pair_ids},
                       {"C", r.correct},
                       {"K", r.judges},
                       {"pass_rate", r.pass_rate},
                       {"pass_rate_percent", format_percent(r.pass_rate)}});
    }
    return doc.dump(2) + "\n";
}

std::vector<BandAccuracy> demographic_accuracy(std::span<const JudgmentRecord> records,
                                               std::string_view dimension) {
    std::map<std::string, BandAccuracy> bands;
    for (const auto& rec : records) {
        if (rec.kind != JudgeKind::human || !rec.valid() || !rec.demographics) continue;
        const Demographics& d = *rec.demographics;
        std::string band;
        if (dimension == "age_band")
            band = d.age_band;
        else if (dimension == "education")
            band = d.education;
        else if (dimension == "ai_familiarity")
            band = d.ai_familiarity;
        else
            throw Error(ErrorCode::bad_request,
                        "unknown demographic dimension '" + std::string(dimension) + "'");
        auto& acc = bands[band];
        acc.band = band;
        acc.total += 1;
        acc.correct += rec.correct ? 1 : 0;
    }
    std::vector<BandAccuracy> out;
    for (auto& [band, acc] : bands) out.push_back(acc);
    return out;
}

std::vector<JudgmentRecord> ingest_human_judgments(
    std::string_view text, const std::map<std::string, QuestionnaireItem>& items,
    std::span<const JudgmentRecord> existing) {
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& rec : existing) seen.insert({rec.judge_id, rec.item_id});

    std::vector<JudgmentRecord> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string line(text.substr(pos, end - pos));
        pos = end + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

        json row;
        try {
            row = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(line_no, std::string("invalid JSON: ") + e.what());
        }
        auto field = [&](const char* name) -> std::string {
            if (!row.is_object() || !row.contains(name) || !row[name].is_string())
                throw ParseError(line_no, std::string("missing string field '") + name + "'");
            return row[name].get<std::string>();
        };
        const std::string judge_id = field("judge_id");
        const std::string item_id = field("item_id");
        const std::string chosen = field("chosen_option");
        Demographics demo{field("age_band"), field("education"), field("ai_familiarity")};

        const auto item = items.find(item_id);
        if (item == items.end())
            throw Error(ErrorCode::not_found,
                        "line " + std::to_string(line_no) + ": unknown item id '" + item_id + "'");
        JudgeOption option;
        try {
            option = option_from_string(chosen);
        } catch (const Error&) {
            throw ParseError(line_no, "chosen_option must be A or B, got '" + chosen + "'");
        }
        if (!seen.insert({judge_id, item_id}).second)
            throw Error(ErrorCode::conflict, "line " + std::to_string(line_no) + ": judge '" +
                                                 judge_id + "' already judged item '" + item_id +
                                                 "'");
        JudgmentRecord rec = make_record(item->second, judge_id, JudgeKind::human, option);
        rec.demographics = std::move(demo);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace ttharness
