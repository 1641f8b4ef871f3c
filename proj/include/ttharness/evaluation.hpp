#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ttharness/backend.hpp"
#include "ttharness/dialogue.hpp"
#include "ttharness/timing.hpp"

namespace ttharness {

/// A human-machine conversation and a same-topic human-human reference, both X turns long.
struct ConversationPair {
    std::string id;
    std::string topic;
    std::size_t turns = 0;          // X: turns shown to the judges
    std::size_t preceding_turns = 0; // pseudo-dialogue turns before the judged suffix
    std::size_t history_turns = 0;  // persona history given to the chatbot
    std::string model;
    DialogueMode mode = DialogueMode::burst;
    Dialogue machine_side;
    Dialogue human_side;

    /// Total length of the test: preceding turns plus X.
    [[nodiscard]] std::size_t duration() const noexcept { return preceding_turns + turns; }

    /// Both sides have X complete turns and share topic and mode.
    void check() const;
};

enum class Presentation { machine_first, human_first };
enum class JudgeOption { A, B };
enum class JudgeKind { human, llm };

[[nodiscard]] const char* to_string(Presentation p) noexcept;
[[nodiscard]] const char* to_string(JudgeOption o) noexcept;
[[nodiscard]] const char* to_string(JudgeKind k) noexcept;
[[nodiscard]] JudgeOption option_from_string(std::string_view text);

struct QuestionnaireItem {
    std::string id;
    std::string pair_id;
    Presentation order = Presentation::machine_first;
    Dialogue conversation1;
    Dialogue conversation2;
    /// The option that correctly names the machine: A when the machine is Conversation 1.
    JudgeOption answer_key = JudgeOption::A;

    /// Transcript with A/B labels, as shown to judges.
    [[nodiscard]] std::string rendered(int which) const;
};

/// Draws the presentation order from `rng` and sets the key to match it.
[[nodiscard]] QuestionnaireItem assemble_questionnaire(const ConversationPair& pair, Rng& rng,
                                                       std::string item_id = {});

/// Swaps the two conversations and the answer key.
[[nodiscard]] QuestionnaireItem swap_presentation(const QuestionnaireItem& item);

struct Demographics {
    std::string age_band;
    std::string education;
    std::string ai_familiarity;

    friend bool operator==(const Demographics&, const Demographics&) = default;
};

struct JudgmentRecord {
    std::string item_id;
    std::string judge_id;
    JudgeKind kind = JudgeKind::human;
    std::optional<JudgeOption> chosen;  // empty when the verdict was unusable
    bool correct = false;
    std::optional<Demographics> demographics;
    std::string diagnostic;

    [[nodiscard]] bool valid() const noexcept { return chosen.has_value(); }
};

[[nodiscard]] JudgmentRecord make_record(const QuestionnaireItem& item, std::string judge_id,
                                         JudgeKind kind, std::optional<JudgeOption> chosen);

/// Reads an option out of a free-form judge reply: "(A)", "Answer: b", "B." and the like.
/// Returns nullopt when no option, or both options, are named.
[[nodiscard]] std::optional<JudgeOption> parse_verdict(std::string_view reply);

[[nodiscard]] JudgmentRecord run_llm_judge(ChatBackend& backend, const QuestionnaireItem& item,
                                           const RetryPolicy& retry = {});

/// 1 - (1/N) * sum(C_i / K). Throws ErrorCode::domain on empty C, K < 1 or C_i outside [0, K].
[[nodiscard]] double pass_rate(std::span<const int> correct, int judges);

/// Per-pair judge counts, for pairs that were not seen by the same number of judges.
[[nodiscard]] double pass_rate(std::span<const int> correct, std::span<const int> judges);

/// Percent to one decimal, e.g. 0.519 -> "51.9".
[[nodiscard]] std::string format_percent(double rate);

/// Grouping keys understood by aggregate().
inline constexpr std::string_view kGroupKeys[] = {"model",   "mode",  "X",    "duration",
                                                  "history", "judge", "topic"};

[[nodiscard]] bool is_group_key(std::string_view key);

struct PassRateReport {
    std::map<std::string, std::string> group;
    std::vector<std::string> pair_ids;
    std::vector<int> correct;  // C_i
    std::vector<int> judges;   // K_i
    double pass_rate = 0.0;

    [[nodiscard]] std::size_t pairs() const noexcept { return pair_ids.size(); }
};

struct EvaluationIndex {
    std::map<std::string, QuestionnaireItem> items;
    std::map<std::string, ConversationPair> pairs;
};

/// Human judges share the "human" judge label; each LLM judge is labelled by its id.
[[nodiscard]] std::string judge_label(const JudgmentRecord& record);

/// Groups valid records by the requested keys and computes C per pair and the pass rate.
/// Records referencing unknown items are skipped. Empty groups are omitted.
[[nodiscard]] std::vector<PassRateReport> aggregate(std::span<const JudgmentRecord> records,
                                                    const EvaluationIndex& index,
                                                    std::span<const std::string> group_by);

struct SummaryRow {
    std::string model;
    std::size_t duration = 0;
    /// judge label -> {"P-P", "Burst", "Avg."} -> rate; absent when no pairs.
    std::map<std::string, std::map<std::string, double>> cells;
};

/// Pass rate per model and duration, with P-P, Burst and Avg. (union of both modes' pairs)
/// columns for every judge.
[[nodiscard]] std::vector<SummaryRow> summary_table(std::span<const JudgmentRecord> records,
                                            const EvaluationIndex& index);

[[nodiscard]] std::string render_summary_csv(std::span<const SummaryRow> rows);
[[nodiscard]] std::string render_reports_csv(std::span<const PassRateReport> reports,
                                             std::span<const std::string> group_by);
[[nodiscard]] std::string render_reports_json(std::span<const PassRateReport> reports);

struct BandAccuracy {
    std::string band;
    std::size_t correct = 0;
    std::size_t total = 0;
    [[nodiscard]] double accuracy() const noexcept {
        return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total);
    }
};

/// Judge accuracy of human records per band of "age_band", "education" or "ai_familiarity".
[[nodiscard]] std::vector<BandAccuracy> demographic_accuracy(
    std::span<const JudgmentRecord> records, std::string_view dimension);

/// Line-delimited JSON: judge_id, item_id, chosen_option, age_band, education,
/// ai_familiarity. Rejects unknown items and duplicate (judge, item) rows.
[[nodiscard]] std::vector<JudgmentRecord> ingest_human_judgments(
    std::string_view text, const std::map<std::string, QuestionnaireItem>& items,
    std::span<const JudgmentRecord> existing = {});

}  // namespace ttharness
