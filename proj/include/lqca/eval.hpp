#pragma once

#include "lqca/chat.hpp"
#include "lqca/pipeline.hpp"

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lqca::eval {

enum class Metric { f1, rouge_l, accuracy };

std::string_view to_string(Metric metric);

struct EvalRecord {
    std::string id;
    std::string context;
    std::string question;
    // For multiple choice the first entry is the gold letter.
    std::vector<std::string> gold_answers;
    std::vector<std::string> choices;
    std::optional<double> answer_position_fraction;
    Metric metric = Metric::f1;
};

enum class Adapter { longbench, leval, loogle, generic };

struct SkippedLine {
    std::size_t line = 0; // 1-based
    std::string reason;
};

struct Dataset {
    std::vector<EvalRecord> records;
    std::vector<SkippedLine> skipped;
};

/// Reads a JSON-lines file through the named field mapping. Malformed lines
/// are skipped and listed (and logged). Throws ConfigError when the file
/// cannot be read and ParseError when no valid record remains.
Dataset load_dataset(const std::filesystem::path& path, Adapter adapter);

/// Records on one line (L-Eval and LooGLE lines can hold several). Throws
/// std::invalid_argument describing what is wrong with the line.
std::vector<EvalRecord> parse_line(std::string_view line, Adapter adapter, std::size_t line_number);

/// LCS-based F-measure over lower-cased alphanumeric tokens.
double rouge_l(std::string_view prediction, std::string_view reference);

/// Bag-of-tokens F1 over normalize_answer() output; the
/// best score over all golds.
double qa_f1(std::string_view prediction, std::span<const std::string> golds);

std::string normalize_answer(std::string_view s);

/// Upper-cased first choice letter in a reply, if any. Explicit
/// "answer is X" / "answer: X" phrasing wins; otherwise the first standalone
/// capital letter in range (skipping the article "A"), then a lower-case
/// letter written as "b)" / "b." or alone.
std::optional<char> extract_choice_letter(std::string_view response, std::size_t choice_count);

struct ChoiceScore {
    double score = 0.0;
    std::optional<char> letter;
    bool unparsed = true;
};

ChoiceScore choice_accuracy(std::string_view prediction, char gold_letter, std::span<const std::string> choices);

enum class RunMode { lqca, vanilla, cot };

std::string_view to_string(RunMode mode);

struct RecordResult {
    std::string id;
    Metric metric = Metric::f1;
    double score = 0.0;
    std::string prediction;
    bool failed = false;
    bool unparsed = false;
    std::string error;
    std::optional<double> answer_position_fraction;
};

struct Aggregate {
    double mean = 0.0;
    std::size_t count = 0;
};

inline constexpr std::size_t kPositionBuckets = 5;

/// Bucket of a position fraction: [0,.2) [.2,.4) [.4,.6) [.6,.8) [.8,1].
std::size_t position_bucket(double fraction);

struct MetricsReport {
    std::string run_id;
    RunMode mode = RunMode::vanilla;
    std::vector<RecordResult> records;
    std::map<std::string, Aggregate> by_metric;
    std::array<Aggregate, kPositionBuckets> by_position{};
    bool has_positions = false;
    std::size_t failed = 0;
    std::size_t resumed = 0;
};

struct BenchmarkOptions {
    RunMode mode = RunMode::lqca;
    PipelineConfig pipeline;
    std::size_t max_context_tokens = 128000;
    std::size_t parallelism = 1;
    std::string run_id = "run";
    // Per-record JSON lines; existing entries for the same run id are reused.
    std::optional<std::filesystem::path> results_path;
};

/// Scores every record; per-record failures are recorded and the run goes on.
MetricsReport run_benchmark(std::span<const EvalRecord> records, const BenchmarkOptions& options,
                            qa::ChatModel& model, resolver::Backend& backend, representative::Tagger& tagger);

/// Recomputes aggregates from `report.records`.
void aggregate(MetricsReport& report);

std::string report_json(const MetricsReport& report, int indent = 2);
std::string report_table(const MetricsReport& report);

} // namespace lqca::eval
