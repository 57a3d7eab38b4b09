#include "lqca/eval.hpp"

#include "lqca/errors.hpp"
#include "lqca/qa.hpp"
#include "lqca/text.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <regex>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace lqca::eval {

using nlohmann::json;

namespace {

constexpr std::string_view kSummaryInstruction = "Write an abstract that summarizes the document.";

bool is_alnum_byte(char c) {
    return (c >= '0' && c <= '9') || text::is_lower(c) || text::is_upper(c) || static_cast<unsigned char>(c) >= 0x80;
}

std::vector<std::string> alnum_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (is_alnum_byte(c)) {
            cur.push_back(text::is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c);
        } else if (!cur.empty()) {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

std::vector<std::string> split_ws(std::string_view s) {
    std::vector<std::string> out;
    std::istringstream in{std::string(s)};
    for (std::string w; in >> w;) {
        out.push_back(w);
    }
    return out;
}

std::string string_field(const json& obj, const char* key, bool required = true) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        if (required) {
            throw std::invalid_argument(std::string("missing field '") + key + "'");
        }
        return {};
    }
    if (it->is_string()) {
        return it->get<std::string>();
    }
    if (it->is_number()) {
        return it->dump();
    }
    throw std::invalid_argument(std::string("field '") + key + "' is not a string");
}

std::vector<std::string> string_list(const json& value, const char* key) {
    if (value.is_string()) {
        return {value.get<std::string>()};
    }
    if (!value.is_array()) {
        throw std::invalid_argument(std::string("field '") + key + "' is not a list");
    }
    std::vector<std::string> out;
    for (const auto& v : value) {
        if (!v.is_string()) {
            throw std::invalid_argument(std::string("field '") + key + "' holds a non-string");
        }
        out.push_back(v.get<std::string>());
    }
    return out;
}

Metric parse_metric(const std::string& name) {
    if (name == "f1") {
        return Metric::f1;
    }
    if (name == "rouge_l" || name == "rouge-l") {
        return Metric::rouge_l;
    }
    if (name == "accuracy") {
        return Metric::accuracy;
    }
    throw std::invalid_argument("unknown metric '" + name + "'");
}

void validate(EvalRecord& r) {
    if (r.question.empty()) {
        throw std::invalid_argument("empty question");
    }
    if (r.gold_answers.empty()) {
        throw std::invalid_argument("no gold answer");
    }
    if (r.answer_position_fraction && !(*r.answer_position_fraction >= 0.0 && *r.answer_position_fraction <= 1.0)) {
        throw std::invalid_argument("answer_position_fraction outside [0, 1]");
    }
    if (!r.choices.empty()) {
        const auto& gold = r.gold_answers.front();
        const auto letter = extract_choice_letter(gold, r.choices.size());
        if (!letter) {
            throw std::invalid_argument("multiple-choice record without a gold letter in range");
        }
        r.gold_answers.front() = std::string(1, *letter);
        r.metric = Metric::accuracy;
    }
}

EvalRecord generic_record(const json& obj, std::size_t line) {
    EvalRecord r;
    r.id = obj.contains("id") ? string_field(obj, "id") : "line-" + std::to_string(line);
    r.context = string_field(obj, "context");
    r.question = string_field(obj, "question");
    if (obj.contains("gold_answers")) {
        r.gold_answers = string_list(obj["gold_answers"], "gold_answers");
    }
    if (obj.contains("choices") && !obj["choices"].is_null()) {
        r.choices = string_list(obj["choices"], "choices");
    }
    if (obj.contains("answer_position_fraction") && !obj["answer_position_fraction"].is_null()) {
        r.answer_position_fraction = obj["answer_position_fraction"].get<double>();
    }
    if (obj.contains("metric")) {
        r.metric = parse_metric(obj["metric"].get<std::string>());
    }
    validate(r);
    return r;
}

EvalRecord longbench_record(const json& obj, std::size_t line) {
    static const std::set<std::string> summarization = {"gov_report", "qmsum", "multi_news", "vcsum", "samsum"};
    EvalRecord r;
    r.id = obj.contains("_id") ? string_field(obj, "_id") : "line-" + std::to_string(line);
    r.context = string_field(obj, "context");
    r.question = string_field(obj, "input");
    r.gold_answers = string_list(obj.at("answers"), "answers");
    const auto dataset = string_field(obj, "dataset", false);
    r.metric = summarization.count(dataset) != 0 ? Metric::rouge_l : Metric::f1;
    validate(r);
    return r;
}

// Choice lines such as "A. text" or "(B) text" inside an instruction.
std::vector<std::string> embedded_choices(const std::string& instruction, std::string& stem) {
    static const std::regex line_re(R"(^\s*\(?([A-E])[\.\):]\s*(.+?)\s*$)");
    std::vector<std::string> choices;
    std::istringstream in(instruction);
    std::string out_stem;
    for (std::string line; std::getline(in, line);) {
        std::smatch m;
        if (std::regex_match(line, m, line_re) && m[1].str()[0] == static_cast<char>('A' + choices.size())) {
            choices.push_back(m[2].str());
        } else if (choices.empty()) {
            out_stem += (out_stem.empty() ? "" : "\n") + line;
        }
    }
    if (choices.size() >= 2) {
        stem = out_stem;
        return choices;
    }
    return {};
}

std::vector<EvalRecord> leval_records(const json& obj, std::size_t line) {
    const auto context = string_field(obj, "input");
    const auto instructions = string_list(obj.at("instructions"), "instructions");
    const auto outputs = string_list(obj.at("outputs"), "outputs");
    if (instructions.size() != outputs.size()) {
        throw std::invalid_argument("instructions and outputs differ in length");
    }
    std::vector<EvalRecord> out;
    for (std::size_t i = 0; i < instructions.size(); ++i) {
        EvalRecord r;
        r.id = "line-" + std::to_string(line) + "-" + std::to_string(i);
        r.context = context;
        r.question = instructions[i];
        r.gold_answers = {outputs[i]};
        std::string stem;
        r.choices = embedded_choices(instructions[i], stem);
        if (!r.choices.empty()) {
            r.question = stem;
        }
        validate(r);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<EvalRecord> loogle_records(const json& obj, std::size_t line) {
    const auto context = obj.contains("context") ? string_field(obj, "context") : string_field(obj, "input");
    const auto base = obj.contains("id") ? string_field(obj, "id") : "line-" + std::to_string(line);
    std::vector<EvalRecord> out;
    if (obj.contains("qa_pairs") && obj["qa_pairs"].is_array()) {
        std::size_t i = 0;
        for (const auto& qa : obj["qa_pairs"]) {
            EvalRecord r;
            r.id = base + "-" + std::to_string(i++);
            r.context = context;
            r.question = string_field(qa, "Q");
            r.gold_answers = {string_field(qa, "A")};
            validate(r);
            out.push_back(std::move(r));
        }
    } else if (obj.contains("question")) {
        EvalRecord r;
        r.id = base;
        r.context = context;
        r.question = string_field(obj, "question");
        r.gold_answers = string_list(obj.at("answer"), "answer");
        validate(r);
        out.push_back(std::move(r));
    } else {
        EvalRecord r;
        r.id = base;
        r.context = context;
        r.question = std::string(kSummaryInstruction);
        r.gold_answers = {string_field(obj, "output")};
        r.metric = Metric::rouge_l;
        validate(r);
        out.push_back(std::move(r));
    }
    return out;
}

double mean_of(const std::vector<double>& xs) {
    if (xs.empty()) {
        return 0.0;
    }
    double sum = 0.0;
    for (double x : xs) {
        sum += x;
    }
    return sum / static_cast<double>(xs.size());
}

json result_json(const RecordResult& r, const std::string& run_id) {
    json j = {{"run_id", run_id},        {"id", r.id},         {"metric", to_string(r.metric)},
              {"score", r.score},        {"prediction", r.prediction}, {"failed", r.failed},
              {"unparsed", r.unparsed},  {"error", r.error}};
    j["answer_position_fraction"] = r.answer_position_fraction ? json(*r.answer_position_fraction) : json(nullptr);
    return j;
}

std::unordered_map<std::string, RecordResult> load_persisted(const std::filesystem::path& path,
                                                             const std::string& run_id) {
    std::unordered_map<std::string, RecordResult> done;
    std::ifstream in(path);
    for (std::string line; std::getline(in, line);) {
        const json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || j.value("run_id", "") != run_id || j.value("failed", true)) {
            continue;
        }
        RecordResult r;
        r.id = j.value("id", "");
        r.metric = parse_metric(j.value("metric", "f1"));
        r.score = j.value("score", 0.0);
        r.prediction = j.value("prediction", "");
        r.unparsed = j.value("unparsed", false);
        if (j.contains("answer_position_fraction") && j["answer_position_fraction"].is_number()) {
            r.answer_position_fraction = j["answer_position_fraction"].get<double>();
        }
        done[r.id] = std::move(r);
    }
    return done;
}

} // namespace

std::string_view to_string(Metric metric) {
    switch (metric) {
    case Metric::f1:
        return "f1";
    case Metric::rouge_l:
        return "rouge_l";
    case Metric::accuracy:
        return "accuracy";
    }
    return "f1";
}

std::string_view to_string(RunMode mode) {
    switch (mode) {
    case RunMode::lqca:
        return "lqca";
    case RunMode::vanilla:
        return "vanilla";
    case RunMode::cot:
        return "cot";
    }
    return "vanilla";
}

std::vector<EvalRecord> parse_line(std::string_view line, Adapter adapter, std::size_t line_number) {
    const json obj = json::parse(line, nullptr, false);
    if (obj.is_discarded()) {
        throw std::invalid_argument("not valid JSON");
    }
    if (!obj.is_object()) {
        throw std::invalid_argument("not a JSON object");
    }
    try {
        switch (adapter) {
        case Adapter::generic:
            return {generic_record(obj, line_number)};
        case Adapter::longbench:
            return {longbench_record(obj, line_number)};
        case Adapter::leval:
            return leval_records(obj, line_number);
        case Adapter::loogle:
            return loogle_records(obj, line_number);
        }
    } catch (const json::exception& e) {
        throw std::invalid_argument(e.what());
    }
    return {};
}

Dataset load_dataset(const std::filesystem::path& path, Adapter adapter) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read dataset " + path.string());
    }
    Dataset ds;
    std::size_t number = 0;
    for (std::string line; std::getline(in, line);) {
        ++number;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            for (auto& r : parse_line(line, adapter, number)) {
                ds.records.push_back(std::move(r));
            }
        } catch (const std::invalid_argument& e) {
            spdlog::warn("{}:{}: skipped ({})", path.string(), number, e.what());
            ds.skipped.push_back({number, e.what()});
        }
    }
    if (ds.records.empty()) {
        throw ParseError("dataset " + path.string() + " has no valid records");
    }
    return ds;
}

double rouge_l(std::string_view prediction, std::string_view reference) {
    const auto p = alnum_tokens(prediction);
    const auto r = alnum_tokens(reference);
    if (p.empty() || r.empty()) {
        return 0.0;
    }
    std::vector<std::size_t> prev(r.size() + 1, 0);
    std::vector<std::size_t> cur(r.size() + 1, 0);
    for (std::size_t i = 1; i <= p.size(); ++i) {
        for (std::size_t j = 1; j <= r.size(); ++j) {
            cur[j] = p[i - 1] == r[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    const double lcs = static_cast<double>(prev[r.size()]);
    if (lcs == 0.0) {
        return 0.0;
    }
    const double precision = lcs / static_cast<double>(p.size());
    const double recall = lcs / static_cast<double>(r.size());
    return 2.0 * precision * recall / (precision + recall);
}

std::string normalize_answer(std::string_view s) {
    std::string stripped;
    for (char c : s) {
        if (!text::is_punct(c)) {
            stripped.push_back(text::is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c);
        }
    }
    std::string out;
    for (const auto& w : split_ws(stripped)) {
        if (w == "a" || w == "an" || w == "the") {
            continue;
        }
        if (!out.empty()) {
            out.push_back(' ');
        }
        out += w;
    }
    return out;
}

double qa_f1(std::string_view prediction, std::span<const std::string> golds) {
    const auto pred = split_ws(normalize_answer(prediction));
    double best = 0.0;
    for (const auto& gold : golds) {
        const auto ref = split_ws(normalize_answer(gold));
        if (pred.empty() || ref.empty()) {
            continue;
        }
        std::unordered_map<std::string, long> counts;
        for (const auto& w : ref) {
            ++counts[w];
        }
        std::size_t common = 0;
        for (const auto& w : pred) {
            if (auto it = counts.find(w); it != counts.end() && it->second > 0) {
                --it->second;
                ++common;
            }
        }
        if (common == 0) {
            continue;
        }
        const double precision = static_cast<double>(common) / static_cast<double>(pred.size());
        const double recall = static_cast<double>(common) / static_cast<double>(ref.size());
        best = std::max(best, 2.0 * precision * recall / (precision + recall));
    }
    return best;
}

std::optional<char> extract_choice_letter(std::string_view response, std::size_t choice_count) {
    const std::size_t n = choice_count == 0 ? 5 : std::min<std::size_t>(choice_count, 5);
    const char last = static_cast<char>('A' + n - 1);
    auto in_range = [&](char c) {
        const char up = text::is_lower(c) ? static_cast<char>(c - 'a' + 'A') : c;
        return up >= 'A' && up <= last ? std::optional<char>(up) : std::nullopt;
    };
    const std::string s(response);

    static const std::regex explicit_re(R"((?:answer|choice|option)\s*(?:is|:)?\s*[:\-]?\s*\(?([A-Ea-e])\)?(?![A-Za-z0-9]))",
                                        std::regex::icase);
    std::smatch m;
    if (std::regex_search(s, m, explicit_re)) {
        if (auto c = in_range(m[1].str()[0])) {
            return c;
        }
    }

    auto standalone = [&](std::size_t i) {
        const bool before = i == 0 || !is_alnum_byte(s[i - 1]);
        const bool after = i + 1 >= s.size() || !is_alnum_byte(s[i + 1]);
        return before && after;
    };
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!text::is_upper(s[i]) || !standalone(i) || !in_range(s[i])) {
            continue;
        }
        // The article in "A good ..." is not an answer.
        if (s[i] == 'A' && i + 2 < s.size() && s[i + 1] == ' ' && text::is_lower(s[i + 2])) {
            continue;
        }
        return s[i];
    }

    std::size_t first = s.find_first_not_of(" \t\r\n");
    std::size_t last_pos = s.find_last_not_of(" \t\r\n");
    if (first != std::string::npos && first == last_pos) {
        return in_range(s[first]);
    }
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        if (text::is_lower(s[i]) && standalone(i) && (s[i + 1] == ')' || s[i + 1] == '.' || s[i + 1] == ':')) {
            if (auto c = in_range(s[i])) {
                return c;
            }
        }
    }
    return std::nullopt;
}

ChoiceScore choice_accuracy(std::string_view prediction, char gold_letter, std::span<const std::string> choices) {
    ChoiceScore out;
    out.letter = extract_choice_letter(prediction, choices.size());
    out.unparsed = !out.letter.has_value();
    const char gold = text::is_lower(gold_letter) ? static_cast<char>(gold_letter - 'a' + 'A') : gold_letter;
    out.score = out.letter && *out.letter == gold ? 1.0 : 0.0;
    return out;
}

std::size_t position_bucket(double fraction) {
    const auto bucket = static_cast<std::size_t>(std::clamp(fraction, 0.0, 1.0) * static_cast<double>(kPositionBuckets));
    return std::min(bucket, kPositionBuckets - 1);
}

void aggregate(MetricsReport& report) {
    std::map<std::string, std::vector<double>> per_metric;
    std::array<std::vector<double>, kPositionBuckets> per_bucket;
    report.failed = 0;
    report.has_positions = false;
    for (const auto& r : report.records) {
        if (r.failed) {
            ++report.failed;
            continue;
        }
        per_metric[std::string(to_string(r.metric))].push_back(r.score);
        if (r.answer_position_fraction) {
            report.has_positions = true;
            per_bucket[position_bucket(*r.answer_position_fraction)].push_back(r.score);
        }
    }
    report.by_metric.clear();
    for (const auto& [name, scores] : per_metric) {
        report.by_metric[name] = {mean_of(scores), scores.size()};
    }
    for (std::size_t b = 0; b < kPositionBuckets; ++b) {
        report.by_position[b] = {mean_of(per_bucket[b]), per_bucket[b].size()};
    }
}

MetricsReport run_benchmark(std::span<const EvalRecord> records, const BenchmarkOptions& options,
                            qa::ChatModel& model, resolver::Backend& backend, representative::Tagger& tagger) {
    MetricsReport report;
    report.run_id = options.run_id;
    report.mode = options.mode;
    report.records.resize(records.size());

    std::unordered_map<std::string, RecordResult> persisted;
    std::ofstream sink;
    if (options.results_path) {
        persisted = load_persisted(*options.results_path, options.run_id);
        if (options.results_path->has_parent_path()) {
            std::filesystem::create_directories(options.results_path->parent_path());
        }
        sink.open(*options.results_path, std::ios::app);
        if (!sink) {
            throw ConfigError("cannot write results to " + options.results_path->string());
        }
    }
    std::mutex sink_mutex;
    std::atomic<std::size_t> resumed{0};

    auto score_one = [&](std::size_t i) {
        const auto& rec = records[i];
        if (auto it = persisted.find(rec.id); it != persisted.end()) {
            report.records[i] = it->second;
            ++resumed;
            return;
        }
        RecordResult result;
        result.id = rec.id;
        result.metric = rec.metric;
        result.answer_position_fraction = rec.answer_position_fraction;
        try {
            std::string context = rec.context;
            if (options.mode == RunMode::lqca) {
                context = rewrite_document(rec.context, options.pipeline, backend, tagger).rewrite.text;
            }
            qa::PromptSpec spec;
            spec.mode = options.mode == RunMode::cot ? qa::PromptMode::cot : qa::PromptMode::vanilla;
            spec.context = std::move(context);
            spec.question = rec.question;
            spec.choices = rec.choices;
            const auto prompt = qa::build_prompt_within(std::move(spec), options.max_context_tokens);
            result.prediction = model.complete(prompt);
            switch (rec.metric) {
            case Metric::accuracy: {
                const auto cs = choice_accuracy(result.prediction, rec.gold_answers.front().front(), rec.choices);
                result.score = cs.score;
                result.unparsed = cs.unparsed;
                break;
            }
            case Metric::f1:
                result.score = qa_f1(result.prediction, rec.gold_answers);
                break;
            case Metric::rouge_l:
                for (const auto& gold : rec.gold_answers) {
                    result.score = std::max(result.score, rouge_l(result.prediction, gold));
                }
                break;
            }
        } catch (const std::exception& e) {
            result.failed = true;
            result.error = e.what();
            spdlog::warn("record {} failed: {}", rec.id, e.what());
        }
        if (sink.is_open()) {
            std::lock_guard lock(sink_mutex);
            sink << result_json(result, options.run_id).dump() << '\n';
            sink.flush();
        }
        report.records[i] = std::move(result);
    };

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < records.size(); i = next++) {
            score_one(i);
        }
    };
    const std::size_t workers =
        std::clamp<std::size_t>(options.parallelism, 1, std::max<std::size_t>(1, records.size()));
    std::vector<std::thread> threads;
    for (std::size_t w = 1; w < workers; ++w) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    report.resumed = resumed;
    aggregate(report);
    return report;
}

std::string report_json(const MetricsReport& report, int indent) {
    json records = json::array();
    for (const auto& r : report.records) {
        records.push_back(result_json(r, report.run_id));
    }
    json metrics = json::object();
    for (const auto& [name, agg] : report.by_metric) {
        metrics[name] = {{"mean", agg.mean}, {"count", agg.count}};
    }
    json doc = {{"run_id", report.run_id},   {"mode", to_string(report.mode)}, {"records", std::move(records)},
                {"metrics", std::move(metrics)}, {"failed", report.failed},     {"resumed", report.resumed}};
    if (report.has_positions) {
        json buckets = json::array();
        for (std::size_t b = 0; b < kPositionBuckets; ++b) {
            buckets.push_back({{"lower", 0.2 * static_cast<double>(b)},
                               {"upper", 0.2 * static_cast<double>(b + 1)},
                               {"mean", report.by_position[b].mean},
                               {"count", report.by_position[b].count}});
        }
        doc["position_buckets"] = std::move(buckets);
    }
    return doc.dump(indent);
}

std::string report_table(const MetricsReport& report) {
    std::ostringstream out;
    out << "run " << report.run_id << " (" << to_string(report.mode) << "), " << report.records.size()
        << " records, " << report.failed << " failed\n";
    out << std::left << std::setw(12) << "metric" << std::right << std::setw(10) << "mean" << std::setw(8) << "n"
        << '\n';
    out << std::fixed << std::setprecision(4);
    for (const auto& [name, agg] : report.by_metric) {
        out << std::left << std::setw(12) << name << std::right << std::setw(10) << agg.mean << std::setw(8)
            << agg.count << '\n';
    }
    if (report.has_positions) {
        out << "answer position buckets:\n";
        for (std::size_t b = 0; b < kPositionBuckets; ++b) {
            out << "  [" << std::setprecision(1) << 0.2 * static_cast<double>(b) << ", "
                << 0.2 * static_cast<double>(b + 1) << (b + 1 == kPositionBuckets ? "]" : ")") << std::setprecision(4)
                << std::setw(10) << report.by_position[b].mean << std::setw(8) << report.by_position[b].count << '\n';
        }
    }
    return out.str();
}

} // namespace lqca::eval
