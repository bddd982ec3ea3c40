#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "crx/error.hpp"
#include "crx/text.hpp"
#include "crx/workspace.hpp"

namespace crx::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 1;
inline constexpr int kExitUsage = 2;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Failure tied to an input or output file.
class FileError : public Error {
 public:
  using Error::Error;
};

inline constexpr std::string_view kUsage =
    "usage: crx STEP [STEP...]\n"
    "\n"
    "Steps run left to right on one working dataset:\n"
    "  import FILE... [--max-crs N] [--min-cry YEAR] [--max-cry YEAR]\n"
    "  open TABLE.csv\n"
    "  info\n"
    "  filter [--remove-years A-B[,C-D...]] [--retain-years A-B] [--min-count N]\n"
    "         [--min-pct FRACTION] [--remove-ids ID[,ID...]]\n"
    "  cluster [--threshold T] [--volume] [--page] [--doi]\n"
    "  refine [--volume] [--page] [--doi]\n"
    "  manual ACTIONS.txt      (lines: same|different|extract<TAB>ID<TAB>ID..., or undo)\n"
    "  merge\n"
    "  export [--table OUT.csv] [--chart OUT.csv] [--svg OUT.svg] [--half-window W]\n"
    "         [--from YEAR] [--to YEAR] [--curves both|count|deviation]\n"
    "         [--title TEXT] [--x-label TEXT] [--y-label TEXT] [--line-width W]\n"
    "\n"
    "The first step must be import or open. Pipelines that filter or merge must export.\n";

// ---------------------------------------------------------------------------
// Pipeline description

struct ImportStep {
  std::vector<std::string> files;
  ImportConfig config;
};
struct OpenStep {
  std::string file;
};
struct InfoStep {};
struct FilterStep {
  struct Op {
    enum class Kind { RemoveYears, RetainYears, MinCount, MinPct, RemoveIds } kind;
    std::vector<YearRange> ranges;
    std::int64_t count = 0;
    double pct = 0;
    std::vector<RefId> ids;
  };
  std::vector<Op> ops;
};
struct ClusterStep {
  SimilarityConfig config;
};
struct RefineStep {
  AttributeToggles toggles;
};
struct ManualStep {
  std::string file;
};
struct MergeStep {};
struct ExportStep {
  std::optional<std::string> table;
  std::optional<std::string> chart;
  std::optional<std::string> svg;
  ChartRequest chart_request;
  ChartOptions chart_options;
};

using Step = std::variant<ImportStep, OpenStep, InfoStep, FilterStep, ClusterStep, RefineStep,
                          ManualStep, MergeStep, ExportStep>;

struct PipelineSpec {
  std::vector<Step> steps;
};

namespace detail {

inline bool is_step_name(std::string_view s) {
  for (std::string_view n :
       {"import", "open", "info", "filter", "cluster", "refine", "manual", "merge", "export"})
    if (s == n) return true;
  return false;
}

template <typename T>
T parse_number(std::string_view flag, std::string_view value) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size() || value.empty())
    throw UsageError(std::string(flag) + ": invalid number \"" + std::string(value) + "\"");
  return out;
}

inline double parse_double(std::string_view flag, std::string_view value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(std::string(value), &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw UsageError(std::string(flag) + ": invalid number \"" + std::string(value) + "\"");
  }
}

inline YearRange parse_range(std::string_view flag, std::string_view value) {
  const auto dash = value.find('-', 1);
  if (dash == std::string_view::npos)
    throw UsageError(std::string(flag) + ": expected FROM-TO, got \"" + std::string(value) + "\"");
  YearRange r{parse_number<int>(flag, value.substr(0, dash)),
              parse_number<int>(flag, value.substr(dash + 1))};
  if (r.from > r.to)
    throw UsageError(std::string(flag) + ": inverted range \"" + std::string(value) + "\"");
  return r;
}

// Cursor over one step's arguments.
class Args {
 public:
  Args(std::string step, std::vector<std::string> args) : step_(std::move(step)), args_(std::move(args)) {}

  bool done() const { return pos_ >= args_.size(); }
  const std::string& peek() const { return args_[pos_]; }
  std::string next() { return args_[pos_++]; }

  std::string value(const std::string& flag) {
    if (done()) throw UsageError(step_ + ": " + flag + " needs a value");
    return next();
  }

  [[noreturn]] void unexpected(const std::string& arg) const {
    throw UsageError(step_ + ": unexpected argument \"" + arg + "\"");
  }

 private:
  std::string step_;
  std::vector<std::string> args_;
  std::size_t pos_ = 0;
};

inline Step parse_step(const std::string& name, Args a) {
  if (name == "import") {
    ImportStep s;
    while (!a.done()) {
      const std::string arg = a.next();
      if (arg == "--max-crs") s.config.max_crs = parse_number<std::int64_t>(arg, a.value(arg));
      else if (arg == "--min-cry") s.config.min_cry = parse_number<int>(arg, a.value(arg));
      else if (arg == "--max-cry") s.config.max_cry = parse_number<int>(arg, a.value(arg));
      else if (arg.starts_with("--")) a.unexpected(arg);
      else s.files.push_back(arg);
    }
    if (s.files.empty()) throw UsageError("import: no input files");
    if (s.config.max_crs < 0 || s.config.min_cry < 0 || s.config.max_cry < 0)
      throw UsageError("import: limits must be nonnegative");
    if (s.config.min_cry && s.config.max_cry && s.config.min_cry > s.config.max_cry)
      throw UsageError("import: --min-cry exceeds --max-cry");
    return s;
  }
  if (name == "open") {
    if (a.done()) throw UsageError("open: missing table file");
    OpenStep s{a.next()};
    if (!a.done()) a.unexpected(a.peek());
    return s;
  }
  if (name == "info" || name == "merge") {
    if (!a.done()) a.unexpected(a.peek());
    if (name == "info") return InfoStep{};
    return MergeStep{};
  }
  if (name == "filter") {
    FilterStep s;
    using Kind = FilterStep::Op::Kind;
    while (!a.done()) {
      const std::string arg = a.next();
      FilterStep::Op op{};
      if (arg == "--remove-years") {
        op.kind = Kind::RemoveYears;
        for (auto piece : text::split(a.value(arg), ",")) op.ranges.push_back(parse_range(arg, piece));
      } else if (arg == "--retain-years") {
        op.kind = Kind::RetainYears;
        op.ranges.push_back(parse_range(arg, a.value(arg)));
      } else if (arg == "--min-count") {
        op.kind = Kind::MinCount;
        op.count = parse_number<std::int64_t>(arg, a.value(arg));
        if (op.count < 1) throw UsageError("--min-count must be at least 1");
      } else if (arg == "--min-pct") {
        op.kind = Kind::MinPct;
        op.pct = parse_double(arg, a.value(arg));
        if (!(op.pct >= 0 && op.pct <= 1)) throw UsageError("--min-pct must lie in [0, 1]");
      } else if (arg == "--remove-ids") {
        op.kind = Kind::RemoveIds;
        for (auto piece : text::split(a.value(arg), ","))
          op.ids.push_back(parse_number<RefId>(arg, text::trim(piece)));
      } else {
        a.unexpected(arg);
      }
      s.ops.push_back(std::move(op));
    }
    if (s.ops.empty()) throw UsageError("filter: no filter given");
    return s;
  }
  if (name == "cluster" || name == "refine") {
    SimilarityConfig cfg;
    while (!a.done()) {
      const std::string arg = a.next();
      if (arg == "--threshold" && name == "cluster") cfg.threshold = parse_double(arg, a.value(arg));
      else if (arg == "--volume") cfg.require_volume = true;
      else if (arg == "--page") cfg.require_page = true;
      else if (arg == "--doi") cfg.require_doi = true;
      else a.unexpected(arg);
    }
    if (!(cfg.threshold >= kMinThreshold && cfg.threshold <= kMaxThreshold))
      throw UsageError("--threshold must lie in [0.5, 1.0]");
    if (name == "cluster") return ClusterStep{cfg};
    return RefineStep{{cfg.require_volume, cfg.require_page, cfg.require_doi}};
  }
  if (name == "manual") {
    if (a.done()) throw UsageError("manual: missing action file");
    ManualStep s{a.next()};
    if (!a.done()) a.unexpected(a.peek());
    return s;
  }
  // export
  ExportStep s;
  while (!a.done()) {
    const std::string arg = a.next();
    if (arg == "--table") s.table = a.value(arg);
    else if (arg == "--chart") s.chart = a.value(arg);
    else if (arg == "--svg") s.svg = a.value(arg);
    else if (arg == "--half-window") {
      s.chart_request.half_window = parse_number<int>(arg, a.value(arg));
      if (s.chart_request.half_window < 1) throw UsageError("--half-window must be at least 1");
    } else if (arg == "--from") s.chart_request.from_year = parse_number<int>(arg, a.value(arg));
    else if (arg == "--to") s.chart_request.to_year = parse_number<int>(arg, a.value(arg));
    else if (arg == "--title") s.chart_options.title = a.value(arg);
    else if (arg == "--x-label") s.chart_options.x_label = a.value(arg);
    else if (arg == "--y-label") s.chart_options.y_label = a.value(arg);
    else if (arg == "--line-width") s.chart_options.line_width = parse_double(arg, a.value(arg));
    else if (arg == "--curves") {
      const std::string v = a.value(arg);
      if (v == "both") s.chart_options.show_count = s.chart_options.show_deviation = true;
      else if (v == "count") s.chart_options.show_count = true, s.chart_options.show_deviation = false;
      else if (v == "deviation") s.chart_options.show_count = false, s.chart_options.show_deviation = true;
      else throw UsageError("--curves must be both, count or deviation");
    } else a.unexpected(arg);
  }
  if (!s.table && !s.chart && !s.svg) throw UsageError("export: give --table, --chart or --svg");
  if (s.chart_request.from_year && s.chart_request.to_year &&
      *s.chart_request.from_year > *s.chart_request.to_year)
    throw UsageError("export: --from is after --to");
  return s;
}

}  // namespace detail

// Splits argv (without program name) into steps and validates their order.
inline PipelineSpec parse_pipeline(const std::vector<std::string>& argv) {
  PipelineSpec spec;
  std::size_t i = 0;
  if (argv.empty()) throw UsageError("no steps given");
  while (i < argv.size()) {
    const std::string& name = argv[i];
    if (!detail::is_step_name(name)) throw UsageError("unknown step \"" + name + "\"");
    std::vector<std::string> args;
    for (++i; i < argv.size() && !detail::is_step_name(argv[i]); ++i) args.push_back(argv[i]);
    spec.steps.push_back(detail::parse_step(name, detail::Args(name, std::move(args))));
  }

  const auto is_source = [](const Step& s) {
    return std::holds_alternative<ImportStep>(s) || std::holds_alternative<OpenStep>(s);
  };
  if (!is_source(spec.steps.front()))
    throw UsageError("the first step must be import or open");
  bool mutates = false;
  bool exports = false;
  for (std::size_t k = 1; k < spec.steps.size(); ++k) {
    if (is_source(spec.steps[k])) throw UsageError("only one import or open step is allowed");
    mutates |= std::holds_alternative<FilterStep>(spec.steps[k]) ||
               std::holds_alternative<MergeStep>(spec.steps[k]);
    exports |= std::holds_alternative<ExportStep>(spec.steps[k]);
  }
  if (mutates && !exports) throw UsageError("filter or merge given without an export step");
  return spec;
}

// ---------------------------------------------------------------------------
// Execution

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileError(path + ": cannot open");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// Writes through a temporary file in the same directory, then renames.
inline void write_file_atomic(const std::string& path, std::string_view content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError(path + ": cannot write");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out.flush()) throw FileError(path + ": write failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw FileError(path + ": cannot replace file");
  }
}

struct ActionLine {
  std::size_t line = 0;
  std::string action;  // same, different, extract or undo
  std::vector<RefId> ids;
};

// One action per line: "same|different|extract" followed by tab-separated
// ids, or "undo". Blank lines and lines starting with '#' are skipped.
inline std::vector<ActionLine> parse_action_file(std::string_view content) {
  std::vector<ActionLine> out;
  std::size_t line_no = 0;
  for (auto raw : text::split(content, "\n")) {
    ++line_no;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = text::split_whitespace(line);
    ActionLine a{line_no, std::string(fields.front()), {}};
    const bool undo = a.action == "undo";
    if (!undo && !parse_manual_action(a.action))
      throw ParseError("unknown action \"" + a.action + "\"", line_no);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      RefId id = 0;
      const auto f = fields[k];
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), id);
      if (ec != std::errc{} || ptr != f.data() + f.size())
        throw ParseError("invalid reference id \"" + std::string(f) + "\"", line_no);
      a.ids.push_back(id);
    }
    if (undo && !a.ids.empty()) throw ParseError("undo takes no ids", line_no);
    if (!undo && a.ids.empty()) throw ParseError(a.action + " needs at least one id", line_no);
    out.push_back(std::move(a));
  }
  return out;
}

inline std::string describe(const DatasetInfo& i) {
  std::string s = std::to_string(i.n_publications) + " publications, " +
                  std::to_string(i.n_cr_total) + " CRs (" +
                  std::to_string(i.n_references_distinct) + " distinct), " +
                  std::to_string(i.n_clusters) + " clusters, RPY ";
  if (i.min_rpy) s += std::to_string(*i.min_rpy) + "-" + std::to_string(*i.max_rpy);
  else s += "none";
  return s;
}

inline void execute(const PipelineSpec& spec, Workspace& ws, std::ostream& out, std::ostream& err) {
  auto report = [&](std::string_view step) { out << step << ": " << describe(ws.info()) << '\n'; };
  for (const Step& step : spec.steps) {
    if (const auto* s = std::get_if<ImportStep>(&step)) {
      std::vector<std::string> contents;
      for (const auto& f : s->files) contents.push_back(read_file(f));
      for (const auto& issue : ws.import_files(contents, s->config))
        err << "warning: " << s->files[issue.file_index] << ": " << issue.message << '\n';
      report("import");
    } else if (const auto* s = std::get_if<OpenStep>(&step)) {
      try {
        ws.open_table(read_file(s->file));
      } catch (const FileError&) {
        throw;
      } catch (const Error& e) {
        throw FileError(s->file + ": " + e.what());
      }
      report("open");
    } else if (std::holds_alternative<InfoStep>(step)) {
      const DatasetInfo i = ws.info();
      out << "info: publications " << i.n_publications << '\n'
          << "info: cited references " << i.n_cr_total << '\n'
          << "info: distinct cited references " << i.n_references_distinct << '\n'
          << "info: clusters " << i.n_clusters << '\n'
          << "info: reference publication years "
          << (i.min_rpy ? std::to_string(*i.min_rpy) + "-" + std::to_string(*i.max_rpy) : "none")
          << '\n';
    } else if (const auto* s = std::get_if<FilterStep>(&step)) {
      using Kind = FilterStep::Op::Kind;
      for (const auto& op : s->ops) {
        switch (op.kind) {
          case Kind::RemoveYears: ws.remove_years(op.ranges); break;
          case Kind::RetainYears: ws.retain_years(op.ranges[0].from, op.ranges[0].to); break;
          case Kind::MinCount: ws.remove_below_count(op.count); break;
          case Kind::MinPct: ws.remove_below_pct_in_year(op.pct); break;
          case Kind::RemoveIds: ws.remove_ids(op.ids); break;
        }
      }
      report("filter");
    } else if (const auto* s = std::get_if<ClusterStep>(&step)) {
      for (const auto& w : ws.cluster(s->config)) err << "warning: " << w << '\n';
      report("cluster");
    } else if (const auto* s = std::get_if<RefineStep>(&step)) {
      ws.refine(s->toggles);
      report("refine");
    } else if (const auto* s = std::get_if<ManualStep>(&step)) {
      std::vector<ActionLine> actions;
      try {
        actions = parse_action_file(read_file(s->file));
      } catch (const ParseError& e) {
        throw FileError(s->file + ": " + e.what());
      }
      for (const auto& a : actions) {
        try {
          if (a.action == "undo") {
            if (!ws.undo()) err << "warning: " << s->file << ": line " << a.line << ": nothing to undo\n";
          } else {
            ws.manual(*parse_manual_action(a.action), a.ids);
          }
        } catch (const Error& e) {
          throw FileError(s->file + ": line " + std::to_string(a.line) + ": " + e.what());
        }
      }
      report("manual");
    } else if (std::holds_alternative<MergeStep>(step)) {
      ws.merge();
      report("merge");
    } else if (const auto* s = std::get_if<ExportStep>(&step)) {
      if (s->table) write_file_atomic(*s->table, ws.table_csv());
      if (s->chart) write_file_atomic(*s->chart, ws.chart_csv(s->chart_request));
      if (s->svg) write_file_atomic(*s->svg, ws.chart_svg(s->chart_request, s->chart_options));
      for (const auto* path : {&s->table, &s->chart, &s->svg})
        if (*path) out << "export: wrote " << **path << '\n';
    }
  }
}

// Entry point behind the crx executable. args excludes the program name.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  if (!args.empty() && (args[0] == "--help" || args[0] == "-h" || args[0] == "help")) {
    out << kUsage;
    return kExitOk;
  }
  PipelineSpec spec;
  try {
    spec = parse_pipeline(args);
  } catch (const UsageError& e) {
    err << "crx: " << e.what() << "\n\n" << kUsage;
    return kExitUsage;
  }
  Workspace ws;
  try {
    execute(spec, ws, out, err);
  } catch (const Error& e) {
    err << "crx: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "crx: " << e.what() << '\n';
    return kExitData;
  }
  return kExitOk;
}

}  // namespace crx::cli
