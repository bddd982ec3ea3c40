#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <regex>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "crx/error.hpp"
#include "crx/text.hpp"
#include "crx/workspace.hpp"

namespace crx::api {

using json = nlohmann::json;

struct UploadedFile {
  std::string field;
  std::string filename;
  std::string content;
};

// Transport-neutral request; the HTTP binding fills it in.
struct Request {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::string body;
  std::vector<UploadedFile> files;  // multipart parts, including plain fields
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

// ---------------------------------------------------------------------------
// JSON views of the domain types

inline json to_json(const DatasetInfo& i) {
  return {{"n_publications", i.n_publications},
          {"n_references_distinct", i.n_references_distinct},
          {"n_cr_total", i.n_cr_total},
          {"n_clusters", i.n_clusters},
          {"min_rpy", i.min_rpy ? json(*i.min_rpy) : json(nullptr)},
          {"max_rpy", i.max_rpy ? json(*i.max_rpy) : json(nullptr)}};
}

inline json optional_json(const std::optional<std::string>& v) {
  return v ? json(*v) : json(nullptr);
}

inline json to_json(const CitedReference& r) {
  const auto& p = r.parsed;
  return {{"id", r.id},
          {"cited_reference", p.raw},
          {"year", p.year ? json(*p.year) : json(nullptr)},
          {"n_cr", r.n_cr},
          {"pct_in_year", r.pct_in_year.value()},
          {"pct_all_years", r.pct_all_years.value()},
          {"author", p.author_full},
          {"last_name", p.last_name},
          {"first_initial", p.first_initial},
          {"source", p.source},
          {"source_title", p.source_title},
          {"title_short", p.title_short},
          {"volume", optional_json(p.volume)},
          {"page", optional_json(p.page)},
          {"doi", optional_json(p.doi)},
          {"cluster_id", r.cluster.to_string()},
          {"cluster_main", r.cluster.main},
          {"cluster_sub", r.cluster.sub},
          {"cluster_size", r.cluster_size}};
}

inline json to_json(const YearSeries& s) {
  json points = json::array();
  for (const auto& p : s.points)
    points.push_back({{"year", p.year}, {"n_cr", p.n_cr}, {"deviation", p.deviation.value()}});
  return {{"half_window", s.half_window}, {"points", std::move(points)}};
}

// ---------------------------------------------------------------------------
// Table sorting

namespace detail {

using Comparator = std::function<int(const CitedReference&, const CitedReference&)>;

template <typename T>
int three_way(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

inline int compare_fraction(const Fraction& a, const Fraction& b) {
  // a.num/a.den vs b.num/b.den without rounding
  const __int128 lhs = static_cast<__int128>(a.num) * (b.den == 0 ? 1 : b.den);
  const __int128 rhs = static_cast<__int128>(b.num) * (a.den == 0 ? 1 : a.den);
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

inline std::optional<Comparator> column_comparator(std::string_view column) {
  using R = CitedReference;
  auto by = [](auto key) -> Comparator {
    return [key](const R& a, const R& b) { return three_way(key(a), key(b)); };
  };
  if (column == "id") return by([](const R& r) { return r.id; });
  if (column == "cited_reference") return by([](const R& r) { return r.parsed.raw; });
  if (column == "year") return by([](const R& r) { return r.parsed.year; });
  if (column == "n_cr") return by([](const R& r) { return r.n_cr; });
  if (column == "pct_in_year")
    return Comparator([](const R& a, const R& b) { return compare_fraction(a.pct_in_year, b.pct_in_year); });
  if (column == "pct_all_years")
    return Comparator([](const R& a, const R& b) { return compare_fraction(a.pct_all_years, b.pct_all_years); });
  if (column == "author") return by([](const R& r) { return r.parsed.author_full; });
  if (column == "last_name") return by([](const R& r) { return r.parsed.last_name; });
  if (column == "first_initial") return by([](const R& r) { return r.parsed.first_initial; });
  if (column == "source") return by([](const R& r) { return r.parsed.source; });
  if (column == "source_title") return by([](const R& r) { return r.parsed.source_title; });
  if (column == "title_short") return by([](const R& r) { return r.parsed.title_short; });
  if (column == "volume") return by([](const R& r) { return r.parsed.volume; });
  if (column == "page") return by([](const R& r) { return r.parsed.page; });
  if (column == "doi") return by([](const R& r) { return r.parsed.doi; });
  if (column == "cluster_id") return by([](const R& r) { return r.cluster; });
  if (column == "cluster_size") return by([](const R& r) { return r.cluster_size; });
  return std::nullopt;
}

}  // namespace detail

// Parses "col1:desc,col2:asc" into a combined comparator; ties fall back to id.
inline detail::Comparator parse_sort(std::string_view spec) {
  std::vector<std::pair<detail::Comparator, bool>> keys;
  if (!text::trim(spec).empty()) {
    for (auto item : text::split(spec, ",")) {
      item = text::trim(item);
      std::string_view column = item;
      bool descending = false;
      if (const auto colon = item.find(':'); colon != std::string_view::npos) {
        column = item.substr(0, colon);
        const auto dir = item.substr(colon + 1);
        if (dir == "desc") descending = true;
        else if (dir != "asc") throw InvalidArgument("sort direction must be asc or desc");
      }
      auto cmp = detail::column_comparator(column);
      if (!cmp) throw InvalidArgument("unknown sort column \"" + std::string(column) + "\"");
      keys.emplace_back(std::move(*cmp), descending);
    }
  }
  return [keys](const CitedReference& a, const CitedReference& b) {
    for (const auto& [cmp, desc] : keys) {
      const int c = cmp(a, b);
      if (c != 0) return desc ? -c : c;
    }
    return detail::three_way(a.id, b.id);
  };
}

// ---------------------------------------------------------------------------
// Sessions

struct Session {
  std::string id;
  std::mutex mutex;  // serializes access to everything below
  Workspace workspace;
  std::int64_t revision = 0;
  std::chrono::steady_clock::time_point last_access;
};

class ApiError : public Error {
 public:
  ApiError(int status, std::string message) : Error(std::move(message)), status_(status) {}
  int status() const noexcept { return status_; }

 private:
  int status_;
};

class ApiService {
 public:
  using Clock = std::chrono::steady_clock;

  explicit ApiService(std::chrono::seconds idle_ttl = std::chrono::hours(1))
      : idle_ttl_(idle_ttl), rng_(std::random_device{}()) {}

  Response handle(const Request& req) {
    try {
      return route(req);
    } catch (const ApiError& e) {
      return error(e.status(), e.what());
    } catch (const json::exception& e) {
      return error(422, std::string("invalid payload: ") + e.what());
    } catch (const Error& e) {
      return error(422, e.what());
    }
  }

  std::size_t session_count() {
    std::lock_guard lock(sessions_mutex_);
    return sessions_.size();
  }

 private:
  static Response error(int status, std::string_view message) {
    return {status, "application/json", json{{"error", message}}.dump()};
  }

  static Response ok(const json& body, int status = 200) {
    return {status, "application/json", body.dump()};
  }

  std::string new_token() {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string token;
    std::uniform_int_distribution<int> digit(0, 15);
    for (int i = 0; i < 32; ++i) token.push_back(kHex[digit(rng_)]);
    return token;
  }

  void evict_idle(Clock::time_point now) {
    std::erase_if(sessions_, [&](const auto& kv) {
      std::unique_lock session_lock(kv.second->mutex, std::try_to_lock);
      return session_lock.owns_lock() && now - kv.second->last_access > idle_ttl_;
    });
  }

  std::shared_ptr<Session> create_session() {
    std::lock_guard lock(sessions_mutex_);
    const auto now = Clock::now();
    evict_idle(now);
    auto s = std::make_shared<Session>();
    do s->id = new_token();
    while (sessions_.contains(s->id));
    s->last_access = now;
    sessions_.emplace(s->id, s);
    return s;
  }

  std::shared_ptr<Session> find_session(const std::string& id) {
    std::lock_guard lock(sessions_mutex_);
    evict_idle(Clock::now());
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw ApiError(404, "unknown session " + id);
    return it->second;
  }

  static json parse_body(const Request& req) {
    if (text::trim(req.body).empty()) return json::object();
    json body = json::parse(req.body);
    if (!body.is_object()) throw ApiError(422, "payload must be a JSON object");
    return body;
  }

  static std::optional<int> query_int(const Request& req, const std::string& key) {
    auto it = req.query.find(key);
    if (it == req.query.end() || it->second.empty()) return std::nullopt;
    try {
      std::size_t used = 0;
      const long v = std::stol(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
      return static_cast<int>(v);
    } catch (const std::exception&) {
      throw ApiError(422, "query parameter " + key + " must be an integer");
    }
  }

  static ChartRequest chart_request(const Request& req) {
    ChartRequest cr;
    if (auto w = query_int(req, "half_window")) cr.half_window = *w;
    if (cr.half_window < 1) throw ApiError(422, "half_window must be at least 1");
    cr.from_year = query_int(req, "from");
    cr.to_year = query_int(req, "to");
    return cr;
  }

  static void check_revision(const Session& s, const json& body) {
    if (!body.contains("revision")) return;
    const auto expected = body.at("revision").get<std::int64_t>();
    if (expected != s.revision)
      throw ApiError(409, "revision conflict: expected " + std::to_string(expected) +
                              ", session is at " + std::to_string(s.revision));
  }

  static json state(const Session& s) {
    return {{"revision", s.revision},
            {"info", to_json(s.workspace.info())},
            {"undo_available", s.workspace.partition().can_undo()}};
  }

  // Rows whose ClusterID differs from before, plus the explicitly touched ids.
  static json changed_rows(const Dataset& before, const Dataset& after,
                           std::span<const RefId> touched = {}) {
    json rows = json::array();
    for (const auto& r : after.references) {
      const CitedReference* old = before.find(r.id);
      const bool marked = std::find(touched.begin(), touched.end(), r.id) != touched.end();
      if (marked || !old || old->cluster != r.cluster || old->n_cr != r.n_cr) rows.push_back(to_json(r));
    }
    return rows;
  }

  static SimilarityConfig similarity_config(const json& body) {
    SimilarityConfig cfg;
    cfg.threshold = body.value("threshold", cfg.threshold);
    cfg.require_volume = body.value("volume", false);
    cfg.require_page = body.value("page", false);
    cfg.require_doi = body.value("doi", false);
    cfg.validate();
    return cfg;
  }

  Response import(Session& s, const Request& req) {
    std::vector<std::string> files;
    ImportConfig cfg;
    std::optional<std::int64_t> expected;
    auto int_field = [](const std::string& name, const std::string& v) {
      try {
        std::size_t used = 0;
        const long long n = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(name);
        return static_cast<std::int64_t>(n);
      } catch (const std::exception&) {
        throw ApiError(422, name + " must be an integer");
      }
    };
    if (!req.files.empty()) {
      for (const auto& part : req.files) {
        if (part.field == "max_crs") cfg.max_crs = int_field(part.field, part.content);
        else if (part.field == "min_cry") cfg.min_cry = static_cast<int>(int_field(part.field, part.content));
        else if (part.field == "max_cry") cfg.max_cry = static_cast<int>(int_field(part.field, part.content));
        else if (part.field == "revision") expected = int_field(part.field, part.content);
        else files.push_back(part.content);
      }
    } else {
      const json body = parse_body(req);
      for (const auto& f : body.at("files")) files.push_back(f.get<std::string>());
      const json c = body.value("config", json::object());
      cfg.max_crs = c.value("max_crs", cfg.max_crs);
      cfg.min_cry = c.value("min_cry", cfg.min_cry);
      cfg.max_cry = c.value("max_cry", cfg.max_cry);
      if (body.contains("revision")) expected = body.at("revision").get<std::int64_t>();
    }
    if (expected) check_revision(s, json{{"revision", *expected}});
    if (files.empty()) throw ApiError(422, "no files uploaded");

    const auto issues = s.workspace.import_files(files, cfg);
    ++s.revision;
    json out = state(s);
    json list = json::array();
    for (const auto& i : issues) list.push_back({{"file", i.file_index}, {"message", i.message}});
    out["issues"] = std::move(list);
    return ok(out);
  }

  Response filter(Session& s, const json& body) {
    Workspace next = s.workspace;
    bool any = false;
    if (body.contains("remove_ids")) {
      next.remove_ids(body.at("remove_ids").get<std::vector<RefId>>());
      any = true;
    }
    if (body.contains("remove_years")) {
      std::vector<YearRange> ranges;
      for (const auto& r : body.at("remove_years")) ranges.push_back({r.at(0).get<int>(), r.at(1).get<int>()});
      next.remove_years(ranges);
      any = true;
    }
    if (body.contains("retain_years")) {
      const auto& r = body.at("retain_years");
      next.retain_years(r.at(0).get<int>(), r.at(1).get<int>());
      any = true;
    }
    if (body.contains("min_count")) {
      next.remove_below_count(body.at("min_count").get<std::int64_t>());
      any = true;
    }
    if (body.contains("min_pct")) {
      next.remove_below_pct_in_year(body.at("min_pct").get<double>());
      any = true;
    }
    if (!any) throw ApiError(422, "no filter given");
    s.workspace = std::move(next);
    ++s.revision;
    return ok(state(s));
  }

  Response mutate(Session& s, std::string_view action, const Request& req) {
    if (action == "import") return import(s, req);
    const json body = parse_body(req);
    check_revision(s, body);
    if (action == "filter") return filter(s, body);

    const Dataset before = s.workspace.dataset();
    Workspace next = s.workspace;
    json extra = json::object();
    std::vector<RefId> touched;
    if (action == "cluster") {
      extra["warnings"] = next.cluster(similarity_config(body));
    } else if (action == "refine") {
      next.refine({body.value("volume", false), body.value("page", false), body.value("doi", false)});
    } else if (action == "manual") {
      const auto name = body.at("action").get<std::string>();
      const auto kind = parse_manual_action(name);
      if (!kind) throw ApiError(422, "unknown manual action \"" + name + "\"");
      touched = body.at("ids").get<std::vector<RefId>>();
      next.manual(*kind, touched);
    } else if (action == "undo") {
      const bool applied = next.undo();
      extra["applied"] = applied;
      if (!applied) {
        json out = state(s);
        out["applied"] = false;
        out["message"] = "nothing to undo";
        out["rows"] = json::array();
        return ok(out);
      }
    } else if (action == "merge") {
      next.merge();
    } else {
      throw ApiError(404, "unknown route");
    }
    s.workspace = std::move(next);
    ++s.revision;
    json out = state(s);
    out.update(extra);
    if (action == "cluster") {
      json all = json::array();
      for (const auto& r : s.workspace.dataset().references) all.push_back(to_json(r));
      out["rows"] = std::move(all);
    } else {
      out["rows"] = changed_rows(before, s.workspace.dataset(), touched);
    }
    return ok(out);
  }

  Response references(const Session& s, const Request& req) {
    const auto sort_it = req.query.find("sort");
    const auto cmp = parse_sort(sort_it == req.query.end() ? "" : sort_it->second);
    std::vector<const CitedReference*> rows;
    for (const auto& r : s.workspace.dataset().references) rows.push_back(&r);
    std::stable_sort(rows.begin(), rows.end(),
                     [&](const CitedReference* a, const CitedReference* b) { return cmp(*a, *b) < 0; });
    const int offset = query_int(req, "offset").value_or(0);
    const int limit = query_int(req, "limit").value_or(static_cast<int>(rows.size()));
    if (offset < 0 || limit < 0) throw ApiError(422, "offset and limit must be nonnegative");
    json page = json::array();
    for (std::size_t i = static_cast<std::size_t>(offset);
         i < rows.size() && i < static_cast<std::size_t>(offset) + static_cast<std::size_t>(limit); ++i)
      page.push_back(to_json(*rows[i]));
    return ok({{"revision", s.revision},
               {"total", rows.size()},
               {"offset", offset},
               {"rows", std::move(page)}});
  }

  Response route(const Request& req) {
    static const std::regex kSessionRoute(R"(^/sessions/([0-9a-f]+)(/.*)?$)");
    if (req.path == "/sessions" || req.path == "/sessions/") {
      if (req.method != "POST") throw ApiError(405, "use POST to create a session");
      auto s = create_session();
      std::lock_guard lock(s->mutex);
      json out = state(*s);
      out["id"] = s->id;
      return ok(out, 201);
    }
    std::smatch m;
    if (!std::regex_match(req.path, m, kSessionRoute)) throw ApiError(404, "unknown route");
    auto session = find_session(m[1].str());
    const std::string sub = m[2].matched ? m[2].str() : "";

    std::lock_guard lock(session->mutex);
    session->last_access = Clock::now();
    Session& s = *session;

    if (req.method == "GET") {
      if (sub == "/info" || sub.empty()) return ok(state(s));
      if (sub == "/spectrum") {
        const ChartRequest cr = chart_request(req);
        json out = to_json(s.workspace.series(cr));
        out["revision"] = s.revision;
        return ok(out);
      }
      if (sub == "/references") return references(s, req);
      if (sub == "/export/table.csv") return {200, "text/csv; charset=utf-8", s.workspace.table_csv()};
      if (sub == "/export/chart.csv")
        return {200, "text/csv; charset=utf-8", s.workspace.chart_csv(chart_request(req))};
      if (sub == "/export/chart.svg")
        return {200, "image/svg+xml", s.workspace.chart_svg(chart_request(req), ChartOptions{})};
      throw ApiError(404, "unknown route");
    }
    if (req.method == "POST") {
      static const std::vector<std::string> kActions = {"/import", "/filter", "/cluster", "/refine",
                                                        "/manual", "/undo", "/merge"};
      if (std::find(kActions.begin(), kActions.end(), sub) == kActions.end())
        throw ApiError(404, "unknown route");
      return mutate(s, std::string_view(sub).substr(1), req);
    }
    throw ApiError(405, "method not allowed");
  }

  std::chrono::seconds idle_ttl_;
  std::mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::mt19937_64 rng_;
};

}  // namespace crx::api
