// Acceptance suite: one PASS/FAIL line per primary criterion, with its
// tolerance and time budget. Exits non-zero when any criterion fails.

#include <sys/resource.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crx/cli.hpp"
#include "crx/crx.hpp"
#include "fixture_files.hpp"
#include "oracles.hpp"
#include "synthetic.hpp"

namespace {

using Groups = oracle::Groups;

// Empty string means pass; anything else is the failure detail.
using Check = std::function<std::string()>;

struct Criterion {
  std::string name;
  double budget_seconds;
  Check check;
};

crx::SimilarityConfig at(double threshold) {
  crx::SimilarityConfig cfg;
  cfg.threshold = threshold;
  return cfg;
}

Groups sub_groups(const std::map<crx::RefId, crx::ClusterId>& membership) {
  std::map<crx::ClusterId, std::set<std::int64_t>> by;
  for (const auto& [id, cid] : membership) by[cid].insert(id);
  Groups out;
  for (auto& [cid, ids] : by) out.insert(std::move(ids));
  return out;
}

Groups main_groups(const crx::Partition& p) {
  std::map<std::int64_t, std::set<std::int64_t>> by;
  for (const auto& [id, cid] : p.membership) by[cid.main].insert(id);
  Groups out;
  for (auto& [m, ids] : by) out.insert(std::move(ids));
  return out;
}

std::string show(const Groups& g) {
  std::string s = "{";
  for (const auto& group : g) {
    s += "{";
    for (auto id : group) s += std::to_string(id) + (id == *group.rbegin() ? "" : ",");
    s += "}";
  }
  return s + "}";
}

std::vector<oracle::Item> items_of(const crx::Dataset& ds) {
  std::vector<oracle::Item> out;
  for (const auto& r : ds.references)
    out.push_back({r.id, r.parsed.year, r.parsed.last_name, r.parsed.source_title, r.parsed.volume,
                   r.parsed.page, r.parsed.doi});
  return out;
}

bool refines(const Groups& fine, const Groups& coarse) {
  std::map<std::int64_t, const std::set<std::int64_t>*> owner;
  for (const auto& g : coarse)
    for (auto id : g) owner[id] = &g;
  for (const auto& g : fine)
    for (auto id : g)
      if (owner.at(id) != owner.at(*g.begin())) return false;
  return true;
}

std::string hirsch_variants() {
  const auto ds = fixtures::load("hirsch_variants.txt");
  const auto p = crx::cluster(ds, crx::SimilarityConfig{});
  const Groups expected{{1, 2, 3, 4, 5, 6, 7}};
  if (sub_groups(p.membership) != expected) return "clusters " + show(sub_groups(p.membership));
  const auto merged = crx::merge(ds, p);
  if (merged.references.size() != 1) return std::to_string(merged.references.size()) + " rows after merge";
  const auto& r = merged.references[0];
  if (r.n_cr != 177) return "merged n_cr " + std::to_string(r.n_cr);
  if (r.parsed.raw != "Hirsch JE, 2005, P NATL ACAD SCI USA, V102, P16569, DOI 10.1073/pnas.0507655102")
    return "representative " + r.parsed.raw;
  return {};
}

std::string jacso_page_refinement() {
  const auto ds = fixtures::load("jacso_online_inform_rev.txt");
  const auto p = crx::cluster(ds, at(0.75));
  if (sub_groups(p.membership) != Groups{{1, 2, 3, 4, 5}}) return "clusters " + show(sub_groups(p.membership));
  auto cfg = at(0.75);
  cfg.require_page = true;
  const auto refined = crx::refine_by_attributes(ds, p, cfg);
  if (sub_groups(refined.membership) != Groups{{1}, {2}, {3}, {4}, {5}})
    return "refined " + show(sub_groups(refined.membership));
  std::set<std::int64_t> subs;
  for (const auto& [id, cid] : refined.membership) {
    if (cid.main != p.membership.at(id).main) return "main id changed for " + std::to_string(id);
    subs.insert(cid.sub);
  }
  if (subs.size() != 5) return "sub ids not distinct";
  return {};
}

std::string jacso_threshold() {
  const auto ds = fixtures::load("jacso_mixed.txt");
  const auto loose = main_groups(crx::cluster(ds, at(0.5)));
  if (loose != Groups{{1, 2, 3, 4, 5, 6, 7, 8}}) return "at 0.5: " + show(loose);
  const auto strict = crx::cluster(ds, at(0.75));
  const auto home = strict.membership.at(1).main;
  std::set<std::int64_t> with_first;
  for (const auto& [id, cid] : strict.membership)
    if (cid.main == home) with_first.insert(id);
  if (with_first != std::set<std::int64_t>{1, 2, 5, 7, 8}) return "at 0.75: " + show(Groups{with_first});
  return {};
}

std::string manual_replay() {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "crx_acceptance_manual";
  fs::create_directories(dir);
  auto replay = [&](const std::string& name) -> std::pair<int, Groups> {
    const std::string out = (dir / (name + ".csv")).string();
    std::ostringstream sink, err;
    const int status = crx::cli::run({"import", fixtures::path(name + ".txt"), "cluster", "manual",
                                      fixtures::path(name + ".actions"), "export", "--table", out},
                                     sink, err);
    if (status != 0) return {status, {}};
    const auto ds = crx::open_csv(crx::cli::read_file(out));
    std::map<crx::RefId, crx::ClusterId> m;
    for (const auto& r : ds.references) m[r.id] = r.cluster;
    return {0, sub_groups(m)};
  };
  const auto [s5, g5] = replay("schreiber");
  const auto [s6, g6] = replay("leydesdorff");
  fs::remove_all(dir);
  if (s5 != 0 || s6 != 0) return "cli exit status " + std::to_string(s5) + "/" + std::to_string(s6);
  if (g5 != Groups{{1}, {2}}) return "extract gave " + show(g5);
  if (g6 != Groups{{1}, {2, 6}, {3}, {4}, {5}}) return "different+same gave " + show(g6);
  return {};
}

std::string percentages() {
  std::vector<crx::PublicationRecord> recs;
  auto cite = [&](const std::string& cr, int times) {
    for (int i = 0; i < times; ++i) {
      crx::PublicationRecord r;
      r.publication_year = 2015;
      r.cited_refs = {cr};
      recs.push_back(r);
    }
  };
  cite("Garfield E, 1955, SCIENCE, V122, P108", 25);
  cite("Other A, 1955, J ONE", 5);
  cite("Other B, 1955, J TWO", 4);
  cite("lotka a.j., 1926, j washington acad sc, v16, p317", 7);
  const auto ds = crx::import_wos({crx::to_tagged_text(recs)}, crx::ImportConfig{}).dataset;
  const double garfield = ds.references[0].pct_in_year.value();
  const double lotka = ds.references[3].pct_in_year.value();
  if (std::fabs(garfield - 0.7353) > 0.0005) return "1955 share " + std::to_string(garfield);
  if (lotka != 1.0) return "1926 share " + std::to_string(lotka);
  return {};
}

std::string median_oracle() {
  std::mt19937_64 rng(1781);
  std::uniform_int_distribution<std::int64_t> count(0, 500);
  for (int t = 0; t < 1000; ++t) {
    std::vector<std::int64_t> counts(2015 - 1781 + 1);
    for (auto& c : counts) c = count(rng);
    const auto dev = crx::median_deviation(counts, 2);
    const auto expected = oracle::doubled_deviation(counts, 2);
    for (std::size_t i = 0; i < counts.size(); ++i)
      if (dev[i].halves != expected[i]) return "series " + std::to_string(t) + " year " + std::to_string(1781 + i);
  }
  for (std::int64_t c : {0, 1, 37, 500}) {
    const std::vector<std::int64_t> flat(2015 - 1781 + 1, c);
    for (const auto& d : crx::median_deviation(flat, 2))
      if (d.halves != 0) return "constant series " + std::to_string(c) + " not flat";
  }
  return {};
}

std::string levenshtein_oracle() {
  std::mt19937_64 rng(64);
  std::uniform_int_distribution<int> len(0, 64);
  std::uniform_int_distribution<int> ch('a', 'e');
  auto random_string = [&] {
    std::string s;
    for (int i = len(rng); i > 0; --i) s.push_back(static_cast<char>(ch(rng)));
    return s;
  };
  for (int t = 0; t < 1000; ++t) {
    const std::string a = random_string(), b = random_string(), c = random_string();
    const auto ab = crx::levenshtein_distance(a, b);
    if (ab != oracle::edit_distance(a, b)) return "pair " + std::to_string(t) + " differs from oracle";
    if (ab != crx::levenshtein_distance(b, a)) return "pair " + std::to_string(t) + " not symmetric";
    if (crx::levenshtein_distance(a, a) != 0) return "identity fails on pair " + std::to_string(t);
    if ((ab == 0) != (a == b)) return "zero distance for distinct strings";
    if (ab > crx::levenshtein_distance(a, c) + crx::levenshtein_distance(c, b)) return "triangle inequality fails";
  }
  return {};
}

std::string partition_properties() {
  std::mt19937_64 rng(200);
  const std::vector<double> ladder = {0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
  for (int t = 0; t < 200; ++t) {
    synthetic::Options opt;
    opt.max_refs = 200;
    opt.n_years = 10;
    const auto ds = synthetic::random_dataset(rng, opt);
    const auto items = items_of(ds);
    Groups previous;
    for (double th : ladder) {
      const auto p = crx::cluster(ds, at(th));
      const auto got = sub_groups(p.membership);
      if (got != oracle::components(items, {th})) return "set " + std::to_string(t) + " differs from oracle at " + std::to_string(th);
      if (!previous.empty() && !refines(got, previous)) return "set " + std::to_string(t) + " not monotone at " + std::to_string(th);
      previous = got;
      if (crx::merge(ds, p).total_occurrences() != ds.total_occurrences()) return "merge changed the total";
    }
  }
  for (int t = 0; t < 100; ++t) {
    const auto ds = synthetic::random_dataset(rng, synthetic::Options{});
    crx::Partition p = crx::cluster(ds, crx::SimilarityConfig{});
    std::vector<std::map<crx::RefId, crx::ClusterId>> history;
    for (int step = 0; step < 8; ++step) {
      std::vector<crx::RefId> ids;
      for (int k = 1 + static_cast<int>(rng() % 4); k > 0; --k)
        ids.push_back(ds.references[rng() % ds.references.size()].id);
      history.push_back(p.membership);
      switch (rng() % 3) {
        case 0: p = crx::manual_same(p, ids); break;
        case 1: p = crx::manual_different(p, ids); break;
        default: p = crx::manual_extract(p, ids); break;
      }
    }
    for (; !history.empty(); history.pop_back()) {
      auto out = crx::undo(std::move(p));
      p = std::move(out.partition);
      if (!out.applied || p.membership != history.back()) return "undo sequence " + std::to_string(t) + " diverged";
    }
  }
  return {};
}

std::string csv_round_trip() {
  std::mt19937_64 rng(100);
  for (int t = 0; t < 100; ++t) {
    synthetic::Options opt;
    opt.awkward_strings = true;
    opt.no_year_share = 0.05;
    auto ds = synthetic::random_dataset(rng, opt);
    ds = crx::apply_partition(ds, crx::cluster(ds, crx::SimilarityConfig{}));
    const std::string once = crx::save_csv(ds);
    if (crx::save_csv(crx::open_csv(once)) != once) return "dataset " + std::to_string(t) + " changed";
  }
  return {};
}

long peak_rss_mb() {
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  return usage.ru_maxrss / 1024;  // kilobytes on Linux
}

std::string scale_smoke() {
  std::mt19937_64 rng(10'000);
  crx::Dataset ds;
  std::set<std::string> seen;
  while (ds.references.size() < 10'000) {
    const int year = 1966 + static_cast<int>(rng() % 50);
    std::string raw = synthetic::random_raw(rng, year, true, false);
    if (!seen.insert(raw).second) continue;
    crx::CitedReference r;
    r.id = static_cast<crx::RefId>(ds.references.size()) + 1;
    r.parsed = crx::parse_cited_reference(raw);
    r.n_cr = 1 + static_cast<std::int64_t>(rng() % 30);
    r.cluster = {r.id, r.id};
    ds.references.push_back(std::move(r));
  }
  ds = crx::recompute_statistics(std::move(ds));
  const auto total = ds.total_occurrences();
  const auto start = std::chrono::steady_clock::now();
  const auto p = crx::cluster(ds, crx::SimilarityConfig{});
  const auto merged = crx::merge(ds, p);
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (merged.total_occurrences() != total) return "merge changed the total";
  if (seconds >= 10.0) return "cluster+merge took " + std::to_string(seconds) + " s";
  if (peak_rss_mb() >= 1024) return "peak memory " + std::to_string(peak_rss_mb()) + " MB";
  return {};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"hirsch variants: one cluster of 7, merged row n_cr=177 with the 171-count string", 1.0, hirsch_variants},
      {"jacso variants: one cluster of 5 at 0.75, page refinement gives 5 distinct subs, same main", 1.0,
       jacso_page_refinement},
      {"jacso outsiders: all 8 together at 0.5, 3 outsiders excluded at 0.75", 1.0, jacso_threshold},
      {"manual replay via cli: extract and different+same memberships", 1.0, manual_replay},
      {"percentages: 25/34 = 0.7353 +/- 0.0005, sole 1926 reference = 1 exactly", 1.0, percentages},
      {"median deviation: 1000 series 1781-2015 equal brute-force oracle, constant series flat", 5.0,
       median_oracle},
      {"levenshtein: 1000 pairs (len 0-64) equal oracle, metric properties", 2.0, levenshtein_oracle},
      {"partitions: 200 sets equal oracle components, monotone, merge conserves, 100 undo sequences", 30.0,
       partition_properties},
      {"csv: save/open/save byte-identical on 100 datasets with quoting", 5.0, csv_round_trip},
      {"scale: 10000 references over 50 years cluster+merge < 10 s, memory < 1 GB", 10.0, scale_smoke},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    std::string detail;
    try {
      detail = c.check();
    } catch (const std::exception& e) {
      detail = std::string("threw: ") + e.what();
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (detail.empty() && seconds >= c.budget_seconds) detail = "over time budget";
    const bool pass = detail.empty();
    failures += pass ? 0 : 1;
    std::printf("%s  %s  [%.3f s / %.0f s]%s%s\n", pass ? "PASS" : "FAIL", c.name.c_str(), seconds,
                c.budget_seconds, pass ? "" : "  ", detail.c_str());
  }
  std::printf("peak memory %ld MB\n", peak_rss_mb());
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
