// Runs the acceptance checks and prints one PASS/FAIL line per criterion.
// Exit status is non-zero when any criterion fails.

#include "support.hpp"

#include "runlens/batch.hpp"
#include "runlens/kinematics.hpp"
#include "runlens/pipeline.hpp"
#include "runlens/tactical.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <sys/resource.h>
#include <thread>

using namespace runlens;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

std::vector<TrackSample> track_of(const Match& m, const std::string& player) {
  std::vector<TrackSample> out;
  for (const auto& f : m.frames) {
    if (f.period != Period::First) continue;
    if (const auto* p = f.find(player)) out.push_back({f.t_ms, p->xy, false});
  }
  return out;
}

Outcome run_segmentation() {
  const auto out = synth::generate(synth::read_script(RUNLENS_FIXTURES_DIR "/three_efforts.json"));
  const auto track = track_of(out.match, "m10");
  const auto t0 = Clock::now();
  const auto runs = segment_runs(compute_speed("m10", track), track);
  const double elapsed = seconds_since(t0);
  if (runs.size() != 3 || out.truth.runs.size() != 3) {
    return {false, "expected 3 runs, got " + std::to_string(runs.size())};
  }
  const double peaks[] = {6.0, 21.0, 21.0};
  double worst_peak = 0.0, worst_time = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& t = out.truth.runs[k];
    worst_peak = std::max(worst_peak, std::abs(runs[k].peak_speed - peaks[k]));
    for (auto [got, want] : {std::pair{runs[k].t_valley_end, t.t_valley_end},
                             std::pair{runs[k].t_peak_start, t.t_peak_start},
                             std::pair{runs[k].t_peak_end, t.t_peak_end},
                             std::pair{runs[k].t_next_valley_start, t.t_next_valley_start}}) {
      worst_time = std::max(worst_time, std::abs(static_cast<double>(got) - want));
    }
  }
  const bool hi_ok = !runs[0].is_hi && runs[1].is_hi && runs[2].is_hi;
  return {worst_peak <= 0.5 && worst_time <= 200.0 && elapsed < 0.1 && hi_ok,
          fmt("3 runs, peak error %.3f km/h, timing error %.0f ms, %.4f s", worst_peak, worst_time, elapsed)};
}

Outcome hi_boundary() {
  auto plateau = [](double kmh) {
    SpeedSignal sig{"p", {}};
    std::vector<TrackSample> pos;
    double x = 0.0;
    std::int64_t t = 0;
    for (double v : {2.0, kmh, 2.0}) {
      for (int i = 0; i < 20; ++i, t += 100) {
        x += v / 36.0;
        sig.samples.push_back({t, v, v, true});
        pos.push_back({t, {x, 0.0}, false});
      }
    }
    const auto runs = segment_runs(sig, pos);
    return runs.size() == 1 ? std::optional<bool>(runs[0].is_hi) : std::nullopt;
  };
  const auto at21 = plateau(21.0);
  const auto at209 = plateau(20.9);
  return {at21 == true && at209 == false, std::string("21.0 -> ") + (at21 && *at21 ? "hi" : "not hi") +
                                              ", 20.9 -> " + (at209 && !*at209 ? "not hi" : "hi")};
}

Outcome geometry_oracles() {
  oracle::Rng rng(2024);
  int disagreements = 0, hulls = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const auto hull = geometry::convex_hull(oracle::random_points(rng, rng.integer(3, 15)));
    if (hull.size() < 3) continue;
    ++hulls;
    const Point q{rng.uniform(-10.0, 110.0), rng.uniform(-10.0, 110.0)};
    if (geometry::convex_contains(hull, q) != oracle::half_plane_contains(hull, q)) ++disagreements;
  }
  int kmeans_bad = 0, fixtures = 0;
  double worst = 0.0;
  for (int n = 3; n <= 12; ++n) {
    for (int trial = 0; trial < 50; ++trial, ++fixtures) {
      std::vector<double> xs;
      for (int i = 0; i < n; ++i) xs.push_back(trial % 5 == 0 ? rng.integer(0, 4) * 10.0 : rng.uniform(0.0, 105.0));
      const double got = within_cluster_ss(xs, fit_lines(xs));
      const double want = oracle::best_three_partition_sse(xs);
      const double err = std::abs(got - want) / std::max(1.0, want);
      worst = std::max(worst, err);
      if (err > 1e-9) ++kmeans_bad;
    }
  }
  return {disagreements == 0 && kmeans_bad == 0 && hulls > 9000,
          std::to_string(disagreements) + " hull disagreements in " + std::to_string(hulls) + " checks; " +
              std::to_string(kmeans_bad) + "/" + std::to_string(fixtures) + " k-means mismatches" +
              fmt(" (worst rel %.1e)", worst)};
}

Outcome formation_assignment() {
  oracle::Rng rng(77);
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> cost(6, std::vector<double>(6));
    for (auto& row : cost) {
      for (auto& c : row) c = trial % 4 == 0 ? rng.integer(0, 3) : rng.uniform(0.0, 50.0);
    }
    if (std::abs(optimal_assignment(cost).cost - oracle::brute_force_assignment(cost)) > 1e-9) ++mismatches;
  }
  const auto& templates = default_templates();
  int recovered = 0;
  for (int seed = 0; seed < 100; ++seed) {
    oracle::Rng noise(static_cast<std::uint64_t>(seed));
    const std::size_t which = static_cast<std::size_t>(seed) % templates.size();
    std::vector<int> order(10);
    std::iota(order.begin(), order.end(), 0);
    noise.shuffle(order);
    RelativeShape shape;
    std::vector<Point> raw;
    for (int slot : order) {
      shape.player_ids.push_back("p" + std::to_string(slot));
      const Point p = templates[which].slots[slot].position;
      raw.push_back({p.x * 22.6 + noise.normal(0.0, 2.0), p.y * 22.6 + noise.normal(0.0, 2.0)});
    }
    shape.points = normalize_shape(raw);
    const auto fit = assign_formation(shape, templates);
    bool ok = fit.template_index == which;
    for (std::size_t i = 0; ok && i < order.size(); ++i) ok = fit.slot_of_player[i] == order[i];
    if (ok) ++recovered;
  }
  return {mismatches == 0 && recovered >= 95, std::to_string(mismatches) + "/100 assignment mismatches; " +
                                                  std::to_string(recovered) + "/100 templates recovered"};
}

Outcome possession_tiling() {
  std::size_t fixtures = 0, bad_tiling = 0;
  for (const char* name : {"auto_short.json", "auto_full.json", "three_efforts.json"}) {
    auto out = synth::generate(synth::read_script(std::string(RUNLENS_FIXTURES_DIR) + "/" + name));
    sort_match(out.match);
    const MatchIndex index(out.match);
    for (const auto& segs : {segment_possessions(index), build_phases(index)}) {
      std::int64_t total = 0;
      for (const auto& s : segs) total += s.duration_ms();
      ++fixtures;
      if (total != index.duration_ms()) ++bad_tiling;
    }
  }
  const std::int64_t t_end = 60000;
  const EventType types[] = {EventType::Pass, EventType::Pass, EventType::BallOut};
  const char* teams[] = {"A", "B", "A"};
  const std::int64_t gaps[] = {1000, 3000};
  std::size_t sequences = 0, mismatches = 0;
  for (int len = 1; len <= 6; ++len) {
    int total = 1;
    for (int i = 0; i < len; ++i) total *= 6;
    for (int code = 0; code < total; ++code) {
      std::vector<Event> events;
      std::int64_t t = 0;
      for (int i = 0, c = code; i < len; ++i, c /= 6) {
        const int sym = c % 6;
        t += gaps[sym / 3];
        events.push_back({t, Period::First, types[sym % 3], teams[sym % 3], std::string(teams[sym % 3]) + "1",
                          {50.0, 34.0}, std::nullopt});
      }
      const Match m = oracle::bare_match(t_end, events);
      const MatchIndex index(m);
      const auto got = oracle::owner_spans(segment_possessions(index));
      const auto want = oracle::replay_possession(events, t_end);
      bool same = got.size() == want.size();
      for (std::size_t i = 0; same && i < got.size(); ++i) {
        same = got[i].team == want[i].team && got[i].t_start == want[i].t_start && got[i].t_end == want[i].t_end;
      }
      ++sequences;
      if (!same) ++mismatches;
    }
  }
  return {bad_tiling == 0 && mismatches == 0,
          std::to_string(bad_tiling) + "/" + std::to_string(fixtures) + " tilings off; " +
              std::to_string(mismatches) + "/" + std::to_string(sequences) + " replay mismatches"};
}

Outcome influence_regression() {
  oracle::RegressionTruth truth;
  for (int p = 0; p < 8; ++p) truth.cell_effects.push_back(p == 0 ? 0.0 : 0.004 * p - 0.01);

  oracle::Rng clean(1);
  const auto exact = fit_influence(oracle::regression_samples(clean, truth, 400, 0.0));
  double worst_rel = 0.0;
  auto rel = [&](double got, double want) {
    worst_rel = std::max(worst_rel, std::abs(got - want) / std::max(std::abs(want), 1e-300));
  };
  rel(exact.intercept.value, truth.intercept);
  rel(exact.angle.value, truth.angle);
  rel(exact.distance.value, truth.distance);
  for (int p = 1; p < 8; ++p) rel(exact.cells.at({"p" + std::to_string(p), Role::Midfielder}).value, truth.cell_effects[p]);

  int inside = 0;
  double worst_ortho = 0.0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    oracle::Rng rng(1000 + seed);
    const auto samples = oracle::regression_samples(rng, truth, 5000, 0.01);
    const auto m = fit_influence(samples);
    const auto& c = m.cells.at({"p5", Role::Midfielder});
    if (std::abs(c.value - truth.cell_effects[5]) <= 3.0 * c.std_error) ++inside;
    const auto d = oracle::rebuild_design(samples, m);
    worst_ortho = std::max(worst_ortho, (d.x.transpose() * (d.y - d.x * d.beta)).cwiseAbs().maxCoeff());
  }
  return {worst_rel <= 1e-9 && inside >= 99 && worst_ortho < 1e-8,
          fmt("zero-noise worst rel error %.1e; ", worst_rel) + std::to_string(inside) +
              "/100 seeds within 3 SE" + fmt("; max |X'r| %.1e", worst_ortho)};
}

Outcome normalization() {
  oracle::Rng rng(5);
  double worst = 0.0;
  for (int i = 0; i < 10000; ++i) {
    const double count = rng.integer(0, 200), phase = rng.uniform(1.0, 20000.0);
    const double a = *per30(count, phase), b = *per30(2.0 * count, 2.0 * phase);
    worst = std::max(worst, std::abs(a - b) / std::max(1.0, std::abs(a)));
  }
  const std::vector<MatchSummary> season{oracle::constructed_summary(
      "g", {{"p449", "T", Role::Midfielder, 449.0 * 60.0, 0.0, {}}, {"p450", "T", Role::Midfielder, 450.0 * 60.0, 0.0, {}}})};
  const auto profiles = build_profiles(season);
  const bool filter_ok = profiles.size() == 1 && profiles[0].player_id == "p450";
  return {worst <= 1e-12 && filter_ok,
          fmt("doubling error %.1e; ", worst) + (filter_ok ? "449 excluded, 450 included" : "filter wrong")};
}

Outcome pca() {
  oracle::Rng rng(8);
  double worst_sum = 0.0, worst_rec = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const int n = rng.integer(5, 30), p = 5;
    std::vector<std::vector<double>> rows(n, std::vector<double>(p));
    for (auto& r : rows) {
      const double shared = rng.normal(0.0, 1.0);
      for (auto& c : r) c = shared + rng.normal(0.0, 0.7);
    }
    const auto res = style_pca(rows, std::vector<std::string>{"a", "b", "c", "d", "e"});
    double sum = 0.0;
    for (double r : res.explained_ratio) sum += r;
    worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < p; ++j) {
        double z = 0.0;
        for (int k = 0; k < p; ++k) z += res.scores[i][k] * res.loadings[k][j];
        worst_rec = std::max(worst_rec, std::abs(z - res.standardized[i][j]));
      }
    }
  }
  std::vector<std::vector<double>> rank1;
  for (int i = 0; i < 10; ++i) rank1.push_back({1.0 * i, 3.0 * i - 2.0, -0.25 * i, 7.0 * i});
  const auto r1 = style_pca(rank1, {"a", "b", "c", "d"});
  const double first = r1.explained_ratio[0];
  return {worst_sum <= 1e-9 && worst_rec < 1e-9 && std::abs(first - 1.0) <= 1e-9,
          fmt("ratio sum error %.1e; reconstruction error %.1e; rank-1 first ratio %.12f", worst_sum, worst_rec, first)};
}

Outcome lineup_arithmetic() {
  // Inside-to-back per-30 rates (count / 10 with 300 in-possession minutes).
  const std::vector<int> counts{0, 12, 15, 20, 10, 9, 14, 16, 13, 27, 40};
  std::vector<oracle::PlayerSpec> specs;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    oracle::PlayerSpec s{"L" + std::to_string(i), "T", Role::Midfielder, 18000.0, 9000.0, {}};
    s.movements[2] = counts[i];
    specs.push_back(s);
  }
  oracle::PlayerSpec sub{"S", "T", Role::Midfielder, 18000.0, 9000.0, {}};
  sub.movements[2] = 8;
  specs.push_back(sub);
  const std::vector<MatchSummary> season{oracle::constructed_summary("g", specs)};
  const auto profiles = build_profiles(season);
  std::vector<LineupMember> a;
  for (std::size_t i = 0; i < counts.size(); ++i) a.push_back({"L" + std::to_string(i), Role::Midfielder});
  auto b = a;
  b.back().player_id = "S";
  const auto cmp = compare_lineups(a, b, profiles);
  const double before = cmp.a.per30[2], after = cmp.b.per30[2];
  double p_out = 0.0, p_in = 0.0;
  for (const auto& p : profiles) {
    if (p.player_id == "L10") p_out = p.movement_p30[2];
    if (p.player_id == "S") p_in = p.movement_p30[2];
  }
  const bool identity = std::abs((after - before) - (p_in - p_out)) <= 1e-12;
  bool invariant = true;
  oracle::Rng rng(3);
  for (int k = 0; k < 50; ++k) {
    auto shuffled = a;
    rng.shuffle(shuffled);
    invariant = invariant && std::abs(lineup_aggregate(shuffled, profiles).per30[2] - before) <= 1e-12;
  }
  const bool values = std::abs(before - 17.6) <= 1e-12 && std::abs(after - 14.4) <= 1e-12;
  return {values && identity && invariant,
          fmt("%.12g -> %.12g (swap %.12g)", before, after, p_in - p_out) +
              (invariant ? ", order-invariant" : ", order-dependent")};
}

Outcome fatigue_shape() {
  std::vector<MatchSummary> season;
  // Per-match minute curves are noisy; pool a small season.
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    auto out = support::synth_match("auto_decay.json", "decay" + std::to_string(seed), seed);
    sort_match(out.match);
    PipelineOptions opts;
    opts.threads = 2;
    season.push_back(run_pipeline(out.match, Config{}, opts).summary());
  }
  const auto curve = minute_curves(season);
  double hi_pre = 0.0, hi_post = 0.0, d_pre = 0.0, d_post = 0.0;
  int n_pre = 0, n_post = 0;
  for (const auto& pt : curve) {
    if (!pt.hi_distance_variation_smoothed || !pt.distance_variation_smoothed) continue;
    if (pt.minute < 65) {
      hi_pre += *pt.hi_distance_variation_smoothed;
      d_pre += *pt.distance_variation_smoothed;
      ++n_pre;
    } else {
      hi_post += *pt.hi_distance_variation_smoothed;
      d_post += *pt.distance_variation_smoothed;
      ++n_post;
    }
  }
  if (n_pre == 0 || n_post == 0) return {false, "curve has no minutes on one side of 65"};
  const double hi_drop = 1.0 - (1.0 + hi_post / n_post) / (1.0 + hi_pre / n_pre);
  const double d_drop = 1.0 - (1.0 + d_post / n_post) / (1.0 + d_pre / n_pre);
  return {hi_drop >= 0.15 && d_drop < hi_drop,
          fmt("HI variation drop %.1f%%, total distance drop %.1f%%", 100.0 * hi_drop, 100.0 * d_drop)};
}

Outcome performance() {
  const auto root = support::scratch("acceptance_perf");
  auto out = support::synth_match("auto_full.json", "full", 7);
  std::size_t samples = 0;
  for (const auto& f : out.match.frames) samples += f.players.size();
  write_match(out.match, root / "full");
  out = {};

  const unsigned threads = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::string> hashes;
  double elapsed = 0.0;
  for (int rep = 0; rep < 2; ++rep) {
    auto store = Store::open_or_create(root / ("store" + std::to_string(rep)), Config{});
    const auto t0 = Clock::now();
    const auto outcomes = process_matches({root / "full"}, store, threads);
    const double dt = seconds_since(t0);
    if (rep == 0) elapsed = dt;
    if (outcomes.size() != 1 || !outcomes[0].ok) return {false, "pipeline failed: " + outcomes[0].error};
    std::string all;
    for (const auto& [kind, hash] : store.entry("full")->artifacts) all += kind + "=" + hash + ";";
    hashes.push_back(all);
  }
  rusage usage{};
  getrusage(RUSAGE_SELF, &usage);
  const double peak_mib = static_cast<double>(usage.ru_maxrss) / 1024.0;
  const bool same = hashes[0] == hashes[1];
  return {elapsed < 10.0 && peak_mib < 1024.0 && same && samples > 1'000'000,
          fmt("%.2f M samples in %.2f s, peak RSS %.0f MiB", static_cast<double>(samples) / 1e6, elapsed, peak_mib) +
              (same ? ", hash-identical" : ", hashes differ")};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"run segmentation of a scripted trace", run_segmentation},
      {"HI boundary at 21 km/h", hi_boundary},
      {"hull and k-means oracles", geometry_oracles},
      {"formation assignment and recovery", formation_assignment},
      {"possession tiling and replay", possession_tiling},
      {"influence regression", influence_regression},
      {"normalization identities", normalization},
      {"style PCA", pca},
      {"lineup arithmetic", lineup_arithmetic},
      {"late-match HI decay shape", fatigue_shape},
      {"performance and determinism", performance},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::printf("criterion %2zu %s: %s (%s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
