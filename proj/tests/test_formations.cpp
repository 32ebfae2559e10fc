#include "oracles.hpp"

#include "runlens/formations.hpp"
#include "runlens/synth.hpp"

#include <doctest.h>

#include <map>

using namespace runlens;

TEST_CASE("Hungarian matching equals the brute-force optimum") {
  oracle::Rng rng(31);
  for (int trial = 0; trial < 400; ++trial) {
    const int n = rng.integer(1, 7);
    std::vector<std::vector<double>> cost(n, std::vector<double>(n));
    for (auto& row : cost) {
      for (auto& c : row) c = trial % 5 == 0 ? rng.integer(0, 3) : rng.uniform(0.0, 10.0);
    }
    const Assignment a = optimal_assignment(cost);
    CHECK(a.cost == doctest::Approx(oracle::brute_force_assignment(cost)).epsilon(1e-12));
    std::vector<bool> used(n, false);
    double sum = 0.0;
    for (int r = 0; r < n; ++r) {
      const int c = a.assignment[r];
      REQUIRE(c >= 0);
      REQUIRE(c < n);
      CHECK_FALSE(used[c]);
      used[c] = true;
      sum += cost[r][c];
    }
    CHECK(sum == doctest::Approx(a.cost));
  }
}

TEST_CASE("non-square costs are rejected") {
  CHECK_THROWS_AS(optimal_assignment({{1.0, 2.0}}), ValidationError);
}

TEST_CASE("templates are normalized and need ten slots") {
  for (const auto& t : default_templates()) {
    REQUIRE(t.slots.size() == 10);
    Point mean{0, 0};
    double ss = 0.0;
    for (const auto& s : t.slots) {
      mean = mean + s.position;
      ss += s.position.x * s.position.x + s.position.y * s.position.y;
    }
    CHECK(std::abs(mean.x) < 1e-9);
    CHECK(std::abs(mean.y) < 1e-9);
    CHECK(std::sqrt(ss / 10.0) == doctest::Approx(1.0));
  }
  CHECK_THROWS_AS(make_template("short", {{{0, 0}, SlotRole::CentreBack, Side::Centre}}), ValidationError);
  const auto back = templates_from_json(templates_to_json(default_templates()));
  REQUIRE(back.size() == default_templates().size());
  CHECK(back[3].name == default_templates()[3].name);
}

TEST_CASE("a noisy shuffled template is recovered with its slots") {
  oracle::Rng rng(41);
  const auto& templates = default_templates();
  int recovered = 0;
  for (int seed = 0; seed < 100; ++seed) {
    const std::size_t which = static_cast<std::size_t>(seed) % templates.size();
    std::vector<int> order(10);
    std::iota(order.begin(), order.end(), 0);
    rng.shuffle(order);
    RelativeShape shape;
    std::vector<Point> raw;
    for (int slot : order) {
      shape.player_ids.push_back("p" + std::to_string(slot));
      const Point p = templates[which].slots[slot].position;
      raw.push_back({p.x * 22.6 + rng.normal(0.0, 2.0), p.y * 22.6 + rng.normal(0.0, 2.0)});
    }
    shape.points = normalize_shape(raw);
    const auto fit = assign_formation(shape, templates);
    bool ok = fit.template_index == which;
    for (std::size_t i = 0; ok && i < order.size(); ++i) ok = fit.slot_of_player[i] == order[i];
    if (ok) ++recovered;
  }
  CHECK(recovered >= 95);
}

TEST_CASE("role simplification folds sides and wing-backs") {
  CHECK(simplify_role(SlotRole::WingBack, Side::Left) == Role::FullBack);
  CHECK(simplify_role(SlotRole::FullBack, Side::Right) == Role::FullBack);
  CHECK(simplify_role(SlotRole::WideMid, Side::Left) == simplify_role(SlotRole::WideMid, Side::Right));
  CHECK(simplify_role(SlotRole::CentreForward, Side::Centre) == Role::Striker);
}

TEST_CASE("the role timeline recovers the scripted formations") {
  const auto out = synth::generate(synth::read_script(RUNLENS_FIXTURES_DIR "/auto_short.json"));
  const MatchIndex index(out.match);
  const auto phases = build_phases(index);
  const auto timeline = build_role_timeline(index, phases);

  std::map<std::string, std::string> formation_of;
  for (const auto& w : timeline.windows) formation_of[w.team_id] = w.formation;
  for (const auto& [team, name] : out.truth.formations) {
    REQUIRE(formation_of.contains(team));
    CHECK(formation_of[team] == name);
  }

  int agree = 0, total = 0;
  for (const auto& [pid, role] : out.truth.roles) {
    if (role == Role::Goalkeeper) continue;
    const auto it = timeline.players.find(pid);
    REQUIRE(it != timeline.players.end());
    std::map<Role, std::int64_t> time;
    for (const auto& iv : it->second) {
      if (iv.role) time[*iv.role] += iv.t_end - iv.t_start;
    }
    REQUIRE_FALSE(time.empty());
    const auto best = std::max_element(time.begin(), time.end(),
                                       [](const auto& a, const auto& b) { return a.second < b.second; });
    ++total;
    if (best->first == role) ++agree;
  }
  CHECK(total == 20);
  CHECK(agree == total);

  for (const auto& [pid, intervals] : timeline.players) {
    for (std::size_t i = 1; i < intervals.size(); ++i) {
      if (intervals[i].period == intervals[i - 1].period) CHECK(intervals[i].t_start >= intervals[i - 1].t_end);
    }
  }
}
