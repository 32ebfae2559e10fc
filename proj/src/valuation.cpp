#include "runlens/valuation.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace runlens {

namespace {

double logistic(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    out.push_back(cell);
  }
  return out;
}

} // namespace

double SurrogateEpv::value_at(Point p) const {
  const double half_w = pitch_.width / 2.0;
  return logistic(-4.0 + 5.0 * (p.x / pitch_.length) - 2.0 * std::abs(p.y - half_w) / half_w);
}

double SurrogateEpv::evaluate(const Frame& frame, std::string_view attacking_team) const {
  if (frame.in_play.has_value() && !*frame.in_play) {
    throw Error("surrogate EPV is undefined for out-of-play frames");
  }
  return value_at(canonical(frame.ball, frame.direction_of(attacking_team), pitch_));
}

TableEpv TableEpv::from_csv(std::istream& in) {
  TableEpv table;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("EPV table is empty");
  const auto header = split_csv(line);
  const bool with_period = !header.empty() && header[0] == "period";
  const std::vector<std::string> expected =
      with_period ? std::vector<std::string>{"period", "t_ms", "team", "value"}
                  : std::vector<std::string>{"t_ms", "team", "value"};
  if (header != expected) throw ValidationError("EPV table header must be t_ms,team,value");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != expected.size()) {
      throw ValidationError("EPV table line " + std::to_string(line_no) + ": wrong column count");
    }
    try {
      const std::size_t o = with_period ? 1 : 0;
      const int period = with_period ? std::stoi(cells[0]) : 1;
      table.set(period_from_int(period), std::stoll(cells[o]), cells[o + 1], std::stod(cells[o + 2]));
    } catch (const std::logic_error&) {
      throw ValidationError("EPV table line " + std::to_string(line_no) + ": bad number");
    }
  }
  return table;
}

TableEpv TableEpv::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return from_csv(in);
}

void TableEpv::set(Period period, std::int64_t t_ms, std::string team, double value) {
  values_[{static_cast<int>(period), t_ms, std::move(team)}] = value;
}

double TableEpv::evaluate(const Frame& frame, std::string_view attacking_team) const {
  auto it = values_.find({static_cast<int>(frame.period), frame.t_ms, std::string(attacking_team)});
  if (it == values_.end()) {
    throw Error("EPV table has no value at t=" + std::to_string(frame.t_ms) + " for " + std::string(attacking_team));
  }
  return it->second;
}

std::pair<double, double> goal_angle_distance(Point origin, const PitchSpec& pitch) {
  const Point goal = pitch.goal_high_x();
  const double dist = distance(origin, goal);
  if (dist == 0.0) return {std::numbers::pi / 2.0, 0.0};
  const double dx = std::max(0.0, goal.x - origin.x);
  const double dy = std::abs(goal.y - origin.y);
  return {std::atan2(dy, dx), dist};
}

ValueOutcome value_run(const RunValueInput& input, const MatchIndex& index,
                       std::span<const PossessionSegment> segments, const EpvProvider& provider,
                       const ValuationConfig& config) {
  ValueOutcome out;
  const RunEffort& run = *input.run;
  if (!run.is_hi) {
    out.discard_reason = "not a high-intensity run";
    return out;
  }
  const std::int64_t t1 = run.t_valley_end;
  const std::int64_t t2 = run.t_peak_end + config.after_peak_ms;
  const Frame* f1 = index.nearest(input.period, t1, config.frame_tolerance_ms);
  const Frame* f2 = index.nearest(input.period, t2, config.frame_tolerance_ms);
  if (f1 == nullptr || f2 == nullptr) {
    out.discard_reason = f1 == nullptr ? "no frame near valley end" : "no frame near peak end + 2 s";
    return out;
  }
  const PossessionSegment* s1 = segment_at(segments, input.period, t1);
  const PossessionSegment* s2 = segment_at(segments, input.period, t2);
  if (s1 == nullptr || s1->out_of_play() || *s1->team_id != input.team_id) {
    out.discard_reason = "runner's team not in possession at valley end";
    return out;
  }
  if (s2 == nullptr || s2->possession_id != s1->possession_id) {
    out.discard_reason = "possession ended before peak end + 2 s";
    return out;
  }
  if ((f1->in_play && !*f1->in_play) || (f2->in_play && !*f2->in_play)) {
    out.discard_reason = "ball out of play";
    return out;
  }
  RunValueSample s;
  s.run_id = input.run_id;
  s.player_id = run.player_id;
  s.role = input.role;
  s.epv_start = provider.evaluate(*f1, input.team_id);
  s.epv_end = provider.evaluate(*f2, input.team_id);
  s.epv_added = s.epv_end - s.epv_start;
  const int sign = index.meta().direction(input.team_id, input.period);
  std::tie(s.angle, s.distance) = goal_angle_distance(canonical(run.origin, sign, index.pitch()), index.pitch());
  out.sample = std::move(s);
  return out;
}

std::string cell_label(const CellKey& key) { return key.player_id + "@" + std::string(to_string(key.role)); }

RunInfluenceModel fit_influence(std::vector<RunValueSample> samples, const InfluenceOptions& options) {
  std::sort(samples.begin(), samples.end(), [](const auto& a, const auto& b) {
    if (a.run_id != b.run_id) return a.run_id < b.run_id;
    return std::tie(a.player_id, a.role) < std::tie(b.player_id, b.role);
  });

  std::map<CellKey, std::size_t> counts;
  for (const auto& s : samples) ++counts[{s.player_id, s.role}];
  std::vector<CellKey> cells;
  for (const auto& [key, n] : counts) {
    if (n < options.min_samples_per_cell) continue;
    if (!options.minutes.empty()) {
      auto it = options.minutes.find(key);
      if (it == options.minutes.end() || it->second < options.min_minutes) continue;
    }
    cells.push_back(key);
  }
  if (cells.empty()) throw Error("no (player, role) cell qualifies for the influence fit");

  std::map<CellKey, std::size_t> column_of; // reference cell (cells[0]) has no column
  for (std::size_t c = 1; c < cells.size(); ++c) column_of[cells[c]] = 2 + c;
  std::vector<std::string> names{"intercept", "angle", "distance"};
  for (std::size_t c = 1; c < cells.size(); ++c) names.push_back(cell_label(cells[c]));

  std::vector<const RunValueSample*> rows;
  for (const auto& s : samples) {
    if (std::binary_search(cells.begin(), cells.end(), CellKey{s.player_id, s.role})) rows.push_back(&s);
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(names.size());
  if (n < p) {
    throw Error("influence fit needs at least " + std::to_string(p) + " samples, got " + std::to_string(n));
  }
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, p);
  Eigen::VectorXd y(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& s = *rows[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    x(i, 1) = s.angle;
    x(i, 2) = s.distance;
    if (auto it = column_of.find({s.player_id, s.role}); it != column_of.end()) {
      x(i, static_cast<Eigen::Index>(it->second)) = 1.0;
    }
    y(i) = s.epv_added;
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  qr.setThreshold(1e-10);
  if (qr.rank() < p) {
    std::vector<std::string> collinear;
    const auto& perm = qr.colsPermutation().indices();
    for (Eigen::Index k = qr.rank(); k < p; ++k) collinear.push_back(names[static_cast<std::size_t>(perm(k))]);
    std::string msg = "design matrix is rank deficient; collinear columns:";
    for (const auto& c : collinear) msg += " " + c;
    throw RankDeficient(msg, std::move(collinear));
  }
  const Eigen::VectorXd beta = qr.solve(y);
  const Eigen::VectorXd resid = y - x * beta;
  const double dof = static_cast<double>(n - p);
  const double sigma2 = dof > 0 ? resid.squaredNorm() / dof : 0.0;

  // Var(beta) = sigma^2 (R^T R)^-1 in pivoted order, via a triangular solve.
  const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(p, p).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv =
      r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(p, p));
  Eigen::VectorXd se(p);
  const auto& perm = qr.colsPermutation().indices();
  for (Eigen::Index k = 0; k < p; ++k) se(perm(k)) = std::sqrt(sigma2 * r_inv.row(k).squaredNorm());

  RunInfluenceModel model;
  model.intercept = {beta(0), se(0)};
  model.angle = {beta(1), se(1)};
  model.distance = {beta(2), se(2)};
  model.reference = cells[0];
  model.cells[cells[0]] = {0.0, 0.0};
  for (const auto& [key, col] : column_of) {
    const auto c = static_cast<Eigen::Index>(col);
    model.cells[key] = {beta(c), se(c)};
  }
  model.residual_variance = sigma2;
  model.n_samples = rows.size();
  return model;
}

} // namespace runlens
