#pragma once

// Possession segmentation and attack/defence phase labels.

#include "runlens/match.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace runlens {

enum class EndReason { BallOut, RefereeStop, Turnover, PeriodEnd, Restart, PhaseChange };
enum class AttackType { Organized, DirectPlay, CounterAttack, SetPiece };
enum class DefenseType { HighPressure, MediumBlock, LowBlock, Unknown };

std::string_view to_string(EndReason reason);
std::string_view to_string(AttackType type);
std::string_view to_string(DefenseType type);
EndReason end_reason_from_string(std::string_view name);
AttackType attack_type_from_string(std::string_view name);
DefenseType defense_type_from_string(std::string_view name);

struct PossessionConfig {
  std::int64_t regain_window_ms = 3000;  // single opponent touch shorter than this is an instant regain
  int flip_events = 2;                   // consecutive opponent events that flip possession
  std::int64_t set_piece_ms = 10000;
  std::int64_t counter_ms = 12000;
  double counter_advance_m = 30.0;
  double long_pass_m = 30.0;
  std::int64_t direct_play_ms = 10000;
  double high_press_area_share = 0.9;
  int high_press_players = 3;            // N defenders in the attacking team's defensive third
  double min_block_coverage = 0.5;

  void validate() const;
};

struct PossessionSegment {
  std::optional<std::string> team_id; // nullopt: ball out of play
  Period period = Period::First;
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  EndReason end_reason = EndReason::PeriodEnd;
  std::optional<AttackType> attack_type;
  std::optional<DefenseType> defense_type;
  int possession_id = -1; // shared by the phase windows of one possession
  bool low_confidence = false;

  bool out_of_play() const { return !team_id.has_value(); }
  std::int64_t duration_ms() const { return t_end - t_start; }
};

/// Rule automaton over events. Segments tile every period span exactly.
/// Throws ValidationError for unordered events or unknown teams.
std::vector<PossessionSegment> segment_possessions(const MatchIndex& index,
                                                   const PossessionConfig& config = {});

struct AttackWindow {
  std::int64_t t_start = 0;
  std::int64_t t_end = 0;
  AttackType type = AttackType::Organized;
  bool low_confidence = false;
};

/// Attack-type sub-windows tiling an in-play segment, precedence
/// SetPiece > CounterAttack > DirectPlay > Organized.
std::vector<AttackWindow> classify_attack(const PossessionSegment& segment, const MatchIndex& index,
                                          const PossessionConfig& config = {});

/// Per-frame block-height label of the block defending against one frame's
/// attacking team; nullopt when the block cannot be built.
std::optional<DefenseType> frame_defense_label(std::span<const Point> canonical_defenders,
                                               const PitchSpec& pitch, const PossessionConfig& config = {});

/// Majority of per-frame labels over the segment's frames (ties -> MediumBlock).
DefenseType classify_defense(const PossessionSegment& segment, const MatchIndex& index,
                             const PossessionConfig& config = {});

/// Splits possessions into attack-type windows and labels each with its
/// defence type.
std::vector<PossessionSegment> label_phases(std::span<const PossessionSegment> possessions,
                                            const MatchIndex& index, const PossessionConfig& config = {});

/// Full phase timeline: segment_possessions followed by label_phases.
std::vector<PossessionSegment> build_phases(const MatchIndex& index, const PossessionConfig& config = {});

/// Segment covering (period, t), or nullptr.
const PossessionSegment* segment_at(std::span<const PossessionSegment> segments, Period period, std::int64_t t);

} // namespace runlens
