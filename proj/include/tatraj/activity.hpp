#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace tatraj {

inline constexpr std::size_t kNumCategories = 8;

// The eight activity classes, in the order used for every vector and
// matrix index.
enum class ActivityCategory : std::uint8_t {
  c01 = 0,  // health emergency
  c02,      // biological needs (eating, sleeping)
  c03,      // household management
  c04,      // personal obligation (shopping, banking, childcare)
  c05,      // working
  c06,      // education
  c07,      // personal preference (leisure)
  c08,      // others (travel)
};

inline constexpr std::size_t index_of(ActivityCategory c) noexcept { return static_cast<std::size_t>(c); }
inline constexpr ActivityCategory category_at(std::size_t i) noexcept { return static_cast<ActivityCategory>(i); }

std::string_view category_code(ActivityCategory c) noexcept;
std::string_view category_label(ActivityCategory c) noexcept;
std::optional<ActivityCategory> parse_category(std::string_view code) noexcept;
const std::array<ActivityCategory, kNumCategories>& all_categories() noexcept;

struct TimeGrid {
  int steps = 96;
  int slot_minutes = 15;

  constexpr bool valid() const noexcept { return steps > 1 && slot_minutes > 0 && steps * slot_minutes == 1440; }
};

inline constexpr TimeGrid kDayGrid{};

// One raw diary row after category mapping. Minutes since midnight,
// half-open [start, end).
struct DiaryEvent {
  int start = 0;
  int end = 0;
  ActivityCategory category = ActivityCategory::c01;
};

struct ActivitySequence {
  std::string person_id;
  std::string community_id;
  std::vector<ActivityCategory> slots;
};

class CategoryMapping {
 public:
  CategoryMapping() = default;
  explicit CategoryMapping(std::map<std::string, ActivityCategory, std::less<>> entries);

  // Two-column CSV: raw_code,category.
  static CategoryMapping from_csv(std::string_view text, std::string_view source = "<mapping>");
  static CategoryMapping load(const std::filesystem::path& path);
  // Maps "c01".."c08" onto themselves.
  static CategoryMapping identity();

  const std::map<std::string, ActivityCategory, std::less<>>& entries() const noexcept { return entries_; }
  bool contains(std::string_view raw) const { return entries_.find(raw) != entries_.end(); }

 private:
  std::map<std::string, ActivityCategory, std::less<>> entries_;
};

// Covariate columns, in the order they are written and correlated.
inline constexpr std::array<std::string_view, 14> kCovariateFields = {
    "population_density", "diversity",   "racial_segregation", "median_age",    "male_female_ratio",
    "disabilities",       "household_median_income", "unemployment", "education", "transportation",
    "institutional",      "residential", "mercantile",          "business"};

inline constexpr std::array<std::string_view, 4> kBuildingShareFields = {"institutional", "residential", "mercantile",
                                                                          "business"};

struct CommunityCovariates {
  std::string community_id;
  std::map<std::string, double, std::less<>> values;

  double at(std::string_view field) const;
};

// Rows are time steps, columns categories. Entries are non-negative and
// each row sums to one.
class CompositionMatrix {
 public:
  static constexpr double kRowSumTolerance = 1e-9;

  CompositionMatrix() = default;
  explicit CompositionMatrix(Eigen::MatrixXd values);

  Eigen::Index steps() const noexcept { return values_.rows(); }
  Eigen::Index categories() const noexcept { return values_.cols(); }
  const Eigen::MatrixXd& values() const noexcept { return values_; }
  double operator()(Eigen::Index step, Eigen::Index category) const { return values_(step, category); }

  bool strictly_positive() const noexcept { return values_.size() > 0 && values_.minCoeff() > 0.0; }
  // Largest |row sum - 1| over all rows.
  double max_row_sum_error() const;

 private:
  Eigen::MatrixXd values_;
};

ActivityCategory map_raw_activity(std::string_view raw_code, const CategoryMapping& mapping);

// Labels each slot with the category covering most of its minutes. Ties go
// to the event that starts first.
ActivitySequence diary_to_sequence(std::span<const DiaryEvent> events, const TimeGrid& grid = kDayGrid);

// Merges runs of equal slots into slot-aligned events.
std::vector<DiaryEvent> sequence_to_events(const ActivitySequence& sequence, const TimeGrid& grid = kDayGrid);

// A diary CSV row before discretization.
struct RawDiaryRow {
  std::string person_id;
  std::string community_id;
  int start_min = 0;
  int end_min = 0;
  std::string raw_code;
  std::size_t line = 0;
};

// Columns person_id, community_id, start_min, end_min, raw_code; an optional
// weight column is accepted and ignored.
std::vector<RawDiaryRow> parse_diary_csv(std::string_view text, std::string_view source = "<diaries>");

// Groups rows by (community, person), maps codes and discretizes. Output is
// ordered by community id, then first appearance of the person.
std::vector<ActivitySequence> sequences_from_rows(std::span<const RawDiaryRow> rows, const CategoryMapping& mapping,
                                                  const TimeGrid& grid = kDayGrid);

std::string diary_csv(std::span<const ActivitySequence> sequences,
                      const std::array<std::string, kNumCategories>& raw_code_for_category,
                      const TimeGrid& grid = kDayGrid);

std::vector<CommunityCovariates> parse_covariates_csv(std::string_view text, std::string_view source = "<covariates>");
std::string covariates_csv(std::span<const CommunityCovariates> rows);

// Header step,c01..c08; step is 1-based.
std::string composition_csv(const CompositionMatrix& matrix);
CompositionMatrix parse_composition_csv(std::string_view text, std::string_view source = "<profile>");

}  // namespace tatraj
