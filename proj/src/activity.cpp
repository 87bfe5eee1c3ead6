#include "tatraj/activity.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "tatraj/error.hpp"
#include "tatraj/io.hpp"

namespace tatraj {

namespace {

constexpr std::array<std::string_view, kNumCategories> kCodes = {"c01", "c02", "c03", "c04",
                                                                 "c05", "c06", "c07", "c08"};
constexpr std::array<std::string_view, kNumCategories> kLabels = {
    "health emergency", "biological needs", "household management", "personal obligation",
    "working",          "education",        "personal preference",  "others"};

}  // namespace

std::string_view category_code(ActivityCategory c) noexcept { return kCodes[index_of(c)]; }

std::string_view category_label(ActivityCategory c) noexcept { return kLabels[index_of(c)]; }

std::optional<ActivityCategory> parse_category(std::string_view code) noexcept {
  for (std::size_t i = 0; i < kNumCategories; ++i) {
    if (kCodes[i] == code) return category_at(i);
  }
  return std::nullopt;
}

const std::array<ActivityCategory, kNumCategories>& all_categories() noexcept {
  static constexpr std::array<ActivityCategory, kNumCategories> all = {
      ActivityCategory::c01, ActivityCategory::c02, ActivityCategory::c03, ActivityCategory::c04,
      ActivityCategory::c05, ActivityCategory::c06, ActivityCategory::c07, ActivityCategory::c08};
  return all;
}

// --- CategoryMapping -------------------------------------------------------

CategoryMapping::CategoryMapping(std::map<std::string, ActivityCategory, std::less<>> entries)
    : entries_(std::move(entries)) {}

CategoryMapping CategoryMapping::from_csv(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  const std::size_t raw_col = table.column("raw_code");
  const std::size_t cat_col = table.column("category");
  std::map<std::string, ActivityCategory, std::less<>> entries;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const std::string& raw = table.rows[r][raw_col];
    const std::string& cat = table.rows[r][cat_col];
    const std::string where = table.source + ":" + std::to_string(table.lines[r]);
    if (raw.empty()) throw Error(Errc::ParseError, where + ": empty raw_code");
    auto parsed = parse_category(cat);
    if (!parsed) throw Error(Errc::ParseError, where + ": unknown category '" + cat + "'");
    auto [it, inserted] = entries.emplace(raw, *parsed);
    if (!inserted && it->second != *parsed) {
      throw Error(Errc::ParseError, where + ": raw code '" + raw + "' mapped to two categories");
    }
  }
  if (entries.empty()) throw Error(Errc::EmptyInput, table.source + ": mapping has no entries");
  return CategoryMapping(std::move(entries));
}

CategoryMapping CategoryMapping::load(const std::filesystem::path& path) {
  return from_csv(read_text_file(path), path.string());
}

CategoryMapping CategoryMapping::identity() {
  std::map<std::string, ActivityCategory, std::less<>> entries;
  for (auto c : all_categories()) entries.emplace(std::string(category_code(c)), c);
  return CategoryMapping(std::move(entries));
}

ActivityCategory map_raw_activity(std::string_view raw_code, const CategoryMapping& mapping) {
  auto it = mapping.entries().find(raw_code);
  if (it == mapping.entries().end()) {
    throw Error(Errc::UnknownRawCode, "raw activity code '" + std::string(raw_code) + "' is not in the mapping");
  }
  return it->second;
}

// --- Covariates / compositions ----------------------------------------------

double CommunityCovariates::at(std::string_view field) const {
  auto it = values.find(field);
  if (it == values.end()) {
    throw Error(Errc::MissingCovariate, "community '" + community_id + "' has no covariate '" + std::string(field) + "'");
  }
  return it->second;
}

CompositionMatrix::CompositionMatrix(Eigen::MatrixXd values) : values_(std::move(values)) {
  if (values_.rows() == 0 || values_.cols() == 0) throw Error(Errc::OutsideSimplex, "empty composition matrix");
  if (!values_.allFinite() || values_.minCoeff() < 0.0) {
    throw Error(Errc::OutsideSimplex, "composition entries must be finite and non-negative");
  }
  if (max_row_sum_error() > kRowSumTolerance) {
    throw Error(Errc::OutsideSimplex, "composition rows must sum to 1 (max error " +
                                          format_double(max_row_sum_error()) + ")");
  }
}

double CompositionMatrix::max_row_sum_error() const {
  double worst = 0.0;
  for (Eigen::Index r = 0; r < values_.rows(); ++r) {
    worst = std::max(worst, std::abs(values_.row(r).sum() - 1.0));
  }
  return worst;
}

// --- Discretization ----------------------------------------------------------

ActivitySequence diary_to_sequence(std::span<const DiaryEvent> events, const TimeGrid& grid) {
  if (!grid.valid()) throw Error(Errc::ConfigError, "time grid must tile 1440 minutes");
  if (events.empty()) throw Error(Errc::CoverageGap, "no events: minutes [0,1440) uncovered");

  std::vector<DiaryEvent> sorted(events.begin(), events.end());
  for (const auto& e : sorted) {
    if (e.start < 0 || e.end > 1440 || e.start >= e.end) {
      throw Error(Errc::InvalidEvent, "event [" + std::to_string(e.start) + "," + std::to_string(e.end) +
                                          ") must satisfy 0 <= start < end <= 1440 (split events crossing midnight)");
    }
  }
  std::stable_sort(sorted.begin(), sorted.end(), [](const DiaryEvent& a, const DiaryEvent& b) { return a.start < b.start; });

  int covered_to = 0;
  for (const auto& e : sorted) {
    if (e.start < covered_to) {
      throw Error(Errc::OverlapError, "event starting at minute " + std::to_string(e.start) +
                                          " overlaps the previous event ending at " + std::to_string(covered_to));
    }
    if (e.start > covered_to) {
      throw Error(Errc::CoverageGap, "minutes [" + std::to_string(covered_to) + "," + std::to_string(e.start) +
                                         ") are not covered");
    }
    covered_to = e.end;
  }
  if (covered_to < 1440) {
    throw Error(Errc::CoverageGap, "minutes [" + std::to_string(covered_to) + ",1440) are not covered");
  }

  ActivitySequence seq;
  seq.slots.resize(static_cast<std::size_t>(grid.steps));
  std::size_t first = 0;  // first event that can still intersect the current slot
  for (int slot = 0; slot < grid.steps; ++slot) {
    const int lo = slot * grid.slot_minutes;
    const int hi = lo + grid.slot_minutes;
    while (sorted[first].end <= lo) ++first;
    int best_minutes = -1;
    ActivityCategory best = sorted[first].category;
    for (std::size_t i = first; i < sorted.size() && sorted[i].start < hi; ++i) {
      const int minutes = std::min(hi, sorted[i].end) - std::max(lo, sorted[i].start);
      if (minutes > best_minutes) {
        best_minutes = minutes;
        best = sorted[i].category;
      }
    }
    seq.slots[static_cast<std::size_t>(slot)] = best;
  }
  return seq;
}

std::vector<DiaryEvent> sequence_to_events(const ActivitySequence& sequence, const TimeGrid& grid) {
  std::vector<DiaryEvent> events;
  const auto& slots = sequence.slots;
  std::size_t i = 0;
  while (i < slots.size()) {
    std::size_t j = i + 1;
    while (j < slots.size() && slots[j] == slots[i]) ++j;
    events.push_back({static_cast<int>(i) * grid.slot_minutes, static_cast<int>(j) * grid.slot_minutes, slots[i]});
    i = j;
  }
  return events;
}

// --- Diary CSV ---------------------------------------------------------------

std::vector<RawDiaryRow> parse_diary_csv(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  const std::size_t person = table.column("person_id");
  const std::size_t community = table.column("community_id");
  const std::size_t start = table.column("start_min");
  const std::size_t end = table.column("end_min");
  const std::size_t raw = table.column("raw_code");

  std::vector<RawDiaryRow> rows;
  rows.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    RawDiaryRow row;
    row.person_id = table.rows[r][person];
    row.community_id = table.rows[r][community];
    row.start_min = static_cast<int>(table.integer(r, start));
    row.end_min = static_cast<int>(table.integer(r, end));
    row.raw_code = table.rows[r][raw];
    row.line = table.lines[r];
    if (row.person_id.empty() || row.community_id.empty()) {
      throw Error(Errc::ParseError, table.source + ":" + std::to_string(row.line) + ": empty person_id or community_id");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ActivitySequence> sequences_from_rows(std::span<const RawDiaryRow> rows, const CategoryMapping& mapping,
                                                  const TimeGrid& grid) {
  // (community, person) -> events, keeping first-appearance order of persons.
  std::map<std::string, std::vector<std::string>, std::less<>> persons_by_community;
  std::map<std::pair<std::string, std::string>, std::vector<DiaryEvent>> events;
  for (const auto& row : rows) {
    auto key = std::make_pair(row.community_id, row.person_id);
    auto [it, inserted] = events.try_emplace(key);
    if (inserted) persons_by_community[row.community_id].push_back(row.person_id);
    ActivityCategory c{};
    try {
      c = map_raw_activity(row.raw_code, mapping);
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(row.line) + ": " + e.what());
    }
    it->second.push_back({row.start_min, row.end_min, c});
  }

  std::vector<ActivitySequence> out;
  for (const auto& [community, persons] : persons_by_community) {
    for (const auto& person : persons) {
      const auto& ev = events.at({community, person});
      ActivitySequence seq;
      try {
        seq = diary_to_sequence(ev, grid);
      } catch (const Error& e) {
        throw Error(e.code(), "diary of person '" + person + "' in community '" + community + "': " + e.what());
      }
      seq.person_id = person;
      seq.community_id = community;
      out.push_back(std::move(seq));
    }
  }
  return out;
}

std::string diary_csv(std::span<const ActivitySequence> sequences,
                      const std::array<std::string, kNumCategories>& raw_code_for_category, const TimeGrid& grid) {
  std::string out = "person_id,community_id,start_min,end_min,raw_code\n";
  for (const auto& seq : sequences) {
    for (const auto& e : sequence_to_events(seq, grid)) {
      out += seq.person_id + "," + seq.community_id + "," + std::to_string(e.start) + "," + std::to_string(e.end) + "," +
             raw_code_for_category[index_of(e.category)] + "\n";
    }
  }
  return out;
}

// --- Covariates CSV ----------------------------------------------------------

std::vector<CommunityCovariates> parse_covariates_csv(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  const std::size_t id_col = table.column("community_id");
  for (const auto& h : table.header) {
    if (h == "community_id") continue;
    if (std::find(kCovariateFields.begin(), kCovariateFields.end(), h) == kCovariateFields.end()) {
      throw Error(Errc::ParseError, table.source + ": unknown covariate column '" + h + "'");
    }
  }
  std::vector<std::size_t> cols;
  for (auto f : kCovariateFields) cols.push_back(table.column(f));

  std::vector<CommunityCovariates> out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    CommunityCovariates row;
    row.community_id = table.rows[r][id_col];
    const std::string where = table.source + ":" + std::to_string(table.lines[r]);
    if (row.community_id.empty()) throw Error(Errc::ParseError, where + ": empty community_id");
    for (const auto& other : out) {
      if (other.community_id == row.community_id) {
        throw Error(Errc::ParseError, where + ": duplicate community '" + row.community_id + "'");
      }
    }
    for (std::size_t f = 0; f < kCovariateFields.size(); ++f) {
      const double v = table.number(r, cols[f]);
      if (!std::isfinite(v)) {
        throw Error(Errc::ParseError, where + ": covariate '" + std::string(kCovariateFields[f]) + "' is not finite");
      }
      row.values.emplace(std::string(kCovariateFields[f]), v);
    }
    for (auto share : kBuildingShareFields) {
      const double v = row.values.at(std::string(share));
      if (v < 0.0 || v > 1.0) {
        throw Error(Errc::ParseError, where + ": building share '" + std::string(share) + "' outside [0,1]");
      }
    }
    out.push_back(std::move(row));
  }
  return out;
}

std::string covariates_csv(std::span<const CommunityCovariates> rows) {
  std::string out = "community_id";
  for (auto f : kCovariateFields) out += "," + std::string(f);
  out += "\n";
  for (const auto& row : rows) {
    out += row.community_id;
    for (auto f : kCovariateFields) out += "," + format_double(row.at(f));
    out += "\n";
  }
  return out;
}

// --- Composition CSV ---------------------------------------------------------

std::string composition_csv(const CompositionMatrix& matrix) {
  std::string out = "step";
  for (Eigen::Index c = 0; c < matrix.categories(); ++c) {
    out += ",";
    out += c < static_cast<Eigen::Index>(kNumCategories) ? std::string(kCodes[static_cast<std::size_t>(c)])
                                                         : "c" + std::to_string(c + 1);
  }
  out += "\n";
  for (Eigen::Index t = 0; t < matrix.steps(); ++t) {
    out += std::to_string(t + 1);
    for (Eigen::Index c = 0; c < matrix.categories(); ++c) out += "," + format_double(matrix(t, c));
    out += "\n";
  }
  return out;
}

CompositionMatrix parse_composition_csv(std::string_view text, std::string_view source) {
  const CsvTable table = parse_csv(text, source);
  const std::size_t step_col = table.column("step");
  std::vector<std::size_t> cols;
  for (auto code : kCodes) cols.push_back(table.column(code));
  if (table.rows.empty()) throw Error(Errc::EmptyInput, table.source + ": no profile rows");
  Eigen::MatrixXd values(static_cast<Eigen::Index>(table.rows.size()), static_cast<Eigen::Index>(kNumCategories));
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (table.integer(r, step_col) != static_cast<long long>(r + 1)) {
      throw Error(Errc::ParseError, table.source + ":" + std::to_string(table.lines[r]) + ": steps must be 1..n in order");
    }
    for (std::size_t c = 0; c < kNumCategories; ++c) {
      values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = table.number(r, cols[c]);
    }
  }
  return CompositionMatrix(std::move(values));
}

}  // namespace tatraj
