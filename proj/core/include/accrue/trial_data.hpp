#ifndef ACCRUE_TRIAL_DATA_HPP_
#define ACCRUE_TRIAL_DATA_HPP_

#include <iosfwd>
#include <numeric>
#include <string>
#include <vector>

namespace accrue {

// One centre's observed daily recruitment.  counts[t] is the number
// recruited on local day t, i.e. global day initiation_day + t.
struct RecruitmentSeries {
  std::string centre_id;
  int initiation_day = 0;
  std::vector<long> counts;

  int tau() const { return static_cast<int>(counts.size()); }
  long total() const {
    return std::accumulate(counts.begin(), counts.end(), 0L);
  }
};

// All centres frozen at a census day, plus the planned future initiations
// and the recruitment target.  Immutable by convention after validate().
struct TrialSnapshot {
  int census_day = 0;
  std::vector<RecruitmentSeries> centres;
  std::vector<int> planned_initiations;
  long target = 0;
  bool deterministic_first_recruitment = false;

  long total_recruits() const;
  // mean open duration across centres; the normalisation horizon
  double mean_open_duration() const;
  // throws ValidationError on any invariant violation
  void validate() const;
};

struct CountSplit {
  long x1 = 0;
  long x2 = 0;
  int dropped_middle_days = 0;
};

// Aggregate first-half/second-half counts across centres; centres open an
// odd number of days drop their middle-day observation, centres with
// tau < 2 contribute nothing.
CountSplit split_counts(const std::vector<RecruitmentSeries>& series);

// Read a snapshot from a CSV (either `centre_id,day,count` long layout or
// `centre_id,event_day` event layout, detected from the header) and a JSON
// metadata file.
TrialSnapshot ingest_csv(const std::string& csv_path,
                         const std::string& meta_path);

// Write the long-layout CSV and the metadata JSON; ingest(export(s)) == s.
void export_csv(const TrialSnapshot& snapshot, const std::string& csv_path,
                const std::string& meta_path);

// Freeze an earlier census: counts after the new census day are dropped,
// and centres not yet open become planned initiations.
TrialSnapshot truncate_snapshot(const TrialSnapshot& snapshot, int census_day);

// Copy for model fitting: when deterministic_first_recruitment is set, the
// day-0 count of every centre is reduced by one (the deterministic recruit
// carries no information about the rate).
TrialSnapshot snapshot_for_fitting(const TrialSnapshot& snapshot);

}  // namespace accrue

#endif  // ACCRUE_TRIAL_DATA_HPP_
