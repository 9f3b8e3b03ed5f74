#include "accrue/trial_data.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "accrue/errors.hpp"
#include "json.hpp"

namespace accrue {

long TrialSnapshot::total_recruits() const {
  long total = 0;
  for (const auto& c : centres) total += c.total();
  return total;
}

double TrialSnapshot::mean_open_duration() const {
  if (centres.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& c : centres) sum += c.tau();
  return sum / static_cast<double>(centres.size());
}

void TrialSnapshot::validate() const {
  if (census_day < 0) throw ValidationError("census_day must be >= 0");
  if (target < 0) throw ValidationError("target must be >= 0");
  for (const auto& c : centres) {
    if (c.initiation_day < 0)
      throw ValidationError("centre " + c.centre_id +
                            ": initiation_day must be >= 0");
    if (c.initiation_day + c.tau() > census_day)
      throw ValidationError("centre " + c.centre_id +
                            ": counts extend past the census day");
    for (long n : c.counts)
      if (n < 0)
        throw ValidationError("centre " + c.centre_id + ": negative count");
  }
  for (int day : planned_initiations)
    if (day <= census_day)
      throw ValidationError("planned initiation on day " +
                            std::to_string(day) +
                            " is not after the census day");
}

CountSplit split_counts(const std::vector<RecruitmentSeries>& series) {
  CountSplit split;
  bool any = false;
  for (const auto& c : series) {
    int tau = c.tau();
    if (tau < 2) continue;
    any = true;
    int half = tau / 2;
    if (tau % 2 == 1) ++split.dropped_middle_days;
    for (int t = 0; t < half; ++t) split.x1 += c.counts[t];
    for (int t = tau - half; t < tau; ++t) split.x2 += c.counts[t];
  }
  if (!any)
    throw InsufficientDataError(
        "split_counts: no centre has been open for at least 2 days");
  return split;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

long parse_long(const std::string& s, const char* what, long line_no) {
  try {
    size_t pos = 0;
    long v = std::stol(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("cannot parse ") + what + " '" + s + "'",
                     line_no);
  }
}

}  // namespace

TrialSnapshot ingest_csv(const std::string& csv_path,
                         const std::string& meta_path) {
  std::ifstream meta_in(meta_path);
  if (!meta_in) throw ParseError("cannot open metadata file " + meta_path);
  nlohmann::json meta;
  try {
    meta_in >> meta;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("invalid metadata JSON: " + std::string(e.what()));
  }

  TrialSnapshot snap;
  snap.census_day = meta.at("census_day").get<int>();
  snap.target = meta.value("target", 0L);
  if (meta.contains("planned_initiations"))
    snap.planned_initiations =
        meta["planned_initiations"].get<std::vector<int>>();
  snap.deterministic_first_recruitment =
      meta.value("deterministic_first_recruitment", false);
  std::map<std::string, int> initiations;
  if (meta.contains("initiations"))
    initiations = meta["initiations"].get<std::map<std::string, int>>();

  std::ifstream in(csv_path);
  if (!in) throw ParseError("cannot open CSV file " + csv_path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV file", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();

  bool long_format;
  if (line == "centre_id,day,count") {
    long_format = true;
  } else if (line == "centre_id,event_day") {
    long_format = false;
  } else {
    throw ParseError("unrecognised CSV header '" + line + "'", 1);
  }

  // centre -> (day -> count); insertion order of centres is preserved
  std::vector<std::string> order;
  std::map<std::string, std::map<int, long>> days;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_line(line);
    if (fields.size() != (long_format ? 3u : 2u))
      throw ParseError("wrong number of fields", line_no);
    const std::string& id = fields[0];
    if (id.empty()) throw ParseError("empty centre_id", line_no);
    if (!days.count(id)) order.push_back(id);
    auto& centre_days = days[id];
    if (long_format) {
      int day = static_cast<int>(parse_long(fields[1], "day", line_no));
      long count = parse_long(fields[2], "count", line_no);
      if (count < 0)
        throw ValidationError("negative count at line " +
                              std::to_string(line_no));
      if (day < 0)
        throw ValidationError("negative day at line " +
                              std::to_string(line_no));
      if (day >= snap.census_day)
        throw ValidationError("day " + std::to_string(day) +
                              " at line " + std::to_string(line_no) +
                              " is not before the census day");
      if (!centre_days.emplace(day, count).second)
        throw ValidationError("duplicate (centre, day) at line " +
                              std::to_string(line_no));
    } else {
      int day = static_cast<int>(parse_long(fields[1], "event_day", line_no));
      if (day < 0)
        throw ValidationError("negative event_day at line " +
                              std::to_string(line_no));
      if (day >= snap.census_day)
        throw ValidationError("event_day " + std::to_string(day) +
                              " at line " + std::to_string(line_no) +
                              " is not before the census day");
      centre_days[day] += 1;
    }
  }

  for (const auto& id : order) {
    const auto& centre_days = days[id];
    RecruitmentSeries series;
    series.centre_id = id;
    if (auto it = initiations.find(id); it != initiations.end()) {
      series.initiation_day = it->second;
    } else if (long_format) {
      series.initiation_day = centre_days.begin()->first;
    } else {
      // event layout: initiation defaults to the first event when the
      // deterministic-first-recruit convention is in use, day 0 otherwise
      series.initiation_day = snap.deterministic_first_recruitment
                                  ? centre_days.begin()->first
                                  : 0;
    }
    series.counts.assign(snap.census_day - series.initiation_day, 0);
    for (const auto& [day, count] : centre_days) {
      if (day < series.initiation_day)
        throw ValidationError("centre " + id + ": day " +
                              std::to_string(day) +
                              " is before the initiation day");
      series.counts[day - series.initiation_day] = count;
    }
    snap.centres.push_back(std::move(series));
  }
  snap.validate();
  return snap;
}

void export_csv(const TrialSnapshot& snapshot, const std::string& csv_path,
                const std::string& meta_path) {
  std::ofstream out(csv_path);
  if (!out) throw std::runtime_error("cannot write " + csv_path);
  out << "centre_id,day,count\n";
  for (const auto& c : snapshot.centres)
    for (int t = 0; t < c.tau(); ++t)
      out << c.centre_id << ',' << (c.initiation_day + t) << ','
          << c.counts[t] << '\n';

  nlohmann::json meta;
  meta["census_day"] = snapshot.census_day;
  meta["target"] = snapshot.target;
  meta["planned_initiations"] = snapshot.planned_initiations;
  meta["deterministic_first_recruitment"] =
      snapshot.deterministic_first_recruitment;
  nlohmann::json inits = nlohmann::json::object();
  for (const auto& c : snapshot.centres)
    inits[c.centre_id] = c.initiation_day;
  meta["initiations"] = inits;
  std::ofstream mout(meta_path);
  if (!mout) throw std::runtime_error("cannot write " + meta_path);
  mout << meta.dump(2) << '\n';
}

TrialSnapshot truncate_snapshot(const TrialSnapshot& snapshot,
                                int census_day) {
  if (census_day > snapshot.census_day)
    throw ValidationError("cannot truncate to a later census day");
  TrialSnapshot out;
  out.census_day = census_day;
  out.target = snapshot.target;
  out.deterministic_first_recruitment =
      snapshot.deterministic_first_recruitment;
  for (const auto& c : snapshot.centres) {
    if (c.initiation_day > census_day) {
      out.planned_initiations.push_back(c.initiation_day);
      continue;
    }
    RecruitmentSeries series;
    series.centre_id = c.centre_id;
    series.initiation_day = c.initiation_day;
    int tau = std::min(c.tau(), census_day - c.initiation_day);
    series.counts.assign(c.counts.begin(), c.counts.begin() + tau);
    out.centres.push_back(std::move(series));
  }
  for (int day : snapshot.planned_initiations)
    out.planned_initiations.push_back(day);
  std::sort(out.planned_initiations.begin(), out.planned_initiations.end());
  out.validate();
  return out;
}

TrialSnapshot snapshot_for_fitting(const TrialSnapshot& snapshot) {
  if (!snapshot.deterministic_first_recruitment) return snapshot;
  TrialSnapshot out = snapshot;
  out.deterministic_first_recruitment = false;  // already applied
  for (auto& c : out.centres) {
    if (c.counts.empty()) continue;
    if (c.counts[0] < 1)
      throw ValidationError(
          "centre " + c.centre_id +
          ": deterministic first recruitment flagged but day-0 count is 0");
    c.counts[0] -= 1;
  }
  return out;
}

}  // namespace accrue
