#include "rmab/data_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "rmab/dates.hpp"
#include "rmab/errors.hpp"

namespace rmab {

namespace {

using nlohmann::json;

// Shortest decimal representation that parses back to the same double.
std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::ofstream open_out(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

std::ofstream open_append(const std::string& path) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::filesystem::create_directories(p.parent_path());
  }
  std::ofstream out(path, std::ios::binary | std::ios::app);
  if (!out) throw DataError("cannot open for writing: " + path);
  return out;
}

// Plain comma-separated CSV with a required header row. The formats here
// never contain embedded commas, so no quoting is supported.
struct Csv {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // rows[i] is file line i + 2

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
  int require_column(const std::string& name, const std::string& file) const {
    const int c = column(name);
    if (c < 0) {
      throw DataError(file + ": missing required column \"" + name + "\"");
    }
    return c;
  }
};

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  for (const char c : line) {
    if (c == ',') {
      fields.push_back(field);
      field.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  fields.push_back(field);
  return fields;
}

Csv read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  Csv csv;
  std::string line;
  if (!std::getline(in, line)) throw DataError(path + ": empty file");
  csv.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    csv.rows.push_back(split_csv_line(line));
  }
  return csv;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool parse_int(const std::string& s, long* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

bool parse_state(const std::string& s, State* out) {
  if (s == "NE" || s == "0") {
    *out = State::NotEngaging;
    return true;
  }
  if (s == "E" || s == "1") {
    *out = State::Engaging;
    return true;
  }
  return false;
}

bool parse_action(const std::string& s, Action* out) {
  if (s == "p") {
    *out = Action::Passive;
    return true;
  }
  if (s == "a") {
    *out = Action::Active;
    return true;
  }
  return false;
}

json model_matrix_to_json(const TransitionModel& m, int action) {
  json rows = json::array();
  for (int s = 0; s < 2; ++s) {
    json row = json::array();
    for (int t = 0; t < 2; ++t) {
      if (m.row_missing[action][s]) {
        row.push_back(nullptr);
      } else {
        row.push_back(m.prob[action][s][t]);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void model_matrix_from_json(const json& rows, TransitionModel* m, int action) {
  for (int s = 0; s < 2; ++s) {
    for (int t = 0; t < 2; ++t) {
      const json& v = rows.at(s).at(t);
      m->prob[action][s][t] = v.is_null()
                                  ? std::numeric_limits<double>::quiet_NaN()
                                  : v.get<double>();
    }
  }
}

json flags_to_json(const std::array<std::array<bool, 2>, 2>& flags) {
  return json::array({json::array({flags[0][0], flags[0][1]}),
                      json::array({flags[1][0], flags[1][1]})});
}

void flags_from_json(const json& j, std::array<std::array<bool, 2>, 2>* flags) {
  for (int a = 0; a < 2; ++a) {
    for (int s = 0; s < 2; ++s) (*flags)[a][s] = j.at(a).at(s).get<bool>();
  }
}

json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError(path + ": invalid JSON: " + e.what());
  }
  return j;
}

}  // namespace

std::string format_diagnostic(const Diagnostic& d) {
  std::ostringstream os;
  os << d.file << ":" << d.line << ": " << d.message;
  return os.str();
}

std::vector<ListeningRecord> read_listening_csv(
    const std::string& path, std::vector<Diagnostic>* diagnostics) {
  const Csv csv = read_csv(path);
  const int c_id = csv.require_column("beneficiary_id", path);
  const int c_ts = csv.require_column("timestamp", path);
  const int c_dur = csv.require_column("duration_listened", path);

  std::vector<ListeningRecord> records;
  records.reserve(csv.rows.size());
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    const int line = static_cast<int>(i) + 2;
    const auto reject = [&](const std::string& msg) {
      if (diagnostics) diagnostics->push_back({path, line, msg});
    };
    if (row.size() != csv.header.size()) {
      reject("wrong field count");
      continue;
    }
    ListeningRecord rec;
    rec.beneficiary_id = row[c_id];
    const std::string& ts = row[c_ts];
    // Accept a bare date or a date followed by a T-separated time part.
    if (ts.size() < 10 || (ts.size() > 10 && ts[10] != 'T')) {
      reject("malformed timestamp: \"" + ts + "\"");
      continue;
    }
    try {
      rec.day = parse_iso_date(ts.substr(0, 10));
    } catch (const DataError& e) {
      reject(e.what());
      continue;
    }
    if (!parse_double(row[c_dur], &rec.duration_seconds) ||
        rec.duration_seconds < 0.0) {
      reject("invalid duration: \"" + row[c_dur] + "\"");
      continue;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<State> derive_weekly_states(
    std::span<const ListeningRecord> records, std::int64_t week_start_day,
    int n_weeks) {
  std::vector<State> weeks(n_weeks, State::NotEngaging);
  for (const ListeningRecord& rec : records) {
    const std::int64_t offset = rec.day - week_start_day;
    if (offset < 0) continue;
    const std::int64_t w = offset / 7;
    if (w >= n_weeks) continue;
    if (rec.duration_seconds > 30.0) weeks[w] = State::Engaging;
  }
  return weeks;
}

TrainingData load_training_data(const std::string& features_path,
                                const std::string& trajectory_path,
                                std::vector<Diagnostic>* diagnostics) {
  const Csv fcsv = read_csv(features_path);
  const int c_id = fcsv.require_column("beneficiary_id", features_path);
  const int c_date = fcsv.require_column("enrollment_date", features_path);

  std::vector<int> feature_cols;
  for (std::size_t c = 0; c < fcsv.header.size(); ++c) {
    if (static_cast<int>(c) != c_id && static_cast<int>(c) != c_date) {
      feature_cols.push_back(static_cast<int>(c));
    }
  }

  // Column typing: numeric when every non-rejected value parses as a
  // double, otherwise categorical and one-hot encoded with categories in
  // lexicographic order.
  std::vector<bool> numeric(feature_cols.size(), true);
  std::vector<std::set<std::string>> categories(feature_cols.size());
  for (const auto& row : fcsv.rows) {
    if (row.size() != fcsv.header.size()) continue;
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      double v;
      if (!parse_double(row[feature_cols[f]], &v)) numeric[f] = false;
      categories[f].insert(row[feature_cols[f]]);
    }
  }

  TrainingData data;
  std::vector<std::pair<std::size_t, std::size_t>> slots;  // (offset, width)
  for (std::size_t f = 0; f < feature_cols.size(); ++f) {
    const std::string& name = fcsv.header[feature_cols[f]];
    slots.emplace_back(data.feature_names.size(),
                       numeric[f] ? 1 : categories[f].size());
    if (numeric[f]) {
      data.feature_names.push_back(name);
    } else {
      for (const std::string& cat : categories[f]) {
        data.feature_names.push_back(name + "=" + cat);
      }
    }
  }

  std::map<std::string, std::size_t> index_by_id;
  for (std::size_t i = 0; i < fcsv.rows.size(); ++i) {
    const auto& row = fcsv.rows[i];
    const int line = static_cast<int>(i) + 2;
    const auto reject = [&](const std::string& msg) {
      if (diagnostics) diagnostics->push_back({features_path, line, msg});
    };
    if (row.size() != fcsv.header.size()) {
      reject("wrong field count");
      continue;
    }
    const std::string& id = row[c_id];
    if (id.empty()) {
      reject("empty beneficiary_id");
      continue;
    }
    if (index_by_id.count(id)) {
      reject("duplicate beneficiary_id \"" + id + "\"");
      continue;
    }
    Beneficiary b;
    b.id = id;
    try {
      b.enrollment_day = parse_iso_date(row[c_date]);
    } catch (const DataError& e) {
      reject(e.what());
      continue;
    }
    b.features.assign(data.feature_names.size(), 0.0);
    bool ok = true;
    for (std::size_t f = 0; f < feature_cols.size(); ++f) {
      const std::string& value = row[feature_cols[f]];
      if (numeric[f]) {
        double v;
        if (!parse_double(value, &v)) {
          reject("non-numeric value \"" + value + "\" in numeric column \"" +
                 fcsv.header[feature_cols[f]] + "\"");
          ok = false;
          break;
        }
        b.features[slots[f].first] = v;
      } else {
        const auto it = categories[f].find(value);
        const std::size_t pos =
            static_cast<std::size_t>(std::distance(categories[f].begin(), it));
        b.features[slots[f].first + pos] = 1.0;
      }
    }
    if (!ok) continue;
    index_by_id[id] = data.beneficiaries.size();
    data.beneficiaries.push_back(std::move(b));
  }

  const Csv tcsv = read_csv(trajectory_path);
  const int t_id = tcsv.require_column("beneficiary_id", trajectory_path);
  const int t_week = tcsv.require_column("week_index", trajectory_path);
  const int t_state = tcsv.require_column("state", trajectory_path);
  const int t_action = tcsv.require_column("action", trajectory_path);
  const int t_next = tcsv.require_column("next_state", trajectory_path);

  std::vector<std::vector<std::pair<long, Transition>>> staged(
      data.beneficiaries.size());
  for (std::size_t i = 0; i < tcsv.rows.size(); ++i) {
    const auto& row = tcsv.rows[i];
    const int line = static_cast<int>(i) + 2;
    const auto reject = [&](const std::string& msg) {
      if (diagnostics) diagnostics->push_back({trajectory_path, line, msg});
    };
    if (row.size() != tcsv.header.size()) {
      reject("wrong field count");
      continue;
    }
    const auto it = index_by_id.find(row[t_id]);
    if (it == index_by_id.end()) {
      reject("beneficiary_id \"" + row[t_id] + "\" has no features row");
      continue;
    }
    long week;
    if (!parse_int(row[t_week], &week) || week < 0) {
      reject("invalid week_index \"" + row[t_week] + "\"");
      continue;
    }
    Transition t;
    if (!parse_state(row[t_state], &t.from)) {
      reject("unknown state symbol \"" + row[t_state] + "\"");
      continue;
    }
    if (!parse_action(row[t_action], &t.action)) {
      reject("unknown action symbol \"" + row[t_action] + "\"");
      continue;
    }
    if (!parse_state(row[t_next], &t.to)) {
      reject("unknown state symbol \"" + row[t_next] + "\"");
      continue;
    }
    staged[it->second].emplace_back(week, t);
  }
  for (std::size_t i = 0; i < staged.size(); ++i) {
    auto& rows = staged[i];
    std::stable_sort(rows.begin(), rows.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& trajectory = data.beneficiaries[i].trajectory;
    trajectory.reserve(rows.size());
    for (const auto& [week, t] : rows) trajectory.push_back(t);
  }
  return data;
}

void write_model_json(const ClusterModelSet& set,
                      const std::vector<std::string>& feature_names,
                      const std::string& path) {
  json j;
  j["format"] = "cluster-model-set";
  j["method"] = to_string(set.method);
  j["k"] = set.k;
  j["feature_names"] = feature_names;

  json clusters = json::array();
  for (int c = 0; c < set.k; ++c) {
    const TransitionModel& m = set.models[c];
    json jc;
    jc["p_passive"] = model_matrix_to_json(m, 0);
    jc["p_active"] = model_matrix_to_json(m, 1);
    jc["missing"] = flags_to_json(m.row_missing);
    jc["imputed"] = flags_to_json(m.row_imputed);
    jc["size"] = set.sizes[c];
    clusters.push_back(jc);
  }
  j["clusters"] = clusters;
  j["centers"] = set.centers;

  switch (set.method) {
    case ClusterMethod::FO:
      j["scaler"] = {{"mean", set.scaler.mean}, {"sd", set.scaler.sd}};
      break;
    case ClusterMethod::FAP:
    case ClusterMethod::FPP:
      j["rules"] = {{"edges", set.rules.edges}};
      j["bucket_keys"] = set.bucket_keys;
      j["bucket_to_cluster"] = set.bucket_to_cluster;
      break;
    case ClusterMethod::PPF: {
      json trees = json::array();
      for (const auto& tree : set.forest.trees()) {
        json jt = json::array();
        for (const auto& n : tree) {
          jt.push_back(json::array(
              {n.feature, n.threshold, n.left, n.right, n.label}));
        }
        trees.push_back(jt);
      }
      j["forest"] = {{"n_labels", set.forest.n_labels()}, {"trees", trees}};
      break;
    }
  }

  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

LoadedModel read_model_json(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.contains("format") || j["format"] != "cluster-model-set") {
    throw DataError(path + ": not a cluster model file");
  }
  LoadedModel loaded;
  ClusterModelSet& set = loaded.set;
  try {
    set.method = cluster_method_from_string(j.at("method").get<std::string>());
    set.k = j.at("k").get<int>();
    loaded.feature_names =
        j.at("feature_names").get<std::vector<std::string>>();
    for (const json& jc : j.at("clusters")) {
      TransitionModel m;
      model_matrix_from_json(jc.at("p_passive"), &m, 0);
      model_matrix_from_json(jc.at("p_active"), &m, 1);
      flags_from_json(jc.at("missing"), &m.row_missing);
      flags_from_json(jc.at("imputed"), &m.row_imputed);
      set.models.push_back(m);
      set.sizes.push_back(jc.at("size").get<std::size_t>());
    }
    set.centers = j.at("centers").get<std::vector<std::vector<double>>>();
    switch (set.method) {
      case ClusterMethod::FO:
        set.scaler.mean = j.at("scaler").at("mean").get<std::vector<double>>();
        set.scaler.sd = j.at("scaler").at("sd").get<std::vector<double>>();
        break;
      case ClusterMethod::FAP:
      case ClusterMethod::FPP:
        set.rules.edges =
            j.at("rules").at("edges").get<std::vector<std::vector<double>>>();
        set.bucket_keys =
            j.at("bucket_keys").get<std::vector<std::vector<int>>>();
        set.bucket_to_cluster =
            j.at("bucket_to_cluster").get<std::vector<int>>();
        break;
      case ClusterMethod::PPF: {
        std::vector<std::vector<RandomForest::Node>> trees;
        for (const json& jt : j.at("forest").at("trees")) {
          std::vector<RandomForest::Node> tree;
          tree.reserve(jt.size());
          for (const json& jn : jt) {
            RandomForest::Node n;
            n.feature = jn.at(0).get<int>();
            n.threshold = jn.at(1).get<double>();
            n.left = jn.at(2).get<int>();
            n.right = jn.at(3).get<int>();
            n.label = jn.at(4).get<int>();
            tree.push_back(n);
          }
          trees.push_back(std::move(tree));
        }
        set.forest.restore(std::move(trees),
                           j.at("forest").at("n_labels").get<int>());
        break;
      }
    }
  } catch (const json::exception& e) {
    throw DataError(path + ": malformed model JSON: " + e.what());
  }
  if (static_cast<int>(set.models.size()) != set.k) {
    throw DataError(path + ": cluster count does not match k");
  }
  return loaded;
}

void write_index_table_csv(const IndexTable& table, const std::string& path) {
  std::ofstream out = open_out(path);
  out << "cluster_id,state,whittle_index,beta\n";
  for (int c = 0; c < table.clusters(); ++c) {
    for (int s = 0; s < 2; ++s) {
      out << c << "," << to_string(state_from_index(s)) << ","
          << fmt_double(table.values[c][s]) << "," << fmt_double(table.beta)
          << "\n";
    }
  }
}

IndexTable read_index_table_csv(const std::string& path) {
  const Csv csv = read_csv(path);
  const int c_cluster = csv.require_column("cluster_id", path);
  const int c_state = csv.require_column("state", path);
  const int c_index = csv.require_column("whittle_index", path);
  const int c_beta = csv.require_column("beta", path);

  IndexTable table;
  std::map<int, std::array<std::optional<double>, 2>> entries;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    const int line = static_cast<int>(i) + 2;
    long cluster;
    State s;
    double value, beta;
    if (row.size() != csv.header.size() ||
        !parse_int(row[c_cluster], &cluster) || cluster < 0 ||
        !parse_state(row[c_state], &s) || !parse_double(row[c_index], &value) ||
        !parse_double(row[c_beta], &beta)) {
      throw DataError(path + ":" + std::to_string(line) + ": bad table row");
    }
    entries[static_cast<int>(cluster)][idx(s)] = value;
    table.beta = beta;
  }
  int expected = 0;
  for (const auto& [cluster, pair] : entries) {
    if (cluster != expected++ || !pair[0] || !pair[1]) {
      throw DataError(path + ": table must cover both states of clusters 0.." +
                      std::to_string(entries.size() - 1));
    }
    table.values.push_back({*pair[0], *pair[1]});
  }
  return table;
}

std::vector<CohortRow> read_cohort_csv(const std::string& path) {
  const Csv csv = read_csv(path);
  const int c_id = csv.require_column("beneficiary_id", path);
  const int c_cluster = csv.require_column("cluster_id", path);
  const int c_state = csv.require_column("state", path);
  const int c_since = csv.require_column("weeks_since_last_call", path);
  const int c_date = csv.require_column("enrollment_date", path);

  std::vector<CohortRow> rows;
  rows.reserve(csv.rows.size());
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    const int line = static_cast<int>(i) + 2;
    const std::string where = path + ":" + std::to_string(line);
    if (row.size() != csv.header.size()) {
      throw DataError(where + ": wrong field count");
    }
    CohortRow r;
    r.beneficiary_id = row[c_id];
    long cluster, since;
    if (!parse_int(row[c_cluster], &cluster) || cluster < 0) {
      throw DataError(where + ": invalid cluster_id");
    }
    if (!parse_state(row[c_state], &r.state)) {
      throw DataError(where + ": unknown state symbol \"" + row[c_state] + "\"");
    }
    if (!parse_int(row[c_since], &since) || since < kNeverCalled) {
      throw DataError(where + ": invalid weeks_since_last_call");
    }
    r.cluster_id = static_cast<int>(cluster);
    r.weeks_since_last_call = static_cast<int>(since);
    r.enrollment_day = parse_iso_date(row[c_date]);
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_cohort_csv(const std::vector<CohortRow>& rows,
                      const std::string& path) {
  std::ofstream out = open_out(path);
  out << "beneficiary_id,cluster_id,state,weeks_since_last_call,enrollment_date\n";
  for (const CohortRow& r : rows) {
    out << r.beneficiary_id << "," << r.cluster_id << "," << to_string(r.state)
        << "," << r.weeks_since_last_call << ","
        << format_iso_date(r.enrollment_day) << "\n";
  }
}

void write_call_list_csv(const std::vector<CallListEntry>& entries,
                         const std::string& path) {
  std::ofstream out = open_out(path);
  out << "week_index,arm_id,policy,whittle_index,cluster_id,state\n";
  for (const CallListEntry& e : entries) {
    out << e.week_index << "," << e.arm_id << "," << e.policy << ",";
    if (e.whittle_index) out << fmt_double(*e.whittle_index);
    out << "," << e.cluster_id << "," << to_string(e.state) << "\n";
  }
}

std::vector<CallListEntry> read_call_list_csv(const std::string& path) {
  const Csv csv = read_csv(path);
  const int c_week = csv.require_column("week_index", path);
  const int c_arm = csv.require_column("arm_id", path);
  const int c_policy = csv.require_column("policy", path);
  const int c_index = csv.require_column("whittle_index", path);
  const int c_cluster = csv.require_column("cluster_id", path);
  const int c_state = csv.require_column("state", path);

  std::vector<CallListEntry> entries;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    const std::string where = path + ":" + std::to_string(i + 2);
    if (row.size() != csv.header.size()) {
      throw DataError(where + ": wrong field count");
    }
    CallListEntry e;
    long week, cluster;
    if (!parse_int(row[c_week], &week) || !parse_int(row[c_cluster], &cluster)) {
      throw DataError(where + ": bad call list row");
    }
    e.week_index = static_cast<int>(week);
    e.arm_id = row[c_arm];
    e.policy = row[c_policy];
    if (!row[c_index].empty()) {
      double v;
      if (!parse_double(row[c_index], &v)) {
        throw DataError(where + ": invalid whittle_index");
      }
      e.whittle_index = v;
    }
    e.cluster_id = static_cast<int>(cluster);
    if (!parse_state(row[c_state], &e.state)) {
      throw DataError(where + ": unknown state symbol");
    }
    entries.push_back(std::move(e));
  }
  return entries;
}

void write_trial_log_csv(const TrialLog& log, const std::string& path,
                         bool append) {
  std::ofstream out = append ? open_append(path) : open_out(path);
  if (!append || out.tellp() == 0) {
    out << "trial,week,arm,state,action,reward\n";
  }
  for (int w = 0; w < log.weeks; ++w) {
    for (int n = 0; n < log.n_arms; ++n) {
      const State s = log.state_at(w, n);
      out << log.trial << "," << w << "," << n << "," << to_string(s) << ","
          << to_string(log.action_at(w, n)) << "," << idx(s) << "\n";
    }
  }
}

std::vector<TrialLog> read_trial_logs_csv(const std::string& path,
                                          const std::string& policy) {
  const Csv csv = read_csv(path);
  const int c_trial = csv.require_column("trial", path);
  const int c_week = csv.require_column("week", path);
  const int c_arm = csv.require_column("arm", path);
  const int c_state = csv.require_column("state", path);
  const int c_action = csv.require_column("action", path);

  struct Cell {
    int trial, week, arm;
    State state;
    Action action;
  };
  std::vector<Cell> cells;
  cells.reserve(csv.rows.size());
  int max_trial = -1, max_week = -1, max_arm = -1;
  for (std::size_t i = 0; i < csv.rows.size(); ++i) {
    const auto& row = csv.rows[i];
    const std::string where = path + ":" + std::to_string(i + 2);
    long trial, week, arm;
    Cell cell{};
    if (row.size() != csv.header.size() || !parse_int(row[c_trial], &trial) ||
        !parse_int(row[c_week], &week) || !parse_int(row[c_arm], &arm) ||
        trial < 0 || week < 0 || arm < 0 ||
        !parse_state(row[c_state], &cell.state) ||
        !parse_action(row[c_action], &cell.action)) {
      throw DataError(where + ": bad trial log row");
    }
    cell.trial = static_cast<int>(trial);
    cell.week = static_cast<int>(week);
    cell.arm = static_cast<int>(arm);
    max_trial = std::max(max_trial, cell.trial);
    max_week = std::max(max_week, cell.week);
    max_arm = std::max(max_arm, cell.arm);
    cells.push_back(cell);
  }
  if (cells.empty()) throw DataError(path + ": no log rows");

  const int weeks = max_week + 1;
  const int n_arms = max_arm + 1;
  std::vector<TrialLog> logs(max_trial + 1);
  std::vector<std::vector<bool>> seen(max_trial + 1);
  for (int t = 0; t <= max_trial; ++t) {
    logs[t].policy = policy;
    logs[t].trial = t;
    logs[t].weeks = weeks;
    logs[t].n_arms = n_arms;
    logs[t].cluster_ids.assign(n_arms, 0);
    logs[t].states.assign(static_cast<std::size_t>(weeks) * n_arms, 0);
    logs[t].actions.assign(static_cast<std::size_t>(weeks) * n_arms, 0);
    seen[t].assign(static_cast<std::size_t>(weeks) * n_arms, false);
  }
  for (const Cell& c : cells) {
    const std::size_t at = static_cast<std::size_t>(c.week) * n_arms + c.arm;
    if (seen[c.trial][at]) {
      throw DataError(path + ": duplicate record for trial " +
                      std::to_string(c.trial) + " week " +
                      std::to_string(c.week) + " arm " + std::to_string(c.arm));
    }
    seen[c.trial][at] = true;
    logs[c.trial].states[at] = static_cast<std::int8_t>(idx(c.state));
    logs[c.trial].actions[at] = c.action == Action::Active ? 1 : 0;
  }
  for (int t = 0; t <= max_trial; ++t) {
    for (const bool s : seen[t]) {
      if (!s) {
        throw DataError(path + ": incomplete log for trial " + std::to_string(t));
      }
    }
  }
  return logs;
}

void write_experiment_json(const ExperimentResult& result,
                           const std::string& path) {
  json j;
  j["trials"] = result.trials;
  j["weeks"] = result.weeks;
  j["beta"] = result.beta;
  j["eta"] = result.eta;
  j["m_schedule"] = result.m_schedule;
  json policies = json::object();
  for (const PolicyAggregate& agg : result.policies) {
    json p;
    p["mean_reward"] = agg.mean_reward;
    p["stderr_reward"] = agg.stderr_reward;
    p["normalized_reward"] = agg.normalized;
    p["normalized_mean"] = agg.normalized_mean;
    p["normalized_stderr"] = agg.normalized_stderr;
    p["per_trial_reward"] = agg.per_trial_reward;
    p["per_trial_normalized"] = agg.per_trial_normalized;
    p["final_cumulative_drop_mean"] = agg.final_cumulative_drop_mean;
    p["drops_prevented_mean"] = agg.drops_prevented_mean;
    p["week1_ne_call_share"] = agg.week1_ne_call_share;
    p["ne_conversion_share"] = agg.ne_conversion_share;
    policies[agg.policy] = p;
  }
  j["policies"] = policies;
  std::ofstream out = open_out(path);
  out << j.dump(2) << "\n";
}

void write_sweep_csv(const std::vector<SweepPoint>& points,
                     const std::string& path) {
  std::ofstream out = open_out(path);
  out << "x_value,policy,normalized_reward,stderr\n";
  for (const SweepPoint& p : points) {
    out << fmt_double(p.x_value) << "," << p.policy << ","
        << fmt_double(p.normalized_reward) << "," << fmt_double(p.stderr_value)
        << "\n";
  }
}

void write_prevented_csv(const std::vector<PreventedPoint>& points,
                         const std::string& path) {
  std::ofstream out = open_out(path);
  out << "week,policy,drops_prevented\n";
  for (const PreventedPoint& p : points) {
    out << p.week << "," << p.policy << "," << fmt_double(p.drops_prevented)
        << "\n";
  }
}

RunConfig read_run_config(const std::string& path) {
  const json j = load_json_file(path);
  if (!j.is_object()) throw DataError(path + ": config must be a JSON object");
  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "method") {
        config.method = value.get<std::string>();
        cluster_method_from_string(config.method);
      } else if (key == "k") {
        config.k = value.get<int>();
        if (config.k < 1) throw DataError("k must be positive");
      } else if (key == "beta") {
        config.beta = value.get<double>();
        if (config.beta < 0.0 || config.beta >= 1.0) {
          throw DataError("beta must lie in [0, 1)");
        }
      } else if (key == "m") {
        if (value.is_array()) {
          config.m_schedule = value.get<std::vector<int>>();
        } else {
          config.m_schedule = {value.get<int>()};
        }
        for (const int m : config.m_schedule) {
          if (m < 0) throw DataError("m must be non-negative");
        }
      } else if (key == "eta") {
        config.eta = value.get<int>();
        if (config.eta < 1) throw DataError("eta must be at least 1");
      } else if (key == "weeks") {
        config.weeks = value.get<int>();
        if (config.weeks < 1) throw DataError("weeks must be positive");
      } else if (key == "trials") {
        config.trials = value.get<int>();
        if (config.trials < 1) throw DataError("trials must be positive");
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "features") {
        config.features_path = value.get<std::string>();
      } else if (key == "trajectories") {
        config.trajectories_path = value.get<std::string>();
      } else if (key == "rules") {
        config.rules_path = value.get<std::string>();
      } else {
        throw DataError(path + ": unknown config key \"" + key + "\"");
      }
    } catch (const json::exception& e) {
      throw DataError(path + ": bad value for \"" + key + "\": " + e.what());
    }
  }
  return config;
}

BucketRulesSpec read_bucket_rules(const std::string& path) {
  BucketRulesSpec spec;
  if (path.empty()) return spec;
  const json j = load_json_file(path);
  if (!j.is_object()) throw DataError(path + ": rules must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    try {
      if (key == "quantiles") {
        spec.quantiles = value.get<int>();
        if (spec.quantiles < 1) {
          throw DataError(path + ": quantiles must be at least 1");
        }
      } else if (key == "edges") {
        BucketRules rules;
        rules.edges = value.get<std::vector<std::vector<double>>>();
        for (auto& e : rules.edges) {
          if (!std::is_sorted(e.begin(), e.end())) {
            throw DataError(path + ": edges must be ascending");
          }
        }
        spec.edges = std::move(rules);
      } else {
        throw DataError(path + ": unknown rules key \"" + key + "\"");
      }
    } catch (const json::exception& e) {
      throw DataError(path + ": bad value for \"" + key + "\": " + e.what());
    }
  }
  return spec;
}

std::vector<int> parse_m_schedule(const std::string& text) {
  std::vector<int> schedule;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    long v;
    if (!parse_int(part, &v) || v < 0) {
      throw DataError("invalid budget value \"" + part + "\"");
    }
    schedule.push_back(static_cast<int>(v));
  }
  if (schedule.empty()) throw DataError("empty budget schedule");
  return schedule;
}

}  // namespace rmab
