#include "dar/fixtures/generator.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <vector>

#include "dar/errors.hpp"

namespace dar::fixtures {

namespace {

// splitmix64: fixed sequence on every platform, unlike std distributions.
class DetRng {
 public:
  explicit DetRng(uint64_t seed) : state_(seed) {}
  uint64_t next() {
    state_ += 0x9E3779B97f4A7C15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  uint64_t below(uint64_t n) { return n == 0 ? 0 : next() % n; }
  double unit() { return static_cast<double>(next() >> 11) / 9007199254740992.0; }

 private:
  uint64_t state_;
};

double round_to(double v, int digits) {
  double scale = std::pow(10.0, digits);
  return std::round(v * scale) / scale;
}

struct CityInfo {
  const char* city;
  const char* country;
  double lat;
  double lon;
  int region;  // 1..8
};

const CityInfo kCities[] = {
    {"Hamburg", "Germany", 53.55, 9.99, 1},
    {"Rotterdam", "Netherlands", 51.92, 4.48, 1},
    {"Gdansk", "Poland", 54.35, 18.65, 2},
    {"Odesa", "Ukraine", 46.48, 30.73, 3},
    {"Istanbul", "Turkey", 41.01, 28.98, 3},
    {"Alexandria", "Egypt", 31.20, 29.92, 4},
    {"Mombasa", "Kenya", -4.04, 39.67, 4},
    {"Karachi", "Pakistan", 24.86, 67.01, 5},
    {"Singapore", "Singapore", 1.35, 103.82, 5},
    {"Busan", "South Korea", 35.18, 129.08, 6},
    {"Valparaiso", "Chile", -33.05, -71.62, 7},
    {"Houston", "United States", 29.76, -95.37, 8},
};
constexpr size_t kCityCount = sizeof(kCities) / sizeof(kCities[0]);

struct IncidentType {
  const char* name;
  int64_t id;
};
const IncidentType kTypes[] = {{"Protest", 1},   {"Theft", 2},
                               {"Fire", 3},      {"Cyber Attack", 4},
                               {"Flood", 5},     {"Power Outage", 6}};
constexpr size_t kTypeCount = sizeof(kTypes) / sizeof(kTypes[0]);

const char* kAssetTypes[] = {"Warehouse", "Office", "Plant", "Data Center",
                             "Port Terminal"};
const char* kAssetNames[] = {"Northgate", "Harborview", "Crestline",
                             "Ironwood",  "Lakefront",  "Summit",
                             "Redstone",  "Bayside",    "Granite",
                             "Silverline"};
const char* kFirstNames[] = {"Alex", "Sam",  "Jordan", "Riley",
                             "Casey", "Drew", "Morgan", "Quinn"};
const char* kLastNames[] = {"Keller", "Novak", "Ibrahim", "Sato",
                            "Fischer", "Mbeki", "Larsen",  "Costa"};

// Civil-date helpers (Howard Hinnant's algorithms).
int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<int>(yoe) + static_cast<int>(era) * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y += m <= 2;
}

std::string format_ts(int64_t day_serial, int hour, int minute, int second) {
  int y, m, d;
  civil_from_days(day_serial, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d:%02d", y, m, d,
                hour, minute, second);
  return buf;
}

// The 104 generated weeks start on Monday 2023-01-02 (ISO 2023-W01) and end
// with 2024-W52, so labels follow directly from the index.
std::string week_label(int week_index) {
  char buf[16];
  if (week_index < 52) {
    std::snprintf(buf, sizeof(buf), "2023-W%02d", week_index + 1);
  } else {
    std::snprintf(buf, sizeof(buf), "2024-W%02d", week_index - 51);
  }
  return buf;
}

constexpr int kWeekCount = 104;

}  // namespace

FixtureResult generate_fixture(uint64_t seed, const FixtureScale& scale) {
  if (scale.n_assets < 1) {
    throw DarError("invalid_scale", "n_assets must be >= 1");
  }
  if (scale.n_incidents < 0) {
    throw DarError("invalid_scale", "n_incidents must be >= 0");
  }

  DetRng rng(seed);
  auto database = std::make_shared<engine::Database>();
  engine::Dataset& ds = database->add_dataset(
      kDatasetId, "Synthetic asset-incident research dataset");

  // ---- assets ----
  engine::Table assets;
  assets.id = "assets";
  assets.columns = {
      {"AssetID", LogicalType::String, false},
      {"OrganizationID", LogicalType::String, false},
      {"AssetName", LogicalType::String, false},
      {"AssetType", LogicalType::String, false},
      {"ImpactRadius", LogicalType::Float, false},
      {"Latitude", LogicalType::Float, false},
      {"Longitude", LogicalType::Float, false},
      {"Country", LogicalType::String, false},
      {"City", LogicalType::String, false},
      {"Address", LogicalType::String, false},
      {"Headcount", LogicalType::Integer, false},
      {"Phone", LogicalType::String, true},
      {"FocalPointName", LogicalType::String, true},
      {"Email", LogicalType::String, true},
      {"FocalPointPhone", LogicalType::String, true},
      {"DataSource", LogicalType::String, false},
      {"Hyperlink", LogicalType::String, true},   // "0" marks incomplete docs
      {"Photo", LogicalType::String, true},
      {"ReportLink", LogicalType::String, true},
  };

  struct AssetAnchor {
    std::string id;
    double lat;
    double lon;
    size_t city;
  };
  std::vector<AssetAnchor> anchors;

  for (int64_t i = 0; i < scale.n_assets; ++i) {
    size_t city = rng.below(kCityCount);
    const CityInfo& c = kCities[city];
    double lat = round_to(c.lat + (rng.unit() - 0.5) * 0.6, 6);
    double lon = round_to(c.lon + (rng.unit() - 0.5) * 0.6, 6);
    char idbuf[16];
    std::snprintf(idbuf, sizeof(idbuf), "A-%04d", static_cast<int>(i + 1));
    std::string asset_id = idbuf;
    std::string name = std::string(kAssetNames[rng.below(10)]) + " " +
                       kAssetTypes[rng.below(5)];
    std::string first = kFirstNames[rng.below(8)];
    std::string last = kLastNames[rng.below(8)];
    std::string focal = first + " " + last;
    std::string email;
    for (char ch : first) email.push_back(static_cast<char>(std::tolower(ch)));
    email.push_back('.');
    for (char ch : last) email.push_back(static_cast<char>(std::tolower(ch)));
    email += "@example.org";
    auto phone = [&]() {
      char p[24];
      std::snprintf(p, sizeof(p), "+%d-%03d-%04d",
                    static_cast<int>(rng.below(90) + 10),
                    static_cast<int>(rng.below(900) + 100),
                    static_cast<int>(rng.below(9000) + 1000));
      return std::string(p);
    };
    auto doc_link = [&](const char* kind) -> std::string {
      if (rng.below(5) == 0) return "0";  // incomplete
      return "https://example.org/" + std::string(kind) + "/" + asset_id;
    };
    char org[16];
    std::snprintf(org, sizeof(org), "ORG-%02d",
                  static_cast<int>(rng.below(5) + 1));
    char addr[48];
    std::snprintf(addr, sizeof(addr), "%d Harbor Rd",
                  static_cast<int>(rng.below(900) + 1));

    assets.rows.push_back(std::vector<Value>{
        Value{asset_id},
        Value{std::string(org)},
        Value{name},
        Value{std::string(kAssetTypes[rng.below(5)])},
        Value{round_to(0.5 + rng.unit() * 9.5, 2)},
        Value{lat},
        Value{lon},
        Value{std::string(c.country)},
        Value{std::string(c.city)},
        Value{std::string(addr)},
        Value{static_cast<int64_t>(rng.below(1996) + 5)},
        Value{phone()},
        Value{focal},
        Value{email},
        Value{phone()},
        Value{std::string("survey")},
        Value{doc_link("link")},
        Value{doc_link("photo")},
        Value{doc_link("report")},
    });
    anchors.push_back({asset_id, lat, lon, city});
  }

  // Hot assets attract the geographic cluster.
  size_t hot_count = std::max<size_t>(1, anchors.size() / 5);
  std::set<size_t> hot_set;
  while (hot_set.size() < hot_count) hot_set.insert(rng.below(anchors.size()));
  std::vector<size_t> hot(hot_set.begin(), hot_set.end());

  // Severity-heavy region.
  int hot_region = static_cast<int>(rng.below(8)) + 1;

  // ---- weekly allocation with one spike week ----
  std::vector<int64_t> week_counts(kWeekCount, 0);
  int spike_week = static_cast<int>(rng.below(kWeekCount));
  if (scale.n_incidents > 0) {
    std::vector<double> weights(kWeekCount);
    double total = 0;
    for (int w = 0; w < kWeekCount; ++w) {
      weights[w] = (w == spike_week) ? 4.0 : 0.7 + 0.6 * rng.unit();
      total += weights[w];
    }
    int64_t assigned = 0;
    for (int w = 0; w < kWeekCount; ++w) {
      week_counts[w] = static_cast<int64_t>(
          std::floor(static_cast<double>(scale.n_incidents) * weights[w] /
                     total));
      assigned += week_counts[w];
    }
    int w = 0;
    while (assigned < scale.n_incidents) {
      week_counts[w % kWeekCount]++;
      assigned++;
      w++;
    }
    // Guarantee the spike stands out: > 3x the median weekly count.
    auto median_weekly = [&]() {
      std::vector<int64_t> sorted = week_counts;
      std::sort(sorted.begin(), sorted.end());
      return sorted[sorted.size() / 2];
    };
    while (week_counts[spike_week] <= 3 * median_weekly()) {
      // Pull from the fullest non-spike week.
      int donor = -1;
      for (int k = 0; k < kWeekCount; ++k) {
        if (k == spike_week) continue;
        if (donor < 0 || week_counts[k] > week_counts[donor]) donor = k;
      }
      if (donor < 0 || week_counts[donor] == 0) break;
      week_counts[donor]--;
      week_counts[spike_week]++;
    }
  }

  // ---- incidents ----
  engine::Table incidents;
  incidents.id = "incidents";
  incidents.columns = {
      {"IncidentID", LogicalType::String, false},
      {"IncidentSourceId", LogicalType::String, false},
      {"IncidentDateTime", LogicalType::Timestamp, false},
      {"Title", LogicalType::String, false},
      {"IncidentDescription", LogicalType::String, false},
      {"Photo", LogicalType::String, true},
      {"Latitude", LogicalType::Float, false},
      {"Longitude", LogicalType::Float, false},
      {"Country", LogicalType::String, false},
      {"City", LogicalType::String, false},
      {"Address", LogicalType::String, true},
      {"Region", LogicalType::String, false},
      {"IncidentTypeName", LogicalType::String, false},
      {"IncidentTypeID", LogicalType::Integer, false},
      {"Relevance", LogicalType::Float, false},
      {"eventCode", LogicalType::String, false},
      {"SeverityLevel", LogicalType::Integer, false},
      {"Hyperlink", LogicalType::String, true},
      {"DataSource", LogicalType::String, false},
  };

  const int64_t first_monday = days_from_civil(2023, 1, 2);
  int64_t incident_no = 0;
  int64_t near_hot = 0;
  std::map<std::string, std::pair<int64_t, int64_t>> region_severity;

  for (int w = 0; w < kWeekCount; ++w) {
    for (int64_t k = 0; k < week_counts[w]; ++k) {
      incident_no++;
      char idbuf[20];
      std::snprintf(idbuf, sizeof(idbuf), "I-%07d",
                    static_cast<int>(incident_no));
      int64_t day = first_monday + w * 7 + static_cast<int64_t>(rng.below(7));
      std::string ts = format_ts(day, static_cast<int>(rng.below(24)),
                                 static_cast<int>(rng.below(60)),
                                 static_cast<int>(rng.below(60)));

      double lat, lon;
      size_t city_idx;
      bool is_near = rng.unit() < 0.35;
      if (is_near) {
        const AssetAnchor& a = anchors[hot[rng.below(hot.size())]];
        lat = round_to(a.lat + (rng.unit() - 0.5) * 0.06, 6);
        lon = round_to(a.lon + (rng.unit() - 0.5) * 0.06, 6);
        city_idx = a.city;
        near_hot++;
      } else {
        city_idx = rng.below(kCityCount);
        lat = round_to(kCities[city_idx].lat + (rng.unit() - 0.5) * 1.0, 6);
        lon = round_to(kCities[city_idx].lon + (rng.unit() - 0.5) * 1.0, 6);
      }
      const CityInfo& c = kCities[city_idx];
      std::string region = "Region_" + std::to_string(c.region);

      double p_high = (c.region == hot_region) ? 0.55 : 0.12;
      double roll = rng.unit();
      int64_t severity = roll < p_high ? 1 : (roll < p_high + 0.30 ? 2 : 3);
      region_severity[region].second++;
      if (severity == 1) region_severity[region].first++;

      const IncidentType& ty = kTypes[rng.below(kTypeCount)];
      std::string title =
          std::string(ty.name) + " reported near " + c.city;
      std::string description =
          "A " + std::string(ty.name) +
          " incident was reported in the vicinity of " + c.city + ", " +
          c.country + ". Local teams assessed severity level " +
          std::to_string(severity) + ".";
      char ev[12];
      std::snprintf(ev, sizeof(ev), "EV%03d",
                    static_cast<int>(ty.id * 10 + severity));
      char src[20];
      std::snprintf(src, sizeof(src), "SRC-%05d",
                    static_cast<int>(rng.below(90000) + 10000));

      incidents.rows.push_back(std::vector<Value>{
          Value{std::string(idbuf)},
          Value{std::string(src)},
          Value{ts},
          Value{title},
          Value{description},
          Value{rng.below(10) == 0 ? std::string("0")
                                   : "https://example.org/photo/" +
                                         std::string(idbuf)},
          Value{lat},
          Value{lon},
          Value{std::string(c.country)},
          Value{std::string(c.city)},
          Value{rng.below(4) == 0 ? Value{} : Value{std::string("near port area")}},
          Value{region},
          Value{std::string(ty.name)},
          Value{ty.id},
          Value{round_to(0.2 + rng.unit() * 0.8, 2)},
          Value{std::string(ev)},
          Value{severity},
          Value{rng.below(10) == 0 ? std::string("0")
                                   : "https://example.org/incidents/" +
                                         std::string(idbuf)},
          Value{std::string(rng.below(2) == 0 ? "osint" : "report")},
      });
    }
  }

  ds.tables.push_back(std::move(assets));
  ds.tables.push_back(std::move(incidents));

  // ---- ground truth sidecar ----
  nlohmann::json truth;
  truth["seed"] = seed;
  truth["scale"] = {{"n_assets", scale.n_assets},
                    {"n_incidents", scale.n_incidents}};
  truth["dataset_id"] = kDatasetId;

  nlohmann::json hot_ids = nlohmann::json::array();
  for (size_t h : hot) hot_ids.push_back(anchors[h].id);

  bool spike_planted = false;
  int64_t spike_count = 0, median_count = 0;
  if (scale.n_incidents > 0) {
    std::vector<int64_t> sorted = week_counts;
    std::sort(sorted.begin(), sorted.end());
    median_count = sorted[sorted.size() / 2];
    spike_count = week_counts[spike_week];
    spike_planted = median_count > 0 && spike_count > 3 * median_count;
  }

  nlohmann::json rates = nlohmann::json::object();
  std::string max_region;
  double max_rate = -1;
  for (const auto& [region, counts] : region_severity) {
    double rate = counts.second > 0 ? static_cast<double>(counts.first) /
                                          static_cast<double>(counts.second)
                                    : 0.0;
    rates[region] = rate;
    if (rate > max_rate) {
      max_rate = rate;
      max_region = region;
    }
  }

  truth["patterns"] = {
      {"geo_cluster",
       {{"planted", scale.n_incidents > 0 && near_hot > 0},
        {"hot_asset_ids", hot_ids},
        {"near_share_actual",
         scale.n_incidents > 0
             ? static_cast<double>(near_hot) /
                   static_cast<double>(scale.n_incidents)
             : 0.0},
        {"radius_squared_deg", 0.0025}}},
      {"severity_region",
       {{"planted", !max_region.empty() && max_rate > 0.3},
        {"region", "Region_" + std::to_string(hot_region)},
        {"observed_top_region", max_region},
        {"rates", rates}}},
      {"spike_week",
       {{"planted", spike_planted},
        {"week", week_label(spike_week)},
        {"count", spike_count},
        {"median_weekly", median_count}}},
  };
  truth["reference_sql"] = {
      {"spike_week",
       "SELECT ISO_WEEK(IncidentDateTime) AS wk, COUNT(*) AS n FROM "
       "research_poc.incidents GROUP BY wk ORDER BY n DESC, wk ASC LIMIT 1"},
      {"severity_region",
       "SELECT Region, AVG(CASE WHEN SeverityLevel = 1 THEN 1.0 ELSE 0.0 END) "
       "AS high_rate FROM research_poc.incidents GROUP BY Region ORDER BY "
       "high_rate DESC LIMIT 1"},
      {"geo_cluster",
       "SELECT a.AssetID, COUNT(*) AS nearby FROM research_poc.incidents i "
       "JOIN research_poc.assets a ON (i.Latitude - a.Latitude) * (i.Latitude "
       "- a.Latitude) + (i.Longitude - a.Longitude) * (i.Longitude - "
       "a.Longitude) < 0.0025 GROUP BY a.AssetID ORDER BY nearby DESC, "
       "a.AssetID ASC LIMIT 5"},
  };

  FixtureResult result;
  result.database = database;
  result.ground_truth = std::move(truth);
  return result;
}

void write_fixture(const FixtureResult& fixture, const std::string& db_path,
                   const std::string& sidecar_path) {
  fixture.database->save(db_path);
  std::ofstream out(sidecar_path, std::ios::binary);
  if (!out) {
    throw DarError("io_error", "cannot write sidecar: " + sidecar_path);
  }
  out << fixture.ground_truth.dump(1) << "\n";
}

}  // namespace dar::fixtures
