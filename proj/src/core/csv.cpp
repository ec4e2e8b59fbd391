#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "core/dataset.hpp"

namespace demandcast {

namespace {

const char* kHeader =
    "sku_id,region_id,vertical_id,week,demand,listed_price,discounted_price,"
    "effective_price,event_type,deal_card,banner,no_cost_emi,exchange,"
    "exclusive,oos_pct,tier";
constexpr int kFields = 16;

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  size_t pos = 0;
  while (true) {
    size_t comma = line.find(',', pos);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, comma - pos));
    pos = comma + 1;
  }
}

double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorCode::parse, where + ": bad number '" + std::string(s) + "'");
  return v;
}

int64_t parse_int(std::string_view s, const std::string& where) {
  int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    fail(ErrorCode::parse, where + ": bad integer '" + std::string(s) + "'");
  return v;
}

uint8_t parse_binary(std::string_view s, const std::string& where) {
  if (s == "0") return 0;
  if (s == "1") return 1;
  fail(ErrorCode::parse, where + ": bad flag '" + std::string(s) + "' (want 0 or 1)");
}

void check_field_text(const std::string& s, const std::string& what) {
  if (s.empty()) fail(ErrorCode::data, "empty " + what);
  if (s.find_first_of(",\r\n") != std::string::npos)
    fail(ErrorCode::data, what + " '" + s + "' contains a comma or newline");
}

struct PendingRow {
  int64_t week;
  double demand;
  RawFeatureRow features;
};

}  // namespace

Dataset load_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line))
    fail(ErrorCode::parse, path + ": empty file (missing header)");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader)
    fail(ErrorCode::schema_mismatch,
         path + ": header mismatch\n  expected: " + kHeader + "\n  got:      " + line);

  // Keyed by (sku, region); first-appearance order is preserved so that a
  // save/load cycle reproduces the instance order.
  std::map<std::pair<std::string, std::string>, size_t> index;
  std::vector<std::vector<PendingRow>> rows_by_series;
  std::vector<SeriesInstance> shells;

  int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = path + " line " + std::to_string(line_no);

    const std::vector<std::string_view> f = split_fields(line);
    if (f.size() != kFields)
      fail(ErrorCode::parse, where + ": expected " + std::to_string(kFields) +
                                 " fields, got " + std::to_string(f.size()));

    PendingRow row;
    std::string sku(f[0]), region(f[1]), vertical(f[2]);
    row.week = parse_int(f[3], where);
    row.demand = parse_double(f[4], where);
    if (!std::isfinite(row.demand) || row.demand < 0.0)
      fail(ErrorCode::data, where + ": negative or non-finite demand for SKU '" +
                                sku + "' week " + std::to_string(row.week));
    row.features.listed_price = parse_double(f[5], where);
    row.features.discounted_price = parse_double(f[6], where);
    row.features.effective_price = parse_double(f[7], where);
    row.features.event_type = std::string(f[8]);
    row.features.deal_card = parse_binary(f[9], where);
    row.features.banner = parse_binary(f[10], where);
    row.features.no_cost_emi = parse_binary(f[11], where);
    row.features.exchange = parse_binary(f[12], where);
    row.features.exclusive = parse_binary(f[13], where);
    row.features.out_of_stock_pct = parse_double(f[14], where);
    row.features.product_tier = std::string(f[15]);
    row.features.validate(where);

    auto key = std::make_pair(sku, region);
    auto it = index.find(key);
    if (it == index.end()) {
      index.emplace(key, shells.size());
      SeriesInstance shell;
      shell.sku_id = sku;
      shell.region_id = region;
      shell.vertical_id = vertical;
      shells.push_back(std::move(shell));
      rows_by_series.emplace_back();
      it = index.find(key);
    } else if (shells[it->second].vertical_id != vertical) {
      fail(ErrorCode::data, where + ": SKU '" + sku + "' region '" + region +
                                "' changes vertical from '" +
                                shells[it->second].vertical_id + "' to '" +
                                vertical + "'");
    }
    rows_by_series[it->second].push_back(std::move(row));
  }

  Dataset ds;
  ds.instances.reserve(shells.size());
  for (size_t i = 0; i < shells.size(); ++i) {
    SeriesInstance inst = std::move(shells[i]);
    std::vector<PendingRow>& rows = rows_by_series[i];
    std::sort(rows.begin(), rows.end(),
              [](const PendingRow& a, const PendingRow& b) {
                return a.week < b.week;
              });
    for (size_t j = 1; j < rows.size(); ++j) {
      if (rows[j].week == rows[j - 1].week)
        fail(ErrorCode::data, path + ": duplicate week " +
                                  std::to_string(rows[j].week) + " for SKU '" +
                                  inst.sku_id + "' region '" + inst.region_id + "'");
      if (rows[j].week != rows[j - 1].week + 1)
        fail(ErrorCode::data,
             path + ": SKU '" + inst.sku_id + "' region '" + inst.region_id +
                 "' has a gap between weeks " + std::to_string(rows[j - 1].week) +
                 " and " + std::to_string(rows[j].week));
    }
    inst.start_week = rows.empty() ? 0 : rows.front().week;
    inst.demand.reserve(rows.size());
    inst.features.reserve(rows.size());
    for (PendingRow& r : rows) {
      inst.demand.push_back(r.demand);
      inst.features.push_back(std::move(r.features));
    }
    ds.instances.push_back(std::move(inst));
  }
  ds.validate();
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::ostringstream out;
  out << kHeader << '\n';
  for (const SeriesInstance& inst : ds.instances) {
    check_field_text(inst.sku_id, "sku_id");
    check_field_text(inst.region_id, "region_id");
    check_field_text(inst.vertical_id, "vertical_id");
    for (size_t t = 0; t < inst.length(); ++t) {
      const RawFeatureRow& f = inst.features[t];
      check_field_text(f.event_type, "event_type");
      check_field_text(f.product_tier, "tier");
      out << inst.sku_id << ',' << inst.region_id << ',' << inst.vertical_id
          << ',' << inst.week_at(t) << ',' << format_double(inst.demand[t])
          << ',' << format_double(f.listed_price) << ','
          << format_double(f.discounted_price) << ','
          << format_double(f.effective_price) << ',' << f.event_type << ','
          << int(f.deal_card) << ',' << int(f.banner) << ','
          << int(f.no_cost_emi) << ',' << int(f.exchange) << ','
          << int(f.exclusive) << ',' << format_double(f.out_of_stock_pct)
          << ',' << f.product_tier << '\n';
    }
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  file << out.str();
  if (!file) fail(ErrorCode::io, "write to '" + path + "' failed");
}

}  // namespace demandcast
