#include "kwtarget/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "kwtarget/error.hpp"

namespace kwtarget {

std::string format_number(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write " + path);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path);
}

namespace {

constexpr int kColumns = 8;

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

bool parse_int(std::string_view s, int& out) {
  if (s.empty()) return false;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

std::optional<Date> parse_date(std::string_view s) {
  const auto a = s.find('/');
  if (a == std::string_view::npos) return std::nullopt;
  const auto b = s.find('/', a + 1);
  if (b == std::string_view::npos) return std::nullopt;
  Date d;
  if (!parse_int(s.substr(0, a), d.year) || !parse_int(s.substr(a + 1, b - a - 1), d.month) ||
      !parse_int(s.substr(b + 1), d.day)) {
    return std::nullopt;
  }
  if (!d.valid()) return std::nullopt;
  return d;
}

double parse_double(std::string_view s, std::size_t line, std::size_t col) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    throw ParseError(line, col, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

using TripleKey = std::tuple<Date, std::string, std::string>;

}  // namespace

std::vector<PerformanceRecord> parse_dataset(std::string_view text) {
  std::vector<PerformanceRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  std::string day_s, kw, ag;
  std::map<TripleKey, std::pair<std::set<int>, int>> triples;  // types seen, observed count

  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!header_seen) {
      if (!line.empty() && static_cast<unsigned char>(line[0]) == 0xEF) {
        if (line.substr(0, 3) == "\xEF\xBB\xBF") line.remove_prefix(3);
      }
      if (line != kDatasetHeader) {
        throw ParseError(line_no, 1, "header must be '" + std::string(kDatasetHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (trim(line).empty()) continue;
    auto cells = split(line);
    if (cells.size() != kColumns) {
      throw ParseError(line_no, std::min<std::size_t>(cells.size(), kColumns),
                       "expected 8 comma-separated cells, found " + std::to_string(cells.size()));
    }
    for (auto& c : cells) c = trim(c);
    if (!cells[0].empty()) day_s = std::string(cells[0]);
    if (!cells[1].empty()) kw = std::string(cells[1]);
    if (!cells[2].empty()) ag = std::string(cells[2]);
    if (day_s.empty() || kw.empty() || ag.empty()) {
      throw ParseError(line_no, day_s.empty() ? 1 : (kw.empty() ? 2 : 3),
                       "identifier missing and nothing to inherit");
    }
    const auto day = parse_date(day_s);
    if (!day) throw ParseError(line_no, 1, "date must be YYYY/M/D: '" + day_s + "'");
    const auto match = parse_match(cells[3]);
    if (!match) {
      throw ParseError(line_no, 4, "match type must be exact, phrase or broad: '" +
                                       std::string(cells[3]) + "'");
    }
    int hyphens = 0;
    for (int c = 4; c < kColumns; ++c) hyphens += (cells[static_cast<std::size_t>(c)] == "-");
    if (hyphens != 0 && hyphens != 4) {
      for (int c = 4; c < kColumns; ++c) {
        if (cells[static_cast<std::size_t>(c)] == "-") {
          throw ParseError(line_no, static_cast<std::size_t>(c) + 1,
                           "'-' must mark all four indices of a match type or none");
        }
      }
    }
    auto& triple = triples[{*day, kw, ag}];
    if (!triple.first.insert(static_cast<int>(*match)).second) {
      throw Error(ErrorCode::kValidationError,
                  "line " + std::to_string(line_no) + ": duplicate " +
                      std::string(match_name(*match)) + " row for " + kw + " on " + day_s);
    }
    if (hyphens == 4) continue;
    if (++triple.second > 1) {
      throw Error(ErrorCode::kValidationError,
                  "line " + std::to_string(line_no) + ": more than one observed match type for " +
                      kw + " on " + day_s);
    }
    PerformanceRecord r;
    r.day = *day;
    r.keyword_id = kw;
    r.adgroup_id = ag;
    r.match = *match;
    r.impressions = parse_double(cells[4], line_no, 5);
    r.ctr = parse_double(cells[5], line_no, 6);
    r.vpc = parse_double(cells[6], line_no, 7);
    r.cpc = parse_double(cells[7], line_no, 8);
    try {
      validate_record(r);
    } catch (const Error& e) {
      throw Error(ErrorCode::kValidationError, "line " + std::to_string(line_no) + ": " + e.what());
    }
    out.push_back(std::move(r));
  }
  if (!header_seen) throw ParseError(1, 1, "empty file: header missing");
  return out;
}

std::vector<PerformanceRecord> parse_dataset_file(const std::string& path) {
  return parse_dataset(read_text_file(path));
}

std::string serialize_dataset(const std::vector<PerformanceRecord>& records) {
  std::map<TripleKey, std::size_t> seen;
  std::vector<std::vector<const PerformanceRecord*>> blocks;
  for (const auto& r : records) {
    validate_record(r);
    const auto [it, fresh] = seen.try_emplace({r.day, r.keyword_id, r.adgroup_id}, blocks.size());
    if (fresh) blocks.emplace_back();
    auto& block = blocks[it->second];
    for (const auto* other : block) {
      if (other->match == r.match) {
        throw Error(ErrorCode::kValidationError, "duplicate " + std::string(match_name(r.match)) +
                                                     " record for " + r.keyword_id + " on " +
                                                     r.day.slashed());
      }
    }
    block.push_back(&r);
  }
  std::string out(kDatasetHeader);
  out += '\n';
  for (const auto& block : blocks) {
    const auto* first = block.front();
    bool lead = true;
    for (MatchType m : kAllMatchTypes) {
      if (lead) {
        out += first->day.slashed() + ',' + first->keyword_id + ',' + first->adgroup_id;
        lead = false;
      } else {
        out += ",,";
      }
      out += ',';
      out += match_name(m);
      const PerformanceRecord* rec = nullptr;
      for (const auto* r : block) {
        if (r->match == m) rec = r;
      }
      if (rec == nullptr) {
        out += ",-,-,-,-\n";
        continue;
      }
      for (double v : {rec->impressions, rec->ctr, rec->vpc, rec->cpc}) {
        out += ',';
        out += format_number(v);
      }
      out += '\n';
    }
  }
  return out;
}

void write_dataset_file(const std::string& path,
                        const std::vector<PerformanceRecord>& records) {
  write_text_file(path, serialize_dataset(records));
}

namespace {

std::pair<double, double> mean_sd(const std::vector<double>& v) {
  if (v.empty()) return {0.0, 0.0};
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / static_cast<double>(v.size());
  if (v.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size() - 1))};
}

}  // namespace

DatasetSummary summarize(const std::vector<PerformanceRecord>& records) {
  if (records.empty()) throw Error(ErrorCode::kEmptyDataset, "dataset has no records");
  DatasetSummary s;
  s.records = records.size();
  std::set<std::pair<std::string, std::string>> kws;
  std::set<std::string> groups;
  std::array<std::vector<double>, 3> imp, ctr;
  std::vector<double> vpc, cpc;
  for (const auto& r : records) {
    kws.insert({r.adgroup_id, r.keyword_id});
    groups.insert(r.adgroup_id);
    const auto i = static_cast<std::size_t>(match_index(r.match));
    imp[i].push_back(r.impressions);
    ctr[i].push_back(r.ctr);
    vpc.push_back(r.vpc);
    cpc.push_back(r.cpc);
  }
  s.keywords = kws.size();
  s.adgroups = groups.size();
  for (std::size_t i = 0; i < 3; ++i) {
    auto& m = s.by_match[i];
    m.match = kAllMatchTypes[i];
    m.count = imp[i].size();
    m.proportion_pct = 100.0 * static_cast<double>(m.count) / static_cast<double>(s.records);
    std::tie(m.impression_mean, m.impression_sd) = mean_sd(imp[i]);
    std::tie(m.ctr_mean, m.ctr_sd) = mean_sd(ctr[i]);
  }
  std::tie(s.vpc_mean, s.vpc_sd) = mean_sd(vpc);
  std::tie(s.cpc_mean, s.cpc_sd) = mean_sd(cpc);
  return s;
}

}  // namespace kwtarget
