#include "qoct/artifact.hpp"

#include <json.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "qoct/config.hpp"

namespace qoct {

namespace {

using nlohmann::ordered_json;

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parse error at " + where + ": bad number '" + s + "'");
  }
}

long parse_long(const std::string& s, const std::string& where) {
  try {
    std::size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parse error at " + where + ": bad integer '" + s + "'");
  }
}

ordered_json timing_json(const TimingSplit& t) {
  return ordered_json{{"sequence_construction_ns", t.sequence_construction},
                      {"setup_ns", t.setup},
                      {"evaluation_ns", t.evaluation}};
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path dir = path.parent_path();
  if (!dir.empty()) std::filesystem::create_directories(dir);
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void write_pulse(const std::filesystem::path& csv_path, const SampledPulse& pulse,
                 const std::string& description) {
  pulse.validate();
  std::ostringstream csv;
  csv << "index,re,im\n";
  for (std::size_t i = 0; i < pulse.samples.size(); ++i)
    csv << i << ',' << format_double(pulse.samples[i].real()) << ','
        << format_double(pulse.samples[i].imag()) << '\n';
  write_text_atomic(csv_path, csv.str());

  ordered_json side{{"dt_ns", pulse.dt},
                    {"n_samples", pulse.samples.size()},
                    {"description", description}};
  write_text_atomic(sidecar_path(csv_path), side.dump(2) + "\n");
}

SampledPulse read_pulse(const std::filesystem::path& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw ConfigError("pulse: cannot open '" + csv_path.string() + "'");

  SampledPulse pulse;
  std::string line;
  if (!std::getline(in, line) || split_csv_row(line) != std::vector<std::string>{"index", "re", "im"})
    throw ConfigError("parse error at " + csv_path.string() + " row 1: expected header index,re,im");

  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::string where = csv_path.string() + " row " + std::to_string(row);
    auto cells = split_csv_row(line);
    if (cells.size() != 3) throw ConfigError("parse error at " + where + ": expected 3 columns");
    long idx = parse_long(cells[0], where);
    if (idx != static_cast<long>(pulse.samples.size()))
      throw ConfigError("parse error at " + where + ": index out of order");
    pulse.samples.emplace_back(parse_double(cells[1], where), parse_double(cells[2], where));
  }
  if (pulse.samples.empty())
    throw ConfigError("parse error at " + csv_path.string() + ": no samples");

  std::filesystem::path side = sidecar_path(csv_path);
  std::ifstream side_in(side);
  if (!side_in) throw ConfigError("pulse: cannot open sidecar '" + side.string() + "'");
  ordered_json j;
  try {
    side_in >> j;
    pulse.dt = j.at("dt_ns").get<double>();
    auto n = j.at("n_samples").get<std::size_t>();
    if (n != pulse.samples.size())
      throw ConfigError("pulse: sidecar n_samples does not match CSV row count");
  } catch (const ordered_json::exception& e) {
    throw ConfigError("pulse: bad sidecar '" + side.string() + "': " + e.what());
  }
  pulse.validate();
  return pulse;
}

void write_awg(const std::filesystem::path& csv_path, const IqSamples& iq) {
  std::ostringstream csv;
  csv << "index,i,q\n";
  for (std::size_t n = 0; n < iq.i.size(); ++n)
    csv << n << ',' << format_double(iq.i[n]) << ',' << format_double(iq.q[n]) << '\n';
  write_text_atomic(csv_path, csv.str());
}

void write_trace_jsonl(const std::filesystem::path& path, const OptimizationTrace& trace) {
  std::ostringstream out;
  for (const IterationRecord& rec : trace.iterations) {
    ordered_json j{{"iter", rec.iteration},
                   {"best", rec.best_so_far},
                   {"mean_cost", rec.mean_cost},
                   {"sigma", rec.sigma},
                   {"timings", timing_json(rec.timings)}};
    out << j.dump() << '\n';
  }
  write_text_atomic(path, out.str());
}

void write_candidates_csv(const std::filesystem::path& path, const OptimizationTrace& trace) {
  std::ostringstream out;
  out << "iter,candidate,cost\n";
  for (const IterationRecord& rec : trace.iterations)
    for (std::size_t k = 0; k < rec.costs.size(); ++k)
      out << rec.iteration << ',' << k << ',' << format_double(rec.costs[k]) << '\n';
  write_text_atomic(path, out.str());
}

void write_rb_dataset(const std::filesystem::path& path, const RbDataset& dataset) {
  std::ostringstream out;
  out << "m,seq_index,shots,n0,n1,n2\n";
  for (const RbPoint& pt : dataset.points)
    out << pt.length << ',' << pt.seq_index << ',' << pt.shots << ',' << pt.n0 << ',' << pt.n1
        << ',' << pt.n2 << '\n';
  write_text_atomic(path, out.str());
}

RbDataset read_rb_dataset(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("rb dataset: cannot open '" + path.string() + "'");
  RbDataset data;
  std::string line;
  if (!std::getline(in, line) ||
      split_csv_row(line) != std::vector<std::string>{"m", "seq_index", "shots", "n0", "n1", "n2"})
    throw ConfigError("parse error at " + path.string() +
                      " row 1: expected header m,seq_index,shots,n0,n1,n2");
  long row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::string where = path.string() + " row " + std::to_string(row);
    auto cells = split_csv_row(line);
    if (cells.size() != 6) throw ConfigError("parse error at " + where + ": expected 6 columns");
    RbPoint pt;
    pt.length = static_cast<int>(parse_long(cells[0], where));
    pt.seq_index = static_cast<int>(parse_long(cells[1], where));
    pt.shots = static_cast<int>(parse_long(cells[2], where));
    pt.n0 = static_cast<int>(parse_long(cells[3], where));
    pt.n1 = static_cast<int>(parse_long(cells[4], where));
    pt.n2 = static_cast<int>(parse_long(cells[5], where));
    if (pt.n0 + pt.n1 + pt.n2 != pt.shots)
      throw ConfigError("parse error at " + where + ": counts do not sum to shots");
    data.points.push_back(pt);
    if (data.lengths.empty() || data.lengths.back() != pt.length)
      data.lengths.push_back(pt.length);
    data.shots = pt.shots;
  }
  if (data.points.empty()) throw ConfigError("rb dataset: no rows in '" + path.string() + "'");
  data.sequences = static_cast<int>(data.points.size() / data.lengths.size());
  return data;
}

void write_rb_curve(const std::filesystem::path& path, const std::vector<RbCurvePoint>& curve) {
  std::ostringstream out;
  out << "m,p0_mean,p0_err\n";
  for (const RbCurvePoint& cp : curve)
    out << cp.length << ',' << format_double(cp.mean) << ',' << format_double(cp.stderr_mean)
        << '\n';
  write_text_atomic(path, out.str());
}

namespace {

ordered_json fit_json(const DecayFitResult& fit) {
  return ordered_json{{"offset", fit.offset},
                      {"amplitude", fit.amplitude},
                      {"decay", fit.decay},
                      {"offset_err", fit.offset_err},
                      {"amplitude_err", fit.amplitude_err},
                      {"decay_err", fit.decay_err},
                      {"residual_norm", fit.residual_norm},
                      {"converged", fit.converged},
                      {"identifiable", fit.identifiable}};
}

}  // namespace

void write_leakage_result(const std::filesystem::path& path, const LeakageResult& result) {
  ordered_json j{{"L1", result.l1},
                 {"lambda1", result.lambda1},
                 {"lambda2", result.lambda2},
                 {"F_avg", result.f_avg},
                 {"stderr",
                  {{"L1", result.l1_err},
                   {"lambda1", result.lambda1_err},
                   {"lambda2", result.lambda2_err},
                   {"F_avg", result.f_avg_err}}},
                 {"fit_diagnostics",
                  {{"chi1", fit_json(result.chi1_fit)}, {"p0", fit_json(result.p0_fit)}}}};
  write_text_atomic(path, j.dump(2) + "\n");
}

}  // namespace qoct
