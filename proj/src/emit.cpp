#include "pobandit/emit.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pobandit/errors.hpp"

namespace pobandit {

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_csv(std::ostream& out, std::span<const CsvRow> rows) {
  out << kCsvHeader << '\n';
  for (const CsvRow& r : rows)
    out << r.experiment << ',' << r.policy << ',' << r.run << ',' << r.series << ',' << r.t << ','
        << format_value(r.value) << '\n';
}

std::vector<CsvRow> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) throw Error(ErrorKind::ParseError, "missing CSV header");
  std::vector<CsvRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6) throw Error(ErrorKind::ParseError, "line " + std::to_string(line_no) + ": expected 6 cells");
    CsvRow r{cells[0], cells[1], cells[2], cells[3], 0, 0.0};
    r.t = std::stoull(cells[4]);
    r.value = std::strtod(cells[5].c_str(), nullptr);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<CsvRow> curve_rows(const std::string& experiment, std::span<const SeriesCurve> curves) {
  std::vector<CsvRow> rows;
  for (const SeriesCurve& c : curves)
    for (std::size_t k = 0; k < c.curves.t.size(); ++k) {
      rows.push_back({experiment, c.policy, "mean", c.series, c.curves.t[k], c.curves.mean[k]});
      rows.push_back({experiment, c.policy, "worst", c.series, c.curves.t[k], c.curves.worst[k]});
    }
  return rows;
}

std::vector<CsvRow> run_rows(const ExperimentReport& report) {
  std::vector<CsvRow> rows;
  const std::string& exp = report.spec.name;
  for (std::size_t p = 0; p < report.policies.size(); ++p)
    for (const RunTrace& tr : report.traces[p]) {
      const std::string run = std::to_string(tr.run);
      for (std::size_t t : report.grid) {
        rows.push_back({exp, tr.policy, run, "regret", t, tr.regret(t)});
        const Checkpoint* c = tr.checkpoint_at(t);
        for (std::size_t i = 0; c && i < tr.num_arms; ++i) {
          const std::string suffix = "_arm_" + std::to_string(i + 1);
          rows.push_back({exp, tr.policy, run, "n" + suffix, t, static_cast<double>(c->pulls[i])});
          if (!c->est_error.empty())
            rows.push_back({exp, tr.policy, run, "err_norm" + suffix, t, normalized_estimation_error(tr, i, t)});
        }
        if (!tr.correct.empty()) rows.push_back({exp, tr.policy, run, "cdr", t, correct_decision_rate(tr, t)});
      }
    }
  return rows;
}

namespace {

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    switch (ch) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += ch;
    }
  }
  return out;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

void write_svg(std::ostream& out, const std::string& title, std::span<const SeriesCurve> curves) {
  constexpr double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double tmin = INFINITY, tmax = -INFINITY, vmin = INFINITY, vmax = -INFINITY;
  for (const auto& c : curves)
    for (std::size_t k = 0; k < c.curves.t.size(); ++k) {
      tmin = std::min(tmin, static_cast<double>(c.curves.t[k]));
      tmax = std::max(tmax, static_cast<double>(c.curves.t[k]));
      vmin = std::min({vmin, c.curves.mean[k], c.curves.worst[k]});
      vmax = std::max({vmax, c.curves.mean[k], c.curves.worst[k]});
    }
  if (!std::isfinite(tmin)) { tmin = 0; tmax = 1; vmin = 0; vmax = 1; }
  if (tmax == tmin) tmax = tmin + 1;
  if (vmax == vmin) vmax = vmin + 1;
  auto px = [&](double t) { return L + (t - tmin) / (tmax - tmin) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - vmin) / (vmax - vmin) * (H - T - B); };

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 "
      << W << ' ' << H << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
      << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n"
      << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
      << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  auto label = [&](double x, double y, const std::string& text, const char* anchor) {
    out << "<text x=\"" << x << "\" y=\"" << y << "\" text-anchor=\"" << anchor
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(text) << "</text>\n";
  };
  char buf[32];
  for (int k = 0; k <= 4; ++k) {
    const double t = tmin + (tmax - tmin) * k / 4.0;
    std::snprintf(buf, sizeof buf, "%.0f", t);
    label(px(t), H - B + 16, buf, "middle");
    const double v = vmin + (vmax - vmin) * k / 4.0;
    std::snprintf(buf, sizeof buf, "%.3g", v);
    label(L - 6, py(v) + 4, buf, "end");
  }
  label(W / 2, H - 12, "time", "middle");

  for (std::size_t c = 0; c < curves.size(); ++c) {
    const char* color = kPalette[c % std::size(kPalette)];
    const auto& cv = curves[c].curves;
    for (int which = 0; which < 2; ++which) {
      out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\""
          << (which ? " stroke-dasharray=\"5,3\"" : "") << " points=\"";
      for (std::size_t k = 0; k < cv.t.size(); ++k)
        out << (k ? " " : "") << px(static_cast<double>(cv.t[k])) << ',' << py(which ? cv.worst[k] : cv.mean[k]);
      out << "\"/>\n";
    }
    label(W - R - 4, T + 14 * (c + 1), curves[c].policy + " (solid mean, dashed worst)", "end");
  }
  out << "</svg>\n";
}

void write_report(std::ostream& out, const ExperimentReport& report) {
  out << to_config_text(report.spec);
  out << "# seeds\n";
  for (std::size_t k = 0; k < report.seeds.size(); ++k) out << "seed." << k << " = " << report.seeds[k] << "\n";
  if (!report.traces.empty())
    for (const RunTrace& tr : report.traces.front()) {
      if (tr.p_hat.empty()) continue;
      out << "margin." << tr.run << " = kappa " << format_value(tr.kappa_hat) << " p_hat";
      for (double p : tr.p_hat) out << " " << format_value(p);
      out << "\n";
    }
  for (const auto& th : report.theorems)
    out << "theorems." << th.policy << " = arm_count " << th.arm_count_pass << "/" << th.arm_count_pairs
        << " eigen " << th.eigen_pass << "/" << th.eigen_pairs << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", report.wall_seconds);
  out << "# wall_seconds = " << buf << "\n";
}

EmittedFiles emit(const ExperimentReport& report, const std::filesystem::path& dir, bool svg) {
  std::filesystem::create_directories(dir);
  EmittedFiles files;
  const std::string& name = report.spec.name;
  files.curves_csv = dir / (name + "_curves.csv");
  files.runs_csv = dir / (name + "_runs.csv");
  {
    std::ofstream out(files.curves_csv, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + files.curves_csv.string());
    write_csv(out, curve_rows(name, report.curves));
  }
  {
    std::ofstream out(files.runs_csv, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + files.runs_csv.string());
    write_csv(out, run_rows(report));
  }
  files.report_txt = dir / (name + "_report.txt");
  {
    std::ofstream out(files.report_txt, std::ios::binary);
    if (!out) throw Error(ErrorKind::IoError, "cannot write " + files.report_txt.string());
    write_report(out, report);
  }
  if (svg) {
    std::map<std::string, std::vector<SeriesCurve>> by_series;
    for (const auto& c : report.curves) by_series[c.series].push_back(c);
    for (const auto& [series, curves] : by_series) {
      const auto path = dir / (name + "_" + series + ".svg");
      std::ofstream out(path, std::ios::binary);
      if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
      write_svg(out, name + ": " + series, curves);
      files.svgs.push_back(path);
    }
  }
  return files;
}

}  // namespace pobandit
