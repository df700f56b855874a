#include "scalefit/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>

#include "scalefit/error.hpp"
#include "scalefit/tables.hpp"
#include "version.hpp"

namespace scalefit {

std::string_view tool_version() noexcept { return SCALEFIT_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorKind::Invariant, "sha256: digest failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

Report::Report(std::string command) : command_(std::move(command)) {}

void Report::add_input(std::string name, std::string_view content) {
  inputs_.push_back({std::move(name), sha256_hex(content), content.size()});
}

std::string Report::input_digest() const {
  std::string joined;
  for (const auto& in : inputs_) joined += in.sha256;
  return sha256_hex(joined);
}

Json Report::document(std::optional<std::string> generated_at) const {
  Json j;
  j["tool"] = kToolName;
  j["version"] = tool_version();
  j["command"] = command_;
  Json inputs = Json::array();
  for (const auto& in : inputs_) {
    Json e;
    e["name"] = in.name;
    e["sha256"] = in.sha256;
    e["bytes"] = in.bytes;
    inputs.push_back(std::move(e));
  }
  j["inputs"] = std::move(inputs);
  j["input_digest"] = input_digest();
  j["parameters"] = parameters_;
  j["settings"] = settings_;
  j["results"] = results_;
  j["provenance"] = provenance_;
  j["warnings"] = warnings_;
  j["summary"] = lines_;
  j["exit_code"] = exit_code_;
  if (generated_at) j["generated_at"] = *generated_at;
  return j;
}

std::string Report::body() const { return document().dump(2); }

std::string Report::text() const {
  std::ostringstream os;
  os << kToolName << " " << tool_version() << " " << command_ << "\n";
  for (const auto& in : inputs_) os << "input " << in.name << "  sha256 " << in.sha256 << "\n";
  for (const auto& l : lines_) os << l << "\n";
  for (const auto& w : warnings_) os << "warning: " << w << "\n";
  return os.str();
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::array<char, 32> buf{};
  std::strftime(buf.data(), buf.size(), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf.data();
}

std::string strip_timestamp(const Json& document) {
  Json copy = document;
  if (copy.is_object()) copy.erase("generated_at");
  return copy.dump(2);
}

std::vector<DataPoint> sample_law(const ScalingLaw& law, double lo, double hi, std::size_t count) {
  std::vector<DataPoint> out;
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) return out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const double x = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    out.push_back({x, eval_law(law, x)});
  }
  return out;
}

std::vector<DataPoint> sample_power(const PurePowerLaw& law, double lo, double hi,
                                    std::size_t count) {
  std::vector<DataPoint> out;
  if (!(lo > 0.0) || !(hi >= lo) || count == 0) return out;
  for (std::size_t i = 0; i < count; ++i) {
    const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    const double x = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    out.push_back({x, law(x)});
  }
  return out;
}

std::string plot_csv(const Plot& plot) {
  std::ostringstream os;
  os << "series,x,y\n";
  for (const auto& s : plot.series)
    for (const auto& p : s.points) os << s.name << "," << format_number(p.x) << "," << format_number(p.y) << "\n";
  return os.str();
}

namespace {

struct Axis {
  double lo = 0.0;  // log10
  double hi = 1.0;
  std::vector<double> ticks;  // values, not logs
};

Axis make_axis(double min_v, double max_v) {
  Axis a;
  double lmin = std::log10(min_v), lmax = std::log10(max_v);
  if (lmax - lmin < 1e-9) {
    lmin -= 0.5;
    lmax += 0.5;
  }
  const double span = lmax - lmin;
  a.lo = lmin - 0.04 * span;
  a.hi = lmax + 0.04 * span;
  std::vector<double> mult{1.0};
  if (span < 1.5) mult = {1.0, 2.0, 5.0};
  if (span < 0.5) mult = {1.0, 1.5, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0};
  int stride = 1;
  while ((a.hi - a.lo) / stride > 10.0) ++stride;
  for (int d = static_cast<int>(std::floor(a.lo)); d <= static_cast<int>(std::ceil(a.hi)); ++d) {
    if (mult.size() == 1 && d % stride != 0) continue;
    for (const double m : mult) {
      const double v = m * std::pow(10.0, d);
      const double lv = std::log10(v);
      if (lv >= a.lo && lv <= a.hi) a.ticks.push_back(v);
    }
  }
  return a;
}

std::string tick_label(double v) {
  std::array<char, 32> buf{};
  const double l = std::log10(v);
  if (std::fabs(l - std::round(l)) < 1e-9 && (l > 3.5 || l < -2.5)) {
    std::snprintf(buf.data(), buf.size(), "1e%d", static_cast<int>(std::round(l)));
  } else {
    std::snprintf(buf.data(), buf.size(), "%g", v);
  }
  return buf.data();
}

std::string escape(std::string_view s) {
  std::string out;
  for (const char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string plot_svg(const Plot& plot) {
  constexpr double W = 640, H = 440, ml = 70, mr = 20, mt = 36, mb = 56;
  constexpr std::array<const char*, 6> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  double xmin = HUGE_VAL, xmax = -HUGE_VAL, ymin = HUGE_VAL, ymax = -HUGE_VAL;
  for (const auto& s : plot.series)
    for (const auto& p : s.points)
      if (p.x > 0 && p.y > 0 && std::isfinite(p.x) && std::isfinite(p.y)) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
        ymin = std::min(ymin, p.y);
        ymax = std::max(ymax, p.y);
      }
  if (!(xmin <= xmax)) xmin = 1, xmax = 10, ymin = 1, ymax = 10;
  const Axis ax = make_axis(xmin, xmax), ay = make_axis(ymin, ymax);
  auto px = [&](double x) { return ml + (std::log10(x) - ax.lo) / (ax.hi - ax.lo) * (W - ml - mr); };
  auto py = [&](double y) { return H - mb - (std::log10(y) - ay.lo) / (ay.hi - ay.lo) * (H - mt - mb); };

  std::ostringstream os;
  char buf[160];
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"440\" viewBox=\"0 0 640 440\" "
        "font-family=\"sans-serif\" font-size=\"11\">\n";
  os << "<rect width=\"640\" height=\"440\" fill=\"white\"/>\n";
  os << "<text x=\"320\" y=\"20\" text-anchor=\"middle\" font-size=\"13\">" << escape(plot.title) << "</text>\n";
  std::snprintf(buf, sizeof buf, "<rect x=\"%.2f\" y=\"%.2f\" width=\"%.2f\" height=\"%.2f\" fill=\"none\" stroke=\"black\"/>\n",
                ml, mt, W - ml - mr, H - mt - mb);
  os << buf;
  for (const double t : ax.ticks) {
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n", px(t), mt, px(t), H - mb);
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\">", px(t), H - mb + 16);
    os << buf << tick_label(t) << "</text>\n";
  }
  for (const double t : ay.ticks) {
    std::snprintf(buf, sizeof buf, "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#ddd\"/>\n", ml, py(t), W - mr, py(t));
    os << buf;
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\">", ml - 6, py(t) + 4);
    os << buf << tick_label(t) << "</text>\n";
  }
  os << "<text x=\"" << (ml + W - mr) / 2 << "\" y=\"" << H - 14 << "\" text-anchor=\"middle\">" << escape(plot.x_label) << "</text>\n";
  os << "<text transform=\"translate(16," << (mt + H - mb) / 2 << ") rotate(-90)\" text-anchor=\"middle\">"
     << escape(plot.y_label) << "</text>\n";

  for (std::size_t k = 0; k < plot.series.size(); ++k) {
    const auto& s = plot.series[k];
    const char* color = kColors[k % kColors.size()];
    if (s.dashed_line) {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" stroke-dasharray=\"6 4\" points=\"";
      bool first = true;
      for (const auto& p : s.points) {
        if (!(p.x > 0 && p.y > 0)) continue;
        std::snprintf(buf, sizeof buf, "%s%.2f,%.2f", first ? "" : " ", px(p.x), py(p.y));
        os << buf;
        first = false;
      }
      os << "\"/>\n";
    } else {
      for (const auto& p : s.points) {
        if (!(p.x > 0 && p.y > 0)) continue;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"2.5\" fill=\"%s\"/>\n", px(p.x), py(p.y), color);
        os << buf;
      }
    }
    std::snprintf(buf, sizeof buf, "<text x=\"%.2f\" y=\"%.2f\" fill=\"%s\">", W - mr - 150, mt + 14 + 14.0 * k, color);
    os << buf << escape(s.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::Parse, path.string() + ": cannot write");
  out << content;
  if (!out) fail(ErrorKind::Parse, path.string() + ": write failed");
}

}  // namespace scalefit
