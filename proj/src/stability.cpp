#include "loopscope/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <tuple>

#include "loopscope/error.hpp"

namespace loopscope::stability {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct Extremum {
  std::size_t index;
  bool minimum;
  double value;
};

std::vector<Extremum> extrema(const std::vector<double>& p) {
  std::vector<Extremum> out;
  const std::size_t n = p.size();
  if (n < 2) return out;
  for (std::size_t i = 0; i < n; ++i) {
    const bool below_left = i == 0 || p[i] < p[i - 1];
    const bool below_right = i + 1 == n || p[i] < p[i + 1];
    const bool above_left = i == 0 || p[i] > p[i - 1];
    const bool above_right = i + 1 == n || p[i] > p[i + 1];
    if (below_left && below_right) out.push_back({i, true, p[i]});
    else if (above_left && above_right) out.push_back({i, false, p[i]});
  }
  return out;
}

bool is_side_lobe(const std::vector<Extremum>& ext, std::size_t j, double ratio) {
  const double v = ext[j].value;
  auto dominated_by = [&](const Extremum& other) {
    return (other.value > 0) != (v > 0) && std::abs(v) <= ratio * std::abs(other.value);
  };
  return (j > 0 && dominated_by(ext[j - 1])) || (j + 1 < ext.size() && dominated_by(ext[j + 1]));
}

}  // namespace

double StabilityCurve::freq_hz(std::size_t i) const { return std::exp(log_freq[i]) / kTwoPi; }

StabilityCurve stability_curve(const sweep::NodeResponse& resp) {
  if (!resp.grid) throw Error(Errc::MismatchedGrids, "response for node '" + resp.node + "' has no grid");
  return stability_curve(resp.node, *resp.grid, resp.magnitude, resp.clamped);
}

StabilityCurve stability_curve(std::string node, const sweep::FrequencyGrid& grid, std::span<const double> magnitude,
                               std::span<const std::uint8_t> clamped) {
  const std::size_t n = grid.size();
  if (magnitude.size() != n || (!clamped.empty() && clamped.size() != n))
    throw Error(Errc::MismatchedGrids, "magnitude length does not match the frequency grid");
  if (n < 3) throw Error(Errc::GridTooShort, "stability curve needs at least 3 grid points");

  // ln|V| split as ln(mantissa) + exponent*ln2 so that power-of-two scaling
  // cancels exactly in the integer part.
  std::vector<double> lm(n);
  std::vector<long> ex(n);
  std::vector<std::uint8_t> floored(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    double m = magnitude[i];
    if (!(m >= sweep::kMagnitudeFloor)) {
      m = sweep::kMagnitudeFloor;
      floored[i] = 1;
    }
    if (!clamped.empty() && clamped[i]) floored[i] = 1;
    int e = 0;
    lm[i] = std::log(std::frexp(m, &e));
    ex[i] = e;
  }

  StabilityCurve c;
  c.node = std::move(node);
  c.f_start = grid.f_start;
  c.f_stop = grid.f_stop;
  c.log_freq.resize(n - 2);
  c.p.resize(n - 2);
  c.clamped.resize(n - 2);
  const double h2 = grid.log_step * grid.log_step;
  for (std::size_t k = 0; k + 2 < n; ++k) {
    const std::size_t i = k + 1;
    const double dm = (lm[i + 1] - lm[i]) - (lm[i] - lm[i - 1]);
    const long de = ex[i + 1] - 2 * ex[i] + ex[i - 1];
    c.p[k] = (dm + static_cast<double>(de) * std::numbers::ln2) / h2;
    c.log_freq[k] = std::log(kTwoPi * grid.freqs[i]);
    c.clamped[k] = floored[i - 1] | floored[i] | floored[i + 1];
  }
  return c;
}

std::pair<double, double> refine_peak(const StabilityCurve& curve, std::size_t index) {
  const auto raw = std::make_pair(curve.freq_hz(index), curve.p[index]);
  if (index == 0 || index + 1 >= curve.size()) return raw;

  const double x1 = curve.log_freq[index];
  const double u0 = curve.log_freq[index - 1] - x1;
  const double u2 = curve.log_freq[index + 1] - x1;
  const double y1 = curve.p[index];
  const double d0 = curve.p[index - 1] - y1;
  const double d2 = curve.p[index + 1] - y1;
  const double det = u0 * u2 * (u0 - u2);
  if (det == 0.0) return raw;
  const double a = (d0 * u2 - d2 * u0) / det;
  const double b = (u0 * u0 * d2 - u2 * u2 * d0) / det;
  const double scale = std::abs(curve.p[index - 1]) + std::abs(y1) + std::abs(curve.p[index + 1]);
  if (!std::isfinite(a) || std::abs(a * u0 * u2) <= 8 * std::numeric_limits<double>::epsilon() * scale) return raw;

  const double u = std::clamp(-b / (2 * a), u0, u2);
  const double y = y1 + u * (b + a * u);
  return {std::exp(x1 + u) / kTwoPi, y};
}

std::vector<Peak> detect_peaks(const StabilityCurve& curve, const DetectOptions& options) {
  const auto ext = extrema(curve.p);
  const std::size_t n = curve.size();
  std::vector<Peak> peaks;

  for (std::size_t j = 0; j < ext.size(); ++j) {
    const auto& e = ext[j];
    const bool pole = e.minimum && e.value < -options.floor;
    const bool zero = !e.minimum && e.value > options.floor;
    if ((!pole && !zero) || curve.clamped[e.index]) continue;

    Peak pk;
    pk.node = curve.node;
    pk.kind = pole ? PeakKind::ComplexPole : PeakKind::ComplexZero;
    pk.index = e.index;
    if (e.index == 0 || e.index + 1 == n) pk.flags |= kEndOfRange;
    if (is_side_lobe(ext, j, options.side_lobe_ratio)) pk.flags |= kSideLobe;

    const bool neighbour_clamped =
        (e.index > 0 && curve.clamped[e.index - 1]) || (e.index + 1 < n && curve.clamped[e.index + 1]);
    if (neighbour_clamped) pk.flags |= kClampedData;

    std::tie(pk.natural_freq, pk.p_value) =
        neighbour_clamped ? std::make_pair(curve.freq_hz(e.index), e.value) : refine_peak(curve, e.index);
    pk.natural_freq = std::clamp(pk.natural_freq, curve.f_start, curve.f_stop);
    peaks.push_back(std::move(pk));
  }

  // Complex pole and zero at nearly the same frequency: judge them together.
  const double gap = std::log1p(options.doublet_gap);
  for (auto& a : peaks) {
    if (a.kind != PeakKind::ComplexPole || a.has(kSideLobe)) continue;
    for (auto& b : peaks) {
      if (b.kind != PeakKind::ComplexZero || b.has(kSideLobe)) continue;
      if (std::abs(std::log(a.natural_freq / b.natural_freq)) <= gap) {
        a.flags |= kPoleZeroDoublet;
        b.flags |= kPoleZeroDoublet;
      }
    }
  }

  const unsigned ungraded = kEndOfRange | kSideLobe | kClampedData;
  for (auto& pk : peaks) {
    if (pk.kind != PeakKind::ComplexPole) continue;
    const double zeta = zeta_from_index(pk.p_value);
    const auto est = table1_lookup(zeta, options.thresholds);
    pk.zeta = zeta;
    pk.phase_margin_deg = est.phase_margin_deg;
    pk.overshoot_pct = est.overshoot_pct;
    pk.oscillatory = zeta < 1.0;
    pk.severity = (pk.flags & ungraded) ? Severity::Ungraded : est.severity;
  }
  return peaks;
}

const char* kind_name(PeakKind k) { return k == PeakKind::ComplexPole ? "ComplexPole" : "ComplexZero"; }

const char* severity_name(Severity s) {
  switch (s) {
    case Severity::UnstableRisk:
      return "Unstable-Risk";
    case Severity::Marginal:
      return "Marginal";
    case Severity::Acceptable:
      return "Acceptable";
    case Severity::Ungraded:
      return "Ungraded";
  }
  return "?";
}

namespace {
constexpr std::pair<PeakFlag, const char*> kFlagNames[] = {
    {kEndOfRange, "end-of-range"},
    {kPoleZeroDoublet, "pole-zero-doublet"},
    {kClampedData, "clamped-data"},
    {kSideLobe, "side-lobe"},
};
}

std::vector<std::string> flag_names(unsigned flags) {
  std::vector<std::string> out;
  for (const auto& [f, name] : kFlagNames)
    if (flags & f) out.emplace_back(name);
  return out;
}

unsigned flag_from_name(std::string_view name) {
  for (const auto& [f, n] : kFlagNames)
    if (name == n) return f;
  return 0;
}

}  // namespace loopscope::stability
