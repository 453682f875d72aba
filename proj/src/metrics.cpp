#include "zomgt/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace zomgt {

double consensus_error(const NetworkState& state) {
  const Eigen::VectorXd mean = state.mean_x();
  double acc = 0.0;
  for (const auto& a : state.agents) acc += (a.x - mean).squaredNorm();
  return acc / static_cast<double>(state.n());
}

double tracking_error(const NetworkState& state, const Problem& problem) {
  if (state.agents.front().m.size() == 0)
    return std::numeric_limits<double>::quiet_NaN();
  return (state.mean_m() - problem.global_gradient(state.mean_x()))
      .squaredNorm();
}

double conservation_residual(const NetworkState& state) {
  if (state.agents.front().y.size() == 0)
    return std::numeric_limits<double>::quiet_NaN();
  return (state.mean_y() - state.mean_m()).norm();
}

MetricsRow collect_metrics(const NetworkState& state, const Problem& problem,
                           double wall_ms) {
  MetricsRow row;
  row.k = state.k;
  row.grad_norm_sq = problem.global_gradient(state.mean_x()).squaredNorm();
  row.consensus_err = consensus_error(state);
  row.tracking_err = tracking_error(state, problem);
  row.conservation_resid = conservation_residual(state);
  row.queries_cum = state.queries_total;
  row.wall_ms = wall_ms;
  if (!state.monitor_loss.empty()) {
    double acc = 0.0;
    for (double v : state.monitor_loss) acc += v;
    row.loss = acc / static_cast<double>(state.monitor_loss.size());
  }
  return row;
}

std::string MetricsRow::csv_header() {
  return "k,algorithm,grad_norm_sq,consensus_err,tracking_err,"
         "conservation_resid,queries_cum,wall_ms,loss";
}

std::string MetricsRow::csv(const std::string& algorithm) const {
  std::ostringstream os;
  os.precision(17);
  os << k << "," << algorithm << "," << grad_norm_sq << "," << consensus_err
     << "," << tracking_err << "," << conservation_resid << "," << queries_cum
     << "," << wall_ms << ",";
  if (loss) os << *loss;
  return os.str();
}

FloorEstimate steady_state_floor(std::span<const double> series, int window) {
  if (window < 1) throw MetricsError("steady_state_floor: window must be >= 1");
  if (static_cast<int>(series.size()) < window)
    throw MetricsError("steady_state_floor: series shorter than window");
  std::vector<double> tail(series.end() - window, series.end());
  std::sort(tail.begin(), tail.end());
  FloorEstimate fe;
  fe.window = window;
  const int mid = window / 2;
  fe.value = (window % 2 == 1) ? tail[mid]
                               : 0.5 * (tail[mid - 1] + tail[mid]);
  return fe;
}

double loglog_slope(std::span<const std::pair<double, double>> points) {
  if (points.size() < 2)
    throw MetricsError("loglog_slope: need at least 2 points");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double n = static_cast<double>(points.size());
  for (const auto& [x, y] : points) {
    if (x <= 0.0 || y <= 0.0)
      throw MetricsError("loglog_slope: nonpositive value");
    const double lx = std::log(x);
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw MetricsError("loglog_slope: degenerate abscissae");
  return (n * sxy - sx * sy) / denom;
}

}  // namespace zomgt
