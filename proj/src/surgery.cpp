#include "ccflow/surgery.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ccflow/jacobian.hpp"

namespace ccflow {

DelaunayReport delaunay_check(const TriangulatedSurface& mesh, const MetricState& ms) {
  DelaunayReport rep;
  rep.slack.resize(mesh.num_edges());
  for (int e = 0; e < mesh.num_edges(); ++e) {
    const int ha = mesh.halfedge_of_edge(e);
    const int hb = mesh.twin(ha);
    // Corner opposite a side h is at next(next(h)); endpoint corners are at h
    // (origin) and next(h) (target).
    const double opp = ms.angle[mesh.prev(ha)] + ms.angle[mesh.prev(hb)];
    if (ms.background == Background::Euclidean) {
      rep.slack[e] = std::numbers::pi - opp;
    } else {
      const double adj = ms.angle[ha] + ms.angle[mesh.next(ha)] + ms.angle[hb] +
                         ms.angle[mesh.next(hb)];
      rep.slack[e] = adj - opp;
    }
  }
  rep.min_slack = rep.slack.minCoeff();
  for (int e = 0; e < mesh.num_edges(); ++e)
    if (rep.slack[e] < -kDelaunayTolerance) rep.violations.push_back(e);
  std::sort(rep.violations.begin(), rep.violations.end(),
            [&](int a, int b) { return rep.slack[a] != rep.slack[b] ? rep.slack[a] < rep.slack[b]
                                                                    : a < b; });
  return rep;
}

namespace {

// Picks the flip candidate under the active trigger; -1 when none.
int worst_violation(const TriangulatedSurface& mesh, const ConformalFamily& family,
                    const MetricState& ms, FlipTrigger trigger, double* slack_out) {
  if (trigger == FlipTrigger::MetricDelaunay) {
    const DelaunayReport rep = delaunay_check(mesh, ms);
    if (rep.clean()) return -1;
    *slack_out = rep.slack[rep.violations.front()];
    return rep.violations.front();
  }
  const WeightedDelaunayReport rep = weighted_delaunay_indicator(mesh, family, ms);
  int best = -1;
  double worst = kDelaunayTolerance;
  for (int e = 0; e < mesh.num_edges(); ++e) {
    if (rep.indicator[e] > worst) {
      worst = rep.indicator[e];
      best = e;
    }
  }
  if (best >= 0) *slack_out = -rep.indicator[best];
  return best;
}

} // namespace

std::vector<FlipEvent> flip_to_delaunay(TriangulatedSurface& mesh, ConformalFamily& family,
                                        double t_now, FlipTrigger trigger) {
  std::vector<FlipEvent> events;
  const long long budget = 50LL * mesh.num_edges();
  MetricState ms = compute_metric(mesh, family.lengths(), family.background());
  for (long long count = 0;; ++count) {
    double slack = 0.0;
    const int e = worst_violation(mesh, family, ms, trigger, &slack);
    if (e < 0) break;
    if (count >= budget)
      throw Error(ErrorCode::FlipLimitExceeded,
                  "more than 50*E flips in one restoration pass");

    FlipEvent ev;
    ev.t = t_now;
    ev.slack_before = slack;
    ev.area_before = ms.total_area();

    const int ha = mesh.halfedge_of_edge(e);
    const int hb = mesh.twin(ha);
    ev.v_i = mesh.origin(ha);
    ev.v_j = mesh.target(ha);
    ev.v_k = mesh.origin(mesh.prev(ha));
    ev.v_l = mesh.origin(mesh.prev(hb));
    const VectorXd& L = family.lengths();
    const double l_ij = L[e];
    const double l_jk = L[mesh.edge_of(mesh.next(ha))];
    const double l_ki = L[mesh.edge_of(mesh.prev(ha))];
    const double l_il = L[mesh.edge_of(mesh.next(hb))];
    const double l_lj = L[mesh.edge_of(mesh.prev(hb))];
    ev.new_length = flip_diagonal_length(l_ij, l_jk, l_ki, l_il, l_lj, family.background());

    const int e_new = mesh.flip_edge(e);
    family.apply_flip(mesh, e_new, ev.new_length);

    ms = compute_metric(mesh, family.lengths(), family.background());
    ev.area_after = ms.total_area();
    if (trigger == FlipTrigger::MetricDelaunay) {
      ev.slack_after = delaunay_check(mesh, ms).slack[e_new];
    } else {
      ev.slack_after = -weighted_delaunay_indicator(mesh, family, ms).indicator[e_new];
    }
    events.push_back(ev);
  }
  return events;
}

} // namespace ccflow
