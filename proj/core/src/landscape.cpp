#include "motifmix/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "motifmix/rng.hpp"
#include "motifmix/util.hpp"

namespace motifmix {

EtaEvaluator::EtaEvaluator(const GenerativeModel& gen, double p0_inference)
    : w_(gen.w), M_(gen.M), p0_(p0_inference) {
  gen.validate();
  if (!(p0_ > 0.0 && p0_ < 1.0))
    throw DimensionError("EtaEvaluator: inference p0 must be in (0,1)");
  const WordIndex n_words = word_space_size(w_, M_);
  if (n_words > (1L << 24))
    throw ResourceError("EtaEvaluator: word space too large for exhaustive sums");
  g_.resize(static_cast<std::size_t>(n_words));
  std::vector<Symbol> word(w_, 1);
  KahanSum entropy;
  for (WordIndex idx = 0;; ++idx) {
    const double g = generative_pmf(gen, word);
    g_[static_cast<std::size_t>(idx)] = g;
    if (g > 0.0) entropy.add(g * std::log(g));
    int k = 0;
    while (k < w_ && word[k] == M_) word[k++] = 1;
    if (k == w_) break;
    word[k]++;
  }
  sum_g_log_g_ = entropy.value();
}

double EtaEvaluator::eta(const ThetaMatrix& theta) const {
  if (theta.w() != w_ || theta.M() != M_)
    throw DimensionError("eta: theta (w,M) mismatch");
  hit_zero_ = false;
  KahanSum acc;
  std::vector<Symbol> word(w_, 1);
  for (std::size_t idx = 0;; ++idx) {
    const double g = g_[idx];
    if (g > 0.0) {
      double motif = 1.0, background = 1.0;
      for (int k = 0; k < w_; ++k) {
        const int m = word[k] - 1;
        motif *= theta.rows[k + 1][m];
        background *= theta.rows[0][m];
      }
      const double f = p0_ * motif + (1.0 - p0_) * background;
      if (f <= 0.0) {
        hit_zero_ = true;
        return kNegInf;
      }
      acc.add(g * std::log(f));
    }
    int k = 0;
    while (k < w_ && word[k] == M_) word[k++] = 1;
    if (k == w_) break;
    word[k]++;
  }
  return acc.value();
}

double EtaEvaluator::kl(const ThetaMatrix& theta) const {
  return sum_g_log_g_ - eta(theta);
}

double eta(const ThetaMatrix& theta, const GenerativeModel& gen,
           double p0_inference) {
  return EtaEvaluator(gen, p0_inference).eta(theta);
}

double kl_divergence(const GenerativeModel& gen, const ThetaMatrix& theta,
                     double p0_inference) {
  return EtaEvaluator(gen, p0_inference).kl(theta);
}

ThetaMatrix project_to_margin(const ThetaMatrix& theta, double margin) {
  ThetaMatrix out = theta;
  const int M = theta.M();
  if (!(margin > 0.0 && margin * M < 1.0))
    throw DimensionError("project_to_margin: bad margin");
  for (auto& row : out.rows)
    for (double& v : row) v = (1.0 - M * margin) * v + margin;
  return out;
}

namespace {

double sup_distance(const ThetaMatrix& a, const ThetaMatrix& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.rows.size(); ++k)
    for (std::size_t m = 0; m < a.rows[k].size(); ++m)
      d = std::max(d, std::abs(a.rows[k][m] - b.rows[k][m]));
  return d;
}

struct Climb {
  ThetaMatrix theta;
  double eta = 0.0;
};

struct Move {
  int row, from, to;
};

// Best-improvement coordinate ascent over mass-transfer moves; ties keep
// the lexicographically first move. When no single transfer improves, pairs
// of transfers are tried so the climb can follow ridges where two rows
// trade off against each other.
Climb hill_climb(const EtaEvaluator& ev, ThetaMatrix theta,
                 const GridConfig& grid) {
  const int rows = ev.w() + 1;
  const int M = ev.M();
  const double h = grid.step;

  std::vector<Move> moves;
  for (int k = 0; k < rows; ++k)
    for (int from = 0; from < M; ++from)
      for (int to = 0; to < M; ++to)
        if (to != from) moves.push_back({k, from, to});

  auto can_apply = [&](const Move& m) {
    return theta.rows[m.row][m.from] - h >= grid.margin - 1e-12;
  };
  auto apply = [&](const Move& m, double sign) {
    theta.rows[m.row][m.from] -= sign * h;
    theta.rows[m.row][m.to] += sign * h;
  };

  double cur = ev.eta(theta);
  for (long step = 0; step < grid.max_steps; ++step) {
    double best = cur;
    int b1 = -1, b2 = -1;
    for (std::size_t i = 0; i < moves.size(); ++i) {
      if (!can_apply(moves[i])) continue;
      apply(moves[i], 1.0);
      const double e = ev.eta(theta);
      apply(moves[i], -1.0);
      if (e > best) {
        best = e;
        b1 = static_cast<int>(i);
        b2 = -1;
      }
    }
    if (b1 < 0) {
      // ridge handling: simultaneous pairs of transfers
      for (std::size_t i = 0; i < moves.size() && b1 < 0; ++i) {
        if (!can_apply(moves[i])) continue;
        apply(moves[i], 1.0);
        for (std::size_t j = i + 1; j < moves.size(); ++j) {
          if (!can_apply(moves[j])) continue;
          apply(moves[j], 1.0);
          const double e = ev.eta(theta);
          apply(moves[j], -1.0);
          if (e > best) {
            best = e;
            b1 = static_cast<int>(i);
            b2 = static_cast<int>(j);
            break;  // first improving pair in lexicographic order
          }
        }
        apply(moves[i], -1.0);
      }
    }
    if (b1 < 0) break;
    apply(moves[b1], 1.0);
    if (b2 >= 0) apply(moves[b2], 1.0);
    cur = best;
  }
  return {std::move(theta), cur};
}

std::vector<double> flatten(const ThetaMatrix& t) {
  std::vector<double> v;
  for (const auto& row : t.rows) v.insert(v.end(), row.begin(), row.end());
  return v;
}

}  // namespace

int ModeScan::separated_count() const {
  int c = 0;
  for (const auto& m : modes) c += m.separated;
  return c;
}

ModeScan find_local_maxima(const GenerativeModel& gen, double p0_inference,
                           const std::vector<ThetaMatrix>& starts,
                           const GridConfig& grid,
                           const MultistartConfig& multistart) {
  EtaEvaluator ev(gen, p0_inference);
  const int rows = gen.w + 1;
  const int M = gen.M;

  std::vector<ThetaMatrix> all_starts;
  for (const auto& s : starts)
    all_starts.push_back(project_to_margin(s, grid.margin));
  {
    CounterRng rng(multistart.seed);
    for (int r = 0; r < multistart.random_starts; ++r) {
      ThetaMatrix t;
      t.rows.resize(rows);
      for (int k = 0; k < rows; ++k) t.rows[k] = rng.next_dirichlet_sym(1.0, M);
      all_starts.push_back(project_to_margin(t, grid.margin));
    }
  }

  std::vector<Climb> ends(all_starts.size());
  parallel_for(all_starts.size(), multistart.workers, [&](std::size_t i) {
    ends[i] = hill_climb(ev, all_starts[i], grid);
  });

  // merge endpoints within the sup-norm radius
  const double radius = multistart.merge_radius_cells * grid.step + 1e-12;
  ModeScan scan;
  for (auto& end : ends) {
    bool merged = false;
    for (auto& mode : scan.modes) {
      if (sup_distance(end.theta, mode.theta) <= radius) {
        mode.basin_hits++;
        if (end.eta > mode.eta_value) {
          mode.eta_value = end.eta;
          mode.theta = end.theta;
        }
        merged = true;
        break;
      }
    }
    if (!merged) scan.modes.push_back({end.theta, end.eta, 1, false});
  }

  // basin consolidation: coordinate ascent can stall at several points of
  // one ridge; endpoints whose connecting segment never dips below the
  // lower endpoint belong to the same basin and are not distinct modes
  auto same_basin = [&](const Mode& a, const Mode& b) {
    const auto fa = flatten(a.theta);
    const auto fb = flatten(b.theta);
    const double floor_eta = std::min(a.eta_value, b.eta_value) - 1e-9;
    ThetaMatrix probe;
    probe.rows.assign(rows, std::vector<double>(M, 0.0));
    const int segments = 64;
    for (int t = 1; t < segments; ++t) {
      const double lam = static_cast<double>(t) / segments;
      for (int k = 0; k < rows; ++k)
        for (int m = 0; m < M; ++m)
          probe.rows[k][m] = (1 - lam) * fa[k * M + m] + lam * fb[k * M + m];
      if (ev.eta(probe) < floor_eta) return false;
    }
    return true;
  };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t a = 0; a < scan.modes.size() && !changed; ++a)
      for (std::size_t b = a + 1; b < scan.modes.size() && !changed; ++b) {
        if (!same_basin(scan.modes[a], scan.modes[b])) continue;
        if (scan.modes[a].eta_value < scan.modes[b].eta_value)
          std::swap(scan.modes[a], scan.modes[b]);
        scan.modes[a].basin_hits += scan.modes[b].basin_hits;
        scan.modes.erase(scan.modes.begin() + b);
        changed = true;
      }
  }
  std::sort(scan.modes.begin(), scan.modes.end(),
            [](const Mode& a, const Mode& b) { return a.eta_value > b.eta_value; });

  // pairwise separation certificates on sampled midpoint hyperplanes
  const int n_modes = static_cast<int>(scan.modes.size());
  std::vector<std::vector<bool>> certified(n_modes,
                                           std::vector<bool>(n_modes, false));
  CounterRng cert_rng = CounterRng(multistart.seed).substream(0xcafe);
  for (int a = 0; a < n_modes; ++a)
    for (int b = a + 1; b < n_modes; ++b) {
      const auto fa = flatten(scan.modes[a].theta);
      const auto fb = flatten(scan.modes[b].theta);
      std::vector<double> dir(fa.size()), mid(fa.size());
      double dd = 0.0;
      for (std::size_t i = 0; i < fa.size(); ++i) {
        dir[i] = fb[i] - fa[i];
        mid[i] = 0.5 * (fa[i] + fb[i]);
        dd += dir[i] * dir[i];
      }
      SeparationCertificate cert;
      cert.mode_a = a;
      cert.mode_b = b;
      double surface_max = kNegInf;
      int used = 0;
      ThetaMatrix probe;
      probe.rows.assign(rows, std::vector<double>(M, 0.0));
      // the midpoint itself lies on the plane and inside the margin
      for (int k = 0; k < rows; ++k)
        for (int m = 0; m < M; ++m) probe.rows[k][m] = mid[k * M + m];
      surface_max = std::max(surface_max, ev.eta(probe));
      ++used;
      // Sample the surface as the part of the midpoint hyperplane within a
      // ball around the midpoint: random simplex points projected onto the
      // plane, shrunk toward the midpoint when they leave the ball. The
      // unbounded plane would cut into the taller mode's basin far away.
      const double radius = 0.75 * std::sqrt(dd);
      const int max_attempts = 20 * multistart.certificate_samples;
      std::vector<double> fu(fa.size());
      for (int att = 0; att < max_attempts && used < multistart.certificate_samples;
           ++att) {
        ThetaMatrix u;
        u.rows.resize(rows);
        for (int k = 0; k < rows; ++k)
          u.rows[k] = cert_rng.next_dirichlet_sym(1.0, M);
        u = project_to_margin(u, grid.margin);
        fu = flatten(u);
        double t = 0.0;
        for (std::size_t i = 0; i < fu.size(); ++i) t += (fu[i] - mid[i]) * dir[i];
        t /= dd;
        bool valid = true;
        double dist2 = 0.0;
        for (std::size_t i = 0; i < fu.size(); ++i) {
          fu[i] -= t * dir[i];
          if (fu[i] < grid.margin - 1e-12 || fu[i] > 1.0) valid = false;
          dist2 += (fu[i] - mid[i]) * (fu[i] - mid[i]);
        }
        if (!valid) continue;
        if (dist2 > radius * radius) {
          // pull toward the midpoint; stays on the plane and in the box
          // because the box is convex and mid is feasible
          const double lam = radius / std::sqrt(dist2);
          for (std::size_t i = 0; i < fu.size(); ++i)
            fu[i] = mid[i] + lam * (fu[i] - mid[i]);
        }
        for (std::size_t i = 0; i < fu.size(); ++i)
          probe.rows[i / M][i % M] = fu[i];
        surface_max = std::max(surface_max, ev.eta(probe));
        ++used;
      }
      cert.samples_used = used;
      cert.surface_max_eta = surface_max;
      cert.certified = used >= multistart.certificate_samples / 10 &&
                       surface_max < std::min(scan.modes[a].eta_value,
                                              scan.modes[b].eta_value);
      certified[a][b] = certified[b][a] = cert.certified;
      scan.certificates.push_back(cert);
    }

  for (int a = 0; a < n_modes; ++a) {
    bool all = n_modes >= 2;
    for (int b = 0; b < n_modes; ++b)
      if (b != a && !certified[a][b]) all = false;
    scan.modes[a].separated = all;
  }
  return scan;
}

int smallest_separating_width(
    const std::function<GenerativeModel(int)>& gen_for_w,
    const std::function<std::vector<ThetaMatrix>(int)>& starts_for_w,
    double p0_inference, int j_required, int w_min, int w_max,
    const GridConfig& grid, const MultistartConfig& multistart) {
  for (int w = w_min; w <= w_max; ++w) {
    ModeScan scan = find_local_maxima(gen_for_w(w), p0_inference,
                                      starts_for_w(w), grid, multistart);
    if (scan.separated_count() >= j_required) return w;
  }
  return -1;
}

void write_eta_slice_csv(const GenerativeModel& gen, double p0_inference,
                         const ThetaMatrix& base, int row_a, int row_b,
                         int resolution, double margin, std::ostream& os) {
  if (gen.M != 2)
    throw DimensionError("write_eta_slice_csv: slice export is for M=2");
  if (resolution < 2) throw DimensionError("write_eta_slice_csv: resolution < 2");
  EtaEvaluator ev(gen, p0_inference);
  ThetaMatrix theta = project_to_margin(base, margin);
  os << "theta_" << row_a << "_1,theta_" << row_b << "_1,eta\n";
  os.precision(12);
  for (int i = 0; i < resolution; ++i) {
    const double x = margin + (1.0 - 2.0 * margin) * i / (resolution - 1);
    for (int j = 0; j < resolution; ++j) {
      const double y = margin + (1.0 - 2.0 * margin) * j / (resolution - 1);
      theta.rows[row_a] = {x, 1.0 - x};
      theta.rows[row_b] = {y, 1.0 - y};
      os << x << ',' << y << ',' << ev.eta(theta) << '\n';
    }
  }
}

}  // namespace motifmix
