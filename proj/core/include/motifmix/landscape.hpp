#ifndef MOTIFMIX_LANDSCAPE_HPP
#define MOTIFMIX_LANDSCAPE_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <vector>

#include "motifmix/datagen.hpp"
#include "motifmix/types.hpp"

namespace motifmix {

// Evaluates eta(theta) = E log f(s|theta) = sum_s g(s) log f(s|theta) by
// exhaustive word sums. g is tabulated once; feasible for M^w up to ~10^7.
class EtaEvaluator {
 public:
  explicit EtaEvaluator(const GenerativeModel& gen, double p0_inference);

  // Compensated sum over all M^w words; returns -inf (flagged) when some
  // word has g > 0 but f = 0.
  double eta(const ThetaMatrix& theta) const;
  // KL(g || f(.|theta)) = sum g log g - eta(theta); >= 0.
  double kl(const ThetaMatrix& theta) const;
  double sum_g_log_g() const { return sum_g_log_g_; }
  bool last_eval_hit_zero_density() const { return hit_zero_; }

  int w() const { return w_; }
  int M() const { return M_; }
  double p0() const { return p0_; }

 private:
  int w_, M_;
  double p0_;
  std::vector<double> g_;  // size M^w
  double sum_g_log_g_;
  mutable bool hit_zero_ = false;
};

double eta(const ThetaMatrix& theta, const GenerativeModel& gen,
           double p0_inference);
double kl_divergence(const GenerativeModel& gen, const ThetaMatrix& theta,
                     double p0_inference);

struct GridConfig {
  double step = 0.02;     // lattice spacing for mass-transfer moves
  double margin = 1e-4;   // distance kept from the simplex boundary
  long max_steps = 20000;  // hill-climb iteration cap per start
};

struct MultistartConfig {
  int random_starts = 16;
  std::uint64_t seed = 2718;
  double merge_radius_cells = 2.0;  // sup-norm merge radius in lattice cells
  int certificate_samples = 1000;
  int workers = 0;
};

struct Mode {
  ThetaMatrix theta;
  double eta_value = 0.0;
  int basin_hits = 0;    // how many starts converged here
  bool separated = false;  // certified against every other reported mode
};

struct SeparationCertificate {
  int mode_a = 0;
  int mode_b = 0;
  bool certified = false;
  double surface_max_eta = 0.0;
  int samples_used = 0;
};

struct ModeScan {
  std::vector<Mode> modes;  // eta-descending
  std::vector<SeparationCertificate> certificates;
  int separated_count() const;
};

// Coordinate-ascent hill climbing on the simplex-product lattice (moves
// transfer `step` mass between two entries of one row) from the given
// starts plus random ones; nearby endpoints are merged and mode pairs get
// a sampled-surface separation certificate.
ModeScan find_local_maxima(const GenerativeModel& gen, double p0_inference,
                           const std::vector<ThetaMatrix>& starts,
                           const GridConfig& grid = {},
                           const MultistartConfig& multistart = {});

// Push rows away from the simplex boundary: floor at margin, renormalize.
ThetaMatrix project_to_margin(const ThetaMatrix& theta, double margin);

// Smallest w in [w_min, w_max] whose scan certifies >= j_required separated
// modes, or -1. The generative model for each width comes from the callback.
int smallest_separating_width(const std::function<GenerativeModel(int)>& gen_for_w,
                              const std::function<std::vector<ThetaMatrix>(int)>& starts_for_w,
                              double p0_inference, int j_required, int w_min,
                              int w_max, const GridConfig& grid = {},
                              const MultistartConfig& multistart = {});

// CSV slice for M=2 landscapes: vary the free coordinates theta_{a,1} and
// theta_{b,1} over [margin, 1-margin], others fixed from `base`.
void write_eta_slice_csv(const GenerativeModel& gen, double p0_inference,
                         const ThetaMatrix& base, int row_a, int row_b,
                         int resolution, double margin, std::ostream& os);

}  // namespace motifmix

#endif  // MOTIFMIX_LANDSCAPE_HPP
