#include "iris3d/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "iris3d/error.hpp"

namespace iris3d::phantom {

void PhantomParams::validate() const {
  if (!(pupil_radius > 0.0) || !(pupil_radius < root_radius))
    throw InvariantError("phantom: need 0 < pupil radius < root radius");
  if (!(frill_width > 0.0)) throw InvariantError("phantom: frill width must be positive");
  if (bow < 0.0 || frill_amplitude < 0.0 || azimuthal_noise < 0.0)
    throw InvariantError("phantom: amplitudes must be non-negative");
  if (!(thickness > 0.0)) throw InvariantError("phantom: thickness must be positive");
}

ProfileSample profile(const PhantomParams& p, double rho) {
  const double w = p.half_width();
  const double t = (rho - p.mid_radius()) / w;
  const double s2 = p.frill_width * p.frill_width;
  const double dr = rho - p.frill_center;
  const double g = p.frill_amplitude * std::exp(-dr * dr / (2.0 * s2));

  ProfileSample s{};
  s.f = p.bow * (1.0 - t * t) + g;
  s.df = -2.0 * p.bow * t / w - g * dr / s2;
  s.d2f = -2.0 * p.bow / (w * w) + g * (dr * dr / (s2 * s2) - 1.0 / s2);
  const double q = 1.0 + s.df * s.df;
  s.kappa_m = s.d2f / std::pow(q, 1.5);
  s.kappa_c = s.df / (rho * std::sqrt(q));
  return s;
}

namespace {

struct Wobble {
  std::array<double, 3> amp{};
  std::array<double, 3> phase{};
};

Wobble wobble_for(const PhantomParams& p) {
  std::mt19937_64 rng(p.seed ^ 0x5DEECE66DULL);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Wobble w;
  for (std::size_t k = 0; k < 3; ++k) {
    w.amp[k] = u(rng) / static_cast<double>(k + 1);
    w.phase[k] = std::numbers::pi * u(rng);
  }
  return w;
}

double height_with(const PhantomParams& p, const Wobble& wob, double rho, double phi) {
  double h = profile(p, rho).f;
  if (p.azimuthal_noise > 0.0) {
    const double t = (rho - p.mid_radius()) / p.half_width();
    double g = 0.0;
    for (std::size_t k = 0; k < 3; ++k) g += wob.amp[k] * std::cos(static_cast<double>(k + 1) * phi + wob.phase[k]);
    h += p.azimuthal_noise * g * std::max(0.0, 1.0 - t * t);
  }
  return h;
}

}  // namespace

double height(const PhantomParams& p, double rho, double phi) { return height_with(p, wobble_for(p), rho, phi); }

SegMask render_slice(const PhantomParams& p, const recon::ScanGeometry& geom, double theta, std::size_t slice_index,
                     SliceBoundary* boundary) {
  const Wobble wob = wobble_for(p);
  SegMask mask(geom.width, geom.height);
  const double xc = geom.center_column();
  const double thick_rows = p.thickness / geom.s_z;
  if (boundary) {
    boundary->slice_index = slice_index;
    boundary->left.clear();
    boundary->right.clear();
  }
  for (std::size_t x = 0; x < geom.width; ++x) {
    const double rho_s = (static_cast<double>(x) - xc) * geom.s_xy;
    const double rho = std::abs(rho_s);
    if (rho < p.pupil_radius || rho > p.root_radius) continue;
    const double phi = rho_s >= 0.0 ? theta : theta + std::numbers::pi;
    const double top = (p.base_depth - height_with(p, wob, rho, phi)) / geom.s_z;
    if (top < 0.0 || top + thick_rows > static_cast<double>(geom.height - 1))
      throw InvariantError("phantom: slice " + std::to_string(slice_index) + " leaves the image at column " +
                           std::to_string(x));
    const auto first = static_cast<std::size_t>(std::ceil(top));
    const auto last = static_cast<std::size_t>(std::floor(top + thick_rows));
    for (std::size_t row = first; row <= last; ++row) mask.at(x, row) = 1;
    if (boundary) (rho_s < 0.0 ? boundary->left : boundary->right).push_back({static_cast<double>(x), top});
  }
  return mask;
}

PhantomVolume phantom_slices(const PhantomParams& p, const recon::ScanGeometry& geom, const SliceOptions& opt) {
  p.validate();
  geom.validate();
  PhantomVolume vol;
  vol.label = p.label();
  std::mt19937_64 rng(p.seed * 0x9E3779B97F4A7C15ULL + 17);
  std::normal_distribution<double> noise(0.0, opt.image_noise);
  for (std::size_t i = 0; i < geom.slices; ++i) {
    SliceBoundary b;
    vol.masks.push_back(render_slice(p, geom, geom.slice_angle(i), i, &b));
    vol.boundaries.slices.push_back(std::move(b));
    if (opt.images) {
      const SegMask& m = vol.masks.back();
      GrayImage img(geom.width, geom.height);
      for (std::size_t k = 0; k < img.pixels.size(); ++k) {
        const double level = m.labels[k] ? opt.iris_level : opt.background_level;
        img.pixels[k] = static_cast<std::uint8_t>(std::clamp(std::lround(level + noise(rng)), 0L, 255L));
      }
      vol.images.push_back(std::move(img));
    }
  }
  return vol;
}

PhantomParams draw_params(int label, std::uint64_t seed, const PhantomParams& base, const CohortOptions& cohort) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  PhantomParams p = base;
  p.seed = seed;
  p.bow = label ? cohort.bow_closed_lo + (cohort.bow_closed_hi - cohort.bow_closed_lo) * u(rng)
                : cohort.bow_open_hi * u(rng);
  p.bow_threshold = 0.5 * (cohort.bow_open_hi + cohort.bow_closed_lo);
  p.frill_amplitude = cohort.frill_lo + (cohort.frill_hi - cohort.frill_lo) * u(rng);
  p.azimuthal_noise = cohort.noise_hi * u(rng);
  return p;
}

}  // namespace iris3d::phantom
