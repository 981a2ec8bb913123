#include <doctest.h>

#include "amf/synth.hpp"

#include <cmath>

using namespace amf;

TEST_CASE("matern covariance closed forms") {
  CHECK(matern_covariance(0.0, 1.0, 1) == doctest::Approx(1.0));
  CHECK(matern_covariance(0.0, 5.0, 2) == doctest::Approx(1.0));
  CHECK(matern_covariance(100.0, 1.0, 1) < 1e-10);
  const double s3 = std::sqrt(3.0);
  CHECK(matern_covariance(1.0, 1.0, 1) == doctest::Approx((1.0 + s3) * std::exp(-s3)));
  CHECK(matern_covariance(1.0, 1.0, 1) == doctest::Approx(0.4834).epsilon(1e-3));
}

TEST_CASE("matern covariance decreases with distance") {
  for (int p : {0, 1, 2}) {
    double prev = 2.0;
    for (double d = 0.0; d < 8.0; d += 0.25) {
      const double c = matern_covariance(d, 2.0, p);
      CHECK(c < prev);
      CHECK(c > 0.0);
      prev = c;
    }
  }
}

TEST_CASE("gp sampler is deterministic and size-limited") {
  MaternGpSampler sampler(8, 2.0, 1);
  const ScalarField a = sampler.sample(42);
  const ScalarField b = sampler.sample(42);
  CHECK(a.values == b.values);
  const ScalarField c = sampler.sample(43);
  CHECK(a.values != c.values);
  CHECK_THROWS_AS(MaternGpSampler(65, 2.0, 1), std::invalid_argument);

  MaternConfig cfg;
  cfg.size = 8;
  cfg.length_l = 2.0;
  cfg.seed = 42;
  CHECK(sample_gp_field(cfg).values == a.values);
}

TEST_CASE("gp field matches the kernel in distribution") {
  const int size = 16, seeds = 100;
  const double l = 3.0;
  MaternGpSampler sampler(size, l, 1);

  std::vector<ScalarField> fields;
  for (int s = 0; s < seeds; ++s) fields.push_back(sampler.sample(1000 + s));

  // across-seed marginal variance, averaged over pixels
  double var_sum = 0.0;
  for (int k = 0; k < size * size; ++k) {
    double mu = 0.0, m2 = 0.0;
    for (const auto& f : fields) mu += f.values[k];
    mu /= seeds;
    for (const auto& f : fields) m2 += (f.values[k] - mu) * (f.values[k] - mu);
    var_sum += m2 / (seeds - 1);
  }
  CHECK(var_sum / (size * size) == doctest::Approx(1.0).epsilon(0.1));

  // lag-1 correlations along both axes against the kernel oracle
  double cx = 0.0, cy = 0.0;
  int nx = 0, ny = 0;
  for (const auto& f : fields) {
    for (int j = 0; j < size; ++j) {
      for (int i = 0; i < size; ++i) {
        if (i + 1 < size) {
          cx += f.at(i, j) * f.at(i + 1, j);
          ++nx;
        }
        if (j + 1 < size) {
          cy += f.at(i, j) * f.at(i, j + 1);
          ++ny;
        }
      }
    }
  }
  const double oracle = matern_covariance(1.0, l, 1);
  CHECK(cx / nx == doctest::Approx(oracle).epsilon(0.12));
  CHECK(cy / ny == doctest::Approx(oracle).epsilon(0.12));
  CHECK(std::abs(cx / nx - cy / ny) < 0.1);
}

TEST_CASE("ground truth thresholding counts") {
  ScalarField f(10, 10);
  for (int k = 0; k < 100; ++k) f.values[k] = 0.01 * k;

  const LabelField median = make_ground_truth(f, 0.5);
  const int fg = median.foreground_count();
  CHECK((fg == 50 || fg == 51));

  CHECK(make_ground_truth(f, 0.25).foreground_count() == 75);
  CHECK(make_ground_truth(f, 0.999).foreground_count() == 0);
  CHECK_THROWS_AS(make_ground_truth(f, 0.0), std::invalid_argument);
}

TEST_CASE("additive noise has the requested scale") {
  LabelField z(100, 100);
  for (size_t k = 0; k < z.labels.size(); ++k) z.labels[k] = (k / 100 + k % 100) % 2;

  const ScalarField tiny = add_gaussian_noise(z, 1e-9, 7);
  for (size_t k = 0; k < z.labels.size(); ++k)
    CHECK(std::abs(tiny.values[k] - z.labels[k]) < 1e-8);

  const double sigma = 0.35;
  const ScalarField y = add_gaussian_noise(z, sigma, 7);
  double m2 = 0.0;
  for (size_t k = 0; k < z.labels.size(); ++k) {
    const double d = y.values[k] - z.labels[k];
    m2 += d * d;
  }
  CHECK(std::sqrt(m2 / z.size()) == doctest::Approx(sigma).epsilon(0.05));

  CHECK(add_gaussian_noise(z, sigma, 7).values == y.values);
  CHECK(add_gaussian_noise(z, sigma, 8).values != y.values);
}

TEST_CASE("ambiguous circle geometry and statistics") {
  const int size = 128;
  const AmbiguousCircle scene = synth_ambiguous_circle(size, 11);

  double bg_sum = 0.0, low_sum = 0.0, up_sum = 0.0;
  int bg_n = 0, low_n = 0, up_n = 0;
  double bg_noise2 = 0.0;
  for (int j = 0; j < size; ++j) {
    for (int i = 0; i < size; ++i) {
      const double clean = scene.clean.at(i, j);
      if (!scene.truth.at(i, j)) {
        bg_sum += clean;
        bg_noise2 += (scene.noisy.at(i, j) - clean) * (scene.noisy.at(i, j) - clean);
        ++bg_n;
      } else if (clean == 70.0) {
        low_sum += clean;
        ++low_n;
      } else {
        up_sum += clean;
        ++up_n;
      }
    }
  }
  CHECK(bg_sum / bg_n == doctest::Approx(30.0));
  CHECK(low_sum / low_n == doctest::Approx(70.0));
  CHECK(up_sum / up_n == doctest::Approx(50.0));
  CHECK(low_n > 0);
  CHECK(up_n > 0);
  CHECK(std::sqrt(bg_noise2 / bg_n) == doctest::Approx(5.0).epsilon(0.1));

  // circular foreground of diameter size/2
  const double frac = static_cast<double>(scene.truth.foreground_count()) / scene.truth.size();
  const double expected = 3.14159265 * 0.25 * 0.25;  // pi r^2 / size^2, r = size/4
  CHECK(frac == doctest::Approx(expected).epsilon(0.05));

  scene.fg.validate();
  scene.bg.validate();
  CHECK(scene.fg.components[0].mu == 50.0);
  CHECK(scene.bg.components[0].mu == 30.0);
  CHECK_THROWS_AS(synth_ambiguous_circle(16, 1), std::invalid_argument);
}
