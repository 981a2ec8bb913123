#include "cli.hpp"

#include "amf/amf.hpp"
#include "amf/evalx.hpp"
#include "amf/io.hpp"
#include "amf/likelihood.hpp"
#include "amf/posterior.hpp"
#include "amf/rof.hpp"
#include "amf/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

namespace amf::cli {

namespace {

using nlohmann::json;

void emit(const json& summary) { std::cout << summary.dump() << "\n"; }

TvMode parse_mode(const std::string& s) {
  if (s == "iso") return TvMode::Isotropic;
  if (s == "aniso") return TvMode::Anisotropic;
  throw std::runtime_error("--mode expects iso or aniso, got " + s);
}

int env_threads() {
  const char* v = std::getenv("AMF_THREADS");
  const int hw = std::max(1u, std::thread::hardware_concurrency());
  if (!v) return hw;
  const int n = std::atoi(v);
  return n <= 0 ? 1 : std::min(n, hw);
}

GaussianClassModel parse_gauss(const std::string& spec) {
  GaussianClassModel m;
  if (std::sscanf(spec.c_str(), "%lf,%lf,%lf,%lf", &m.mu0, &m.sigma0, &m.mu1, &m.sigma1) != 4)
    throw std::runtime_error("model spec '" + spec + "': expected gauss:mu0,sigma0,mu1,sigma1");
  if (m.sigma0 <= 0.0 || m.sigma1 <= 0.0)
    throw std::runtime_error("model spec '" + spec + "': sigmas must be > 0");
  return m;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
  return j;
}

MixtureModel mixture_from_json(const json& j, const std::string& path) {
  if (!j.contains("components"))
    throw std::runtime_error(path + ": mixture JSON needs a components array");
  MixtureModel m;
  for (const auto& c : j.at("components"))
    m.components.push_back(
        {c.at("w").get<double>(), c.at("mu").get<double>(), c.at("sigma").get<double>()});
  m.validate();
  return m;
}

json mixture_to_json(const MixtureModel& m) {
  json comps = json::array();
  for (const auto& c : m.components)
    comps.push_back({{"w", c.weight}, {"mu", c.mu}, {"sigma", c.sigma}});
  return {{"components", comps}};
}

KdeModel kde_from_json(const json& j, const std::string& path) {
  if (!j.contains("samples"))
    throw std::runtime_error(path + ": KDE JSON needs a samples array");
  const std::vector<double> samples = j.at("samples").get<std::vector<double>>();
  return kde_fit(samples, j.value("bandwidth", 0.0));
}

// model spec: gauss:mu0,sigma0,mu1,sigma1 | mix:file.json | kde:file.json
ScalarField psi_from_model(const ScalarField& y, const std::string& model) {
  if (model.rfind("gauss:", 0) == 0) return psi_gaussian(y, parse_gauss(model.substr(6)));
  if (model.rfind("mix:", 0) == 0) {
    const std::string path = model.substr(4);
    const json j = read_json_file(path);
    if (!j.contains("fg") || !j.contains("bg"))
      throw std::runtime_error(path + ": expected top-level fg and bg mixture objects");
    return psi_mixture(y, mixture_from_json(j.at("fg"), path),
                       mixture_from_json(j.at("bg"), path));
  }
  if (model.rfind("kde:", 0) == 0) {
    const std::string path = model.substr(4);
    const json j = read_json_file(path);
    if (!j.contains("fg") || !j.contains("bg"))
      throw std::runtime_error(path + ": expected top-level fg and bg KDE objects");
    return psi_kde(y, kde_from_json(j.at("fg"), path), kde_from_json(j.at("bg"), path));
  }
  throw std::runtime_error("model spec '" + model + "': expected gauss:, mix: or kde:");
}

void write_json_file(const std::string& path, const json& j) {
  atomic_write_bytes(path, j.dump(2) + "\n");
}

struct GibbsCliOptions {
  int chains = 5;
  int sweeps = 1000;
  int thin = 10;
  int burn_in = -1;  // <0: default to 20% of sweeps
  std::uint64_t seed = 0;
  double temperature = 1.0;

  GibbsConfig config(TvMode mode) const {
    GibbsConfig cfg;
    cfg.chains = chains;
    cfg.sweeps_per_chain = sweeps;
    cfg.thin = thin;
    cfg.burn_in = burn_in < 0 ? sweeps / 5 : burn_in;
    cfg.seed = seed;
    cfg.temperature = temperature;
    cfg.mode = mode;
    cfg.threads = std::min(env_threads(), chains);
    return cfg;
  }

  void attach(CLI::App* cmd) {
    cmd->add_option("--chains", chains, "number of independent chains");
    cmd->add_option("--sweeps", sweeps, "raster sweeps per chain");
    cmd->add_option("--thin", thin, "keep every thin-th sweep");
    cmd->add_option("--burn-in", burn_in, "sweeps discarded per chain (default 20%)");
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--temperature", temperature, "Gibbs temperature");
  }
};

json gibbs_report(const SampleSet& samples, const GibbsConfig& cfg) {
  const double rhat = gelman_rubin(samples.area_traces);
  const AreaMoments m = sample_area_moments(samples);
  return {{"schema", 1},
          {"rhat", rhat},
          {"retained", samples.particles.size()},
          {"mean_area", m.mean},
          {"var_area", m.variance},
          {"mode", to_string(cfg.mode)},
          {"temperature", cfg.temperature},
          {"seed", cfg.seed},
          {"converged", rhat < 1.1}};
}

struct MaternInstanceStats {
  double correlation = 0.0;
  double q_mean = 0.0, q_var = 0.0;
  double gibbs_mean = 0.0, gibbs_var = 0.0;
  double rhat = 0.0;
  double quantile = 0.0;
  double length_l = 0.0;
};

MaternInstanceStats run_matern_instance(const MaternGpSampler& sampler, double length_l,
                                        double noise_sigma, double lambda, double quantile,
                                        std::uint64_t seed, const GibbsConfig& gibbs_cfg) {
  MaternInstanceStats out;
  out.length_l = length_l;
  out.quantile = quantile;

  const ScalarField gp = sampler.sample(seed);
  const LabelField truth = make_ground_truth(gp, quantile);
  const ScalarField y = add_gaussian_noise(truth, noise_sigma, seed + 1);
  const ScalarField psi = psi_gaussian(y, {0.0, noise_sigma, 1.0, noise_sigma});

  AmfParams params;
  params.lambda = lambda;
  params.rof.mode = TvMode::Anisotropic;
  params.rof.tol = 1e-8;
  params.rof.max_iter = 20000;
  const ProbabilityField theta = amf_solve(psi, params);

  GibbsConfig cfg = gibbs_cfg;
  cfg.seed = seed + 2;
  const SampleSet samples = gibbs_sample(psi, lambda, cfg);

  out.correlation = compare_correlation(samples, psi, lambda, theta, TvMode::Anisotropic);
  const AreaMoments q = q_area_moments(theta);
  const AreaMoments s = sample_area_moments(samples);
  out.q_mean = q.mean;
  out.q_var = q.variance;
  out.gibbs_mean = s.mean;
  out.gibbs_var = s.variance;
  out.rhat = gelman_rubin(samples.area_traces);
  return out;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double saa = 0, sbb = 0, sab = 0;
  for (size_t k = 0; k < a.size(); ++k) {
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
    sab += (a[k] - ma) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"Probabilistic binary segmentation via TV-denoised logit fields"};
  app.require_subcommand(1);

  // denoise
  auto* denoise = app.add_subcommand("denoise", "ROF/TV denoising of a scalar field");
  std::string dn_input, dn_output = "out.amff", dn_mode = "iso";
  double dn_alpha = 1.0, dn_tol = 1e-4;
  int dn_max_iter = 10000;
  denoise->add_option("--input", dn_input, "input AMFF field")->required();
  denoise->add_option("--alpha", dn_alpha, "TV weight")->required();
  denoise->add_option("--mode", dn_mode, "iso|aniso");
  denoise->add_option("--tol", dn_tol, "relative-change stopping tolerance");
  denoise->add_option("--max-iter", dn_max_iter, "iteration cap");
  denoise->add_option("--output", dn_output, "output AMFF field");

  // likelihood
  auto* likelihood = app.add_subcommand("likelihood", "build the logit likelihood field psi");
  std::string lk_image, lk_prob, lk_model, lk_output = "psi.amff";
  double lk_clamp = 1e-5;
  likelihood->add_option("--image", lk_image, "input PGM image");
  likelihood->add_option("--prob", lk_prob, "input AMFF probability map");
  likelihood->add_option("--model", lk_model,
                         "gauss:mu0,sigma0,mu1,sigma1 | mix:f.json | kde:f.json");
  likelihood->add_option("--clamp", lk_clamp, "probability clamp for --prob");
  likelihood->add_option("--output", lk_output, "output AMFF psi field");

  // segment
  auto* segment = app.add_subcommand("segment", "mean-field segmentation");
  std::string sg_psi, sg_image, sg_model, sg_mode = "iso";
  std::string sg_theta_out = "theta.amff", sg_map_out = "map.pgm";
  double sg_lambda = 1.0, sg_nu = 0.0, sg_tol = 1e-4;
  int sg_max_iter = 10000, sg_alternate = 0;
  segment->add_option("--psi", sg_psi, "input AMFF logit likelihood field");
  segment->add_option("--image", sg_image, "input PGM image (with --model)");
  segment->add_option("--model", sg_model, "class model for --image");
  segment->add_option("--lambda", sg_lambda, "boundary-length weight")->required();
  segment->add_option("--nu", sg_nu, "level-set threshold for the label map");
  segment->add_option("--mode", sg_mode, "iso|aniso");
  segment->add_option("--tol", sg_tol, "solver tolerance");
  segment->add_option("--max-iter", sg_max_iter, "solver iteration cap");
  segment->add_option("--alternate", sg_alternate, "alternating model re-estimation rounds");
  segment->add_option("--output-theta", sg_theta_out, "output AMFF probability field");
  segment->add_option("--output-map", sg_map_out, "output PGM label map");

  // gibbs
  auto* gibbs = app.add_subcommand("gibbs", "sample the exact label posterior");
  std::string gb_psi, gb_mode = "aniso", gb_out = "samples.bin", gb_report = "report.json";
  double gb_lambda = 1.0;
  GibbsCliOptions gb_opts;
  gibbs->add_option("--psi", gb_psi, "input AMFF logit likelihood field")->required();
  gibbs->add_option("--lambda", gb_lambda, "boundary-length weight")->required();
  gibbs->add_option("--mode", gb_mode, "iso|aniso");
  gb_opts.attach(gibbs);
  gibbs->add_option("--out", gb_out, "output AMFS sample file");
  gibbs->add_option("--report", gb_report, "output JSON report");

  // compare
  auto* compare = app.add_subcommand("compare", "compare Gibbs samples against the mean field");
  std::string cp_psi, cp_theta, cp_samples, cp_mode = "aniso", cp_report = "compare.json";
  double cp_lambda = 1.0;
  compare->add_option("--psi", cp_psi, "input AMFF logit likelihood field")->required();
  compare->add_option("--theta", cp_theta, "input AMFF probability field")->required();
  compare->add_option("--samples", cp_samples, "input AMFS sample file")->required();
  compare->add_option("--lambda", cp_lambda, "boundary-length weight")->required();
  compare->add_option("--mode", cp_mode, "iso|aniso");
  compare->add_option("--report", cp_report, "output JSON report");

  // synth matern / circle
  auto* synth = app.add_subcommand("synth", "synthetic ground-truth generators");
  synth->require_subcommand(1);
  auto* matern = synth->add_subcommand("matern", "Matern random field ground truth");
  int mt_size = 64, mt_p = 1;
  double mt_l = 3.0, mt_sigma = 0.3;
  std::string mt_quantile = "auto", mt_truth = "truth.pgm", mt_noisy = "noisy.amff";
  std::uint64_t mt_seed = 0;
  matern->add_option("--size", mt_size, "grid side (<= 64)");
  matern->add_option("--l", mt_l, "length scale");
  matern->add_option("--p", mt_p, "order parameter (smoothness p + 1/2)");
  matern->add_option("--sigma", mt_sigma, "noise standard deviation");
  matern->add_option("--quantile", mt_quantile, "threshold quantile in (0,1), or auto");
  matern->add_option("--seed", mt_seed, "RNG seed");
  matern->add_option("--out-truth", mt_truth, "output PGM ground truth");
  matern->add_option("--out-noisy", mt_noisy, "output AMFF noisy image");

  auto* circle = synth->add_subcommand("circle", "ambiguous circle scenario");
  int cr_size = 128;
  std::uint64_t cr_seed = 0;
  std::string cr_dir = ".";
  circle->add_option("--size", cr_size, "image side (>= 32)");
  circle->add_option("--seed", cr_seed, "RNG seed");
  circle->add_option("--out-dir", cr_dir, "output directory");

  // eval dice / qarea
  auto* eval = app.add_subcommand("eval", "evaluation metrics");
  eval->require_subcommand(1);
  auto* dice_cmd = eval->add_subcommand("dice", "Dice overlap of two label maps");
  std::string dc_a, dc_b;
  dice_cmd->add_option("--a", dc_a, "first PGM label map")->required();
  dice_cmd->add_option("--b", dc_b, "second PGM label map")->required();
  auto* qarea_cmd = eval->add_subcommand("qarea", "area-normalized mass of a labeling");
  std::string qa_theta, qa_map;
  qarea_cmd->add_option("--theta", qa_theta, "AMFF probability field")->required();
  qarea_cmd->add_option("--map", qa_map, "PGM label map")->required();

  // multilabel
  auto* multilabel = app.add_subcommand("multilabel", "quasi-multi-label segmentation");
  std::vector<std::string> ml_probs, ml_truth;
  std::string ml_labels_out = "labels.pgm", ml_report_out = "report.json", ml_mode = "iso";
  double ml_lambda = 10.0, ml_tol = 1e-4;
  int ml_max_iter = 10000;
  multilabel->add_option("--probs", ml_probs, "per-class AMFF probability maps")
      ->required()
      ->expected(-2);
  multilabel->add_option("--truth", ml_truth, "per-class PGM ground-truth masks");
  multilabel->add_option("--lambda", ml_lambda, "boundary-length weight");
  multilabel->add_option("--mode", ml_mode, "iso|aniso");
  multilabel->add_option("--tol", ml_tol, "solver tolerance");
  multilabel->add_option("--max-iter", ml_max_iter, "solver iteration cap");
  multilabel->add_option("--out-labels", ml_labels_out, "output PGM class-index map");
  multilabel->add_option("--out-report", ml_report_out, "output JSON report");

  // repro
  auto* repro = app.add_subcommand("repro", "deterministic experiment recipes");
  repro->require_subcommand(1);
  auto* rp_circle = repro->add_subcommand("circle", "ambiguous-circle segmentation");
  double rpc_lambda = 5.0;
  std::uint64_t rpc_seed = 0;
  int rpc_size = 128;
  std::string rpc_dir = ".";
  rp_circle->add_option("--lambda", rpc_lambda, "boundary-length weight");
  rp_circle->add_option("--seed", rpc_seed, "RNG seed");
  rp_circle->add_option("--size", rpc_size, "image side");
  rp_circle->add_option("--out-dir", rpc_dir, "output directory");

  auto* rp_matern = repro->add_subcommand("matern-compare", "mean field vs Gibbs statistics");
  int rm_size = 64, rm_per_l = 10;
  double rm_sigma = 0.3, rm_lambda = 1.0;
  std::vector<double> rm_ls = {1.0, 3.0};
  std::uint64_t rm_seed = 0;
  std::string rm_report = "matern_compare.json";
  GibbsCliOptions rm_gibbs;
  rm_gibbs.chains = 3;
  rm_gibbs.sweeps = 1500;
  rp_matern->add_option("--size", rm_size, "grid side (<= 64)");
  rp_matern->add_option("--instances", rm_per_l, "instances per length scale");
  rp_matern->add_option("--sigma", rm_sigma, "noise standard deviation");
  rp_matern->add_option("--lambda", rm_lambda, "boundary-length weight");
  rp_matern->add_option("--l", rm_ls, "length scales");
  rm_gibbs.attach(rp_matern);
  rp_matern->add_option("--report", rm_report, "output JSON report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*denoise) {
      RofParams params;
      params.mode = parse_mode(dn_mode);
      params.tol = dn_tol;
      params.max_iter = dn_max_iter;
      const ScalarField u0 = amff_read(dn_input);
      const RofResult res = rof_solve(u0, dn_alpha, params);
      amff_write(dn_output, res.u);
      emit({{"schema", 1},
            {"command", "denoise"},
            {"input", dn_input},
            {"output", dn_output},
            {"alpha", dn_alpha},
            {"mode", dn_mode},
            {"iterations", res.iterations},
            {"converged", res.converged},
            {"energy", res.final_energy}});
      return 0;
    }

    if (*likelihood) {
      ScalarField psi;
      if (!lk_prob.empty()) {
        if (lk_clamp <= 0.0 || lk_clamp >= 0.5)
          throw std::runtime_error("--clamp must lie in (0, 0.5)");
        psi = psi_from_probability(amff_read_probability(lk_prob),
                                   ClampRange{lk_clamp, 1.0 - lk_clamp});
      } else if (!lk_image.empty() && !lk_model.empty()) {
        psi = psi_from_model(pgm_read(lk_image), lk_model);
      } else {
        throw std::runtime_error("likelihood needs --prob or both --image and --model");
      }
      amff_write(lk_output, psi);
      emit({{"schema", 1},
            {"command", "likelihood"},
            {"output", lk_output},
            {"width", psi.width},
            {"height", psi.height}});
      return 0;
    }

    if (*segment) {
      AmfParams params;
      params.lambda = sg_lambda;
      params.rof.mode = parse_mode(sg_mode);
      params.rof.tol = sg_tol;
      params.rof.max_iter = sg_max_iter;

      json summary = {{"schema", 1}, {"command", "segment"}, {"lambda", sg_lambda},
                      {"mode", sg_mode}, {"nu", sg_nu}};
      AmfResult sol;
      if (!sg_psi.empty()) {
        sol = amf_solve_detail(amff_read(sg_psi), params);
      } else if (!sg_image.empty() && !sg_model.empty()) {
        const ScalarField y = pgm_read(sg_image);
        if (sg_alternate > 0) {
          if (sg_model.rfind("gauss:", 0) != 0)
            throw std::runtime_error("--alternate needs a gauss: model");
          AlternatingConfig cfg;
          cfg.max_outer = sg_alternate;
          const AlternatingResult alt =
              alternating_fit(y, parse_gauss(sg_model.substr(6)), params, cfg);
          sol = amf_solve_detail(psi_gaussian(y, alt.gaussian), params);
          summary["outer_iterations"] = alt.outer_iterations;
          summary["degenerate"] = alt.degenerate;
          summary["model"] = {{"mu0", alt.gaussian.mu0}, {"sigma0", alt.gaussian.sigma0},
                              {"mu1", alt.gaussian.mu1}, {"sigma1", alt.gaussian.sigma1}};
        } else {
          sol = amf_solve_detail(psi_from_model(y, sg_model), params);
        }
      } else {
        throw std::runtime_error("segment needs --psi or both --image and --model");
      }
      amff_write(sg_theta_out, sol.theta);
      pgm_write(sg_map_out, level_set_labels(sol.phi, sg_nu));
      summary["converged"] = sol.rof.converged;
      summary["output_theta"] = sg_theta_out;
      summary["output_map"] = sg_map_out;
      emit(summary);
      return 0;
    }

    if (*gibbs) {
      const GibbsConfig cfg = gb_opts.config(parse_mode(gb_mode));
      const SampleSet samples = gibbs_sample(amff_read(gb_psi), gb_lambda, cfg);
      samples_write(gb_out, samples);
      json report = gibbs_report(samples, cfg);
      report["lambda"] = gb_lambda;
      write_json_file(gb_report, report);
      report["command"] = "gibbs";
      report["out"] = gb_out;
      emit(report);
      return 0;
    }

    if (*compare) {
      const TvMode mode = parse_mode(cp_mode);
      const ScalarField psi = amff_read(cp_psi);
      const ProbabilityField theta = amff_read_probability(cp_theta);
      const SampleSet samples = samples_read(cp_samples);
      const double corr = compare_correlation(samples, psi, cp_lambda, theta, mode);
      const AreaMoments q = q_area_moments(theta);
      const AreaMoments s = sample_area_moments(samples);
      const json report = {{"schema", 1},
                           {"command", "compare"},
                           {"correlation", corr},
                           {"q_mean_area", q.mean},
                           {"q_var_area", q.variance},
                           {"sample_mean_area", s.mean},
                           {"sample_var_area", s.variance},
                           {"particles", samples.particles.size()},
                           {"lambda", cp_lambda},
                           {"mode", cp_mode}};
      write_json_file(cp_report, report);
      emit(report);
      return 0;
    }

    if (*matern) {
      MaternConfig cfg;
      cfg.size = mt_size;
      cfg.length_l = mt_l;
      cfg.order_p = mt_p;
      cfg.noise_sigma = mt_sigma;
      cfg.seed = mt_seed;
      double quantile;
      if (mt_quantile == "auto") {
        std::mt19937_64 gen(mt_seed ^ 0x5eedULL);
        quantile = 0.2 + 0.6 * ((gen() >> 11) * 0x1.0p-53);
      } else {
        quantile = std::stod(mt_quantile);
      }
      const ScalarField gp = sample_gp_field(cfg);
      const LabelField truth = make_ground_truth(gp, quantile);
      const ScalarField noisy = add_gaussian_noise(truth, mt_sigma, mt_seed + 1);
      pgm_write(mt_truth, truth);
      amff_write(mt_noisy, noisy);
      emit({{"schema", 1},
            {"command", "synth-matern"},
            {"size", mt_size},
            {"l", mt_l},
            {"p", mt_p},
            {"sigma", mt_sigma},
            {"quantile", quantile},
            {"seed", mt_seed},
            {"foreground_fraction",
             static_cast<double>(truth.foreground_count()) / truth.size()},
            {"out_truth", mt_truth},
            {"out_noisy", mt_noisy}});
      return 0;
    }

    if (*circle) {
      namespace fs = std::filesystem;
      fs::create_directories(cr_dir);
      const AmbiguousCircle scene = synth_ambiguous_circle(cr_size, cr_seed);
      const auto path = [&](const char* name) { return (fs::path(cr_dir) / name).string(); };
      amff_write(path("clean.amff"), scene.clean);
      amff_write(path("noisy.amff"), scene.noisy);
      pgm_write(path("truth.pgm"), scene.truth);
      write_json_file(path("models.json"),
                      {{"schema", 1},
                       {"fg", mixture_to_json(scene.fg)},
                       {"bg", mixture_to_json(scene.bg)}});
      emit({{"schema", 1},
            {"command", "synth-circle"},
            {"size", cr_size},
            {"seed", cr_seed},
            {"out_dir", cr_dir}});
      return 0;
    }

    if (*dice_cmd) {
      const double d = dice(pgm_read_labels(dc_a), pgm_read_labels(dc_b));
      emit({{"schema", 1}, {"command", "eval-dice"}, {"a", dc_a}, {"b", dc_b}, {"dice", d}});
      return 0;
    }

    if (*qarea_cmd) {
      const QArea q = q_area(pgm_read_labels(qa_map), amff_read_probability(qa_theta));
      emit({{"schema", 1},
            {"command", "eval-qarea"},
            {"q_area", q.value},
            {"foreground_empty", q.foreground_empty},
            {"background_empty", q.background_empty}});
      return 0;
    }

    if (*multilabel) {
      ClassProbStack stack;
      for (const auto& p : ml_probs) {
        ProbabilityField field = amff_read_probability(p);
        if (stack.classes.empty()) {
          stack.width = field.width;
          stack.height = field.height;
        } else if (field.width != stack.width || field.height != stack.height) {
          throw std::runtime_error(p + ": dimensions differ from the first class map");
        }
        stack.classes.push_back(std::move(field));
      }
      if (!ml_truth.empty() && ml_truth.size() != ml_probs.size())
        throw std::runtime_error("--truth needs one mask per class");

      AmfParams params;
      params.lambda = ml_lambda;
      params.rof.mode = parse_mode(ml_mode);
      params.rof.tol = ml_tol;
      params.rof.max_iter = ml_max_iter;

      const std::vector<ProbabilityField> thetas = one_vs_rest(stack, params);
      const QuasiMultiLabel out = quasi_multilabel(thetas);

      ScalarField class_map(out.width, out.height);
      for (size_t k = 0; k < out.class_map.size(); ++k) class_map.values[k] = out.class_map[k];
      pgm_write(ml_labels_out, class_map);

      json per_class = json::array();
      for (size_t c = 0; c < thetas.size(); ++c) {
        LabelField argmax_c(out.width, out.height);
        for (size_t k = 0; k < out.class_map.size(); ++k)
          argmax_c.labels[k] = out.class_map[k] == static_cast<int>(c);
        const QArea q = q_area(argmax_c, thetas[c]);
        json entry = {{"class", c},
                      {"q_area", q.value},
                      {"foreground_empty", q.foreground_empty},
                      {"background_empty", q.background_empty}};
        if (!ml_truth.empty()) entry["dice"] = dice(pgm_read_labels(ml_truth[c]), argmax_c);
        per_class.push_back(entry);
      }
      json report = {{"schema", 1},
                     {"command", "multilabel"},
                     {"lambda", ml_lambda},
                     {"mode", ml_mode},
                     {"classes", per_class}};
      if (!ml_truth.empty()) {
        std::vector<double> scores;
        for (const auto& e : per_class) scores.push_back(e.at("dice").get<double>());
        report["multi_label_dice"] = multi_label_dice(scores);
      }
      write_json_file(ml_report_out, report);
      report["out_labels"] = ml_labels_out;
      emit(report);
      return 0;
    }

    if (*rp_circle) {
      namespace fs = std::filesystem;
      fs::create_directories(rpc_dir);
      const auto path = [&](const char* name) { return (fs::path(rpc_dir) / name).string(); };
      const AmbiguousCircle scene = synth_ambiguous_circle(rpc_size, rpc_seed);
      const ScalarField psi = psi_mixture(scene.noisy, scene.fg, scene.bg);
      AmfParams params;
      params.lambda = rpc_lambda;
      params.rof.mode = TvMode::Isotropic;
      params.rof.tol = 1e-6;
      params.rof.max_iter = 20000;
      const AmfResult sol = amf_solve_detail(psi, params);

      double up = 0, low = 0, bg = 0;
      int up_n = 0, low_n = 0, bg_n = 0;
      for (int j = 0; j < rpc_size; ++j) {
        for (int i = 0; i < rpc_size; ++i) {
          const double th = sol.theta.at(i, j);
          if (!scene.truth.at(i, j)) {
            bg += th;
            ++bg_n;
          } else if (scene.clean.at(i, j) == 50.0) {
            up += th;
            ++up_n;
          } else {
            low += th;
            ++low_n;
          }
        }
      }
      amff_write(path("psi.amff"), psi);
      amff_write(path("theta.amff"), sol.theta);
      pgm_write(path("map.pgm"), map_labels(sol.theta));
      const json report = {{"schema", 1},
                           {"command", "repro-circle"},
                           {"lambda", rpc_lambda},
                           {"seed", rpc_seed},
                           {"size", rpc_size},
                           {"mode", "iso"},
                           {"upper_mean_theta", up / up_n},
                           {"lower_mean_theta", low / low_n},
                           {"background_mean_theta", bg / bg_n},
                           {"converged", sol.rof.converged}};
      write_json_file(path("report.json"), report);
      emit(report);
      return 0;
    }

    if (*rp_matern) {
      json instances = json::array();
      std::vector<double> corrs, q_means, g_means;
      int var_le = 0;
      std::uint64_t seed = rm_seed;
      for (double l : rm_ls) {
        const MaternGpSampler sampler(rm_size, l, 1);
        for (int inst = 0; inst < rm_per_l; ++inst) {
          std::mt19937_64 qgen(seed ^ 0x5eedULL);
          const double quantile = 0.2 + 0.6 * ((qgen() >> 11) * 0x1.0p-53);
          const MaternInstanceStats s =
              run_matern_instance(sampler, l, rm_sigma, rm_lambda, quantile, seed,
                                  rm_gibbs.config(TvMode::Anisotropic));
          instances.push_back({{"l", s.length_l},
                               {"quantile", s.quantile},
                               {"correlation", s.correlation},
                               {"q_mean", s.q_mean},
                               {"q_var", s.q_var},
                               {"gibbs_mean", s.gibbs_mean},
                               {"gibbs_var", s.gibbs_var},
                               {"rhat", s.rhat}});
          corrs.push_back(s.correlation);
          q_means.push_back(s.q_mean);
          g_means.push_back(s.gibbs_mean);
          if (s.q_var <= s.gibbs_var) ++var_le;
          seed += 101;
        }
      }
      std::vector<double> sorted = corrs;
      std::sort(sorted.begin(), sorted.end());
      const double median_corr = sorted[sorted.size() / 2];
      const json report = {{"schema", 1},
                           {"command", "repro-matern-compare"},
                           {"size", rm_size},
                           {"sigma", rm_sigma},
                           {"lambda", rm_lambda},
                           {"mode", "aniso"},
                           {"seed", rm_seed},
                           {"median_correlation", median_corr},
                           {"mean_area_pearson", pearson(q_means, g_means)},
                           {"q_var_le_gibbs_var_fraction",
                            static_cast<double>(var_le) / corrs.size()},
                           {"instances", instances}};
      write_json_file(rm_report, report);
      json summary = report;
      summary.erase("instances");
      emit(summary);
      return 0;
    }

    throw std::runtime_error("no subcommand executed");
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace amf::cli
