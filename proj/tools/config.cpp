#include "config.hpp"

#include <fstream>
#include <set>

#include "motifmix/util.hpp"

namespace motifmix::cli {

namespace {

void require_keys(const nlohmann::json& obj, const std::string& where,
                  const std::set<std::string>& allowed,
                  const std::set<std::string>& required = {}) {
  if (!obj.is_object()) throw SchemaError(where + ": expected an object");
  for (const auto& [key, value] : obj.items())
    if (!allowed.count(key))
      throw SchemaError(where + ": unknown key '" + key + "'");
  for (const auto& key : required)
    if (!obj.contains(key))
      throw SchemaError(where + ": missing required key '" + key + "'");
}

double get_number(const nlohmann::json& obj, const std::string& key,
                  const std::string& where) {
  if (!obj.at(key).is_number())
    throw SchemaError(where + "." + key + ": expected a number");
  return obj.at(key).get<double>();
}

}  // namespace

std::string canonical_hash(const nlohmann::json& doc) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(doc.dump())));
  return buf;
}

bool ExperimentConfig::analysis_enabled(const std::string& name) const {
  for (const auto& a : analysis)
    if (a == name) return true;
  return false;
}

double ExperimentConfig::resolved_p0() const {
  if (p0 >= 0.0) return p0;
  double s = 0.0;
  for (double v : p) s += v;
  if (!(s > 0.0 && s < 1.0))
    throw SchemaError("inference.p0 defaulted to sum of p, which is not in (0,1)");
  return s;
}

ModelParams ExperimentConfig::inference_params() const {
  ModelParams params;
  params.p0 = resolved_p0();
  params.beta = beta;
  params.validate();
  return params;
}

GenerativeModel ExperimentConfig::build_generative_model(std::uint64_t seed,
                                                         double* a0_out,
                                                         double* a1_out) const {
  GenerativeModel gen;
  gen.J = J;
  gen.w = w;
  gen.M = M;
  gen.motif_freqs = p;

  CounterRng rng(seed, 0xa11ce);
  double a0 = 0.0, a1 = 0.0;
  if (background) {
    gen.background = *background;
  } else if (calib_background_median > 0.0) {
    a0 = calibrate_dirichlet_concentration(calib_background_median, M,
                                           calib_mc_samples, seed ^ 0xbac);
    gen.background = rng.next_dirichlet_sym(a0, M);
  } else {
    gen.background.assign(M, 1.0 / M);
  }

  if (motifs) {
    gen.motif_matrices = *motifs;
  } else if (words) {
    for (const auto& word : *words) {
      std::vector<std::vector<double>> mat(w, std::vector<double>(M, 0.0));
      for (int k = 0; k < w; ++k) mat[k][word[k] - 1] = 1.0;
      gen.motif_matrices.push_back(std::move(mat));
    }
  } else if (J > 0) {
    if (!(calib_motif_median > 0.0))
      throw SchemaError(
          "generative: J > 0 needs one of motifs, words or calibration");
    a1 = calibrate_dirichlet_concentration(calib_motif_median, M,
                                           calib_mc_samples, seed ^ 0x301f);
    gen.motif_matrices.resize(J);
    for (int j = 0; j < J; ++j) {
      gen.motif_matrices[j].resize(w);
      for (int k = 0; k < w; ++k)
        gen.motif_matrices[j][k] = rng.next_dirichlet_sym(a1, M);
    }
  }
  if (a0_out) *a0_out = a0;
  if (a1_out) *a1_out = a1;
  gen.validate();
  return gen;
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  require_keys(doc, "config",
               {"generative", "inference", "sampler", "analysis", "n_blocks",
                "table1", "landscape", "bottleneck", "limits", "seeds", "output"},
               {"generative", "inference", "seeds"});
  ExperimentConfig cfg;
  cfg.raw = doc;
  cfg.config_hash = canonical_hash(doc);

  const auto& gen = doc.at("generative");
  require_keys(gen, "generative",
               {"J", "w", "M", "p", "background", "motifs", "words", "calibration"},
               {"J", "w", "M"});
  cfg.J = gen.at("J").get<int>();
  cfg.w = gen.at("w").get<int>();
  cfg.M = gen.at("M").get<int>();
  if (cfg.w < 1 || cfg.M < 2) throw SchemaError("generative: need w >= 1, M >= 2");
  if (cfg.J < 0) throw SchemaError("generative.J: must be >= 0");
  if (gen.contains("p")) cfg.p = gen.at("p").get<std::vector<double>>();
  if (static_cast<int>(cfg.p.size()) != cfg.J)
    throw SchemaError("generative.p: need exactly J motif frequencies");
  if (gen.contains("background")) {
    cfg.background = gen.at("background").get<std::vector<double>>();
    if (static_cast<int>(cfg.background->size()) != cfg.M)
      throw SchemaError("generative.background: length must be M");
  }
  if (gen.contains("motifs")) {
    cfg.motifs =
        gen.at("motifs").get<std::vector<std::vector<std::vector<double>>>>();
    if (static_cast<int>(cfg.motifs->size()) != cfg.J)
      throw SchemaError("generative.motifs: need J matrices");
  }
  if (gen.contains("words")) {
    cfg.words = gen.at("words").get<std::vector<std::vector<int>>>();
    if (static_cast<int>(cfg.words->size()) != cfg.J)
      throw SchemaError("generative.words: need J words");
    for (const auto& word : *cfg.words) {
      if (static_cast<int>(word.size()) != cfg.w)
        throw SchemaError("generative.words: each word must have length w");
      for (int s : word)
        if (s < 1 || s > cfg.M)
          throw SchemaError("generative.words: symbols must lie in 1..M");
    }
  }
  if (gen.contains("calibration")) {
    const auto& cal = gen.at("calibration");
    require_keys(cal, "generative.calibration",
                 {"motif_median_max", "background_median_max", "mc_samples"});
    if (cal.contains("motif_median_max"))
      cfg.calib_motif_median = get_number(cal, "motif_median_max", "calibration");
    if (cal.contains("background_median_max"))
      cfg.calib_background_median =
          get_number(cal, "background_median_max", "calibration");
    if (cal.contains("mc_samples"))
      cfg.calib_mc_samples = cal.at("mc_samples").get<int>();
  }

  const auto& inf = doc.at("inference");
  require_keys(inf, "inference", {"p0", "beta"});
  if (inf.contains("p0")) cfg.p0 = get_number(inf, "p0", "inference");
  double flat_beta = 1.0;
  if (inf.contains("beta")) {
    if (inf.at("beta").is_number()) {
      flat_beta = inf.at("beta").get<double>();
      if (!(flat_beta > 0.0)) throw SchemaError("inference.beta: must be > 0");
    } else {
      cfg.beta = inf.at("beta").get<std::vector<std::vector<double>>>();
      if (static_cast<int>(cfg.beta.size()) != cfg.w + 1)
        throw SchemaError("inference.beta: need w+1 rows");
      for (const auto& row : cfg.beta)
        if (static_cast<int>(row.size()) != cfg.M)
          throw SchemaError("inference.beta: rows must have length M");
    }
  }
  if (cfg.beta.empty())
    cfg.beta.assign(cfg.w + 1, std::vector<double>(cfg.M, flat_beta));

  if (doc.contains("sampler")) {
    const auto& sam = doc.at("sampler");
    require_keys(sam, "sampler", {"scan", "burn_in", "samples", "thin", "chains"});
    if (sam.contains("scan")) {
      const std::string scan = sam.at("scan").get<std::string>();
      if (scan == "systematic")
        cfg.schedule.scan = ScanType::kSystematic;
      else if (scan == "random")
        cfg.schedule.scan = ScanType::kRandom;
      else
        throw SchemaError("sampler.scan: expected 'systematic' or 'random'");
    }
    if (sam.contains("burn_in")) cfg.schedule.burn_in = sam.at("burn_in").get<long>();
    if (sam.contains("samples")) cfg.schedule.samples = sam.at("samples").get<long>();
    if (sam.contains("thin")) cfg.schedule.thin = sam.at("thin").get<int>();
    if (sam.contains("chains")) cfg.chains = sam.at("chains").get<int>();
    if (cfg.schedule.burn_in < 0 || cfg.schedule.samples < 1 ||
        cfg.schedule.thin < 1 || cfg.chains < 1)
      throw SchemaError("sampler: nonpositive schedule entry");
  }

  if (doc.contains("analysis")) {
    cfg.analysis = doc.at("analysis").get<std::vector<std::string>>();
    const std::set<std::string> known{"exact-gap",  "collapsed-gap", "bottleneck-d",
                                      "conductance", "path-bound",   "tv-mixing",
                                      "landscape",  "table1"};
    for (const auto& a : cfg.analysis)
      if (!known.count(a)) throw SchemaError("analysis: unknown entry '" + a + "'");
  }

  if (doc.contains("n_blocks")) cfg.n_blocks = doc.at("n_blocks").get<int>();

  if (doc.contains("table1")) {
    const auto& t = doc.at("table1");
    require_keys(t, "table1", {"n_datasets"});
    if (t.contains("n_datasets")) cfg.table1_datasets = t.at("n_datasets").get<int>();
  }

  if (doc.contains("landscape")) {
    const auto& l = doc.at("landscape");
    require_keys(l, "landscape",
                 {"step", "margin", "random_starts", "certificate_samples"});
    if (l.contains("step")) cfg.landscape_step = get_number(l, "step", "landscape");
    if (l.contains("margin"))
      cfg.landscape_margin = get_number(l, "margin", "landscape");
    if (l.contains("random_starts"))
      cfg.landscape_random_starts = l.at("random_starts").get<int>();
    if (l.contains("certificate_samples"))
      cfg.landscape_certificate_samples = l.at("certificate_samples").get<int>();
  }

  if (doc.contains("bottleneck")) {
    const auto& b = doc.at("bottleneck");
    require_keys(b, "bottleneck", {"restricted", "top_k"});
    if (b.contains("restricted"))
      cfg.bottleneck_restricted = b.at("restricted").get<bool>();
    if (b.contains("top_k")) cfg.bottleneck_top_k = b.at("top_k").get<int>();
  }

  if (doc.contains("limits")) {
    const auto& lim = doc.at("limits");
    require_keys(lim, "limits", {"max_blocks_exact", "state_budget", "matrix_budget"});
    if (lim.contains("max_blocks_exact"))
      cfg.max_blocks_exact = lim.at("max_blocks_exact").get<int>();
    if (lim.contains("state_budget"))
      cfg.state_budget = lim.at("state_budget").get<std::size_t>();
    if (lim.contains("matrix_budget"))
      cfg.matrix_budget = lim.at("matrix_budget").get<std::size_t>();
  }

  const auto& seeds = doc.at("seeds");
  require_keys(seeds, "seeds", {"master"}, {"master"});
  cfg.master_seed = seeds.at("master").get<std::uint64_t>();

  if (doc.contains("output")) cfg.output_dir = doc.at("output").get<std::string>();
  return cfg;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::ios_base::failure("cannot open config file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("config parse error: ") + e.what());
  }
  return parse_config(doc);
}

int exit_code_for_current_exception() {
  try {
    throw;
  } catch (const SchemaError&) {
    return 2;
  } catch (const ResourceError&) {
    return 3;
  } catch (const NumericError&) {
    return 4;
  } catch (const std::domain_error&) {
    return 2;
  } catch (const std::ios_base::failure&) {
    return 5;
  } catch (...) {
    return 1;
  }
}

}  // namespace motifmix::cli
