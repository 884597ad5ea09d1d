// depfuse command-line driver.
//
// Every subcommand reads an optional key-value config (--config), applies
// --set/flag overrides on top (flags win) and writes its artifacts under --out.
// Failures print one line "error: <message>" on stderr and exit non-zero.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "depfuse/depfuse.hpp"

namespace fs = std::filesystem;
using namespace depfuse;

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = "depfuse_out";
  std::string features;
  std::string encoder;
  std::string granularity;
  std::vector<std::string> overrides;
  std::string lexicon;
  std::string profanity;
  std::string emotion;
};

RunConfig resolve_config(const GlobalOptions& g) {
  std::vector<std::pair<std::string, std::string>> entries;
  if (!g.config_path.empty()) entries = RunConfig::parse_file(g.config_path);
  for (const auto& o : g.overrides) entries.push_back(RunConfig::split_assignment(o));
  if (g.seed) entries.emplace_back("seed", std::to_string(*g.seed));
  if (!g.features.empty()) entries.emplace_back("features", g.features);
  if (!g.encoder.empty()) entries.emplace_back("encoder.kind", g.encoder);
  if (!g.granularity.empty()) entries.emplace_back("granularity", g.granularity);
  if (!g.lexicon.empty()) entries.emplace_back("resources.lexicon", g.lexicon);
  if (!g.profanity.empty()) entries.emplace_back("resources.profanity", g.profanity);
  if (!g.emotion.empty()) entries.emplace_back("resources.emotion", g.emotion);
  auto cfg = RunConfig::from_entries(entries);
  cfg.validate();
  return cfg;
}

fs::path ensure_out(const GlobalOptions& g) {
  fs::path out(g.out_dir);
  fs::create_directories(out);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

Dataset load_for(const RunConfig& cfg, const std::string& path, bool explicit_granularity) {
  std::optional<Granularity> g;
  if (explicit_granularity) g = cfg.model.granularity;
  return load_dataset(path, g, LoadOptions{cfg.allow_empty});
}

std::shared_ptr<const MoralLexicon> load_lexicon(const RunConfig& cfg, bool required) {
  if (cfg.lexicon_path.empty()) {
    if (required) throw Error("missing lexicon (set resources.lexicon or --lexicon)");
    return nullptr;
  }
  return std::make_shared<const MoralLexicon>(MoralLexicon::load_tsv(cfg.lexicon_path));
}

std::shared_ptr<const ProfanityModel> load_profanity(const RunConfig& cfg, bool required) {
  if (cfg.profanity_path.empty()) {
    if (required) throw Error("missing profanity model (set resources.profanity or --profanity)");
    return nullptr;
  }
  return std::make_shared<const ProfanityModel>(ProfanityModel::load(cfg.profanity_path));
}

Resources load_resources(const RunConfig& cfg, const FeatureSet& fs) {
  Resources r;
  r.profanity = load_profanity(cfg, fs.profanity);
  r.lexicon = load_lexicon(cfg, fs.morality);
  if (fs.emotion) {
    if (cfg.emotion_path.empty()) throw Error("missing emotion model (set resources.emotion or --emotion)");
    r.emotion = std::make_shared<const EmotionModel>(EmotionModel::load(cfg.emotion_path, cfg.model.emotion_dim));
  }
  return r;
}

// Emotion is loaded for every variant that might need it.
PipelineSpec make_spec(const RunConfig& cfg, bool any_emotion) {
  FeatureSet all = cfg.model.features;
  all.emotion = any_emotion;
  PipelineSpec spec;
  spec.model = cfg.model;
  spec.encoder = cfg.encoder;
  spec.resources = load_resources(cfg, all);
  spec.built_encoder = std::make_shared<const Encoder>(Encoder::from_config(cfg.encoder));
  return spec;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"depfuse: depression detection with emotion, profanity and morality features"};
  app.require_subcommand(1);
  GlobalOptions g;
  app.add_option("--config", g.config_path, "key=value config file");
  app.add_option("--seed", g.seed, "seed for every random draw");
  app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
  app.add_option("--features", g.features, "comma list of emotion,profanity,morality (or B+E+P style)");
  app.add_option("--encoder", g.encoder, "toy | pretrained");
  app.add_option("--granularity", g.granularity, "post | user");
  app.add_option("--set", g.overrides, "config override key=value (repeatable)");
  app.add_option("--lexicon", g.lexicon, "moral lexicon TSV");
  app.add_option("--profanity", g.profanity, "profanity model file");
  app.add_option("--emotion", g.emotion, "emotion model checkpoint");
  app.fallthrough();

  std::string dataset_path, format = "auto", checkpoint, text, user_file, corpus, variants;
  std::optional<std::size_t> folds;

  auto* ingest = app.add_subcommand("ingest", "load and validate a JSONL dataset into the store");
  ingest->add_option("path", dataset_path, "dataset JSONL")->required();
  ingest->add_option("--format", format, "post_jsonl | user_jsonl | auto")->capture_default_str();

  auto* analyze = app.add_subcommand("analyze", "per-class corpus statistics and moral histograms");
  analyze->add_option("--dataset", dataset_path)->required();

  auto* train_emotion = app.add_subcommand("train-emotion", "train the VAD emotion regressor");
  train_emotion->add_option("--corpus", corpus, "VAD JSONL corpus")->required();

  auto* featurize = app.add_subcommand("featurize", "dump the hand-crafted feature vector of every item");
  featurize->add_option("--dataset", dataset_path)->required();

  auto* train_cmd = app.add_subcommand("train", "train a model on a dataset");
  train_cmd->add_option("--dataset", dataset_path)->required();

  auto* evaluate = app.add_subcommand("evaluate", "score a checkpoint on a labeled dataset");
  evaluate->add_option("--dataset", dataset_path)->required();
  evaluate->add_option("--checkpoint", checkpoint)->required();

  auto* cv = app.add_subcommand("cv", "stratified k-fold cross-validation");
  cv->add_option("--dataset", dataset_path)->required();
  cv->add_option("--folds", folds, "number of folds (default cv.folds)");

  auto* ablate = app.add_subcommand("ablate", "cross-validated feature ablation");
  ablate->add_option("--dataset", dataset_path)->required();
  ablate->add_option("--folds", folds, "number of folds (default cv.folds)");
  ablate->add_option("--variants", variants, "semicolon list, default B;B+E;B+E+P;B+E+M;B+E+P+M");

  auto* predict = app.add_subcommand("predict", "classify a text or a user file with a checkpoint");
  predict->add_option("--checkpoint", checkpoint)->required();
  auto* text_opt = predict->add_option("--text", text, "a single post");
  auto* user_opt = predict->add_option("--user-file", user_file, "user-level JSONL; one prediction per user");
  text_opt->excludes(user_opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    const bool explicit_gran = !g.granularity.empty();
    if (*ingest) {
      LoadOptions opts;
      auto cfg = resolve_config(g);
      opts.allow_empty = cfg.allow_empty;
      Dataset ds;
      if (format == "post_jsonl") ds = load_post_jsonl(dataset_path, opts);
      else if (format == "user_jsonl") ds = load_user_jsonl(dataset_path, opts);
      else if (format == "auto") ds = load_dataset(dataset_path, std::nullopt, opts);
      else throw Error("unknown format \"" + format + "\"");
      const auto out = ensure_out(g);
      save_jsonl((out / "dataset.jsonl").string(), ds);
      Json report = to_json(validate_dataset(ds));
      report["granularity"] = std::string(to_string(ds.granularity()));
      report["items"] = ds.size();
      write_text(out / "report.json", dump(report));
      std::cout << dump(report);
      return 0;
    }

    if (*analyze) {
      auto cfg = resolve_config(g);
      const auto ds = load_for(cfg, dataset_path, explicit_gran);
      const auto lexicon = load_lexicon(cfg, true);
      const auto profanity = load_profanity(cfg, true);
      const auto out = ensure_out(g);
      const auto stats = corpus_stats(ds, *profanity, *lexicon);
      write_text(out / "stats.json", dump(to_json(stats)));
      for (auto d : kAllDimensions) {
        write_text(out / ("hist_" + std::string(to_string(d)) + ".csv"),
                   histogram_csv(moral_histogram(ds, d, *lexicon)));
      }
      std::cout << dump(to_json(stats));
      return 0;
    }

    if (*train_emotion) {
      auto cfg = resolve_config(g);
      const auto data = load_vad_jsonl(corpus);
      auto ecfg = cfg.emotion;
      ecfg.emotion_dim = cfg.model.emotion_dim;
      ecfg.max_words = cfg.model.max_words;
      const auto result = train_emotion_regressor(data, ecfg, cfg.emotion_train);
      const auto out = ensure_out(g);
      result.model.save((out / "emotion.ckpt").string());
      std::string log;
      for (const auto& e : result.history) {
        Json row{{"epoch", e.epoch}, {"train_mse", e.train_mse}};
        row["val_mse"] = std::isnan(e.val_mse) ? Json() : Json(e.val_mse);
        log += row.dump() + "\n";
      }
      write_text(out / "emotion_history.jsonl", log);
      const auto& last = result.history.back();
      Json summary{{"checkpoint", (out / "emotion.ckpt").string()}, {"train_mse", last.train_mse}};
      summary["val_mse"] = std::isnan(last.val_mse) ? Json() : Json(last.val_mse);
      std::cout << dump(summary);
      return 0;
    }

    if (*featurize) {
      auto cfg = resolve_config(g);
      const auto ds = load_for(cfg, dataset_path, explicit_gran);
      cfg.model.granularity = ds.granularity();
      FeatureSet handcrafted = cfg.model.features;
      handcrafted.emotion = false;
      if (!handcrafted.any_handcrafted()) throw Error("featurize needs profanity and/or morality enabled");
      ModelConfig mcfg = cfg.model;
      mcfg.features = handcrafted;
      Featurizer f(mcfg, std::make_shared<const Encoder>(Encoder::from_config(cfg.encoder)),
                   load_resources(cfg, handcrafted),
                   SamplingConfig{cfg.train.posts_per_user, cfg.train.sampling, cfg.train.seed});
      const auto layout = feature_layout(handcrafted);
      std::string lines;
      for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto x = ds.granularity() == Granularity::post_level ? f.raw_features(ds.posts()[i])
                                                                    : f.raw_features(ds.users()[i]);
        lines += Json{{"id", ds.id(i)}, {"label", std::string(to_string(ds.label(i)))}, {"layout", layout}, {"x", x}}
                     .dump() + "\n";
      }
      const auto out = ensure_out(g);
      write_text(out / "features.jsonl", lines);
      std::cout << "wrote " << ds.size() << " feature vectors to " << (out / "features.jsonl").string() << "\n";
      return 0;
    }

    if (*train_cmd) {
      auto cfg = resolve_config(g);
      const auto ds = load_for(cfg, dataset_path, true);
      const auto spec = make_spec(cfg, cfg.model.features.emotion);
      const auto result = train(ds, spec, cfg.train);
      const auto out = ensure_out(g);
      result.pipeline.save((out / "model.ckpt").string());
      std::string log;
      for (const auto& rec : result.history) log += to_json(rec).dump() + "\n";
      write_text(out / "history.jsonl", log);
      std::cout << log;
      return 0;
    }

    if (*evaluate) {
      auto cfg = resolve_config(g);
      auto pipeline = Pipeline::load(checkpoint);
      const auto& feats = pipeline.config().features;
      pipeline.attach(load_profanity(cfg, feats.profanity), load_lexicon(cfg, feats.morality));
      const auto ds = load_dataset(dataset_path, pipeline.config().granularity, LoadOptions{cfg.allow_empty});
      const auto m = compute_metrics(pipeline.predict_labels(ds), ds.labels());
      const auto out = ensure_out(g);
      write_text(out / "metrics.json", dump(to_json(m)));
      std::cout << dump(to_json(m));
      return 0;
    }

    if (*cv || *ablate) {
      auto cfg = resolve_config(g);
      const auto ds = load_for(cfg, dataset_path, true);
      const std::size_t k = folds.value_or(cfg.folds);
      const auto out = ensure_out(g);
      if (*cv) {
        const auto spec = make_spec(cfg, cfg.model.features.emotion);
        const auto report = run_cv(ds, spec, cfg.train, k);
        write_text(out / "cv.json", dump(to_json(report)));
        std::cout << dump(to_json(report));
        return 0;
      }
      std::vector<FeatureSet> list;
      if (variants.empty()) {
        list = canonical_variants();
      } else {
        std::size_t start = 0;
        while (start <= variants.size()) {
          auto end = variants.find(';', start);
          if (end == std::string::npos) end = variants.size();
          list.push_back(FeatureSet::parse(variants.substr(start, end - start)));
          start = end + 1;
        }
      }
      RunConfig all = cfg;
      all.model.features = FeatureSet{};
      bool any_emotion = false;
      for (const auto& v : list) {
        any_emotion = any_emotion || v.emotion;
        all.model.features.profanity = all.model.features.profanity || v.profanity;
        all.model.features.morality = all.model.features.morality || v.morality;
      }
      const auto spec = make_spec(all, any_emotion);
      const auto rows = ablation_run(ds, list, spec, cfg.train, k);
      write_text(out / "ablation.json", dump(ablation_json(rows)));
      write_text(out / "ablation.txt", ablation_table(rows));
      std::cout << ablation_table(rows);
      return 0;
    }

    if (*predict) {
      auto cfg = resolve_config(g);
      std::optional<FeatureSet> requested;
      if (!g.features.empty()) requested = FeatureSet::parse(g.features);
      auto pipeline = Pipeline::load(checkpoint, requested);
      const auto& feats = pipeline.config().features;
      pipeline.attach(load_profanity(cfg, feats.profanity), load_lexicon(cfg, feats.morality));
      auto emit = [&](const std::string& id, const Prediction& p) {
        Json x = Json::object();
        for (std::size_t i = 0; i < p.features.layout.size(); ++i) x[p.features.layout[i]] = p.features.values[i];
        Json row{{"id", id}, {"label", std::string(to_string(p.label))}, {"probability", p.p_depressed}, {"x", x}};
        std::cout << row.dump() << "\n";
      };
      if (!user_file.empty()) {
        if (pipeline.config().granularity != Granularity::user_level) {
          throw Error("checkpoint is post-level; use --text");
        }
        const auto ds = load_user_jsonl(user_file, LoadOptions{cfg.allow_empty});
        for (const auto& u : ds.users()) emit(u.user_id, pipeline.predict(u));
      } else {
        if (text.empty()) throw Error("predict needs --text or --user-file");
        if (pipeline.config().granularity == Granularity::user_level) {
          UserBundle u{"input", ClassLabel::control, {Post{"input#0", text, std::nullopt, std::nullopt}}};
          emit("input", pipeline.predict(u));
        } else {
          emit("input", pipeline.predict(Post{"input", text, std::nullopt, std::nullopt}));
        }
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::string msg = e.what();
    for (auto& c : msg) {
      if (c == '\n') c = ' ';
    }
    std::cerr << "error: " << msg << "\n";
    return 1;
  }
  return 2;
}
