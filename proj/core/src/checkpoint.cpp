#include "gensep/checkpoint.hpp"

#include <fstream>

#include <json.hpp>

#include "gensep/errors.hpp"

namespace gensep {

namespace {

using nlohmann::json;

json mat_to_json(const Mat& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["data"] = std::vector<double>(m.data(), m.data() + m.size());
  return j;
}

Mat mat_from_json(const json& j) {
  const std::size_t rows = j.at("rows").get<std::size_t>();
  const std::size_t cols = j.at("cols").get<std::size_t>();
  const auto data = j.at("data").get<std::vector<double>>();
  if (data.size() != rows * cols) {
    throw InputError("checkpoint: matrix data length != rows*cols");
  }
  Mat m(rows, cols);
  for (std::size_t k = 0; k < data.size(); ++k) m[k] = data[k];
  return m;
}

json config_to_json(const TrainConfig& c) {
  return json{{"model_kind", to_string(c.model_kind)},
              {"iterations", c.iterations},
              {"learning_rate", c.learning_rate},
              {"critic_steps_per_gen", c.critic_steps_per_gen},
              {"clip_lo", c.clip_lo},
              {"clip_hi", c.clip_hi},
              {"batch_size", c.batch_size},
              {"seed", c.seed},
              {"hidden_units", c.hidden_units},
              {"critic_hidden", c.critic_hidden},
              {"latent_dim", c.latent_dim},
              {"vae_latent", c.vae_latent},
              {"nmf_rank", c.nmf_rank},
              {"rmsprop_decay", c.rmsprop_decay},
              {"rmsprop_epsilon", c.rmsprop_epsilon},
              {"init_weight_std", c.init_weight_std},
              {"gan_nonsaturating", c.gan_nonsaturating},
              {"telemetry_every", c.telemetry_every}};
}

TrainConfig config_from_json(const json& j) {
  TrainConfig c;
  c.model_kind = parse_model_kind(j.at("model_kind").get<std::string>());
  c.iterations = j.at("iterations").get<std::size_t>();
  c.learning_rate = j.at("learning_rate").get<double>();
  c.critic_steps_per_gen = j.at("critic_steps_per_gen").get<std::size_t>();
  c.clip_lo = j.at("clip_lo").get<double>();
  c.clip_hi = j.at("clip_hi").get<double>();
  c.batch_size = j.at("batch_size").get<std::size_t>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.hidden_units = j.at("hidden_units").get<std::size_t>();
  c.critic_hidden = j.at("critic_hidden").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.vae_latent = j.at("vae_latent").get<std::size_t>();
  c.nmf_rank = j.at("nmf_rank").get<std::size_t>();
  c.rmsprop_decay = j.at("rmsprop_decay").get<double>();
  c.rmsprop_epsilon = j.at("rmsprop_epsilon").get<double>();
  c.init_weight_std = j.at("init_weight_std").get<double>();
  c.gan_nonsaturating = j.at("gan_nonsaturating").get<bool>();
  c.telemetry_every = j.at("telemetry_every").get<std::size_t>();
  return c;
}

json curve_to_json(const std::vector<std::pair<std::size_t, double>>& curve) {
  json arr = json::array();
  for (const auto& [it, v] : curve) arr.push_back(json::array({it, v}));
  return arr;
}

std::vector<std::pair<std::size_t, double>> curve_from_json(const json& arr) {
  std::vector<std::pair<std::size_t, double>> curve;
  for (const auto& row : arr) {
    curve.emplace_back(row.at(0).get<std::size_t>(), row.at(1).get<double>());
  }
  return curve;
}

}  // namespace

std::string checkpoint_to_json(const TrainedSourceModel& m) {
  json j;
  j["kind"] = to_string(m.kind);
  j["seed"] = m.seed;
  j["config"] = config_to_json(m.config);
  j["critic_steps"] = m.critic_steps;
  j["generator_steps"] = m.generator_steps;
  j["loss_curve"] = curve_to_json(m.loss_curve);
  j["aux_curve"] = curve_to_json(m.aux_curve);

  json weights;
  switch (m.kind) {
    case ModelKind::Nmf:
      weights["w"] = mat_to_json(m.nmf().w);
      break;
    case ModelKind::Vae: {
      const VaeParams& v = m.vae();
      weights["enc_w1"] = mat_to_json(v.enc_w1);
      weights["enc_b1"] = mat_to_json(v.enc_b1);
      weights["mu_w2"] = mat_to_json(v.mu_w2);
      weights["mu_b2"] = mat_to_json(v.mu_b2);
      weights["logvar_w2"] = mat_to_json(v.logvar_w2);
      weights["logvar_b2"] = mat_to_json(v.logvar_b2);
      weights["dec_w3"] = mat_to_json(v.dec_w3);
      weights["dec_b3"] = mat_to_json(v.dec_b3);
      break;
    }
    default: {
      const GeneratorParams& g = m.generator();
      weights["w1"] = mat_to_json(g.w1);
      weights["b1"] = mat_to_json(g.b1);
      weights["w2"] = mat_to_json(g.w2);
      weights["b2"] = mat_to_json(g.b2);
    }
  }
  j["model"] = std::move(weights);

  if (m.critic.has_value()) {
    json c;
    c["v1"] = mat_to_json(m.critic->v1);
    c["c1"] = mat_to_json(m.critic->c1);
    c["v2"] = mat_to_json(m.critic->v2);
    c["c2"] = mat_to_json(m.critic->c2);
    c["output_kind"] =
        m.critic->output_kind == CriticOutput::Sigmoid ? "sigmoid" : "identity";
    j["critic"] = std::move(c);
  } else {
    j["critic"] = nullptr;
  }
  return j.dump(2);
}

TrainedSourceModel checkpoint_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: malformed JSON: ") + e.what());
  }
  try {
    TrainedSourceModel m;
    m.kind = parse_model_kind(j.at("kind").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = config_from_json(j.at("config"));
    m.critic_steps = j.at("critic_steps").get<std::size_t>();
    m.generator_steps = j.at("generator_steps").get<std::size_t>();
    m.loss_curve = curve_from_json(j.at("loss_curve"));
    m.aux_curve = curve_from_json(j.at("aux_curve"));

    const json& weights = j.at("model");
    switch (m.kind) {
      case ModelKind::Nmf: {
        NmfParams p;
        p.w = mat_from_json(weights.at("w"));
        m.model = std::move(p);
        break;
      }
      case ModelKind::Vae: {
        VaeParams v;
        v.enc_w1 = mat_from_json(weights.at("enc_w1"));
        v.enc_b1 = mat_from_json(weights.at("enc_b1"));
        v.mu_w2 = mat_from_json(weights.at("mu_w2"));
        v.mu_b2 = mat_from_json(weights.at("mu_b2"));
        v.logvar_w2 = mat_from_json(weights.at("logvar_w2"));
        v.logvar_b2 = mat_from_json(weights.at("logvar_b2"));
        v.dec_w3 = mat_from_json(weights.at("dec_w3"));
        v.dec_b3 = mat_from_json(weights.at("dec_b3"));
        m.model = std::move(v);
        break;
      }
      default: {
        GeneratorParams g;
        g.w1 = mat_from_json(weights.at("w1"));
        g.b1 = mat_from_json(weights.at("b1"));
        g.w2 = mat_from_json(weights.at("w2"));
        g.b2 = mat_from_json(weights.at("b2"));
        m.model = std::move(g);
      }
    }

    if (!j.at("critic").is_null()) {
      CriticParams c;
      const json& jc = j.at("critic");
      c.v1 = mat_from_json(jc.at("v1"));
      c.c1 = mat_from_json(jc.at("c1"));
      c.v2 = mat_from_json(jc.at("v2"));
      c.c2 = mat_from_json(jc.at("c2"));
      const std::string head = jc.at("output_kind").get<std::string>();
      if (head == "sigmoid") {
        c.output_kind = CriticOutput::Sigmoid;
      } else if (head == "identity") {
        c.output_kind = CriticOutput::Identity;
      } else {
        throw InputError("checkpoint: unknown critic output kind " + head);
      }
      m.critic = std::move(c);
    }
    if (m.critic.has_value() != has_critic(m.kind)) {
      throw InputError("checkpoint: critic presence inconsistent with kind " +
                       to_string(m.kind));
    }
    return m;
  } catch (const json::exception& e) {
    throw InputError(std::string("checkpoint: missing or mistyped field: ") +
                     e.what());
  }
}

void save_checkpoint(const std::string& path, const TrainedSourceModel& m) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw InputError("cannot write checkpoint: " + path);
  f << checkpoint_to_json(m) << '\n';
  if (!f) throw InputError("short write to checkpoint: " + path);
}

TrainedSourceModel load_checkpoint(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot open checkpoint: " + path);
  std::string text((std::istreambuf_iterator<char>(f)),
                   std::istreambuf_iterator<char>());
  return checkpoint_from_json(text);
}

}  // namespace gensep
