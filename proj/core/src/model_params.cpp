#include "bdy/model_params.hpp"

#include <cmath>

#include "json.hpp"

namespace bdy {

ModelParams::ModelParams(double mu, double n_h, double gamma, int n_agents)
    : mu_(mu), n_h_(n_h), gamma_(gamma), n_agents_(n_agents) {
  if (!(mu > 0.0) || !std::isfinite(mu)) {
    throw invalid_params("mu must be a positive real, got " + std::to_string(mu));
  }
  if (!(n_h >= 0.0 && n_h <= 1.0)) {
    throw invalid_params("n_h must lie in [0,1], got " + std::to_string(n_h));
  }
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    throw invalid_params("gamma must lie in [0,1), got " + std::to_string(gamma));
  }
  if (n_agents < 2) {
    throw invalid_params("n_agents must be at least 2, got " +
                         std::to_string(n_agents));
  }
}

int ModelParams::honest_count() const {
  const double exact = n_h_ * n_agents_;
  const double rounded = std::round(exact);
  if (std::abs(exact - rounded) > 1e-9) {
    throw invalid_params("n_h * n_agents must be an integer for the ABM (n_h=" +
                         std::to_string(n_h_) + ", n_agents=" +
                         std::to_string(n_agents_) + ")");
  }
  return static_cast<int>(rounded);
}

std::string ModelParams::to_json() const {
  nlohmann::json j;
  j["mu"] = mu_;
  j["n_h"] = n_h_;
  j["gamma"] = gamma_;
  j["n_agents"] = n_agents_;
  return j.dump();
}

ModelParams ModelParams::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw invalid_params(std::string("bad params JSON: ") + e.what());
  }
  if (!j.contains("mu") || !j.contains("n_h") || !j.contains("gamma")) {
    throw invalid_params("params JSON needs keys mu, n_h, gamma");
  }
  return ModelParams(j["mu"].get<double>(), j["n_h"].get<double>(),
                     j["gamma"].get<double>(),
                     j.value("n_agents", 2000));
}

}  // namespace bdy
