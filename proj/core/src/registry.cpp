#include "evb/registry.hpp"

namespace evb {

std::unique_ptr<StateSpaceModel> make_model(const std::string& name, const ModelOptions& options,
                                            const Dataset* data) {
  if (name == "sv") return std::make_unique<SvModel>(options.prior_alpha, options.prior_beta);
  if (name == "lgssm")
    return std::make_unique<LinearGaussianModel>(options.obs_var, options.prior_alpha, options.prior_beta);
  if (name == "skellam") {
    SkellamOptions sk = options.skellam;
    if (data != nullptr) {
      sk.n_series = data->N();
      if (sk.x0.size() == 0) sk.x0 = SkellamModel::log_sample_variances(*data);
    }
    return std::make_unique<SkellamModel>(std::move(sk));
  }
  throw DomainError("unknown model '" + name + "'");
}

std::vector<std::string> registered_models() { return {"sv", "skellam", "lgssm"}; }

}  // namespace evb
