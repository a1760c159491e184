#pragma once

#include <memory>
#include <string>
#include <vector>

#include "evb/skellam_model.hpp"
#include "evb/sv_model.hpp"

namespace evb {

struct ModelOptions {
  double prior_alpha = 1.001;  // inverse gamma prior on sigma^2 (sv, lgssm)
  double prior_beta = 1.001;
  double obs_var = 1.0;        // lgssm measurement variance
  SkellamOptions skellam;
};

// Builds a registered model ("sv", "skellam", "lgssm"). When `data` is given,
// data-dependent settings are bound to it (the Skellam x_0 and series count).
std::unique_ptr<StateSpaceModel> make_model(const std::string& name, const ModelOptions& options = {},
                                            const Dataset* data = nullptr);

std::vector<std::string> registered_models();

}  // namespace evb
