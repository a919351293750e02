#pragma once

#include "lqmle/contrast.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace lqmle {

struct SandwichCovariance {
    Eigen::MatrixXd gamma_f;    // E[M^-2 grad f grad f']
    Eigen::MatrixXd gamma_m;    // E[grad log M grad log M']
    double g0_hat = 0.0;        // residual density at 0
    double sigma2_hat = 0.0;    // residual second moment
    double fourth_moment = 0.0; // E[eta^4] of the unit-variance residual (Gaussian contrast)
    Eigen::MatrixXd covariance; // asymptotic covariance of sqrt(n)(theta^ - theta0)
};

struct ConfidenceInterval {
    double lower = 0.0;
    double upper = 0.0;
};

struct EstimateResult {
    std::vector<std::string> names;
    std::vector<double> theta_hat;
    double contrast_value = 0.0;
    std::size_t n_evals = 0;
    bool converged = false;
    int start_index = 0;
    Contrast contrast;
    std::size_t n = 0; // sample size used

    // Filled by the asymptotics layer.
    std::optional<SandwichCovariance> sandwich;
    std::vector<ConfidenceInterval> intervals;
    double level = 0.0;
    std::vector<std::string> warnings;
};

} // namespace lqmle
