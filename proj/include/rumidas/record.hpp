#pragma once

#include <string>

#include "rumidas/bayes.hpp"
#include "rumidas/calendar.hpp"

namespace rumidas {

/// One (model, origin, horizon) cell of a forecast sweep.
struct ForecastRecord {
    std::string model;
    Date origin{};
    Date target{};
    int horizon = 1;
    double mean = kMissing;
    double realized = kMissing;  // kMissing until observed
    PredictiveDensity predictive;
    std::string error;  // nonempty for cells that could not be produced

    bool ok() const { return error.empty(); }
    bool scorable() const { return ok() && !is_missing(realized) && predictive.size() > 0; }
};

}  // namespace rumidas
