#pragma once

#include "mlmimo/channel.hpp"

namespace mlmimo {

struct DetectionResult {
  IntRowVector z_hat;  // hard decision, inside the constellation
  RowVector z_soft;    // estimate before slicing
};

// Componentwise nearest level, clamped to the extremes. Midpoints go to the lower level.
IntRowVector slice(const RowVector& v, const Constellation& c);
int slice_scalar(double v, const Constellation& c);

// Clamp each component to [min level, max level] without rounding.
RowVector clamp_to_hull(const RowVector& v, const Constellation& c);

DetectionResult zf_detect(const RowVector& y, const ChannelModel& model, const Constellation& c);

// z_soft = y·(GᵀG + (sigma²/E_s)·I)⁻¹·Gᵀ
DetectionResult mmse_detect(const RowVector& y, const ChannelModel& model, const Constellation& c, double sigma);

// ‖y − z·G‖²
double squared_distance(const RowVector& y, const IntRowVector& z, const ChannelModel& model);

}  // namespace mlmimo
