#pragma once

#include <string>

#include "gensep/training.hpp"

namespace gensep {

// One JSON document per trained model: kind, seed, config echo, shaped
// weight arrays, optional critic, telemetry. Doubles are written with
// shortest round-trip precision, so reloading is bit-exact.
std::string checkpoint_to_json(const TrainedSourceModel& model);
TrainedSourceModel checkpoint_from_json(const std::string& text);

void save_checkpoint(const std::string& path, const TrainedSourceModel& model);
TrainedSourceModel load_checkpoint(const std::string& path);

}  // namespace gensep
