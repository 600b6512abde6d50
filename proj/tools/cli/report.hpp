#pragma once

#include <nlohmann/json.hpp>

#include "sio/forms.hpp"
#include "sio/mollifiers.hpp"
#include "sio/muckenhoupt.hpp"
#include "sio/splitter.hpp"
#include "sio/truncation.hpp"

namespace sio::cli {

using Json = nlohmann::json;

/// NaN and infinities become null.
Json number(double v);

Json to_json(const Grid& g);
Json to_json(const SchurBound& b);
Json to_json(const MomentReport& r);
Json to_json(const NormEstimate& e);
Json to_json(const Factor2Report& r);
Json to_json(const SeparatedPartition& p);
SeparatedPartition partition_from_json(const Json& j);
Json to_json(const TruncationStudy& s);
Json to_json(const MuckenhouptReport& r);
Json to_json(const NecessityReport& r);

}  // namespace sio::cli
