#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "knscatter/analytic.hpp"
#include "knscatter/backlund.hpp"
#include "knscatter/evolution.hpp"
#include "knscatter/fredholm.hpp"
#include "knscatter/grid.hpp"
#include "knscatter/jost.hpp"

namespace kn::io {

using json = nlohmann::ordered_json;

json cplx_json(cplx z);
cplx cplx_from_json(const json& j);
// "1.5-2i", "0+1i", "3", "-i"
cplx parse_cplx(const std::string& s);

json to_json(const Potential& q);
Potential potential_from_json(const json& j);
Potential read_potential(const std::string& path);
void write_potential(const std::string& path, const Potential& q);

json to_json(const MassReport& m, const Conserved& c, const std::vector<TailEntry>& tails);
json to_json(const JostData& d);
json to_json(const FredholmReport& r);
json to_json(const Zero& z);
json to_json(const ZeroSet& zs);
json to_json(const ContourCount& c);
json to_json(const MassIdentityReport& r);
json to_json(const TraceReport& r);
json to_json(const BoundState& bs);
json to_json(const BacklundChecks& c);
json to_json(const SurgeryReport& r);
json to_json(const std::vector<ChainStep>& chain);
json to_json(const IsospectralReport& r);
json to_json(const GapResult& g);
json to_json(const WindingReport& w);

json error_json(const std::string& code, const std::string& message);

// CSV writers; every file starts with a header row.
void write_drift_csv(std::ostream& os, const std::vector<DriftSample>& history);
void write_measure_csv(std::ostream& os, const BoundaryMeasure& m);                 // s, |a|, arg a
void write_ray_csv(std::ostream& os, const std::vector<std::pair<double, cplx>>& p); // kappa, |a|, arg a

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace kn::io
