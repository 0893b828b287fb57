#include "ips/radio_map.hpp"

#include <algorithm>
#include <cmath>

#include "ips/error.hpp"
#include "ips/jsonl.hpp"
#include "parallel.hpp"

namespace ips {

GridSpec GridSpec::cover(double width, double height, double spacing) {
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw Error(ErrorCode::InvalidArgument, "grid spacing must be positive");
  }
  if (!(width > 0.0) || !(height > 0.0)) throw Error(ErrorCode::InvalidArea, "grid extent must be positive");
  // the small offset keeps exact multiples (14 / 1) from picking up an extra column
  const auto count = [spacing](double extent) { return static_cast<int>(std::ceil(extent / spacing - 1e-9)); };
  return {width, height, spacing, std::max(1, count(width)), std::max(1, count(height))};
}

std::size_t GridSpec::cell_of(double x, double y) const noexcept {
  const int i = std::clamp(static_cast<int>(std::floor(x / spacing)), 0, nx - 1);
  const int j = std::clamp(static_cast<int>(std::floor(y / spacing)), 0, ny - 1);
  return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
}

DenseRadioMap::DenseRadioMap(GridSpec grid, std::vector<RadioSurface> surfaces, std::vector<SkippedSurface> skipped)
    : grid_(grid), surfaces_(std::move(surfaces)), skipped_(std::move(skipped)) {
  for (std::size_t i = 0; i < surfaces_.size(); ++i) {
    const auto& s = surfaces_[i];
    if (s.mean_dbm.size() != grid_.cell_count() || s.std_dbm.size() != grid_.cell_count()) {
      throw Error(ErrorCode::InvalidArgument, "surface " + s.ap.str() + " does not match the grid size");
    }
    if (!index_.emplace(std::make_pair(s.heading, s.ap), i).second) {
      throw Error(ErrorCode::InvalidArgument, "duplicate surface " + s.ap.str());
    }
  }
}

const RadioSurface* DenseRadioMap::find(Heading heading, const AccessPointId& ap) const {
  const auto it = index_.find({heading, ap});
  return it == index_.end() ? nullptr : &surfaces_[it->second];
}

std::string_view hyper_policy_name(HyperPolicy p) noexcept { return p == HyperPolicy::Fixed ? "fixed" : "grid-search"; }

HyperPolicy parse_hyper_policy(std::string_view text) {
  if (text == "fixed") return HyperPolicy::Fixed;
  if (text == "grid-search") return HyperPolicy::GridSearch;
  throw Error(ErrorCode::InvalidArgument, "hyper policy must be 'fixed' or 'grid-search', got '" + std::string(text) + "'");
}

namespace {

struct SurfaceInput {
  Heading heading;
  AccessPointId ap;
  std::vector<TrainingPoint> means;
  std::vector<TrainingPoint> stds;
};

/// Averages entries that share a position so the GP sees distinct inputs.
void merge_duplicates(std::vector<TrainingPoint>& means, std::vector<TrainingPoint>& stds) {
  std::vector<TrainingPoint> m_out, s_out;
  std::vector<int> counts;
  for (std::size_t i = 0; i < means.size(); ++i) {
    auto it = std::find_if(m_out.begin(), m_out.end(),
                           [&](const TrainingPoint& p) { return p.position == means[i].position; });
    if (it == m_out.end()) {
      m_out.push_back(means[i]);
      s_out.push_back(stds[i]);
      counts.push_back(1);
      continue;
    }
    const auto k = static_cast<std::size_t>(it - m_out.begin());
    m_out[k].value += means[i].value;
    s_out[k].value += stds[i].value;
    ++counts[k];
  }
  for (std::size_t k = 0; k < m_out.size(); ++k) {
    m_out[k].value /= counts[k];
    s_out[k].value /= counts[k];
  }
  means = std::move(m_out);
  stds = std::move(s_out);
}

GprHyperparams choose(const std::vector<TrainingPoint>& points, const DensifyOptions& options) {
  if (options.policy == HyperPolicy::Fixed) return options.fixed;
  return select_hyperparams(points, options.candidates);
}

}  // namespace

DenseRadioMap densify(const SparseRadioMap& sparse, const DensifyOptions& options) {
  if (sparse.cells.empty()) throw Error(ErrorCode::EmptySparseMap, "sparse radio map has no fitted cells");
  const GridSpec grid = GridSpec::cover(sparse.area.width, sparse.area.height, options.spacing);
  if (options.policy == HyperPolicy::Fixed) validate_hyperparams(options.fixed);

  std::map<std::pair<Heading, AccessPointId>, SurfaceInput> grouped;
  for (const auto& [key, cell] : sparse.cells) {
    const ReferencePoint* rp = sparse.find_reference_point(key.point_id);
    if (rp == nullptr) throw Error(ErrorCode::UnknownReferencePoint, "cell references unknown point '" + key.point_id + "'");
    auto [it, inserted] = grouped.try_emplace({key.heading, key.ap});
    if (inserted) {
      it->second.heading = key.heading;
      it->second.ap = key.ap;
    }
    it->second.means.push_back({{rp->x, rp->y}, cell.mean_dbm});
    it->second.stds.push_back({{rp->x, rp->y}, cell.std_dbm});
  }

  std::vector<SurfaceInput> inputs;
  std::vector<SkippedSurface> skipped;
  for (auto& [key, in] : grouped) {
    merge_duplicates(in.means, in.stds);
    if (in.means.size() < kMinCellsPerSurface) {
      skipped.push_back({in.heading, in.ap, in.means.size()});
      continue;
    }
    inputs.push_back(std::move(in));
  }

  std::vector<Point2> centers(grid.cell_count());
  for (std::size_t c = 0; c < centers.size(); ++c) centers[c] = grid.center(c);

  std::vector<RadioSurface> surfaces(inputs.size());
  detail::parallel_for(inputs.size(), [&](std::size_t s) {
    const SurfaceInput& in = inputs[s];
    RadioSurface& out = surfaces[s];
    out.heading = in.heading;
    out.ap = in.ap;
    out.mean_hyperparams = choose(in.means, options);
    out.std_hyperparams = choose(in.stds, options);
    const GprModel mean_model = gpr_fit(in.means, out.mean_hyperparams);
    const GprModel std_model = gpr_fit(in.stds, out.std_hyperparams);
    out.mean_dbm.resize(centers.size());
    out.std_dbm.resize(centers.size());
    for (std::size_t c = 0; c < centers.size(); ++c) {
      out.mean_dbm[c] = gpr_predict(mean_model, centers[c]).mean;
      out.std_dbm[c] = std::clamp(gpr_predict(std_model, centers[c]).mean, kSigmaFloorDb, kSigmaCapDb);
    }
  });
  return DenseRadioMap(grid, std::move(surfaces), std::move(skipped));
}

nlohmann::ordered_json hyperparams_to_json(const GprHyperparams& h) {
  nlohmann::ordered_json j;
  j["signal_std"] = h.signal_std;
  j["length_scale"] = h.length_scale;
  j["noise_std"] = h.noise_std;
  return j;
}

namespace {

GprHyperparams hyperparams_from_json(const nlohmann::json& j) {
  return {j.at("signal_std").get<double>(), j.at("length_scale").get<double>(), j.at("noise_std").get<double>()};
}

}  // namespace

nlohmann::ordered_json radio_map_to_json(const DenseRadioMap& map) {
  nlohmann::ordered_json j;
  const GridSpec& g = map.grid();
  j["grid"] = {{"width", g.width}, {"height", g.height}, {"spacing", g.spacing}, {"nx", g.nx}, {"ny", g.ny}};
  auto surfaces = nlohmann::ordered_json::array();
  for (const auto& s : map.surfaces()) {
    nlohmann::ordered_json o;
    o["heading"] = std::string(1, heading_label(s.heading));
    o["bssid"] = s.ap.bssid.str();
    o["band"] = band_label(s.ap.band);
    o["hyperparams"] = {{"mean", hyperparams_to_json(s.mean_hyperparams)}, {"std", hyperparams_to_json(s.std_hyperparams)}};
    o["mean"] = s.mean_dbm;
    o["std"] = s.std_dbm;
    surfaces.push_back(std::move(o));
  }
  j["surfaces"] = std::move(surfaces);
  return j;
}

DenseRadioMap radio_map_from_json(const nlohmann::json& j) {
  try {
    const auto& g = j.at("grid");
    GridSpec grid{g.at("width").get<double>(), g.at("height").get<double>(), g.at("spacing").get<double>(),
                  g.at("nx").get<int>(), g.at("ny").get<int>()};
    if (grid.nx <= 0 || grid.ny <= 0 || !(grid.spacing > 0.0)) {
      throw Error(ErrorCode::MalformedRecord, "radio map grid header is invalid");
    }
    std::vector<RadioSurface> surfaces;
    for (const auto& o : j.at("surfaces")) {
      RadioSurface s;
      s.heading = parse_heading_label(o.at("heading").get<std::string>());
      s.ap.bssid = Bssid::parse(o.at("bssid").get<std::string>());
      s.ap.band = parse_band(o.at("band").get<std::string>());
      s.mean_hyperparams = hyperparams_from_json(o.at("hyperparams").at("mean"));
      s.std_hyperparams = hyperparams_from_json(o.at("hyperparams").at("std"));
      s.mean_dbm = o.at("mean").get<std::vector<double>>();
      s.std_dbm = o.at("std").get<std::vector<double>>();
      surfaces.push_back(std::move(s));
    }
    return DenseRadioMap(grid, std::move(surfaces));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedRecord, std::string("radio map: ") + e.what());
  }
}

}  // namespace ips
