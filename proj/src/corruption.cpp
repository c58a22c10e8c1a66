#include "remind/corruption.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "remind/error.hpp"
#include "remind/rng.hpp"

namespace remind::corruption {

const char* kind_name(Kind k) {
  switch (k) {
    case Kind::None: return "none";
    case Kind::Random: return "random";
    case Kind::Segment: return "segment";
    case Kind::Channel: return "channel";
  }
  return "none";
}

CorruptionSpec parse_spec(const std::string& text) {
  CorruptionSpec spec;
  bool kind_seen = false;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    auto eq = item.find('=');
    if (eq == std::string::npos) fail(ErrorCode::Usage, "corruption field needs key=value: " + item);
    std::string key = item.substr(0, eq), value = item.substr(eq + 1);
    try {
      if (key == "kind") {
        kind_seen = true;
        if (value == "none") spec.kind = Kind::None;
        else if (value == "random") spec.kind = Kind::Random;
        else if (value == "segment") spec.kind = Kind::Segment;
        else if (value == "channel") spec.kind = Kind::Channel;
        else fail(ErrorCode::Usage, "unknown corruption kind: " + value);
      } else if (key == "rate") {
        spec.rate = std::stod(value);
      } else if (key == "channels") {
        spec.channel_indices.clear();
        std::stringstream cs(value);
        std::string idx;
        while (std::getline(cs, idx, '+')) spec.channel_indices.push_back(std::stoi(idx));
      } else if (key == "seed") {
        spec.seed = std::stoull(value);
      } else {
        fail(ErrorCode::Usage, "unknown corruption field: " + key);
      }
    } catch (const Error&) {
      throw;
    } catch (const std::exception&) {
      fail(ErrorCode::Usage, "bad corruption value: " + item);
    }
  }
  if (!kind_seen) fail(ErrorCode::Usage, "corruption spec needs kind=...");
  if (spec.rate < 0.0 || spec.rate > 1.0) fail(ErrorCode::Parameter, "corruption rate outside [0, 1]");
  return spec;
}

std::string spec_to_string(const CorruptionSpec& spec) {
  std::ostringstream os;
  os << "kind=" << kind_name(spec.kind);
  if (spec.kind == Kind::Random) os << ",rate=" << spec.rate;
  if (spec.kind == Kind::Channel) {
    os << ",channels=";
    for (std::size_t i = 0; i < spec.channel_indices.size(); ++i) {
      if (i) os << '+';
      os << spec.channel_indices[i];
    }
  }
  os << ",seed=" << spec.seed;
  return os.str();
}

CorruptionResult apply(const CorruptionSpec& spec, const frontend::Recording& x) {
  const Eigen::Index C = x.data.rows(), T = x.data.cols();
  if (spec.rate < 0.0 || spec.rate > 1.0) fail(ErrorCode::Parameter, "corruption rate outside [0, 1]");

  CorruptionResult out;
  out.corrupted = x;
  out.mask = BoolMask::Constant(C, T, false);

  switch (spec.kind) {
    case Kind::None:
      break;
    case Kind::Segment: {
      const Eigen::Index len = (T + 1) / 2;  // ceil(T/2)
      Rng rng(spec.seed);
      const Eigen::Index start = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(T - len + 1)));
      for (Eigen::Index t = start; t < start + len; ++t)
        for (Eigen::Index c = 0; c < C; ++c) {
          out.corrupted.data(c, t) = 0.0;
          out.mask(c, t) = true;
        }
      break;
    }
    case Kind::Random: {
      const std::size_t total = static_cast<std::size_t>(C * T);
      const std::size_t count = static_cast<std::size_t>(std::floor(spec.rate * static_cast<double>(total)));
      std::vector<std::uint32_t> cells(total);
      std::iota(cells.begin(), cells.end(), 0u);
      Rng rng(spec.seed);
      // Partial Fisher-Yates: the first `count` positions become the sample.
      for (std::size_t i = 0; i < count; ++i) {
        std::size_t j = i + static_cast<std::size_t>(rng.below(total - i));
        std::swap(cells[i], cells[j]);
      }
      for (std::size_t i = 0; i < count; ++i) {
        Eigen::Index c = static_cast<Eigen::Index>(cells[i]) / T;
        Eigen::Index t = static_cast<Eigen::Index>(cells[i]) % T;
        out.corrupted.data(c, t) = 0.0;
        out.mask(c, t) = true;
      }
      break;
    }
    case Kind::Channel: {
      for (int c : spec.channel_indices) {
        if (c < 0 || c >= C) fail(ErrorCode::Parameter, "corrupted channel index out of range: " + std::to_string(c));
        out.corrupted.data.row(c).setZero();
        out.mask.row(c).setConstant(true);
      }
      break;
    }
  }
  return out;
}

CorruptionSpec sample_mix(const std::array<double, 3>& weights, std::uint64_t seed) {
  for (double w : weights)
    if (w < 0.0) fail(ErrorCode::Parameter, "negative corruption mix weight");

  CorruptionSpec spec;
  spec.seed = derive_seed(seed, "corruption-spec");
  if (weights[0] + weights[1] + weights[2] == 0.0) {
    spec.kind = Kind::None;
    return spec;
  }
  Rng rng(seed);
  switch (rng.categorical({weights[0], weights[1], weights[2]})) {
    case 0: spec.kind = Kind::Random; break;
    case 1: spec.kind = Kind::Segment; break;
    default: spec.kind = Kind::Channel; break;
  }
  return spec;
}

}  // namespace remind::corruption
