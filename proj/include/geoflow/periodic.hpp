#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "geoflow/model.hpp"
#include "geoflow/potential.hpp"
#include "geoflow/riccati.hpp"

namespace geoflow {

/// A cyclic word over the side-pairing alphabet 0..7, where letter k stands
/// for generator k and k+4 (mod 8) for its inverse. Words are stored in their
/// lexicographically least rotation, so equal classes compare equal.
class GroupWord {
 public:
  GroupWord() = default;
  /// Cyclically reduces and rotates into canonical form.
  explicit GroupWord(std::vector<int> letters);
  static GroupWord parse(const std::string& text);

  const std::vector<int>& letters() const { return letters_; }
  std::size_t size() const { return letters_.size(); }
  bool empty() const { return letters_.empty(); }

  GroupWord inverse() const;
  GroupWord power(int n) const;
  /// Least of the canonical forms of the word and its inverse.
  GroupWord unoriented() const;
  bool cyclically_reduced() const;
  /// Product of the generators, left to right.
  Mobius element(const MetricModel& model) const;
  /// Letters joined by '.', e.g. "0.5.2".
  std::string str() const;

  friend bool operator==(const GroupWord&, const GroupWord&) = default;
  friend auto operator<=>(const GroupWord& a, const GroupWord& b) { return a.letters_ <=> b.letters_; }

 private:
  std::vector<int> letters_;
};

inline int inverse_letter(int letter) { return (letter + 4) % 8; }
/// Free and cyclic cancellation of adjacent inverse letters.
std::vector<int> cyclically_reduce(std::vector<int> letters);
/// Least rotation.
std::vector<int> least_rotation(const std::vector<int>& letters);

struct EnumerationLimits {
  double max_length = 0.0;       // translation length bound; 0 = derive from max_word_len
  int max_word_len = 0;          // 0 = no word-length filter
  std::size_t max_classes = 2'000'000;
  std::size_t max_elements = 20'000'000;  // group elements visited by the ball search
};

/// Oriented primitive conjugacy classes of hyperbolic elements of the deck
/// group with translation length <= max_length (and canonical word length <=
/// max_word_len when set), sorted by length. Each class is returned as the
/// conjugate whose axis passes closest to the octagon centre.
struct ClassRecord {
  GroupWord word;
  Mobius element;
  double length = 0.0;
};
std::vector<ClassRecord> enumerate_classes(const MetricModel& model, const EnumerationLimits& limits);
/// Word-level view of the enumeration.
std::vector<GroupWord> enumerate_words(const MetricModel& model, int max_word_len);

struct RefinementReport {
  int iterations = 0;
  double gradient_norm = 0.0;
  std::vector<double> length_history;  // discretised length after each accepted step
  double closure_error = 0.0;          // shooting residual
};

/// A closed orbit of the geodesic flow.
struct PeriodicOrbit {
  GroupWord word;
  Mobius element;  // deck element translating along the lift through `base`
  double length = 0.0;
  UnitTangent base;
  bool regular = true;
  std::optional<RefinementReport> refinement;
  std::map<std::string, double> phi_cache;
};

/// Closed geodesic in the free homotopy class of `word`. Constant curvature:
/// length from the trace and base on the axis. Conformal: the hyperbolic
/// orbit is refined by discrete length minimisation, then polished by
/// shooting so that flow(base, length) closes up.
PeriodicOrbit close_geodesic(const MetricModel& model, const GroupWord& word,
                             double node_spacing = 0.05);
PeriodicOrbit close_geodesic(const MetricModel& model, const ClassRecord& record,
                             double node_spacing = 0.05);
/// The closed notional orbit of a periodic synthetic profile.
PeriodicOrbit synthetic_orbit(const MetricModel& model);

/// Sampled orbit data for potentials: N points evenly spaced in time (the
/// endpoint omitted), with curvature and k^u from a periodic Riccati sweep.
std::vector<PotentialSample> orbit_samples(const MetricModel& model, const PeriodicOrbit& orbit,
                                           double step, bool with_unstable,
                                           const RiccatiConfig& cfg = {});
/// Curvature around the loop as a periodic track.
CurvatureTrack orbit_track(const MetricModel& model, const PeriodicOrbit& orbit, double step);

inline constexpr double kSingularThreshold = 1e-4;

/// Regular iff the largest sampled lambda_T along the orbit exceeds eta_sing.
bool classify_regular(const MetricModel& model, const PeriodicOrbit& orbit, double T = 1.0,
                      double eta_sing = kSingularThreshold, const RiccatiConfig& cfg = {});

/// Closed-loop integral of phi over the orbit, cached under phi.id.
double orbit_potential(const MetricModel& model, PeriodicOrbit& orbit, const Potential& phi,
                       const RiccatiConfig& cfg = {}, double step = 1e-2);

/// (1/|gamma|) times the loop integral of a footpoint function.
double orbit_average(const MetricModel& model, const PeriodicOrbit& orbit,
                     const std::function<double(const UnitTangent&)>& psi, double step = 1e-2);

}  // namespace geoflow
