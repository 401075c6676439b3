#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ftcost/gate_algebra.hpp"

namespace ftcost {

inline constexpr int kDefaultNetMaxLen = 16;
inline constexpr double kDefaultDedupTol = 1e-7;
inline constexpr std::size_t kDefaultNetEntryBudget = 1'000'000;
inline constexpr int kDefaultSkDepthCap = 12;
inline constexpr std::size_t kDefaultSkSeqBudget = 50'000'000;

/// Largest rotation angle the balanced-commutator construction accepts.
/// Callers only ever pass small residual corrections; anything near a pi
/// rotation is a usage error.
inline constexpr double kGcMaxAngle = 3.0;

/// Measured bound on the commutator balance: dist(V, I) <= c_gc *
/// sqrt(dist(U, I)). The analytic small-angle value is sqrt(2)/2 ~ 0.707
/// and the worst case over the accepted angle range stays below 0.85.
inline constexpr double kGcBalanceConstant = 1.0;

// ---------------------------------------------------------------------------
// Unit quaternions (projective representation of U(2))
// ---------------------------------------------------------------------------

/// q = (w, x, y, z) represents w I - i (x X + y Y + z Z) in SU(2); the two
/// lifts +-q of a projective unitary are identified by canonicalize().
/// Euclidean quaternion distance min(|p-q|, |p+q|) equals dist() exactly.
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;

  double dot(const Quat& o) const { return w * o.w + x * o.x + y * o.y + z * o.z; }

  Quat canonicalized() const {
    double m = w;
    double am = std::abs(w);
    for (double v : {x, y, z}) {
      if (std::abs(v) > am) {
        am = std::abs(v);
        m = v;
      }
    }
    if (m < 0) return {-w, -x, -y, -z};
    return *this;
  }
};

inline Quat quat_of(const Unitary2& u) {
  // Normalize to SU(2) first; either branch of the sqrt works projectively.
  const cplx s = std::sqrt(u.det());
  const cplx a = u.a / s, b = u.b / s, c = u.c / s, d = u.d / s;
  return {(a.real() + d.real()) / 2, -(b.imag() + c.imag()) / 2,
          (c.real() - b.real()) / 2, (d.imag() - a.imag()) / 2};
}

inline Unitary2 unitary_of(const Quat& q) {
  return {cplx{q.w, -q.z}, cplx{-q.y, -q.x}, cplx{q.y, -q.x}, cplx{q.w, q.z}};
}

/// Rotation by `angle` about the (unnormalized) axis (ax, ay, az).
inline Unitary2 rotation(double angle, double ax, double ay, double az) {
  const double n = std::sqrt(ax * ax + ay * ay + az * az);
  const double s = std::sin(angle / 2) / n;
  return unitary_of({std::cos(angle / 2), s * ax, s * ay, s * az});
}

inline double quat_dist(const Quat& a, const Quat& b) {
  const double g = 2.0 - 2.0 * std::abs(a.dot(b));
  return g > 0 ? std::sqrt(g) : 0.0;
}

// ---------------------------------------------------------------------------
// T T -> S rewriting
// ---------------------------------------------------------------------------

/// Greedy left-to-right rewrite of adjacent T T pairs into S (and T+ T+ into
/// S+); both identities are exact. Applied to compiler output before cost
/// normalization since S is cheaper than two T gates.
inline std::vector<Gate> rewrite_tt_to_s(std::span<const Gate> gates) {
  std::vector<Gate> out;
  out.reserve(gates.size());
  for (Gate g : gates) {
    if (!out.empty() && out.back() == Gate::T && g == Gate::T) {
      out.back() = Gate::S;
    } else if (!out.empty() && out.back() == Gate::Td && g == Gate::Td) {
      out.back() = Gate::Sd;
    } else {
      out.push_back(g);
    }
  }
  return out;
}

/// Cycle cost used for net dedup tie-breaking: Eq.-(10)-style weights at
/// d = 1, evaluated after the T T -> S rewrite.
inline double sk_sequence_cost(std::span<const Gate> gates) {
  return cycle_cost(counts_of(rewrite_tt_to_s(gates)));
}

// ---------------------------------------------------------------------------
// BaseNet: the epsilon-net of base approximations
// ---------------------------------------------------------------------------

struct NetEntry {
  GateSeq seq;
  Unitary2 u;
  Quat q;       // canonicalized
  double cost;  // sk_sequence_cost of seq
};

struct BaseNet {
  std::vector<Gate> generator_set;
  int max_len = 0;
  double dedup_tol = 0;
  std::vector<NetEntry> entries;
};

namespace detail {

struct GridKey {
  std::int64_t a, b, c, d;
  bool operator==(const GridKey&) const = default;
};

struct GridKeyHash {
  std::size_t operator()(const GridKey& k) const {
    std::size_t h = 1469598103934665603ull;
    for (std::int64_t v : {k.a, k.b, k.c, k.d}) {
      h ^= static_cast<std::size_t>(v);
      h *= 1099511628211ull;
    }
    return h;
  }
};

/// Spatial hash over canonical quaternions. Cell size equals the dedup
/// tolerance, so any point within tolerance of a query lies in one of the
/// 3^4 cells around it.
class QuatGrid {
 public:
  explicit QuatGrid(double cell) : cell_(cell) {}

  void insert(const Quat& q, std::size_t index) {
    cells_[key_of(q)].push_back(index);
  }

  /// Indices of all stored points within `tol` (euclidean) of q.
  template <typename Store>
  std::ptrdiff_t find_within(const Quat& q, double tol, const Store& pts) const {
    const GridKey k = key_of(q);
    for (std::int64_t da = -1; da <= 1; ++da)
      for (std::int64_t db = -1; db <= 1; ++db)
        for (std::int64_t dc = -1; dc <= 1; ++dc)
          for (std::int64_t dd = -1; dd <= 1; ++dd) {
            auto it = cells_.find({k.a + da, k.b + db, k.c + dc, k.d + dd});
            if (it == cells_.end()) continue;
            for (std::size_t idx : it->second)
              if (quat_dist(q, pts[idx].q) < tol)
                return static_cast<std::ptrdiff_t>(idx);
          }
    return -1;
  }

 private:
  GridKey key_of(const Quat& q) const {
    auto f = [&](double v) {
      return static_cast<std::int64_t>(std::floor(v / cell_));
    };
    return {f(q.w), f(q.x), f(q.y), f(q.z)};
  }

  double cell_;
  std::unordered_map<GridKey, std::vector<std::size_t>, GridKeyHash> cells_;
};

}  // namespace detail

/// Breadth-first enumeration of all generator words up to max_len,
/// deduplicated under dist < dedup_tol. When two words collide the cheaper
/// sequence (sk_sequence_cost) is kept. Deterministic: words are extended
/// in discovery order with the generator order as given.
inline BaseNet build_net(std::vector<Gate> generator_set, int max_len,
                         double dedup_tol,
                         std::size_t entry_budget = kDefaultNetEntryBudget) {
  for (Gate g : generator_set) {
    if (g != Gate::H && g != Gate::S && g != Gate::Sd && g != Gate::T &&
        g != Gate::Td)
      throw rejected_input("build_net: generator " + std::string(gate_name(g)) +
                           " outside {H, S, S+, T, T+}");
  }
  if (max_len < 1) throw rejected_input("build_net: max_len must be >= 1");
  if (!(dedup_tol > 0)) throw rejected_input("build_net: dedup_tol must be > 0");

  BaseNet net;
  net.generator_set = generator_set;
  net.max_len = max_len;
  net.dedup_tol = dedup_tol;

  detail::QuatGrid grid(dedup_tol);
  net.entries.push_back({make_seq({}), Unitary2{}, quat_of(Unitary2{}).canonicalized(), 0.0});
  grid.insert(net.entries[0].q, 0);

  std::vector<std::size_t> frontier{0};
  for (int len = 1; len <= max_len && !frontier.empty(); ++len) {
    std::vector<std::size_t> next;
    for (std::size_t idx : frontier) {
      for (Gate g : generator_set) {
        // copy: entries may reallocate on push_back below
        std::vector<Gate> gates = net.entries[idx].seq.gates;
        gates.push_back(g);
        const Unitary2 u = basis_gate(g) * net.entries[idx].u;
        const Quat q = quat_of(u).canonicalized();
        const double cost = sk_sequence_cost(gates);

        const std::ptrdiff_t hit = grid.find_within(q, dedup_tol, net.entries);
        if (hit >= 0) {
          NetEntry& e = net.entries[static_cast<std::size_t>(hit)];
          if (cost < e.cost - 1e-12) {
            e.seq = make_seq(std::move(gates));
            e.u = u;
            e.q = q;
            e.cost = cost;
          }
          continue;
        }
        if (net.entries.size() >= entry_budget)
          throw resource_limit("build_net: entry budget of " +
                               std::to_string(entry_budget) + " exceeded");
        net.entries.push_back({make_seq(std::move(gates)), u, q, cost});
        grid.insert(q, net.entries.size() - 1);
        next.push_back(net.entries.size() - 1);
      }
    }
    frontier = std::move(next);
  }
  return net;
}

struct NearestResult {
  GateSeq seq;
  double distance = 0;
  std::size_t index = 0;
};

/// Linear scan for the net entry closest to U under dist. Ties break toward
/// the shorter sequence, then lexicographic gate order.
inline NearestResult nearest(const BaseNet& net, const Unitary2& U) {
  if (net.entries.empty()) throw rejected_input("nearest: empty net");
  const Quat qu = quat_of(U).canonicalized();

  std::size_t best = 0;
  double best_ip = std::abs(net.entries[0].q.dot(qu));
  for (std::size_t i = 1; i < net.entries.size(); ++i) {
    const double ip = std::abs(net.entries[i].q.dot(qu));
    if (ip > best_ip) {
      best = i;
      best_ip = ip;
    } else if (ip == best_ip) {
      const auto& a = net.entries[i].seq.gates;
      const auto& b = net.entries[best].seq.gates;
      if (a.size() < b.size() ||
          (a.size() == b.size() &&
           std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end())))
        best = i;
    }
  }
  const double g = 2.0 - 2.0 * std::min(1.0, best_ip);
  return {net.entries[best].seq, g > 0 ? std::sqrt(g) : 0.0, best};
}

// ---------------------------------------------------------------------------
// Balanced group commutator
// ---------------------------------------------------------------------------

/// Factor U (projectively) as V W V+ W+ with V, W balanced rotations close
/// to the identity.
///
/// For a rotation by theta, V and W are rotations by phi about the x and y
/// axes where sin(theta/4) = sin^2(phi/2); the commutator of two such
/// rotations has scalar quaternion part 1 - 2 sin^4(phi/2) = cos(theta/2)
/// and axis (s, -s, c)/sqrt(1 + s^2). Conjugating both factors by the
/// rotation taking that axis onto U's axis yields the result.
inline std::pair<Unitary2, Unitary2> gc_decompose(const Unitary2& U) {
  Quat q = quat_of(U).canonicalized();
  if (q.w < 0) q = {-q.w, -q.x, -q.y, -q.z};
  const double vn = std::sqrt(q.x * q.x + q.y * q.y + q.z * q.z);
  const double theta = 2.0 * std::atan2(vn, q.w);
  if (theta < 1e-15) return {Unitary2{}, Unitary2{}};
  if (theta > kGcMaxAngle)
    throw rejected_input("gc_decompose: rotation angle " + std::to_string(theta) +
                         " exceeds the balanced construction limit " +
                         std::to_string(kGcMaxAngle));

  const double st = std::sin(theta / 4);
  const double phi = 2.0 * std::asin(std::sqrt(std::min(1.0, st)));
  const double c = std::cos(phi / 2), s = std::sin(phi / 2);

  const Unitary2 V0 = rotation(phi, 1, 0, 0);
  const Unitary2 W0 = rotation(phi, 0, 1, 0);

  // commutator axis (closed form) and target axis
  const double mx = s, my = -s, mz = c;
  const double mn = std::sqrt(1.0 + s * s);
  const double nx = q.x / vn, ny = q.y / vn, nz = q.z / vn;

  const double dotmn = (mx * nx + my * ny + mz * nz) / mn;
  double axx = (my * nz - mz * ny) / mn;
  double axy = (mz * nx - mx * nz) / mn;
  double axz = (mx * ny - my * nx) / mn;
  Unitary2 S;
  const double cross = std::sqrt(axx * axx + axy * axy + axz * axz);
  if (cross > 1e-14) {
    S = rotation(std::atan2(cross, dotmn), axx, axy, axz);
  } else if (dotmn < 0) {
    // antiparallel: rotate pi about anything orthogonal to n
    if (std::abs(nx) < 0.9)
      S = rotation(M_PI, 0, -nz, ny);
    else
      S = rotation(M_PI, nz, 0, -nx);
  }
  const Unitary2 Sd = S.adjoint();
  return {S * V0 * Sd, S * W0 * Sd};
}

// ---------------------------------------------------------------------------
// Solovay-Kitaev recursion
// ---------------------------------------------------------------------------

struct CompiledRotation {
  double target_angle = 0;
  GateSeq seq;
  double achieved_eps = 0;
  int depth = 0;
};

struct SkOptions {
  int depth_cap = kDefaultSkDepthCap;
  std::size_t seq_budget = kDefaultSkSeqBudget;
};

namespace detail {

inline std::vector<Gate> sk_rec(const Unitary2& U, int depth, const BaseNet& net,
                                std::size_t seq_budget) {
  if (depth == 0) return nearest(net, U).seq.gates;

  std::vector<Gate> base = sk_rec(U, depth - 1, net, seq_budget);
  const Unitary2 A = seq_to_matrix(base);
  auto [V, W] = gc_decompose(U * A.adjoint());
  std::vector<Gate> v = sk_rec(V, depth - 1, net, seq_budget);
  std::vector<Gate> w = sk_rec(W, depth - 1, net, seq_budget);

  const std::size_t total = base.size() + 2 * (v.size() + w.size());
  if (total > seq_budget)
    throw resource_limit("sk: sequence budget of " + std::to_string(seq_budget) +
                         " labels exceeded at depth " + std::to_string(depth));

  // result = V W V+ W+ * base, index 0 applied first
  std::vector<Gate> out;
  out.reserve(total);
  out.insert(out.end(), base.begin(), base.end());
  const std::vector<Gate> wd = adjoint_sequence(w);
  const std::vector<Gate> vd = adjoint_sequence(v);
  out.insert(out.end(), wd.begin(), wd.end());
  out.insert(out.end(), vd.begin(), vd.end());
  out.insert(out.end(), w.begin(), w.end());
  out.insert(out.end(), v.begin(), v.end());
  return out;
}

}  // namespace detail

/// Depth-n Dawson-Nielsen approximation of U over the net's gate set.
/// Depth 0 is the nearest net entry; depth n corrects the depth-(n-1)
/// residual with a balanced group commutator approximated at depth n-1.
inline GateSeq sk(const Unitary2& U, int depth, const BaseNet& net,
                  const SkOptions& opts = {}) {
  if (depth < 0) throw rejected_input("sk: depth must be >= 0");
  return make_seq(detail::sk_rec(U, depth, net, opts.seq_budget));
}

/// Compile R_z(theta) to the smallest recursion depth whose re-verified
/// distance meets eps. The returned sequence has the T T -> S rewrite and
/// normalized counts applied, and achieved_eps is recomputed from it.
inline CompiledRotation compile_rz(double theta, double eps, const BaseNet& net,
                                   const SkOptions& opts = {}) {
  if (!(eps > 0)) throw rejected_input("compile_rz: eps must be > 0");
  const Unitary2 target = rz(theta);

  double best_eps = std::numeric_limits<double>::infinity();
  for (int depth = 0; depth <= opts.depth_cap; ++depth) {
    GateSeq seq = make_seq(rewrite_tt_to_s(detail::sk_rec(target, depth, net, opts.seq_budget)));
    const double achieved = dist(target, seq_to_matrix(seq));
    best_eps = std::min(best_eps, achieved);
    if (achieved <= eps) return {theta, std::move(seq), achieved, depth};
  }
  std::ostringstream msg;
  msg << "compile_rz: depth cap " << opts.depth_cap << " reached for angle "
      << theta << " at eps " << eps << "; best achieved " << best_eps;
  throw convergence_failure(msg.str(), best_eps);
}

// ---------------------------------------------------------------------------
// Net cache file
// ---------------------------------------------------------------------------

inline constexpr std::string_view kNetCacheMagic = "ftcost-net-v1";

inline void save_net(const BaseNet& net, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw error("save_net: cannot write " + tmp);
    out << kNetCacheMagic << "\n";
    out << "generators:";
    for (Gate g : net.generator_set) out << ' ' << gate_name(g);
    out << "\n";
    out << "max_len: " << net.max_len << "\n";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", net.dedup_tol);
    out << "dedup_tol: " << buf << "\n";
    out << "entries: " << net.entries.size() << "\n";
    for (const NetEntry& e : net.entries)
      out << (e.seq.gates.empty() ? "-" : seq_to_string(e.seq.gates)) << "\n";
  }
  std::filesystem::rename(tmp, path);
}

inline BaseNet load_net(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw error("load_net: cannot open " + path);
  std::string line;
  std::getline(in, line);
  if (line != kNetCacheMagic)
    throw error("load_net: " + path + " is not a " + std::string(kNetCacheMagic) +
                " cache");

  BaseNet net;
  std::getline(in, line);
  {
    std::istringstream ss(line.substr(line.find(':') + 1));
    std::string tok;
    while (ss >> tok) net.generator_set.push_back(parse_gate(tok));
  }
  std::getline(in, line);
  net.max_len = std::stoi(line.substr(line.find(':') + 1));
  std::getline(in, line);
  net.dedup_tol = std::stod(line.substr(line.find(':') + 1));
  std::getline(in, line);
  const std::size_t n = std::stoul(line.substr(line.find(':') + 1));

  net.entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line))
      throw error("load_net: truncated cache " + path);
    std::vector<Gate> gates = line == "-" ? std::vector<Gate>{} : seq_from_string(line);
    const Unitary2 u = seq_to_matrix(gates);
    const Quat q = quat_of(u).canonicalized();
    const double cost = sk_sequence_cost(gates);
    net.entries.push_back({make_seq(std::move(gates)), u, q, cost});
  }
  return net;
}

}  // namespace ftcost
