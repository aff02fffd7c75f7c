#include "wlqc/scenario.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>
#include <vector>

#include "wlqc/rng.hpp"
#include "wlqc/serialize.hpp"

namespace wlqc::scenario {

namespace {

[[noreturn]] void bad(const std::string& message) {
  throw SolverError(ErrorCode::BadScenario, "scenario: " + message);
}

// Token stream with '#' line comments.
class Tokens {
 public:
  explicit Tokens(const std::string& text) {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line)) {
      const size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      std::istringstream words(line);
      std::string word;
      while (words >> word) tokens_.push_back(word);
    }
  }

  bool done() const { return pos_ >= tokens_.size(); }

  std::string next() {
    if (done()) bad("unexpected end of file");
    return tokens_[pos_++];
  }

  std::string peek() const { return done() ? "" : tokens_[pos_]; }

  double real() {
    const std::string tok = next();
    try {
      size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) bad("malformed number '" + tok + "'");
      return v;
    } catch (const std::exception&) {
      bad("malformed number '" + tok + "'");
    }
  }

  long long integer() {
    const std::string tok = next();
    try {
      size_t used = 0;
      const long long v = std::stoll(tok, &used);
      if (used != tok.size()) bad("malformed integer '" + tok + "'");
      return v;
    } catch (const std::exception&) {
      bad("malformed integer '" + tok + "'");
    }
  }

  void expect(const std::string& keyword) {
    const std::string tok = next();
    if (tok != keyword) bad("expected '" + keyword + "', got '" + tok + "'");
  }

  Eigen::MatrixXd matrix(int rows, int cols) {
    Eigen::MatrixXd m(rows, cols);
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) m(i, j) = real();
    return m;
  }

 private:
  std::vector<std::string> tokens_;
  size_t pos_ = 0;
};

}  // namespace

Scenario parse_scenario_text(const std::string& text,
                             std::optional<std::uint64_t> seed_override,
                             const std::string& base_dir) {
  Tokens in(text);
  Scenario sc;
  sc.source_hash = io::fnv1a64(text);

  bool has_mode = false, has_penalty = false, has_system = false;
  bool has_cost = false, has_samples = false, has_x0 = false;
  bool has_horizon = false;
  int inline_count = 0, inline_dim = 0;
  Eigen::MatrixXd inline_samples;
  struct GaussianRaw {
    double mean, sigma;
    int count, dim;
  };
  std::optional<GaussianRaw> gaussian;

  while (!in.done()) {
    const std::string key = in.next();
    if (key == "mode") {
      if (has_mode) bad("duplicate mode");
      const std::string value = in.next();
      if (value == "finite")
        sc.mode = Scenario::Mode::Finite;
      else if (value == "infinite")
        sc.mode = Scenario::Mode::Infinite;
      else
        bad("mode must be finite or infinite");
      has_mode = true;
    } else if (key == "horizon") {
      sc.horizon = static_cast<int>(in.integer());
      if (sc.horizon < 1) bad("horizon must be positive");
      has_horizon = true;
    } else if (key == "penalty") {
      if (has_penalty) bad("exactly one penalty mode is allowed");
      const std::string value = in.next();
      if (value == "fixed") {
        sc.lambda = in.real();
        sc.tune = false;
      } else if (value == "tune") {
        in.expect("theta");
        sc.theta = in.real();
        in.expect("beta");
        sc.beta = in.real();
        sc.tune = true;
      } else {
        bad("penalty must be fixed or tune");
      }
      has_penalty = true;
    } else if (key == "seed") {
      sc.seed = static_cast<std::uint64_t>(in.integer());
    } else if (key == "system") {
      if (has_system) bad("exactly one system source is allowed");
      const std::string value = in.next();
      if (value == "inline") {
        in.expect("n");
        const int n = static_cast<int>(in.integer());
        in.expect("m");
        const int m = static_cast<int>(in.integer());
        in.expect("k");
        const int k = static_cast<int>(in.integer());
        if (n < 1 || m < 1 || k < 1) bad("system dimensions must be positive");
        in.expect("A");
        Eigen::MatrixXd a = in.matrix(n, n);
        in.expect("B");
        Eigen::MatrixXd b = in.matrix(n, m);
        in.expect("Xi");
        Eigen::MatrixXd xi = in.matrix(n, k);
        sc.sys = LinearSystem::make(std::move(a), std::move(b), std::move(xi));
      } else if (value == "grid") {
        std::string path = in.next();
        // Relative grid paths resolve against the scenario file location.
        if (!base_dir.empty() &&
            std::filesystem::path(path).is_relative() &&
            !std::filesystem::exists(path))
          path = (std::filesystem::path(base_dir) / path).string();
        sc.grid = powergrid::load_grid_file(path);
        const auto [a_c, b_c] = powergrid::build_state_space(*sc.grid);
        const auto [a_d, b_d] =
            powergrid::zoh_discretize(a_c, b_c, sc.grid->dt);
        sc.sys = LinearSystem::make(a_d, b_d, b_d);
      } else {
        bad("system must be inline or grid");
      }
      has_system = true;
    } else if (key == "cost") {
      if (!has_system) bad("cost must come after system");
      if (has_cost) bad("duplicate cost");
      in.expect("Q");
      Eigen::MatrixXd q = in.matrix(sc.sys.n(), sc.sys.n());
      in.expect("R");
      Eigen::MatrixXd r = in.matrix(sc.sys.m(), sc.sys.m());
      Eigen::MatrixXd qf = q;
      if (in.peek() == "Qf") {
        in.expect("Qf");
        qf = in.matrix(sc.sys.n(), sc.sys.n());
      }
      sc.cost = CostSpec::make(std::move(q), std::move(r), std::move(qf), 1);
      has_cost = true;
    } else if (key == "samples") {
      if (has_samples) bad("exactly one sample source is allowed");
      const std::string value = in.next();
      if (value == "inline") {
        in.expect("count");
        inline_count = static_cast<int>(in.integer());
        in.expect("dim");
        inline_dim = static_cast<int>(in.integer());
        if (inline_count < 1 || inline_dim < 1)
          bad("sample count and dim must be positive");
        // One sample per row in the file; stored one per column.
        inline_samples = in.matrix(inline_count, inline_dim).transpose();
      } else if (value == "gaussian") {
        GaussianRaw g{};
        in.expect("mean");
        g.mean = in.real();
        in.expect("sigma");
        g.sigma = in.real();
        in.expect("count");
        g.count = static_cast<int>(in.integer());
        in.expect("dim");
        g.dim = static_cast<int>(in.integer());
        if (g.count < 1 || g.dim < 1 || g.sigma < 0.0)
          bad("bad gaussian sample spec");
        gaussian = g;
      } else {
        bad("samples must be inline or gaussian");
      }
      has_samples = true;
    } else if (key == "x0") {
      if (!has_system) bad("x0 must come after system");
      sc.x0 = in.matrix(sc.sys.n(), 1);
      has_x0 = true;
    } else {
      bad("unknown keyword '" + key + "'");
    }
  }

  if (!has_system) bad("missing system");
  if (!has_penalty) bad("missing penalty");
  if (!has_samples) bad("missing samples");
  if (sc.mode == Scenario::Mode::Finite && !has_horizon)
    bad("finite mode needs a horizon");

  if (seed_override) sc.seed = *seed_override;

  if (!has_cost) {
    if (!sc.grid) bad("missing cost (only grid systems have a default cost)");
    // Consensus-projector default used by the frequency-regulation demo.
    const int g = sc.grid->n_gen();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(2 * g, 2 * g);
    q.topLeftCorner(g, g) =
        0.5 * (Eigen::MatrixXd::Identity(g, g) -
               Eigen::MatrixXd::Constant(g, g, 1.0 / g));
    q.bottomRightCorner(g, g) = 0.5 * Eigen::MatrixXd::Identity(g, g);
    sc.cost = CostSpec::make(q, Eigen::MatrixXd::Identity(g, g), q, 1);
  }
  sc.cost.horizon = sc.mode == Scenario::Mode::Finite
                        ? sc.horizon
                        : CostSpec::kInfiniteHorizon;
  if (!sc.tune) sc.cost.lambda = sc.lambda;

  if (gaussian) {
    if (gaussian->dim != sc.sys.k())
      bad("gaussian sample dim does not match the system");
    Philox4x32 rng(sc.seed, /*stream=*/1);
    Eigen::MatrixXd samples(gaussian->dim, gaussian->count);
    for (int i = 0; i < gaussian->count; ++i)
      samples.col(i) =
          Eigen::VectorXd::Constant(gaussian->dim, gaussian->mean) +
          gaussian->sigma * rng.normal_vector(gaussian->dim);
    sc.emp = EmpiricalDistribution::from_samples(std::move(samples));
    sc.sample_spec = sim::GaussianSpec{
        Eigen::VectorXd::Constant(gaussian->dim, gaussian->mean),
        gaussian->sigma};
  } else {
    if (inline_dim != sc.sys.k())
      bad("inline sample dim does not match the system");
    sc.emp = EmpiricalDistribution::from_samples(std::move(inline_samples));
  }

  if (!has_x0) sc.x0 = Eigen::VectorXd::Zero(sc.sys.n());
  return sc;
}

Scenario load_scenario(const std::string& path,
                       std::optional<std::uint64_t> seed_override) {
  return parse_scenario_text(io::read_text_file(path), seed_override,
                             std::filesystem::path(path).parent_path().string());
}

}  // namespace wlqc::scenario
