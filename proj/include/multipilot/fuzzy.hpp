#pragma once

#include "multipilot/checkpoint.hpp"

#include <Eigen/Core>
#include <string>
#include <utility>
#include <vector>

namespace multipilot {

// --- preprocessing: z-score + linear discriminant projection ---

struct PreprocessModel {
    Eigen::VectorXd mean;       // per raw feature
    Eigen::VectorXd stddev;     // per raw feature, all > 0
    Eigen::MatrixXd projection; // d x d', columns are discriminant directions
    std::vector<int> class_labels;

    Eigen::VectorXd zscore(const Eigen::VectorXd& x) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const; // zscore then project
    Eigen::MatrixXd apply_rows(const Eigen::MatrixXd& X) const;
    int output_dim() const { return static_cast<int>(projection.cols()); }
};

// Fit z-score statistics and an LDA projection maximizing between-class over
// within-class scatter. Rejects zero-variance features; a 1e-6 ridge keeps
// the within-class scatter invertible. max_dims <= 0 keeps classes-1
// directions (capped by the feature count).
PreprocessModel preprocess_fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                               int max_dims = -1);

// --- subtractive clustering (density potentials) ---

struct SubtractiveOptions {
    double radius = 1.0;        // neighborhood radius r_a
    double squash = 1.5;        // r_b = squash * r_a
    double accept_ratio = 0.5;  // accept when potential >= accept * first peak
    double reject_ratio = 0.15; // stop when potential < reject * first peak
};

std::vector<Eigen::VectorXd> subtractive_cluster(const Eigen::MatrixXd& X,
                                                 const SubtractiveOptions& opt);

// --- fuzzy c-means ---

struct FcmResult {
    Eigen::MatrixXd centers;     // p x d
    Eigen::MatrixXd memberships; // N x p, rows sum to one
    std::vector<double> objective_trace;
    int iterations = 0;
};

// Membership row for one sample against fixed centers; a sample sitting on a
// center gets membership one there and zero elsewhere.
Eigen::VectorXd fcm_membership(const Eigen::MatrixXd& centers, const Eigen::VectorXd& x,
                               double m);

double fcm_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centers,
                     const Eigen::MatrixXd& memberships, double m);

// Alternating membership/center updates from the given seeds (random rows of
// X when none are given) until the largest center shift drops below tol.
FcmResult fcm(const Eigen::MatrixXd& X, int p, double m,
              const Eigen::MatrixXd* seed_centers = nullptr, double tol = 1e-6,
              int max_iterations = 200);

// --- interval type-2 T-S model ---

// Rule antecedents live in the discriminant space (centers, memberships);
// consequents regress the force from the full z-scored state, whose
// augmented dimension d+1 sets the M and S shapes.
struct FuzzyRule {
    Eigen::VectorXd center; // in the projected (clustering) space
    Eigen::VectorXd spread; // per-feature width of the cluster (diagnostic)
    Eigen::MatrixXd M;      // out_dim x (d+1)
    Eigen::MatrixXd S;      // (d+1) x (d+1) WRLS covariance
};

struct FuzzyModelConfig {
    double m = 2.0;          // fuzzifier, > 1
    double fou_delta = 0.1;  // footprint-of-uncertainty factor
    double b_lower = 0.5;    // interval combination weights, sum to 1
    double b_upper = 0.5;
    double sigma = 1.0;      // WRLS forgetting factor in (0, 1]
    double cluster_radius = 1.0;
    double update_gate = 0.05; // rule updates only fire above this strength
    double s0 = 1e6;           // initial WRLS covariance scale
    int output_dim = 3;

    void validate() const;
};

// Single WRLS step on one rule: gain from the current covariance, rowwise
// consequent update, rank-one covariance downdate rescaled by sigma (at
// sigma = 1 this is the exact recursive least-squares recursion).
void wrls_update(FuzzyRule& rule, const Eigen::VectorXd& x_aug, const Eigen::VectorXd& f,
                 double sigma);

class FuzzyModel {
  public:
    FuzzyModel() = default;

    // Full identification pipeline: preprocess, subtractive clustering for the
    // rule count, FCM for the centers, then one streaming WRLS pass over the
    // training set.
    static FuzzyModel fit(const Eigen::MatrixXd& states, const Eigen::MatrixXd& forces,
                          const std::vector<int>& labels, const FuzzyModelConfig& cfg);

    // Crisp Eq.-style memberships of a preprocessed input against all rules.
    Eigen::VectorXd crisp_memberships(const Eigen::VectorXd& x_preprocessed) const;

    // Per-rule firing interval [lower, upper] built from the crisp membership
    // and the footprint-of-uncertainty factor.
    std::vector<std::pair<double, double>> firing_interval(
        const Eigen::VectorXd& x_preprocessed) const;

    // Combined rule strengths (lower*b_lower + upper*b_upper), not normalized.
    Eigen::VectorXd combined_strengths(const Eigen::VectorXd& x_preprocessed) const;

    // Force prediction for a raw (unpreprocessed) state.
    Eigen::VectorXd predict(const Eigen::VectorXd& raw_state) const;

    // Streaming update with a measured force (raw state), gated per rule.
    void update(const Eigen::VectorXd& raw_state, const Eigen::VectorXd& f_measured);

    const PreprocessModel& preprocess() const { return preprocess_; }
    const std::vector<FuzzyRule>& rules() const { return rules_; }
    std::vector<FuzzyRule>& rules() { return rules_; }
    const FuzzyModelConfig& config() const { return cfg_; }
    int rule_count() const { return static_cast<int>(rules_.size()); }

    void save(Checkpoint& ck) const;
    void save(const std::string& path) const;
    static FuzzyModel load(const Checkpoint& ck);
    static FuzzyModel load_file(const std::string& path);

  private:
    PreprocessModel preprocess_;
    std::vector<FuzzyRule> rules_;
    FuzzyModelConfig cfg_;
};

} // namespace multipilot
