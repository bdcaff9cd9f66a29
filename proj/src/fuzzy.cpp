#include "multipilot/fuzzy.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace multipilot {

namespace {
constexpr double kCenterHit = 1e-12; // distance below which a sample sits on a center
} // namespace

// --- preprocessing ---

Eigen::VectorXd PreprocessModel::zscore(const Eigen::VectorXd& x) const {
    if (x.size() != mean.size())
        throw std::invalid_argument("preprocess: feature dimension mismatch");
    return (x - mean).cwiseQuotient(stddev);
}

Eigen::VectorXd PreprocessModel::apply(const Eigen::VectorXd& x) const {
    return projection.transpose() * zscore(x);
}

Eigen::MatrixXd PreprocessModel::apply_rows(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd out(X.rows(), projection.cols());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out.row(i) = apply(X.row(i).transpose()).transpose();
    return out;
}

PreprocessModel preprocess_fit(const Eigen::MatrixXd& X, const std::vector<int>& labels,
                               int max_dims) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < 2) throw std::invalid_argument("preprocess: need at least two samples");
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw std::invalid_argument("preprocess: label count mismatch");

    PreprocessModel model;
    model.mean = X.colwise().mean();
    Eigen::VectorXd var = Eigen::VectorXd::Zero(d);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::VectorXd c = X.row(i).transpose() - model.mean;
        var += c.cwiseProduct(c);
    }
    var /= static_cast<double>(n);
    for (Eigen::Index j = 0; j < d; ++j)
        if (!(var[j] > 1e-24))
            throw std::invalid_argument("preprocess: feature " + std::to_string(j) +
                                        " has zero variance");
    model.stddev = var.cwiseSqrt();

    // z-scored data
    Eigen::MatrixXd Z(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        Z.row(i) = (X.row(i).transpose() - model.mean).cwiseQuotient(model.stddev).transpose();

    // per-class statistics
    std::map<int, std::vector<Eigen::Index>> by_class;
    for (Eigen::Index i = 0; i < n; ++i) by_class[labels[i]].push_back(i);
    const int n_classes = static_cast<int>(by_class.size());
    if (n_classes < 2) throw std::invalid_argument("preprocess: need at least two classes");
    for (const auto& [label, rows] : by_class)
        if (rows.size() < 2)
            throw std::invalid_argument("preprocess: class " + std::to_string(label) +
                                        " has fewer than two samples");

    const Eigen::VectorXd global_mean = Z.colwise().mean();
    Eigen::MatrixXd Sw = Eigen::MatrixXd::Zero(d, d);
    Eigen::MatrixXd Sb = Eigen::MatrixXd::Zero(d, d);
    for (const auto& [label, rows] : by_class) {
        Eigen::VectorXd mu = Eigen::VectorXd::Zero(d);
        for (const Eigen::Index i : rows) mu += Z.row(i).transpose();
        mu /= static_cast<double>(rows.size());
        for (const Eigen::Index i : rows) {
            const Eigen::VectorXd c = Z.row(i).transpose() - mu;
            Sw += c * c.transpose();
        }
        const Eigen::VectorXd cb = mu - global_mean;
        Sb += static_cast<double>(rows.size()) * cb * cb.transpose();
    }
    Sw += 1e-6 * Eigen::MatrixXd::Identity(d, d); // ridge against singular scatter

    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(Sb, Sw);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("preprocess: LDA eigensolver failed");

    int keep = n_classes - 1;
    if (max_dims > 0) keep = std::min(keep, max_dims);
    keep = std::min<int>(keep, static_cast<int>(d));

    // eigenvalues come out ascending; take the trailing columns
    model.projection.resize(d, keep);
    for (int k = 0; k < keep; ++k) {
        Eigen::VectorXd v = es.eigenvectors().col(d - 1 - k);
        // generalized eigenvectors are Sw-normalized; rescale so the projected
        // training data has unit variance, keeping cluster radii meaningful
        const Eigen::VectorXd proj = Z * v;
        const double pmean = proj.mean();
        const double pvar = (proj.array() - pmean).square().mean();
        if (pvar > 1e-24) v /= std::sqrt(pvar);
        // deterministic sign: largest-magnitude entry positive
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        model.projection.col(k) = v;
    }
    model.class_labels = labels;
    return model;
}

// --- subtractive clustering ---

std::vector<Eigen::VectorXd> subtractive_cluster(const Eigen::MatrixXd& X,
                                                 const SubtractiveOptions& opt) {
    const Eigen::Index n = X.rows();
    if (n == 0) throw std::invalid_argument("subtractive: empty data");
    if (!(opt.radius > 0.0)) throw std::invalid_argument("subtractive: radius must be positive");

    const double alpha = 4.0 / (opt.radius * opt.radius);
    const double rb = opt.squash * opt.radius;
    const double beta = 4.0 / (rb * rb);

    Eigen::VectorXd potential = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            potential[i] += std::exp(-alpha * (X.row(i) - X.row(j)).squaredNorm());

    std::vector<Eigen::VectorXd> centers;
    Eigen::VectorXd::Index first_idx = 0;
    const double first_peak = potential.maxCoeff(&first_idx);
    if (!(first_peak > 0.0)) return centers;

    Eigen::VectorXd current = potential;
    while (true) {
        Eigen::VectorXd::Index idx = 0;
        const double peak = current.maxCoeff(&idx);
        if (peak < opt.reject_ratio * first_peak) break;
        bool accept = peak >= opt.accept_ratio * first_peak;
        if (!accept) {
            // gray zone: accept when distance to existing centers is large
            // relative to the lost potential (Chiu's tradeoff rule)
            double dmin = std::numeric_limits<double>::infinity();
            for (const auto& c : centers)
                dmin = std::min(dmin, (X.row(idx).transpose() - c).norm());
            accept = (dmin / opt.radius + peak / first_peak) >= 1.0;
            if (!accept) {
                current[idx] = 0.0; // reject this point, keep scanning
                continue;
            }
        }
        const Eigen::VectorXd center = X.row(idx).transpose();
        centers.push_back(center);
        for (Eigen::Index i = 0; i < n; ++i)
            current[i] -= peak * std::exp(-beta * (X.row(i).transpose() - center).squaredNorm());
        current = current.cwiseMax(0.0);
        if (current.maxCoeff() <= 0.0) break;
    }
    return centers;
}

// --- fuzzy c-means ---

Eigen::VectorXd fcm_membership(const Eigen::MatrixXd& centers, const Eigen::VectorXd& x,
                               double m) {
    const int p = static_cast<int>(centers.rows());
    Eigen::VectorXd dist(p);
    for (int j = 0; j < p; ++j) dist[j] = (x - centers.row(j).transpose()).norm();

    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);
    // a sample on a center belongs there outright
    int hit = -1;
    for (int j = 0; j < p; ++j)
        if (dist[j] < kCenterHit) {
            hit = j;
            break;
        }
    if (hit >= 0) {
        w[hit] = 1.0;
        return w;
    }
    const double expo = 2.0 / (m - 1.0);
    for (int j = 0; j < p; ++j) {
        double denom = 0.0;
        for (int k = 0; k < p; ++k) denom += std::pow(dist[j] / dist[k], expo);
        w[j] = 1.0 / denom;
    }
    return w;
}

double fcm_objective(const Eigen::MatrixXd& X, const Eigen::MatrixXd& centers,
                     const Eigen::MatrixXd& memberships, double m) {
    double obj = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < centers.rows(); ++j)
            obj += std::pow(memberships(i, j), m) *
                   (X.row(i) - centers.row(j)).squaredNorm();
    return obj;
}

FcmResult fcm(const Eigen::MatrixXd& X, int p, double m, const Eigen::MatrixXd* seed_centers,
              double tol, int max_iterations) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (p < 1) throw std::invalid_argument("fcm: p must be at least 1");
    if (p > n) throw std::invalid_argument("fcm: more clusters than samples");
    if (!(m > 1.0)) throw std::invalid_argument("fcm: fuzzifier must exceed 1");

    FcmResult res;
    res.centers.resize(p, d);
    if (seed_centers) {
        if (seed_centers->rows() != p || seed_centers->cols() != d)
            throw std::invalid_argument("fcm: seed center shape mismatch");
        res.centers = *seed_centers;
    } else {
        // deterministic spread of seeds over the data
        for (int j = 0; j < p; ++j) res.centers.row(j) = X.row((j * n) / p);
    }

    res.memberships.resize(n, p);
    for (int it = 0; it < max_iterations; ++it) {
        ++res.iterations;
        for (Eigen::Index i = 0; i < n; ++i)
            res.memberships.row(i) =
                fcm_membership(res.centers, X.row(i).transpose(), m).transpose();
        res.objective_trace.push_back(fcm_objective(X, res.centers, res.memberships, m));

        Eigen::MatrixXd next(p, d);
        for (int j = 0; j < p; ++j) {
            Eigen::VectorXd num = Eigen::VectorXd::Zero(d);
            double den = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                const double wm = std::pow(res.memberships(i, j), m);
                num += wm * X.row(i).transpose();
                den += wm;
            }
            if (den > 0.0)
                next.row(j) = (num / den).transpose();
            else
                next.row(j) = res.centers.row(j);
        }
        const double shift = (next - res.centers).rowwise().norm().maxCoeff();
        res.centers = next;
        if (shift < tol) break;
    }
    for (Eigen::Index i = 0; i < n; ++i)
        res.memberships.row(i) = fcm_membership(res.centers, X.row(i).transpose(), m).transpose();
    res.objective_trace.push_back(fcm_objective(X, res.centers, res.memberships, m));
    return res;
}

// --- interval type-2 T-S model ---

void FuzzyModelConfig::validate() const {
    if (!(m > 1.0)) throw std::invalid_argument("fuzzy: fuzzifier must exceed 1");
    if (fou_delta < 0.0) throw std::invalid_argument("fuzzy: fou_delta must be >= 0");
    if (b_lower < 0.0 || b_upper < 0.0 || std::abs(b_lower + b_upper - 1.0) > 1e-12)
        throw std::invalid_argument("fuzzy: b weights must be nonnegative and sum to 1");
    if (!(sigma > 0.0 && sigma <= 1.0))
        throw std::invalid_argument("fuzzy: sigma must be in (0, 1]");
    if (!(cluster_radius > 0.0)) throw std::invalid_argument("fuzzy: cluster radius must be > 0");
    if (output_dim <= 0) throw std::invalid_argument("fuzzy: output_dim must be positive");
}

void wrls_update(FuzzyRule& rule, const Eigen::VectorXd& x_aug, const Eigen::VectorXd& f,
                 double sigma) {
    if (!x_aug.allFinite() || !f.allFinite())
        throw std::invalid_argument("wrls: non-finite input");
    if (!(sigma > 0.0 && sigma <= 1.0)) throw std::invalid_argument("wrls: sigma out of range");
    const double denom = sigma + x_aug.dot(rule.S * x_aug);
    const Eigen::VectorXd gain = rule.S * x_aug / denom;
    const Eigen::VectorXd innovation = f - rule.M * x_aug;
    rule.M += innovation * gain.transpose();
    rule.S = (rule.S - gain * (x_aug.transpose() * rule.S)) / sigma;
    rule.S = ((rule.S + rule.S.transpose()) / 2.0).eval();
}

FuzzyModel FuzzyModel::fit(const Eigen::MatrixXd& states, const Eigen::MatrixXd& forces,
                           const std::vector<int>& labels, const FuzzyModelConfig& cfg) {
    cfg.validate();
    if (states.rows() != forces.rows())
        throw std::invalid_argument("fuzzy: state/force row mismatch");
    if (forces.cols() != cfg.output_dim)
        throw std::invalid_argument("fuzzy: force dimension mismatch");

    FuzzyModel model;
    model.cfg_ = cfg;
    model.preprocess_ = preprocess_fit(states, labels);
    const Eigen::MatrixXd Y = model.preprocess_.apply_rows(states);

    SubtractiveOptions sopt;
    sopt.radius = cfg.cluster_radius;
    const auto seeds = subtractive_cluster(Y, sopt);
    const int p = std::max<int>(1, static_cast<int>(seeds.size()));
    Eigen::MatrixXd seed_mat(p, Y.cols());
    if (seeds.empty()) {
        seed_mat.row(0) = Y.colwise().mean();
    } else {
        for (int j = 0; j < p; ++j) seed_mat.row(j) = seeds[j].transpose();
    }

    const FcmResult clusters = fcm(Y, p, cfg.m, &seed_mat);

    // antecedents cluster in the projected space; consequents see the full
    // z-scored state
    const int daug = static_cast<int>(states.cols()) + 1;
    model.rules_.resize(p);
    for (int j = 0; j < p; ++j) {
        FuzzyRule& rule = model.rules_[j];
        rule.center = clusters.centers.row(j).transpose();
        // membership-weighted per-feature spread
        Eigen::VectorXd num = Eigen::VectorXd::Zero(Y.cols());
        double den = 0.0;
        for (Eigen::Index i = 0; i < Y.rows(); ++i) {
            const double wm = std::pow(clusters.memberships(i, j), cfg.m);
            const Eigen::VectorXd diff = Y.row(i).transpose() - rule.center;
            num += wm * diff.cwiseProduct(diff);
            den += wm;
        }
        if (den > 0.0)
            rule.spread = (num / den).cwiseSqrt().cwiseMax(1e-12);
        else
            rule.spread = Eigen::VectorXd::Ones(Y.cols());
        rule.M = Eigen::MatrixXd::Zero(cfg.output_dim, daug);
        rule.S = cfg.s0 * Eigen::MatrixXd::Identity(daug, daug);
    }

    // streaming consequent identification
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
        Eigen::VectorXd x_aug(daug);
        x_aug[0] = 1.0;
        x_aug.tail(daug - 1) = model.preprocess_.zscore(states.row(i).transpose());
        const Eigen::VectorXd strengths = model.combined_strengths(Y.row(i).transpose());
        for (int j = 0; j < p; ++j)
            if (strengths[j] > cfg.update_gate)
                wrls_update(model.rules_[j], x_aug, forces.row(i).transpose(), cfg.sigma);
    }
    return model;
}

Eigen::VectorXd FuzzyModel::crisp_memberships(const Eigen::VectorXd& x) const {
    Eigen::MatrixXd centers(rules_.size(), x.size());
    for (std::size_t j = 0; j < rules_.size(); ++j) centers.row(j) = rules_[j].center.transpose();
    return fcm_membership(centers, x, cfg_.m);
}

std::vector<std::pair<double, double>> FuzzyModel::firing_interval(
    const Eigen::VectorXd& x) const {
    const Eigen::VectorXd w = crisp_memberships(x);
    std::vector<std::pair<double, double>> out(rules_.size());
    for (std::size_t j = 0; j < rules_.size(); ++j) {
        const double lower = std::max(0.0, (1.0 - cfg_.fou_delta) * w[j]);
        const double upper = std::min(1.0, (1.0 + cfg_.fou_delta) * w[j]);
        out[j] = {lower, upper};
    }
    return out;
}

Eigen::VectorXd FuzzyModel::combined_strengths(const Eigen::VectorXd& x) const {
    const auto interval = firing_interval(x);
    Eigen::VectorXd w(interval.size());
    for (std::size_t j = 0; j < interval.size(); ++j)
        w[j] = interval[j].first * cfg_.b_lower + interval[j].second * cfg_.b_upper;
    return w;
}

Eigen::VectorXd FuzzyModel::predict(const Eigen::VectorXd& raw_state) const {
    if (rules_.empty()) throw std::runtime_error("fuzzy: model has no rules");
    const Eigen::VectorXd z = preprocess_.zscore(raw_state);
    const Eigen::VectorXd y = preprocess_.projection.transpose() * z;
    const Eigen::VectorXd w = combined_strengths(y);
    const double total = w.sum();
    if (!(total > 1e-300))
        throw std::runtime_error("fuzzy: input fired no rules (out of domain)");
    Eigen::VectorXd x_aug(z.size() + 1);
    x_aug[0] = 1.0;
    x_aug.tail(z.size()) = z;
    Eigen::VectorXd f = Eigen::VectorXd::Zero(cfg_.output_dim);
    for (std::size_t j = 0; j < rules_.size(); ++j) f += w[j] * (rules_[j].M * x_aug);
    return f / total;
}

void FuzzyModel::update(const Eigen::VectorXd& raw_state, const Eigen::VectorXd& f_measured) {
    const Eigen::VectorXd z = preprocess_.zscore(raw_state);
    const Eigen::VectorXd y = preprocess_.projection.transpose() * z;
    Eigen::VectorXd x_aug(z.size() + 1);
    x_aug[0] = 1.0;
    x_aug.tail(z.size()) = z;
    const Eigen::VectorXd w = combined_strengths(y);
    for (std::size_t j = 0; j < rules_.size(); ++j)
        if (w[j] > cfg_.update_gate) wrls_update(rules_[j], x_aug, f_measured, cfg_.sigma);
}

void FuzzyModel::save(Checkpoint& ck) const {
    ck.begin_section("fuzzy");
    ck.put("m", cfg_.m);
    ck.put("fou_delta", cfg_.fou_delta);
    ck.put("b_lower", cfg_.b_lower);
    ck.put("b_upper", cfg_.b_upper);
    ck.put("sigma", cfg_.sigma);
    ck.put("cluster_radius", cfg_.cluster_radius);
    ck.put("update_gate", cfg_.update_gate);
    ck.put("s0", cfg_.s0);
    ck.put("output_dim", static_cast<double>(cfg_.output_dim));
    ck.put("rule_count", static_cast<double>(rules_.size()));

    ck.begin_section("preprocess");
    ck.put("mean", std::vector<double>(preprocess_.mean.data(),
                                       preprocess_.mean.data() + preprocess_.mean.size()));
    ck.put("stddev", std::vector<double>(preprocess_.stddev.data(),
                                         preprocess_.stddev.data() + preprocess_.stddev.size()));
    ck.put("projection_rows", static_cast<double>(preprocess_.projection.rows()));
    ck.put("projection_cols", static_cast<double>(preprocess_.projection.cols()));
    std::vector<double> proj;
    for (Eigen::Index r = 0; r < preprocess_.projection.rows(); ++r)
        for (Eigen::Index c = 0; c < preprocess_.projection.cols(); ++c)
            proj.push_back(preprocess_.projection(r, c));
    ck.put("projection", proj);
    ck.put_ints("class_labels", preprocess_.class_labels);

    for (std::size_t j = 0; j < rules_.size(); ++j) {
        ck.begin_section("rule" + std::to_string(j));
        ck.put("center", std::vector<double>(rules_[j].center.data(),
                                             rules_[j].center.data() + rules_[j].center.size()));
        ck.put("spread", std::vector<double>(rules_[j].spread.data(),
                                             rules_[j].spread.data() + rules_[j].spread.size()));
        std::vector<double> mflat, sflat;
        for (Eigen::Index r = 0; r < rules_[j].M.rows(); ++r)
            for (Eigen::Index c = 0; c < rules_[j].M.cols(); ++c)
                mflat.push_back(rules_[j].M(r, c));
        for (Eigen::Index r = 0; r < rules_[j].S.rows(); ++r)
            for (Eigen::Index c = 0; c < rules_[j].S.cols(); ++c)
                sflat.push_back(rules_[j].S(r, c));
        ck.put("M", mflat);
        ck.put("S", sflat);
    }
}

void FuzzyModel::save(const std::string& path) const {
    Checkpoint ck;
    save(ck);
    ck.save(path);
}

FuzzyModel FuzzyModel::load(const Checkpoint& ck) {
    FuzzyModel model;
    model.cfg_.m = ck.get_scalar("fuzzy", "m");
    model.cfg_.fou_delta = ck.get_scalar("fuzzy", "fou_delta");
    model.cfg_.b_lower = ck.get_scalar("fuzzy", "b_lower");
    model.cfg_.b_upper = ck.get_scalar("fuzzy", "b_upper");
    model.cfg_.sigma = ck.get_scalar("fuzzy", "sigma");
    model.cfg_.cluster_radius = ck.get_scalar("fuzzy", "cluster_radius");
    model.cfg_.update_gate = ck.get_scalar("fuzzy", "update_gate");
    model.cfg_.s0 = ck.get_scalar("fuzzy", "s0");
    model.cfg_.output_dim = static_cast<int>(ck.get_scalar("fuzzy", "output_dim"));
    const int p = static_cast<int>(ck.get_scalar("fuzzy", "rule_count"));

    const auto mean = ck.get("preprocess", "mean");
    const auto stddev = ck.get("preprocess", "stddev");
    model.preprocess_.mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), mean.size());
    model.preprocess_.stddev = Eigen::Map<const Eigen::VectorXd>(stddev.data(), stddev.size());
    const int pr = static_cast<int>(ck.get_scalar("preprocess", "projection_rows"));
    const int pc = static_cast<int>(ck.get_scalar("preprocess", "projection_cols"));
    const auto proj = ck.get("preprocess", "projection");
    if (static_cast<int>(proj.size()) != pr * pc)
        throw std::runtime_error("fuzzy: projection size mismatch in checkpoint");
    model.preprocess_.projection.resize(pr, pc);
    for (int r = 0; r < pr; ++r)
        for (int c = 0; c < pc; ++c) model.preprocess_.projection(r, c) = proj[r * pc + c];
    model.preprocess_.class_labels = ck.get_ints("preprocess", "class_labels");

    model.rules_.resize(p);
    const int daug = static_cast<int>(model.preprocess_.mean.size()) + 1;
    for (int j = 0; j < p; ++j) {
        const std::string sec = "rule" + std::to_string(j);
        const auto center = ck.get(sec, "center");
        const auto spread = ck.get(sec, "spread");
        model.rules_[j].center = Eigen::Map<const Eigen::VectorXd>(center.data(), center.size());
        model.rules_[j].spread = Eigen::Map<const Eigen::VectorXd>(spread.data(), spread.size());
        const auto mflat = ck.get(sec, "M");
        const auto sflat = ck.get(sec, "S");
        model.rules_[j].M.resize(model.cfg_.output_dim, daug);
        for (int r = 0; r < model.cfg_.output_dim; ++r)
            for (int c = 0; c < daug; ++c) model.rules_[j].M(r, c) = mflat[r * daug + c];
        model.rules_[j].S.resize(daug, daug);
        for (int r = 0; r < daug; ++r)
            for (int c = 0; c < daug; ++c) model.rules_[j].S(r, c) = sflat[r * daug + c];
    }
    return model;
}

FuzzyModel FuzzyModel::load_file(const std::string& path) {
    return load(Checkpoint::load(path));
}

} // namespace multipilot
