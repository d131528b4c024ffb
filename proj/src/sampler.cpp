#include "protosel/sampler.hpp"

#include "protosel/dist.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace protosel {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDirTol = 1e-12;
}  // namespace

std::pair<double, double> chord_interval(const Mat& A, const Vec& b, const Vec& y, const Vec& z) {
    double lo = -kInf, hi = kInf;
    if (A.rows() == 0) return {lo, hi};
    Vec az = A * z;
    Vec slack = b - A * y;
    double zy = z.dot(y);
    for (int j = 0; j < az.size(); ++j) {
        if (az[j] > kDirTol)
            hi = std::min(hi, zy + slack[j] / az[j]);
        else if (az[j] < -kDirTol)
            lo = std::max(lo, zy + slack[j] / az[j]);
    }
    if (!(lo <= hi)) throw std::runtime_error("chord_interval: infeasible chord");
    return {lo, hi};
}

namespace {

// Sample from N(0,1) restricted to [lo, hi] with 3.5 <= lo < hi, working in
// log-survival space.
double truncated_upper_tail(double lo, double hi, RandomStream& rng) {
    double llo = norm_logsf(lo);
    double lhi = std::isinf(hi) ? -kInf : norm_logsf(hi);
    double u = rng.uniform();
    double t = llo + std::log1p(u * std::expm1(lhi - llo));
    return norm_quantile_from_logsf(t);
}

}  // namespace

double truncated_std_normal(double lo, double hi, RandomStream& rng) {
    if (!(lo < hi)) throw std::invalid_argument("truncated_std_normal: empty interval");
    if (lo >= 3.5) return std::clamp(truncated_upper_tail(lo, hi, rng), lo, hi);
    if (hi <= -3.5) return std::clamp(-truncated_upper_tail(-hi, -lo, rng), lo, hi);
    double pl = std::isinf(lo) ? 0.0 : norm_cdf(lo);
    double ph = std::isinf(hi) ? 1.0 : norm_cdf(hi);
    double u = rng.uniform();
    double p = pl + u * (ph - pl);
    p = std::clamp(p, std::numeric_limits<double>::min(), 1.0 - 1e-16);
    return std::clamp(norm_quantile(p), std::isinf(lo) ? -kInf : lo, std::isinf(hi) ? kInf : hi);
}

Mat hit_and_run(const ConstrainedGaussian& target, const Vec& start, const HitAndRunConfig& cfg) {
    if (cfg.n_samples < 1 || cfg.burn_in < 0 || cfg.thinning < 1)
        throw std::invalid_argument("hit_and_run: bad config");
    const int n = static_cast<int>(start.size());
    const bool iso = target.cov_sqrt.size() == 0;

    // whiten: y = S w + mean with S the covariance square root, so the
    // constraints become (A S) w <= b - A mean
    Mat a_w;
    Vec b_w;
    Vec w;
    if (target.event.rows() > 0) {
        a_w = iso ? Mat(target.iso_scale * target.event.A) : Mat(target.event.A * target.cov_sqrt);
        b_w = target.event.b - target.event.A * target.mean;
    } else {
        a_w.resize(0, n);
        b_w.resize(0);
    }
    if (iso)
        w = (start - target.mean) / target.iso_scale;
    else
        w = target.cov_sqrt.fullPivLu().solve(start - target.mean);

    if (a_w.rows() > 0 && !((a_w * w - b_w).array() <= 1e-8).all())
        throw std::runtime_error("hit_and_run: infeasible start");

    RandomStream rng(cfg.seed);
    Mat samples(cfg.n_samples, n);
    Vec z(n);
    Vec aw = a_w.rows() > 0 ? Vec(a_w * w) : Vec();

    const long total = static_cast<long>(cfg.burn_in) +
                       static_cast<long>(cfg.n_samples) * static_cast<long>(cfg.thinning);
    int kept = 0;
    for (long step = 0; step < total; ++step) {
        for (int i = 0; i < n; ++i) z[i] = rng.normal();
        z /= z.norm();

        double zw = z.dot(w);
        double lo = -kInf, hi = kInf;
        Vec az;
        if (a_w.rows() > 0) {
            az = a_w * z;
            for (int j = 0; j < az.size(); ++j) {
                double room = b_w[j] - aw[j];
                if (az[j] > kDirTol)
                    hi = std::min(hi, zw + room / az[j]);
                else if (az[j] < -kDirTol)
                    lo = std::max(lo, zw + room / az[j]);
            }
            if (!(lo <= hi)) throw std::runtime_error("hit_and_run: infeasible chord");
        }
        double kappa = (lo < hi) ? truncated_std_normal(lo, hi, rng) : zw;
        double move = kappa - zw;
        w += move * z;
        if (a_w.rows() > 0) {
            aw += move * az;
            if (step % 1024 == 1023) aw = a_w * w;  // refresh accumulated slack
        }
        long post = step - cfg.burn_in;
        if (post >= 0 && (post + 1) % cfg.thinning == 0 && kept < cfg.n_samples) {
            if (iso)
                samples.row(kept) = (target.iso_scale * w + target.mean).transpose();
            else
                samples.row(kept) = (target.cov_sqrt * w + target.mean).transpose();
            ++kept;
        }
    }
    return samples;
}

}  // namespace protosel
