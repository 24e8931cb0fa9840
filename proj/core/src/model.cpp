#include "dqpt/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dqpt/errors.hpp"

namespace dqpt {

BlochSample BlochSample::from_half_gap_vector(double e, const Vec3& d) {
    const double half = norm(d);
    BlochSample s;
    s.e = e;
    s.delta = 2.0 * half;
    if (s.delta < kGapTol) {
        s.nhat = {1.0, 0.0, 0.0};
        s.degenerate = true;
        return s;
    }
    s.nhat = scaled(d, 1.0 / half);
    s.degenerate = false;
    return s;
}

BlochSample BlochSample::from_gap(double e, double delta, const Vec3& direction) {
    if (!(delta >= 0.0)) throw InvalidParameter("gap must be nonnegative");
    BlochSample s;
    s.e = e;
    s.delta = delta;
    const double len = norm(direction);
    if (delta < kGapTol || len == 0.0) {
        s.nhat = {1.0, 0.0, 0.0};
        s.degenerate = true;
        return s;
    }
    s.nhat = scaled(direction, 1.0 / len);
    s.degenerate = false;
    return s;
}

void SshParams::validate() const {
    if (!(j1 > 0.0) || !(j2 > 0.0) || !std::isfinite(j1) || !std::isfinite(j2)) {
        throw InvalidParameter("SSH hoppings must be positive and finite (j1=" + std::to_string(j1) +
                               ", j2=" + std::to_string(j2) + ")");
    }
}

void KitaevParams::validate() const {
    if (!(bigM > 0.0) || !std::isfinite(bigM)) {
        throw InvalidParameter("Kitaev gap M must be positive and finite");
    }
    if (!std::isfinite(m) || !std::isfinite(c)) {
        throw InvalidParameter("Kitaev m and c must be finite");
    }
}

// Delta_k = 2 sqrt(J1^2 + J2^2 + 2 J1 J2 cos k), nhat = (2 / Delta)(-J1 - J2 cos k, J2 sin k, 0).
BlochSample ssh_bloch(const SshParams& p, double k) {
    const double c = std::cos(k);
    const double s = std::sin(k);
    return BlochSample::from_half_gap_vector(0.0, {-p.j1 - p.j2 * c, p.j2 * s, 0.0});
}

// Delta_k = 2M sqrt((c cos k - m)^2 + sin^2 k), nhat = (2M / Delta)(0, -sin k, -m + c cos k).
BlochSample kitaev_bloch(const KitaevParams& p, double k) {
    const double ck = std::cos(k);
    const double sk = std::sin(k);
    return BlochSample::from_half_gap_vector(0.0, {0.0, -p.bigM * sk, p.bigM * (p.c * ck - p.m)});
}

double wrap_momentum(double k) {
    if (k >= -kPi && k < kPi) return k;
    double w = std::fmod(k + kPi, 2.0 * kPi);
    if (w < 0.0) w += 2.0 * kPi;
    w -= kPi;
    return w >= kPi ? -kPi : w;
}

TabulatedDispersion::TabulatedDispersion(std::vector<double> momenta, std::vector<BlochSample> samples,
                                         double lookup_tol)
    : momenta_(std::move(momenta)), samples_(std::move(samples)), lookup_tol_(lookup_tol) {
    if (momenta_.empty()) throw InvalidParameter("tabulated dispersion needs at least one sample");
    if (momenta_.size() != samples_.size()) {
        throw InvalidParameter("tabulated dispersion: momenta and samples differ in length");
    }
    double min_spacing = 2.0 * kPi;
    for (std::size_t i = 0; i < momenta_.size(); ++i) {
        const double k = momenta_[i];
        if (!(k >= -kPi && k < kPi)) {
            throw InvalidParameter("tabulated momenta must lie in [-pi, pi)");
        }
        if (i > 0) {
            if (!(k > momenta_[i - 1])) throw InvalidParameter("tabulated momenta must be strictly increasing");
            min_spacing = std::min(min_spacing, k - momenta_[i - 1]);
        }
        const auto& s = samples_[i];
        if (!(s.delta >= 0.0)) throw InvalidParameter("tabulated gap must be nonnegative");
    }
    if (momenta_.size() > 1) {
        min_spacing = std::min(min_spacing, momenta_.front() + 2.0 * kPi - momenta_.back());
        lookup_tol_ = std::min(lookup_tol_, 0.5 * min_spacing);
    }
}

const BlochSample& TabulatedDispersion::at(double k) const {
    const double q = wrap_momentum(k);
    auto it = std::lower_bound(momenta_.begin(), momenta_.end(), q);
    std::size_t best = 0;
    double best_dist = 4.0 * kPi;
    auto consider = [&](std::size_t i) {
        double d = std::abs(momenta_[i] - q);
        d = std::min(d, 2.0 * kPi - d);
        if (d < best_dist) {
            best_dist = d;
            best = i;
        }
    };
    const auto idx = static_cast<std::size_t>(it - momenta_.begin());
    if (idx < momenta_.size()) consider(idx);
    if (idx > 0) consider(idx - 1);
    consider(0);
    consider(momenta_.size() - 1);
    if (best_dist > lookup_tol_) {
        throw LookupError("momentum " + std::to_string(k) + " is not on the tabulated grid");
    }
    return samples_[best];
}

std::string_view to_string(DispersionKind kind) {
    switch (kind) {
        case DispersionKind::Ssh: return "ssh";
        case DispersionKind::Kitaev: return "kitaev";
        case DispersionKind::Tabulated: return "tabulated";
    }
    return "unknown";
}

BlochDispersion BlochDispersion::ssh(SshParams p) {
    p.validate();
    return BlochDispersion(p);
}

BlochDispersion BlochDispersion::kitaev(KitaevParams p) {
    p.validate();
    return BlochDispersion(p);
}

BlochDispersion BlochDispersion::tabulated(TabulatedDispersion table) {
    return BlochDispersion(std::make_shared<const TabulatedDispersion>(std::move(table)));
}

DispersionKind BlochDispersion::kind() const {
    switch (params_.index()) {
        case 0: return DispersionKind::Ssh;
        case 1: return DispersionKind::Kitaev;
        default: return DispersionKind::Tabulated;
    }
}

const TabulatedDispersion* BlochDispersion::as_tabulated() const {
    const auto* t = std::get_if<Table>(&params_);
    return t ? t->get() : nullptr;
}

BlochSample BlochDispersion::operator()(double k) const {
    struct Visitor {
        double k;
        BlochSample operator()(const SshParams& p) const { return ssh_bloch(p, k); }
        BlochSample operator()(const KitaevParams& p) const { return kitaev_bloch(p, k); }
        BlochSample operator()(const Table& t) const { return t->at(k); }
    };
    return std::visit(Visitor{k}, params_);
}

BlochSample eval_dispersion(const BlochDispersion& d, double k) { return d(k); }

QuenchSchedule::QuenchSchedule(BlochDispersion h0_, BlochDispersion h1_, BlochDispersion h2_, double tau_)
    : h0(std::move(h0_)), h1(std::move(h1_)), h2(std::move(h2_)), tau(tau_) {
    if (!(tau > 0.0) || !std::isfinite(tau)) {
        throw InvalidParameter("inter-quench duration tau must be positive and finite");
    }
}

bool QuenchSchedule::is_parity_even() const {
    const auto k0 = h0.kind();
    return k0 != DispersionKind::Tabulated && h1.kind() == k0 && h2.kind() == k0;
}

MomentumGrid MomentumGrid::uniform(std::size_t n) {
    if (n == 0) throw InvalidParameter("momentum grid must be nonempty");
    std::vector<double> p(n);
    const double step = 2.0 * kPi / static_cast<double>(n);
    for (std::size_t j = 0; j < n; ++j) p[j] = -kPi + step * static_cast<double>(j);
    return MomentumGrid(std::move(p));
}

MomentumGrid MomentumGrid::from_points(std::vector<double> momenta) {
    if (momenta.empty()) throw InvalidParameter("momentum grid must be nonempty");
    for (std::size_t i = 0; i < momenta.size(); ++i) {
        if (!(momenta[i] >= -kPi && momenta[i] < kPi)) {
            throw InvalidParameter("grid momenta must lie in [-pi, pi)");
        }
        if (i > 0 && !(momenta[i] > momenta[i - 1])) {
            throw InvalidParameter("grid momenta must be strictly increasing");
        }
    }
    return MomentumGrid(std::move(momenta));
}

MomentumGrid MomentumGrid::with_pinned(std::span<const double> pins) const {
    std::vector<double> p = points_;
    std::vector<bool> taken(p.size(), false);
    for (double raw : pins) {
        const double k = wrap_momentum(raw);
        // nearest point of the original grid, so earlier pins do not shift later lookups
        auto it = std::lower_bound(points_.begin(), points_.end(), k);
        std::size_t idx = static_cast<std::size_t>(it - points_.begin());
        if (idx == p.size() || (idx > 0 && std::abs(points_[idx - 1] - k) <= std::abs(points_[idx] - k))) {
            if (idx > 0) --idx;
        }
        if (taken[idx]) continue;
        const double lo = idx > 0 ? p[idx - 1] : -kPi - 1.0;
        const double hi = idx + 1 < p.size() ? p[idx + 1] : kPi;
        if (k > lo && k < hi) {
            p[idx] = k;
            taken[idx] = true;
        }
    }
    return MomentumGrid(std::move(p));
}

}  // namespace dqpt
