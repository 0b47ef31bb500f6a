#include "family.hpp"

#include <cmath>

#include "constants.hpp"
#include "errors.hpp"
#include "quadrature.hpp"

namespace critbubble {

namespace {
double quintic(double x) { return ((6.0 * x - 15.0) * x + 10.0) * x * x * x; }
double dquintic(double x) { return ((30.0 * x - 60.0) * x + 30.0) * x * x; }
} // namespace

TranslatedFamily::TranslatedFamily(FamilyParams fp, Weight w, Domain d)
    : fp_(fp), w_(std::move(w)), d_(std::move(d)) {
    if (!(fp_.t >= 0.0 && fp_.t < 1.0)) fail_invalid("family requires t in [0,1)");
    if (fp_.scale_index < 1) fail_invalid("family requires scale_index >= 1");
    if (!(fp_.r0 > 0.0)) fail_invalid("family requires r0 > 0");
    if (fp_.sigma_axis < 0 || fp_.sigma_axis >= d_.n)
        fail_invalid("sigma_axis out of range");
    if (std::abs(fp_.sigma_sign) != 1.0) fail_invalid("sigma_sign must be +-1");
    const double k2 = (double)fp_.scale_index * fp_.scale_index;
    phi_lo_ = 1.0 / (4.0 * k2);
    phi_lo2_ = 1.0 / (2.0 * k2);
    phi_hi_ = fp_.R0;
    phi_hi2_ = 2.0 * fp_.R0;
    if (!(phi_lo2_ < fp_.R0))
        fail_invalid("family requires 1/(2 k^2) < R0");
    if (!(phi_hi2_ <= d_.R * (1.0 + 1e-12)))
        fail_invalid("family requires 2 R0 <= domain radius");
    if (d_.kind == Domain::Kind::annulus && d_.eps_hole > phi_lo_)
        fail_invalid("annulus hole too large for the cutoff dead zone "
                     "(needs eps_hole <= 1/(4 scale_index^2))");
    integrate_all();
}

double TranslatedFamily::phi(double rho) const {
    if (rho <= phi_lo_ || rho >= phi_hi2_) return 0.0;
    if (rho < phi_lo2_) return quintic((rho - phi_lo_) / (phi_lo2_ - phi_lo_));
    if (rho <= phi_hi_) return 1.0;
    return 1.0 - quintic((rho - phi_hi_) / (phi_hi2_ - phi_hi_));
}

double TranslatedFamily::phi_deriv(double rho) const {
    if (rho <= phi_lo_ || rho >= phi_hi2_) return 0.0;
    if (rho < phi_lo2_)
        return dquintic((rho - phi_lo_) / (phi_lo2_ - phi_lo_)) / (phi_lo2_ - phi_lo_);
    if (rho <= phi_hi_) return 0.0;
    return -dquintic((rho - phi_hi_) / (phi_hi2_ - phi_hi_)) / (phi_hi2_ - phi_hi_);
}

double TranslatedFamily::v_shifted(double s, double mu) const {
    const int n = d_.n;
    const double t = fp_.t, k = fp_.scale_index, tr0 = t * fp_.r0;
    const double rho2 = s * s + 2.0 * s * tr0 * mu + tr0 * tr0;
    const double rho = std::sqrt(std::max(rho2, 0.0));
    const double om = 1.0 - t;
    const double base = om * om + k * k * s * s;
    const double c = std::pow(om * k, 0.5 * (n - 2));
    return c * phi(rho) * std::pow(base, -0.5 * (n - 2));
}

double TranslatedFamily::v_at(double rho, double cos_to_sigma) const {
    // |x - a - t r0 sigma|^2 from |x-a| = rho and the angle at a
    const double tr0 = fp_.t * fp_.r0;
    const double s2 = rho * rho - 2.0 * rho * tr0 * cos_to_sigma + tr0 * tr0;
    const double s = std::sqrt(std::max(s2, 0.0));
    const int n = d_.n;
    const double om = 1.0 - fp_.t, k = fp_.scale_index;
    const double base = om * om + k * k * s * s;
    const double c = std::pow(om * k, 0.5 * (n - 2));
    return c * phi(rho) * std::pow(base, -0.5 * (n - 2));
}

// Axisymmetric reduction in spherical coordinates centered at the
// concentration point z0 = a + t r0 sigma: with s = |x - z0| and
// theta the angle to sigma,
//   int_Omega g dx = |S^(n-2)| int_0^pi sin^(n-2)(theta)
//                      int_0^{s_out(theta)} g(s,theta) s^(n-1) ds dtheta,
// and |x-a|^2 = s^2 + 2 s t r0 cos(theta) + (t r0)^2 is what the weight and
// the plateau cutoff see.  The gradient splits into the bubble part (radial
// about z0) and the cutoff part (radial about a).
void TranslatedFamily::integrate_all() {
    const int n = d_.n;
    const double q = critical_q(n);
    const double t = fp_.t, k = fp_.scale_index, tr0 = t * fp_.r0;
    const double om = 1.0 - t;
    const double c = std::pow(om * k, 0.5 * (n - 2));
    const double width = om / k;  // concentration scale

    const auto& rule = gauss_rule(64);
    const double area_factor = n >= 3 ? sphere_area(n - 1) : 2.0;

    double dir = 0.0, qn = 0.0, mom = 0.0;
    for (size_t iq = 0; iq < rule.x.size(); ++iq) {
        const double theta = 0.5 * M_PI * (1.0 + rule.x[iq]);
        const double wtheta = 0.5 * M_PI * rule.w[iq] * std::pow(std::sin(theta), n - 2);
        const double mu = std::cos(theta);

        // outer limit: rho(s,mu) = R
        const double disc = tr0 * tr0 * mu * mu + d_.R * d_.R - tr0 * tr0;
        const double s_out = -tr0 * mu + std::sqrt(std::max(disc, 0.0));

        // ray breakpoints: cutoff transition crossings + concentration scales
        std::vector<double> breaks;
        for (double rho_star : {phi_lo_, phi_lo2_, phi_hi_, phi_hi2_}) {
            const double dd = tr0 * tr0 * mu * mu + rho_star * rho_star - tr0 * tr0;
            if (dd >= 0.0) {
                const double root = std::sqrt(dd);
                breaks.push_back(-tr0 * mu + root);
                breaks.push_back(-tr0 * mu - root);
            }
        }
        double sc = width / 32.0;
        while (sc < s_out) {
            breaks.push_back(sc);
            sc *= 2.0;
        }

        auto geom = [&](double s, double& rho, double& phiv, double& dphi,
                        double& B, double& dB) {
            const double rho2 = s * s + 2.0 * s * tr0 * mu + tr0 * tr0;
            rho = std::sqrt(std::max(rho2, 1e-300));
            phiv = phi(rho);
            dphi = phi_deriv(rho);
            const double base = om * om + k * k * s * s;
            B = std::pow(base, -0.5 * (n - 2));
            dB = -(n - 2.0) * k * k * s * std::pow(base, -0.5 * n);
        };

        auto f_dir = [&](double s) {
            double rho, phiv, dphi, B, dB;
            geom(s, rho, phiv, dphi, B, dB);
            if (phiv == 0.0 && dphi == 0.0) return 0.0;
            // grad v = c [ phi'(rho) grad rho * B + phi * dB * s_hat ],
            // s_hat . grad rho = (s + t r0 mu)/rho
            const double shat_dot_rhohat = (s + tr0 * mu) / rho;
            const double g2 = dphi * dphi * B * B +
                              2.0 * phiv * dphi * B * dB * shat_dot_rhohat +
                              phiv * phiv * dB * dB;
            return w_.eval(rho) * c * c * g2 * std::pow(s, n - 1);
        };
        auto f_q = [&](double s) {
            double rho, phiv, dphi, B, dB;
            geom(s, rho, phiv, dphi, B, dB);
            if (phiv == 0.0) return 0.0;
            return std::pow(c * phiv * B, q) * std::pow(s, n - 1);
        };
        auto f_mom = [&](double s) {
            double rho, phiv, dphi, B, dB;
            geom(s, rho, phiv, dphi, B, dB);
            if (phiv == 0.0 && dphi == 0.0) return 0.0;
            const double shat_dot_rhohat = (s + tr0 * mu) / rho;
            const double g2 = dphi * dphi * B * B +
                              2.0 * phiv * dphi * B * dB * shat_dot_rhohat +
                              phiv * phiv * dB * dB;
            return (tr0 + s * mu) * w_.eval(rho) * c * c * g2 * std::pow(s, n - 1);
        };

        dir += wtheta * integrate_with_breaks(f_dir, 0.0, s_out, breaks, 1e-11, 1e-9).value;
        qn += wtheta * integrate_with_breaks(f_q, 0.0, s_out, breaks, 1e-11, 1e-9).value;
        mom += wtheta * integrate_with_breaks(f_mom, 0.0, s_out, breaks, 1e-11, 1e-9).value;
    }
    dirichlet_ = area_factor * dir;
    qnorm_ = area_factor * qn;
    moment_ = area_factor * mom;
    if (!(qnorm_ > 0.0)) fail_numeric("translated family has vanishing q-norm");
    r_scale_ = std::pow(dirichlet_ / qnorm_, 1.0 / (q - 2.0));
}

double TranslatedFamily::energy(double amplitude) const {
    const double q = critical_q(d_.n);
    return 0.5 * amplitude * amplitude * dirichlet_ -
           std::pow(amplitude, q) / q * qnorm_;
}

double TranslatedFamily::gamma(double amplitude) const {
    const double q = critical_q(d_.n);
    return amplitude * amplitude * dirichlet_ - std::pow(amplitude, q) * qnorm_;
}

std::vector<double> TranslatedFamily::center(double amplitude) const {
    // F(u) = (p0 S)^{-n/2} int x p |grad u|^2
    //      = (p0 S)^{-n/2} amp^2 [ a * dirichlet + sigma * moment ]
    const int n = d_.n;
    const double p0S = w_.p0() * sobolev_constants(n).S;
    const double scale = std::pow(p0S, -0.5 * n) * amplitude * amplitude;
    std::vector<double> F(n);
    for (int i = 0; i < n; ++i) F[i] = scale * d_.center[i] * dirichlet_;
    F[fp_.sigma_axis] += fp_.sigma_sign * scale * moment_;
    return F;
}

int TranslatedFamily::negative_energy_amplitude() const {
    for (int lam = 2; lam <= 64; ++lam) {
        if (energy(lam * r_scale_) < 0.0) return lam;
    }
    fail_numeric("no integer amplitude with negative energy found below 64");
}

TranslatedFamily family_v(const FamilyParams& fp, const Weight& w, const Domain& d) {
    return TranslatedFamily(fp, w, d);
}

std::pair<TranslatedFamily, double> family_w(const FamilyParams& fp, const Weight& w,
                                             const Domain& d) {
    TranslatedFamily fam(fp, w, d);
    const double r = fam.r_scale();
    return {std::move(fam), r};
}

double energy_E(const TranslatedFamily& fam, double amplitude) {
    return fam.energy(amplitude);
}
double gamma_Gamma(const TranslatedFamily& fam, double amplitude) {
    return fam.gamma(amplitude);
}
std::vector<double> center_F(const TranslatedFamily& fam, double amplitude) {
    return fam.center(amplitude);
}

} // namespace critbubble
