#pragma once

#include <vector>

#include "model.hpp"

namespace critbubble {

// Section-4 trial family on the punched domain: the translated bubble
//   v^sigma_{t,k}(x) = (1-t)^{(n-2)/2} k^{(n-2)/2} phi_k(x)
//                        / ((1-t)^2 + |k (x - a - t r0 sigma)|^2)^{(n-2)/2}
// with the plateau cutoff phi_k (0 inside |x-a| <= 1/(4k^2) and outside 2R0,
// 1 on [1/(2k^2), R0]), and w^sigma_{t,k} = r v^sigma_{t,k} at the
// Nehari amplitude r = (int p|grad v|^2 / int |v|^q)^{1/(q-2)}.
struct FamilyParams {
    double t = 0.0;          // translation in [0,1)
    int sigma_axis = 0;      // sigma = +/- e_axis
    double sigma_sign = 1.0;
    int scale_index = 1;     // the section-4 "k"
    double r0 = 0.5;         // radius from the continuity-of-p condition
    double R0 = 1.0;         // plateau outer radius, B(a,2R0) inside Omega
};

class TranslatedFamily {
public:
    TranslatedFamily(FamilyParams fp, Weight w, Domain d);

    const FamilyParams& params() const { return fp_; }

    // value of v at distance s from the concentration point a + t r0 sigma,
    // with mu = cosine of the angle to sigma
    double v_shifted(double s, double mu) const;
    // value of v at a point given by |x-a| and the cosine of its angle to sigma
    double v_at(double rho, double cos_to_sigma) const;

    double dirichlet() const { return dirichlet_; }     // int p |grad v|^2
    double qnorm() const { return qnorm_; }             // int |v|^q
    double r_scale() const { return r_scale_; }         // Nehari amplitude

    // E, Gamma, F of amplitude * v (amplitude = r_scale gives w^sigma_{t,k})
    double energy(double amplitude) const;
    double gamma(double amplitude) const;
    std::vector<double> center(double amplitude) const;

    double energy_w() const { return energy(r_scale_); }
    double gamma_w() const { return gamma(r_scale_); }
    std::vector<double> center_w() const { return center(r_scale_); }

    // smallest integer amplitude factor lam >= 2 with E(lam * w) < 0
    int negative_energy_amplitude() const;

private:
    FamilyParams fp_;
    Weight w_;
    Domain d_;
    double phi_lo_, phi_lo2_, phi_hi_, phi_hi2_;  // cutoff radii
    double dirichlet_ = 0.0, qnorm_ = 0.0, moment_ = 0.0, r_scale_ = 0.0;

    double phi(double rho) const;
    double phi_deriv(double rho) const;
    void integrate_all();
};

// spec-facing wrappers
TranslatedFamily family_v(const FamilyParams& fp, const Weight& w, const Domain& d);
// returns the evaluator together with the Nehari amplitude
std::pair<TranslatedFamily, double> family_w(const FamilyParams& fp, const Weight& w,
                                             const Domain& d);

double energy_E(const TranslatedFamily& fam, double amplitude);
double gamma_Gamma(const TranslatedFamily& fam, double amplitude);
std::vector<double> center_F(const TranslatedFamily& fam, double amplitude);

} // namespace critbubble
