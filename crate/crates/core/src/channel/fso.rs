//! Optical second hop: path loss, pointing error and Double Generalized
//! Gamma turbulence under heterodyne or IM/DD detection.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfun::foxh::{fox_h_univariate, FoxHVariable, HParam};
use crate::specfun::gamma::{ln_gamma, ln_gamma_complex};
use crate::specfun::meijer::{meijer_g, MeijerGSpec};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    Heterodyne,
    ImDd,
}

impl Detection {
    pub fn r(self) -> f64 {
        match self {
            Detection::Heterodyne => 1.0,
            Detection::ImDd => 2.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FsoLinkParams {
    pub alpha1: f64,
    pub alpha2: f64,
    pub m1: u32,
    pub m2: u32,
    pub omega1: f64,
    pub omega2: f64,
    pub p: u32,
    pub q: u32,
    pub xi: f64,
    pub a0: f64,
    /// I_l in (0, 1].
    pub path_loss: f64,
    pub detection: Detection,
    /// μ_r, linear.
    pub mu_r: f64,
}

const FSO_TOL: f64 = 1e-10;

impl FsoLinkParams {
    pub fn validate(&self) -> Result<()> {
        let pos = |v: f64, f: &str| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(format!("fso.{f}"), "must be positive and finite"))
            }
        };
        pos(self.alpha1, "alpha1")?;
        pos(self.alpha2, "alpha2")?;
        pos(self.omega1, "omega1")?;
        pos(self.omega2, "omega2")?;
        pos(self.xi, "xi")?;
        pos(self.mu_r, "mu_r")?;
        if self.m1 == 0 || self.m2 == 0 {
            return Err(Error::config("fso.m1/m2", "must be positive integers"));
        }
        if self.p == 0 || self.q == 0 {
            return Err(Error::config("fso.p/q", "must be positive integers"));
        }
        let lhs = self.p as f64 / self.q as f64;
        let rhs = self.alpha1 / self.alpha2;
        if ((lhs - rhs) / rhs).abs() > 1e-9 {
            return Err(Error::config("fso.p/q", format!("p/q = {lhs} does not match alpha1/alpha2 = {rhs}")));
        }
        if !(self.a0 > 0.0 && self.a0 <= 1.0) {
            return Err(Error::config("fso.a0", "must lie in (0, 1]"));
        }
        if !(self.path_loss > 0.0 && self.path_loss <= 1.0) {
            return Err(Error::config("fso.path_loss", "must lie in (0, 1]"));
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.detection.r()
    }

    /// Scale `Λ` with `E[γ₂^s] = Λ^s · ξ²/(ξ²+rs) · Γ(m₁+rs/α₁)Γ(m₂+rs/α₂)/(Γ(m₁)Γ(m₂))`.
    pub fn lambda(&self) -> f64 {
        let r = self.r();
        self.mu_r
            * (self.a0 * self.path_loss).powf(r)
            * (self.omega1 / self.m1 as f64).powf(r / self.alpha1)
            * (self.omega2 / self.m2 as f64).powf(r / self.alpha2)
    }

    /// Lower-tail order of the irradiance, `min(ξ², α₁m₁, α₂m₂)`.
    pub fn tail_order(&self) -> f64 {
        (self.xi * self.xi)
            .min(self.alpha1 * self.m1 as f64)
            .min(self.alpha2 * self.m2 as f64)
    }

    /// `ln E[γ₂^s]` for complex `s` in the strip `Re s > -tail_order/r`.
    pub fn ln_mellin(&self, s: Complex64) -> Result<Complex64> {
        let r = self.r();
        let xi2 = self.xi * self.xi;
        let (m1, m2) = (self.m1 as f64, self.m2 as f64);
        let pointing = (Complex64::new(xi2, 0.0) / (xi2 + s * r)).ln();
        Ok(s * self.lambda().ln()
            + pointing
            + ln_gamma_complex(m1 + s * (r / self.alpha1))?
            + ln_gamma_complex(m2 + s * (r / self.alpha2))?
            - ln_gamma(m1)
            - ln_gamma(m2))
    }

    /// `E[γ₂^s]` for real `s`.
    pub fn moment(&self, s: f64) -> Result<f64> {
        let bound = -self.tail_order() / self.r();
        if s <= bound {
            return Err(Error::Domain(format!(
                "E[γ₂^{s}] diverges: order must exceed -min(ξ², α₁m₁, α₂m₂)/r = {bound}"
            )));
        }
        Ok(self.ln_mellin(Complex64::new(s, 0.0))?.re.exp())
    }

    /// Constant `ξ²/(r Γ(m₁) Γ(m₂))` in front of the H-function forms.
    pub(crate) fn h_constant(&self) -> f64 {
        let xi2r = self.xi * self.xi / self.r();
        (xi2r.ln() - ln_gamma(self.m1 as f64) - ln_gamma(self.m2 as f64)).exp()
    }

    /// Gamma factors of `E[γ₂^s]` in H-function form: numerator `b` list and
    /// the single denominator entry.
    pub(crate) fn h_params(&self) -> Result<(Vec<HParam>, HParam)> {
        let r = self.r();
        let xi2r = self.xi * self.xi / r;
        Ok((
            vec![
                HParam::new(self.m1 as f64, r / self.alpha1)?,
                HParam::new(self.m2 as f64, r / self.alpha2)?,
                HParam::new(xi2r, 1.0)?,
            ],
            HParam::new(1.0 + xi2r, 1.0)?,
        ))
    }

    /// `N = α₂p`, when it is an integer.
    fn meijer_order(&self) -> Option<u32> {
        let n = self.alpha2 * self.p as f64;
        let k = n.round();
        ((n - k).abs() < 1e-9 && k >= 1.0).then_some(k as u32)
    }
}

/// Link geometry for the Gaussian-beam pointing model. Missing fields take
/// the reference-link values of [`Default`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointingGeometry {
    pub aperture_radius: f64,
    pub beam_waist: f64,
    pub curvature_radius: f64,
    pub wavelength: f64,
    pub jitter_sigma: f64,
    pub link_length: f64,
    /// dB/km.
    pub attenuation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cn2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rytov_variance: Option<f64>,
}

impl Default for PointingGeometry {
    /// 1 km at 1550 nm: 5 cm aperture, 5 mm waist, F₀ = −10 m, σ_s = 3.75 cm,
    /// 0.5 dB/km.
    fn default() -> Self {
        Self {
            aperture_radius: 0.05,
            beam_waist: 0.005,
            curvature_radius: -10.0,
            wavelength: 1550e-9,
            jitter_sigma: 0.0375,
            link_length: 1000.0,
            attenuation: 0.5,
            cn2: None,
            rytov_variance: None,
        }
    }
}

impl PointingGeometry {
    pub fn validate(&self) -> Result<()> {
        for (v, f) in [
            (self.aperture_radius, "aperture_radius"),
            (self.beam_waist, "beam_waist"),
            (self.wavelength, "wavelength"),
            (self.jitter_sigma, "jitter_sigma"),
            (self.link_length, "link_length"),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("geometry.{f}"), "must be positive and finite"));
            }
        }
        if !self.curvature_radius.is_finite() || self.curvature_radius == 0.0 {
            return Err(Error::config("geometry.curvature_radius", "must be finite and nonzero"));
        }
        if !(self.attenuation >= 0.0) {
            return Err(Error::config("geometry.attenuation", "must be nonnegative"));
        }
        Ok(())
    }

    /// Beam radius at the receiver for free-space Gaussian propagation.
    pub fn beam_radius(&self) -> f64 {
        let k = 2.0 * std::f64::consts::PI / self.wavelength;
        let theta = 1.0 - self.link_length / self.curvature_radius;
        let lambda = 2.0 * self.link_length / (k * self.beam_waist * self.beam_waist);
        self.beam_waist * (theta * theta + lambda * lambda).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointingCoefficients {
    pub a0: f64,
    pub w_leq: f64,
    pub xi: f64,
    pub w_l: f64,
}

pub fn derive_pointing_coefficients(geom: &PointingGeometry) -> Result<PointingCoefficients> {
    geom.validate()?;
    let w_l = geom.beam_radius();
    let v = std::f64::consts::PI.sqrt() * geom.aperture_radius / (std::f64::consts::SQRT_2 * w_l);
    let erf_v = libm::erf(v);
    let a0 = erf_v * erf_v;
    let w_leq = (w_l * w_l * std::f64::consts::PI.sqrt() * erf_v / (2.0 * v * (-v * v).exp())).sqrt();
    Ok(PointingCoefficients {
        a0,
        w_leq,
        xi: w_leq / (2.0 * geom.jitter_sigma),
        w_l,
    })
}

/// `10^{-σL/10}` with σ in dB/km and L in km.
pub fn path_loss_db<T: Scalar>(sigma_db_per_km: T, length_km: T) -> T {
    let ten = T::from_f64(10.0).expect("representable");
    ten.powf(-(sigma_db_per_km * length_km) / ten)
}

pub fn path_loss(geom: &PointingGeometry) -> f64 {
    path_loss_db(geom.attenuation, geom.link_length / 1000.0)
}

/// `A₀ exp(-2R²/ω_Leq²)`.
pub fn pointing_gain<T: Scalar>(r: T, a0: T, w_leq: T) -> T {
    let two = T::from_f64(2.0).expect("representable");
    a0 * (-(two * r * r) / (w_leq * w_leq)).exp()
}

fn delta(k: u32, x: f64) -> impl Iterator<Item = f64> {
    (0..k).map(move |j| (x + j as f64) / k as f64)
}

/// Gauss-multiplication constant `(2π)^{1-(p+q)/2} q^{m₁-½} p^{m₂-½} / (Γ(m₁)Γ(m₂))`, in logs.
fn ln_split_constant(p: &FsoLinkParams) -> f64 {
    let (pp, qq) = (p.p as f64, p.q as f64);
    let (m1, m2) = (p.m1 as f64, p.m2 as f64);
    (1.0 - 0.5 * (pp + qq)) * (2.0 * std::f64::consts::PI).ln() + (m1 - 0.5) * qq.ln() + (m2 - 0.5) * pp.ln()
        - ln_gamma(m1)
        - ln_gamma(m2)
}

/// DGG density of `I_a = I_x I_y`.
pub fn turbulence_pdf(ia: f64, p: &FsoLinkParams) -> Result<f64> {
    p.validate()?;
    if !(ia > 0.0) {
        return Err(Error::Domain(format!("irradiance must be positive, got {ia}")));
    }
    let (pp, qq) = (p.p as f64, p.q as f64);
    let n = p.alpha2 * pp;
    let scale = qq * (qq * p.omega1 / p.m1 as f64).ln() + pp * (pp * p.omega2 / p.m2 as f64).ln();
    let x = (n * ia.ln() - scale).exp();
    let b: Vec<f64> = delta(p.q, p.m1 as f64).chain(delta(p.p, p.m2 as f64)).collect();
    let k = b.len();
    let g = meijer_g(&MeijerGSpec::new(vec![], 0, b, k, x)?, FSO_TOL)?;
    Ok(n * (ln_split_constant(p)).exp() * g.value / ia)
}

fn fso_variable(g: f64, p: &FsoLinkParams, cdf: bool) -> Result<FoxHVariable> {
    let (mut b, den) = p.h_params()?;
    let mut a = Vec::new();
    let mut n = 0;
    if cdf {
        a.push(HParam::new(1.0, 1.0)?);
        n = 1;
    }
    a.push(den);
    if cdf {
        b.push(HParam::new(0.0, 1.0)?);
    }
    Ok(FoxHVariable {
        a,
        n,
        b,
        m: 3,
        argument: g / p.lambda(),
    })
}

/// Density of γ₂ via the univariate H-function.
pub fn fso_snr_pdf(g: f64, p: &FsoLinkParams) -> Result<f64> {
    p.validate()?;
    if !(g > 0.0 && g.is_finite()) {
        return Err(Error::Domain(format!("FSO SNR density needs γ > 0, got {g}")));
    }
    let h = fox_h_univariate(&fso_variable(g, p, false)?, FSO_TOL)?;
    Ok(p.h_constant() * h.value / g)
}

/// CDF of γ₂ via the univariate H-function.
pub fn fso_snr_cdf(g: f64, p: &FsoLinkParams) -> Result<f64> {
    p.validate()?;
    if g <= 0.0 {
        return Ok(0.0);
    }
    if !g.is_finite() {
        return Ok(1.0);
    }
    let h = fox_h_univariate(&fso_variable(g, p, true)?, FSO_TOL)?;
    Ok((p.h_constant() * h.value).clamp(0.0, 1.0))
}

/// `1 - F₂(γ)` computed directly, without cancellation at large γ. Deep in
/// the tail, where the contour cannot resolve the value to relative
/// accuracy, falls back to `1 - F₂` (absolute accuracy only).
pub fn fso_snr_ccdf(g: f64, p: &FsoLinkParams) -> Result<f64> {
    p.validate()?;
    if g <= 0.0 {
        return Ok(1.0);
    }
    let (mut b, den) = p.h_params()?;
    b.insert(0, HParam::new(0.0, 1.0)?);
    let var = FoxHVariable {
        a: vec![den, HParam::new(1.0, 1.0)?],
        n: 0,
        b,
        m: 4,
        argument: g / p.lambda(),
    };
    match fox_h_univariate(&var, FSO_TOL) {
        Ok(h) => Ok((p.h_constant() * h.value).clamp(0.0, 1.0)),
        Err(Error::Convergence { .. }) => Ok((1.0 - fso_snr_cdf(g, p)?).max(0.0)),
        Err(e) => Err(e),
    }
}

/// Meijer-G argument `A₄ γ^{-N/r}` and upper/lower parameter lists shared by
/// the Meijer-route density and CDF.
fn meijer_parts(g: f64, p: &FsoLinkParams) -> Result<(u32, f64, Vec<f64>, Vec<f64>)> {
    let n = p.meijer_order().ok_or_else(|| {
        Error::Domain(format!("Meijer-G route needs integer α₂p, got {}", p.alpha2 * p.p as f64))
    })?;
    let (pp, qq, nn, r) = (p.p as f64, p.q as f64, n as f64, p.r());
    let xi2 = p.xi * p.xi;
    let ln_a4 = qq * (qq * p.omega1 / p.m1 as f64).ln()
        + pp * (pp * p.omega2 / p.m2 as f64).ln()
        + nn * (p.a0 * p.path_loss).ln()
        + (nn / r) * p.mu_r.ln();
    let x = (ln_a4 - (nn / r) * g.ln()).exp();
    let a: Vec<f64> = delta(n, 1.0 - xi2)
        .chain(delta(p.q, 1.0 - p.m1 as f64))
        .chain(delta(p.p, 1.0 - p.m2 as f64))
        .collect();
    let b: Vec<f64> = delta(n, -xi2).collect();
    Ok((n, x, a, b))
}

/// Density of γ₂ via the Meijer-G form (integer `α₂p` only).
pub fn fso_snr_pdf_meijer(g: f64, p: &FsoLinkParams) -> Result<f64> {
    p.validate()?;
    let (_, x, a, b) = meijer_parts(g, p)?;
    let n_top = a.len();
    let spec = MeijerGSpec::new(a, n_top, b, 0, x)?;
    let v = meijer_g(&spec, FSO_TOL)?.value;
    let a6 = (p.xi * p.xi / p.r()).ln() + ln_split_constant(p);
    Ok(a6.exp() * v / g)
}

/// CDF of γ₂ via the Meijer-G form (integer `α₂p` only).
pub fn fso_snr_cdf_meijer(g: f64, p: &FsoLinkParams) -> Result<f64> {
    p.validate()?;
    if g <= 0.0 {
        return Ok(0.0);
    }
    let (n, x, mut a, b) = meijer_parts(g, p)?;
    let n_top = a.len();
    a.push(1.0);
    let mut bb = vec![0.0];
    bb.extend(b);
    let spec = MeijerGSpec::new(a, n_top, bb, 1, x)?;
    let v = meijer_g(&spec, FSO_TOL)?.value;
    let a3 = (p.xi * p.xi / n as f64).ln() + ln_split_constant(p);
    Ok((a3.exp() * v).clamp(0.0, 1.0))
}

/// Average electrical SNR `γ̄_r = μ_r E[I^r] / E[I]^r`.
pub fn avg_snr_relation(p: &FsoLinkParams) -> Result<f64> {
    p.validate()?;
    let r = p.r();
    let ln_m = |t: f64| -> f64 {
        let xi2 = p.xi * p.xi;
        (xi2 / (xi2 + t)).ln()
            + (t / p.alpha1) * (p.omega1 / p.m1 as f64).ln()
            + ln_gamma(p.m1 as f64 + t / p.alpha1)
            - ln_gamma(p.m1 as f64)
            + (t / p.alpha2) * (p.omega2 / p.m2 as f64).ln()
            + ln_gamma(p.m2 as f64 + t / p.alpha2)
            - ln_gamma(p.m2 as f64)
    };
    Ok(p.mu_r * (ln_m(r) - r * ln_m(1.0)).exp())
}
