//! `|⟨0|2λ⟩| = exp(−(2/π) ∫₀^∞ ω |λ̃(ω)|² dω)` with `λ̃(ω) = ∫ λ(x) e^{iωx} dx`.
//!
//! With `Π_+ = 2∂_x f_+` and the mode expansion of `f_+`,
//! `∫λΠ_+ = −i∫dω √(ω/π) (λ̃* a_ω − λ̃ a_ω†)`, whose vacuum variance is
//! `(1/π)∫ω|λ̃|²`; the Gaussian characteristic function gives the exponent.

use super::Profile;
use crate::{Error, Result};
use rustfft::{num_complex::Complex64, FftPlanner};
use std::f64::consts::{FRAC_PI_2, PI};

/// Zero-padding factor for the transform.
const PAD: usize = 64;
/// Largest fraction of the frequency integral allowed above half the Nyquist frequency.
const TAIL_TOL: f64 = 1e-6;

fn weighted(p: &Profile) -> Vec<f64> {
    let n = p.len();
    p.samples()
        .iter()
        .enumerate()
        .map(|(i, v)| if i == 0 || i == n - 1 { 0.5 * p.dx() * v } else { p.dx() * v })
        .collect()
}

/// FFT evaluation of the vacuum overlap.
pub fn vacuum_overlap(lambda: &Profile) -> Result<f64> {
    let w = weighted(lambda);
    let len = (PAD * w.len()).next_power_of_two();
    let mut buf: Vec<Complex64> = w.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    buf.resize(len, Complex64::new(0.0, 0.0));
    FftPlanner::new().plan_fft_forward(len).process(&mut buf);

    // |λ̃| does not depend on the grid origin or the transform's sign convention.
    let d_omega = 2.0 * PI / (len as f64 * lambda.dx());
    let half = len / 2;
    let mut total = 0.0;
    let mut tail = 0.0;
    for (k, z) in buf.iter().enumerate().take(half + 1).skip(1) {
        let weight = if k == half { 0.5 } else { 1.0 };
        let term = weight * k as f64 * d_omega * z.norm_sqr() * d_omega;
        total += term;
        if 2 * k > half {
            tail += term;
        }
    }
    // Euler–Maclaurin correction at ω = 0, where the integrand has slope |λ̃(0)|².
    total += d_omega * d_omega / 12.0 * buf[0].norm_sqr();
    if total > 0.0 && tail > TAIL_TOL * total {
        return Err(Error::InvalidParameter(format!(
            "overlap integral not converged: {:.2e} of it lies above half the grid's Nyquist frequency",
            tail / total
        )));
    }
    Ok((-2.0 / PI * total).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleOptions {
    pub n_modes: usize,
    /// Highest mode frequency; default `min(π/Δx, 120π/width)`.
    pub omega_max: Option<f64>,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { n_modes: 16384, omega_max: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOracle {
    pub overlap: f64,
    pub prob_plus: f64,
    /// Vacuum variance of `∫λΠ_+`.
    pub variance: f64,
    /// Relative change of the overlap when the mode count is halved.
    pub refinement_change: f64,
    pub omega_max: f64,
    pub n_modes: usize,
}

/// Vacuum second moment of `∫λΠ_+` over modes `ω_j = j·δω`, each a harmonic
/// oscillator with quadratures `(q, p)`, `⟨q²⟩ = ⟨p²⟩ = ½`, `⟨{q,p}⟩ = 0`.
fn mode_variance(lambda: &Profile, n_modes: usize, omega_max: f64) -> f64 {
    let w = weighted(lambda);
    let d_omega = omega_max / n_modes as f64;
    let mut variance = 0.0;
    for j in 1..=n_modes {
        let omega = j as f64 * d_omega;
        let (mut re, mut im) = (0.0, 0.0);
        for (i, wi) in w.iter().enumerate() {
            let (s, c) = (omega * lambda.x(i)).sin_cos();
            re += wi * c;
            im += wi * s;
        }
        // ∫λΠ_+ ⊃ √(2δω ω/π) (−Im λ̃ q + Re λ̃ p)
        let scale = (2.0 * d_omega * omega / PI).sqrt();
        let (c_q, c_p) = (-scale * im, scale * re);
        variance += 0.5 * (c_q * c_q + c_p * c_p);
    }
    variance
}

/// Gaussian evaluation of `⟨0|e^{2i∫λΠ_+}|0⟩` and `p(+) = ⟨0|cos²G_A|0⟩` on a finite set of modes.
pub fn finite_mode_oracle(lambda: &Profile, opts: &OracleOptions) -> Result<ModeOracle> {
    if opts.n_modes < 256 {
        return Err(Error::InvalidParameter(format!("need at least 256 modes, got {}", opts.n_modes)));
    }
    let (lo, hi) = lambda.support();
    let nyquist = PI / lambda.dx();
    let omega_max = opts.omega_max.unwrap_or_else(|| nyquist.min(120.0 * PI / (hi - lo)));
    if !(omega_max > 0.0) || omega_max > nyquist * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "omega_max {omega_max} must lie in (0, {nyquist}] for this grid"
        )));
    }
    let evaluate = |n: usize| {
        // ⟨e^{2iΛ}⟩ = exp(2i⟨Λ⟩ − 2 Var Λ) with ⟨Λ⟩ = 0 in the vacuum.
        let var = mode_variance(lambda, n, omega_max);
        ((-2.0 * var).exp(), var)
    };
    let (modulus, variance) = evaluate(opts.n_modes);
    let (coarse, _) = evaluate(opts.n_modes / 2);
    // cos²G_A = ½(1 + Re e^{2iG_A}),  e^{2iG_A} = e^{iπ/2} e^{2iΛ}
    let prob_plus = 0.5 * (1.0 + modulus * FRAC_PI_2.cos());
    Ok(ModeOracle {
        overlap: modulus,
        prob_plus,
        variance,
        refinement_change: ((coarse - modulus) / modulus).abs(),
        omega_max,
        n_modes: opts.n_modes,
    })
}
