//! Continuum protocol for a massless chiral field (`c = ħ = 1`).
//!
//! Alice couples `G_A = π/4 + ∫λ_A Π_+` to a probe qubit, Bob applies
//! `exp(iαθ∫p_B Π_+)` after a delay `T`. All reported energies are closed-form
//! functionals of the sampled profiles.

mod overlap;

pub use overlap::{finite_mode_oracle, vacuum_overlap, ModeOracle, OracleOptions};

use crate::{Error, Result};
use std::f64::consts::PI;

/// Fewest samples accepted across a profile's support.
pub const MIN_SUPPORT_SAMPLES: usize = 64;
/// Samples outside the declared support must be below this.
pub const SUPPORT_TOL: f64 = 1e-14;

/// Real function sampled on a uniform grid `x_i = x0 + i·dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    x0: f64,
    dx: f64,
    samples: Vec<f64>,
    support: (f64, f64),
}

impl Profile {
    pub fn new(x0: f64, dx: f64, samples: Vec<f64>, support: (f64, f64)) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0 && x0.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid spacing must be positive, got {dx}")));
        }
        let (lo, hi) = support;
        if !(lo < hi) {
            return Err(Error::InvalidParameter(format!("empty support [{lo}, {hi}]")));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("profile has non-finite samples".into()));
        }
        let slack = 1e-9 * dx;
        let mut inside = 0;
        for (i, v) in samples.iter().enumerate() {
            let x = x0 + i as f64 * dx;
            if x >= lo - slack && x <= hi + slack {
                inside += 1;
            } else if v.abs() >= SUPPORT_TOL {
                return Err(Error::InvalidParameter(format!(
                    "profile is {v:e} at x = {x}, outside its support [{lo}, {hi}]"
                )));
            }
        }
        if inside < MIN_SUPPORT_SAMPLES {
            return Err(Error::InvalidParameter(format!(
                "profile has {inside} samples across its support, need at least {MIN_SUPPORT_SAMPLES}"
            )));
        }
        if x0 > lo + slack || x0 + (samples.len() - 1) as f64 * dx < hi - slack {
            return Err(Error::InvalidParameter("grid does not cover the declared support".into()));
        }
        Ok(Self { x0, dx, samples, support })
    }

    /// `ε sin²(π(x − a)/w)` on `[a, a + w]`, sampled at `intervals + 1` points.
    pub fn sin2(eps: f64, a: f64, w: f64, intervals: usize) -> Result<Self> {
        Self::from_fn(a, a + w, intervals, |x| eps * (PI * (x - a) / w).sin().powi(2))
    }

    /// Samples `f` at `intervals + 1` points spanning exactly `[lo, hi]`.
    pub fn from_fn(lo: f64, hi: f64, intervals: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        if intervals == 0 || !(hi > lo) {
            return Err(Error::InvalidParameter(format!("bad sampling of [{lo}, {hi}]")));
        }
        let dx = (hi - lo) / intervals as f64;
        let samples = (0..=intervals).map(|i| f(lo + i as f64 * dx)).collect();
        Self::new(lo, dx, samples, (lo, hi))
    }

    /// Two-column CSV `x,value` on a strictly uniform grid; a header row is allowed.
    /// The support is the smallest grid interval containing every sample above
    /// [`SUPPORT_TOL`], widened by one point on each side when available.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut xs = Vec::new();
        let mut vs = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse { line: i + 1, message: e.to_string() })?;
            let line = rec.position().map_or(i + 1, |p| p.line() as usize);
            if rec.len() != 2 {
                return Err(Error::Parse { line, message: format!("expected 2 columns, found {}", rec.len()) });
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if xs.is_empty() && i == 0 => continue,
                _ => return Err(Error::Parse { line, message: format!("not a number pair: `{}`", rec.as_slice()) }),
            }
        }
        if xs.len() < 2 {
            return Err(Error::Parse { line: 0, message: "profile needs at least two rows".into() });
        }
        let dx = xs[1] - xs[0];
        if !(dx > 0.0) {
            return Err(Error::Parse { line: 0, message: "x must be increasing".into() });
        }
        for (i, x) in xs.iter().enumerate() {
            let want = xs[0] + i as f64 * dx;
            if (x - want).abs() > 1e-9 * dx {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("non-uniform grid: x = {x}, expected {want}"),
                });
            }
        }
        let nz: Vec<usize> = (0..vs.len()).filter(|&i| vs[i].abs() >= SUPPORT_TOL).collect();
        let (first, last) = match (nz.first(), nz.last()) {
            (Some(&a), Some(&b)) => (a.saturating_sub(1), (b + 1).min(vs.len() - 1)),
            _ => (0, vs.len() - 1),
        };
        Self::new(xs[0], dx, vs, (xs[0] + first as f64 * dx, xs[0] + last as f64 * dx))
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { samples: self.samples.iter().map(|v| s * v).collect(), ..self.clone() }
    }

    pub fn shifted(&self, d: f64) -> Self {
        Self { x0: self.x0 + d, support: (self.support.0 + d, self.support.1 + d), ..self.clone() }
    }

    /// Every other sample; `None` if that would under-resolve the support.
    pub fn coarsened(&self) -> Option<Self> {
        let samples: Vec<f64> = self.samples.iter().step_by(2).copied().collect();
        Self::new(self.x0, 2.0 * self.dx, samples, self.support).ok()
    }

    /// Second-order derivative: central inside, one-sided at the ends.
    pub fn derivative(&self) -> Vec<f64> {
        let v = &self.samples;
        let n = v.len();
        let h = self.dx;
        if n < 3 {
            return vec![0.0; n];
        }
        (0..n)
            .map(|i| match i {
                0 => (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h),
                _ if i == n - 1 => (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * h),
                _ => (v[i + 1] - v[i - 1]) / (2.0 * h),
            })
            .collect()
    }

    /// Trapezoid weights for this grid.
    fn weights(&self) -> Vec<f64> {
        let n = self.samples.len();
        (0..n).map(|i| if i == 0 || i == n - 1 { 0.5 * self.dx } else { self.dx }).collect()
    }

    /// `∫ (∂_x f)² dx`.
    pub fn gradient_energy(&self) -> f64 {
        self.derivative().iter().zip(self.weights()).map(|(d, w)| w * d * d).sum()
    }
}

/// `E_A = ∫ (∂_x λ_A)² dx`.
pub fn input_energy(lambda_a: &Profile) -> f64 {
    lambda_a.gradient_energy()
}

/// Ten smooth, compactly supported profiles of varied shape, sign and width.
pub fn reference_profiles() -> Vec<Profile> {
    let bump = |eps: f64, a: f64, w: f64, k: i32| {
        Profile::from_fn(a, a + w, 512, move |x| eps * (PI * (x - a) / w).sin().powi(k))
    };
    [
        Profile::sin2(0.1, 0.0, 1.0, 256),
        Profile::sin2(0.3, -1.0, 2.0, 256),
        Profile::sin2(0.05, 2.0, 0.5, 256),
        bump(0.2, 0.0, 1.0, 4),
        bump(0.4, 0.0, 3.0, 3),
        bump(-0.15, 1.0, 1.5, 2),
        Profile::from_fn(0.0, 2.0, 512, |x| 0.1 * (PI * x / 2.0).sin().powi(2) * (1.0 + 0.5 * x)),
        Profile::from_fn(0.0, 1.0, 512, |x| 0.2 * (PI * x).sin().powi(2) * (2.0 * PI * x).cos()),
        Profile::from_fn(-0.5, 0.5, 512, |x| 0.25 * (PI * (x + 0.5)).sin().powi(6)),
        Profile::from_fn(0.0, 4.0, 1024, |x| 0.5 * (PI * x / 4.0).sin().powi(2) * (PI * x).sin()),
    ]
    .into_iter()
    .map(|p| p.expect("valid reference profile"))
    .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Theta {
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldProtocolSpec {
    pub lambda_a: Profile,
    pub p_b: Profile,
    /// Delay between Alice's measurement and Bob's operation.
    pub t: f64,
    pub theta: Theta,
}

impl FieldProtocolSpec {
    pub fn new(lambda_a: Profile, p_b: Profile, t: f64, theta: Theta) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::InvalidParameter(format!("T must be nonnegative, got {t}")));
        }
        if !(p_b.support.0 > lambda_a.support.1) {
            return Err(Error::InvalidParameter(format!(
                "Bob's support must lie right of Alice's: x_B- = {} <= x_A+ = {}",
                p_b.support.0, lambda_a.support.1
            )));
        }
        if let Theta::Fixed(th) = theta {
            if !th.is_finite() {
                return Err(Error::InvalidParameter("theta must be finite".into()));
            }
        }
        let spec = Self { lambda_a, p_b, t, theta };
        let h = spec.lambda_a.dx.max(spec.p_b.dx);
        if spec.min_kernel_argument() < 2.0 * h {
            return Err(Error::InvalidParameter(format!(
                "kernel (x - y + T)^-3 is unresolved: smallest argument {} against grid spacing {h}",
                spec.min_kernel_argument()
            )));
        }
        Ok(spec)
    }

    /// Smallest `x − y + T` over the two grids.
    pub fn min_kernel_argument(&self) -> f64 {
        let last_a = self.lambda_a.x(self.lambda_a.len() - 1);
        self.p_b.x0 - last_a + self.t
    }

    fn kernel_integral(lambda_a: &Profile, p_b: &Profile, t: f64) -> f64 {
        let wa = lambda_a.weights();
        let wb = p_b.weights();
        let mut total = 0.0;
        for (i, (pb, wx)) in p_b.samples.iter().zip(&wb).enumerate() {
            if *pb == 0.0 {
                continue;
            }
            let x = p_b.x(i);
            let row: f64 = lambda_a
                .samples
                .iter()
                .zip(&wa)
                .enumerate()
                .map(|(j, (la, wy))| wy * la * (x - lambda_a.x(j) + t).powi(-3))
                .sum();
            total += wx * pb * row;
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldEtaXi {
    pub eta: f64,
    pub xi: f64,
    /// `|⟨0|2λ⟩|`.
    pub overlap: f64,
    /// `∬ p_B(x)(x − y + T)^{−3} λ_A(y) dx dy`.
    pub kernel_integral: f64,
    /// Relative change of η against a grid twice as coarse; `None` if too coarse to halve.
    pub eta_refinement: Option<f64>,
}

fn eta_from(overlap: f64, kernel: f64) -> f64 {
    -4.0 / PI * overlap * kernel
}

/// `η = −(4/π)|⟨0|2λ⟩| ∬ p_B(x)(x−y+T)^{−3} λ_A(y)` and `ξ = ∫(∂p_B)²`.
pub fn eta_xi(spec: &FieldProtocolSpec) -> Result<FieldEtaXi> {
    let overlap = vacuum_overlap(&spec.lambda_a)?;
    let kernel = FieldProtocolSpec::kernel_integral(&spec.lambda_a, &spec.p_b, spec.t);
    let eta = eta_from(overlap, kernel);
    let xi = spec.p_b.gradient_energy();
    if !(xi > 0.0) {
        return Err(Error::InvalidParameter(format!("xi = {xi}; p_B must not be constant")));
    }
    let eta_refinement = match (spec.lambda_a.coarsened(), spec.p_b.coarsened()) {
        (Some(a), Some(b)) => {
            let coarse = eta_from(vacuum_overlap(&a)?, FieldProtocolSpec::kernel_integral(&a, &b, spec.t));
            Some(if eta == 0.0 { coarse.abs() } else { ((coarse - eta) / eta).abs() })
        }
        _ => None,
    };
    Ok(FieldEtaXi { eta, xi, overlap, kernel_integral: kernel, eta_refinement })
}

/// Agreement tolerance between the transform and the mode oracle.
pub const OVERLAP_AGREEMENT: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OverlapCheck {
    pub fft: f64,
    pub oracle: ModeOracle,
    pub relative_difference: f64,
    pub agreed: bool,
    /// Transform value when the two agree, otherwise the oracle value.
    pub value: f64,
}

pub fn checked_overlap(lambda: &Profile, opts: &OracleOptions) -> Result<OverlapCheck> {
    let fft = vacuum_overlap(lambda)?;
    let oracle = finite_mode_oracle(lambda, opts)?;
    let relative_difference = (fft - oracle.overlap).abs() / oracle.overlap;
    let agreed = relative_difference < OVERLAP_AGREEMENT;
    Ok(OverlapCheck { fft, oracle, relative_difference, agreed, value: if agreed { fft } else { oracle.overlap } })
}

/// `Tr[ρ_F H_B] = −θη + θ²ξ`.
pub fn bob_energy(eta: f64, xi: f64, theta: f64) -> f64 {
    -theta * eta + theta * theta * xi
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldResult {
    pub e_a: f64,
    pub eta: f64,
    pub xi: f64,
    pub overlap: f64,
    pub theta_opt: f64,
    /// `η²/(4ξ)`.
    pub e_b_max: f64,
    /// Angle actually used (the optimum unless fixed).
    pub theta: f64,
    /// `E_B` at `theta`: `θη − θ²ξ`.
    pub e_b: f64,
    /// `Tr[ρ_F H_B] = −E_B`.
    pub bob_local_energy: f64,
    /// `Tr[ρ_F H_A(T)]`, unchanged by Bob's operation.
    pub alice_packet_energy: f64,
    /// `E_A − Tr[ρ_F H]`.
    pub total_decrease: f64,
    /// `(4|⟨0|2λ⟩|²/π²)(∬ p_B(x−y+T)^{−3}λ_A)² / ∫(∂p_B)²`.
    pub e_b_final_formula: f64,
    /// Probability of each probe outcome.
    pub prob_plus: f64,
    pub eta_refinement: Option<f64>,
}

pub fn output_energy(spec: &FieldProtocolSpec) -> Result<FieldResult> {
    Ok(result_from(spec, eta_xi(spec)?))
}

/// [`output_energy`] with the overlap gated by the mode oracle; on disagreement the
/// oracle value replaces the transform in `η` and everything derived from it.
pub fn output_energy_checked(spec: &FieldProtocolSpec, opts: &OracleOptions) -> Result<(FieldResult, OverlapCheck)> {
    let check = checked_overlap(&spec.lambda_a, opts)?;
    let mut ex = eta_xi(spec)?;
    if !check.agreed {
        ex.eta *= check.value / ex.overlap;
        ex.overlap = check.value;
    }
    Ok((result_from(spec, ex), check))
}

fn result_from(spec: &FieldProtocolSpec, ex: FieldEtaXi) -> FieldResult {
    let e_a = input_energy(&spec.lambda_a);
    let theta_opt = ex.eta / (2.0 * ex.xi);
    let e_b_max = ex.eta * ex.eta / (4.0 * ex.xi);
    let theta = match spec.theta {
        Theta::Auto => theta_opt,
        Theta::Fixed(t) => t,
    };
    let bob = bob_energy(ex.eta, ex.xi, theta);
    let alice = e_a;
    let final_energy = alice + bob;
    let e_b_final_formula =
        4.0 * ex.overlap.powi(2) / (PI * PI) * ex.kernel_integral.powi(2) / ex.xi;
    FieldResult {
        e_a,
        eta: ex.eta,
        xi: ex.xi,
        overlap: ex.overlap,
        theta_opt,
        e_b_max,
        theta,
        e_b: -bob,
        bob_local_energy: bob,
        alice_packet_energy: alice,
        total_decrease: e_a - final_energy,
        e_b_final_formula,
        prob_plus: 0.5 * (1.0 + (std::f64::consts::FRAC_PI_2).cos() * ex.overlap),
        eta_refinement: ex.eta_refinement,
    }
}
