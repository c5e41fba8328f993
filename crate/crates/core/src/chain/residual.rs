//! Minimal energy left after an outcome-dependent local operation at A.

use super::NormalizedChain;
use crate::optimize::{minimize, SearchOptions};
use crate::quantum::{
    c, linalg::eigh, pauli_x, pauli_y, pauli_z, reduced_density_of, CMatrix, LocalOperator,
    LocalSum, Operator, PovmMeasurement,
};
use crate::{Error, Result, TOL_IDENTITY};

/// Family of local operations searched at A.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrausKind {
    /// One SU(2) unitary per outcome.
    Unitary,
    /// Two Kraus operators per outcome (a general qubit channel of rank ≤ 2).
    Rank2,
}

impl std::str::FromStr for KrausKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unitary" => Ok(Self::Unitary),
            "rank2" => Ok(Self::Rank2),
            other => Err(Error::InvalidParameter(format!(
                "kraus family must be `unitary` or `rank2`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualOptions {
    pub kind: KrausKind,
    pub search: SearchOptions,
}

impl Default for ResidualOptions {
    fn default() -> Self {
        Self { kind: KrausKind::Unitary, search: SearchOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoolingOutcome {
    pub alpha: f64,
    pub probability: f64,
    /// Contribution `Σ_μ Tr[K_μ M ρ M† K_μ† H_loc]` at the optimum.
    pub energy: f64,
    pub params: Vec<f64>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualEnergy {
    pub e_r: f64,
    pub e_a: f64,
    pub kind: KrausKind,
    pub outcomes: Vec<CoolingOutcome>,
    /// Energy in terms untouched by the operation (zero up to rounding).
    pub untouched_energy: f64,
    pub converged: bool,
}

fn su2(p: &[f64]) -> CMatrix {
    let gen = pauli_x() * c(p[0]) + pauli_y() * c(p[1]) + pauli_z() * c(p[2]);
    LocalOperator::single(0, gen)
        .and_then(|g| g.unitary_exp(1.0))
        .expect("Hermitian 2x2 generator")
        .matrix()
        .clone()
}

/// Rank-2 Kraus pair from 16 reals: the stacked 4×2 matrix `[K₁; K₂]` is made an
/// isometry by `S(S†S)^{−1/2}`, which enforces `K₁†K₁ + K₂†K₂ = I`.
fn kraus_pair(p: &[f64]) -> Option<[CMatrix; 2]> {
    let s = CMatrix::from_fn(4, 2, |i, j| crate::C64::new(p[2 * (2 * i + j)], p[2 * (2 * i + j) + 1]));
    let gram = s.adjoint() * &s;
    let (w, v) = eigh(&gram).ok()?;
    if w[0] < 1e-10 * w[1].max(1e-300) {
        return None;
    }
    let inv_sqrt = &v
        * CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(2, w.iter().map(|x| c(x.powf(-0.5)))))
        * v.adjoint();
    let iso = s * inv_sqrt;
    Some([iso.rows(0, 2).into_owned(), iso.rows(2, 2).into_owned()])
}

fn unitary_to_kraus_params(u: &CMatrix) -> Vec<f64> {
    let mut p = vec![0.0; 16];
    for i in 0..2 {
        for j in 0..2 {
            p[2 * (2 * i + j)] = u[(i, j)].re;
            p[2 * (2 * i + j) + 1] = u[(i, j)].im;
        }
    }
    p
}

impl NormalizedChain {
    /// Terms whose support contains `site`.
    fn touching(&self, site: usize) -> Result<LocalSum> {
        let mut h = LocalSum::new(self.n_sites());
        for t in self.densities.iter().filter(|t| t.support().contains(&site)) {
            h.extend(&t.operator)?;
        }
        Ok(h)
    }

    /// Smallest `Tr[ρ_c H]` over outcome-dependent local operations at A.
    pub fn residual_energy(
        &self,
        site_a: usize,
        measurement: &PovmMeasurement,
        opts: &ResidualOptions,
    ) -> Result<ResidualEnergy> {
        self.check_measurement(site_a, measurement)?;
        let n = self.n_sites();
        let branches = self.branches(measurement)?;
        let (e_a, _, _) = self.injected(site_a, &branches)?;
        let local = self.touching(site_a)?;
        let window = local.support();
        let h_loc = local.matrix_on(&window)?;
        let pos = window.iter().position(|&s| s == site_a).expect("site in its own window");
        let embed = |k: &CMatrix| -> CMatrix {
            let left = CMatrix::identity(1 << pos, 1 << pos);
            let right_dim = 1 << (window.len() - pos - 1);
            let right = CMatrix::identity(right_dim, right_dim);
            crate::quantum::kron(&crate::quantum::kron(&left, k), &right)
        };

        let mut outcomes = Vec::new();
        let mut untouched = 0.0;
        for (alpha, v) in &branches {
            let total = v.dotc(&self.hamiltonian.apply(v)).re;
            let near = v.dotc(&local.apply(v)).re;
            untouched += total - near;
            let rho = reduced_density_of(v, n, &window)?;
            let energy = |ks: &[CMatrix]| -> f64 {
                ks.iter()
                    .map(|k| {
                        let kk = embed(k);
                        (&kk * &rho * kk.adjoint() * &h_loc).trace().re
                    })
                    .sum()
            };
            let (value, params, converged) = match opts.kind {
                KrausKind::Unitary => {
                    let f = |p: &[f64]| energy(&[su2(p)]);
                    let r = minimize(&f, 3, &[vec![0.0; 3]], &opts.search);
                    (r.value, r.params, r.converged)
                }
                KrausKind::Rank2 => {
                    let f0 = |p: &[f64]| energy(&[su2(p)]);
                    let u = minimize(&f0, 3, &[vec![0.0; 3]], &opts.search);
                    let f = |p: &[f64]| match kraus_pair(p) {
                        Some(ks) => energy(&ks),
                        None => f64::INFINITY,
                    };
                    let start = unitary_to_kraus_params(&su2(&u.params));
                    let mut tilt = start.clone();
                    for (i, x) in tilt.iter_mut().enumerate().skip(8) {
                        *x = 0.05 * ((i as f64) * 0.7).sin();
                    }
                    let search = SearchOptions { grid_points: 0, max_iters: opts.search.max_iters * 4, ..opts.search.clone() };
                    let r = minimize(&f, 16, &[start, tilt], &search);
                    if r.value <= u.value {
                        (r.value, r.params, r.converged)
                    } else {
                        (u.value, unitary_to_kraus_params(&su2(&u.params)), u.converged)
                    }
                }
            };
            outcomes.push(CoolingOutcome {
                alpha: *alpha,
                probability: v.norm_squared(),
                energy: value,
                params,
                converged,
            });
        }
        let e_r = outcomes.iter().map(|o| o.energy).sum::<f64>() + untouched;
        if e_r > e_a + 1e-12 * e_a.abs().max(1.0) {
            return Err(Error::Invariant(format!("residual energy {e_r} exceeds injected {e_a}")));
        }
        if untouched.abs() > TOL_IDENTITY * e_a.abs().max(1.0) {
            return Err(Error::Invariant(format!("energy {untouched:e} outside the window of A")));
        }
        let converged = outcomes.iter().all(|o| o.converged);
        Ok(ResidualEnergy { e_r, e_a, kind: opts.kind, outcomes, untouched_energy: untouched, converged })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kraus_pair_is_complete() {
        let p: Vec<f64> = (0..16).map(|i| ((i * 7 % 11) as f64 - 5.0) / 3.0).collect();
        let [k1, k2] = kraus_pair(&p).unwrap();
        let sum = k1.adjoint() * &k1 + k2.adjoint() * &k2;
        assert!((sum - CMatrix::identity(2, 2)).norm() < 1e-12);
    }

    #[test]
    fn unitary_embeds_as_its_own_channel() {
        let u = su2(&[0.3, -0.2, 0.9]);
        let [k1, k2] = kraus_pair(&unitary_to_kraus_params(&u)).unwrap();
        assert!((k1 - &u).norm() < 1e-12);
        assert!(k2.norm() < 1e-12);
    }
}
