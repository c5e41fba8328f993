use super::{c, max_abs_diff, pauli_component, CMatrix, CVector, LocalOperator, StateVector};
use crate::{Error, Result, TOL_IDENTITY};

/// Outcomes with probability below this are dropped from a measurement record.
pub const MIN_PROBABILITY: f64 = 1e-14;
/// Largest supported number of outcomes.
pub const MAX_OUTCOMES: usize = 8;

/// Generalized measurement on one site, `Σ_α M(α)†M(α) = I`.
#[derive(Debug, Clone, PartialEq)]
pub struct PovmMeasurement {
    site: usize,
    outcomes: Vec<(f64, LocalOperator)>,
}

impl PovmMeasurement {
    pub fn new(site: usize, outcomes: Vec<(f64, CMatrix)>) -> Result<Self> {
        if outcomes.is_empty() || outcomes.len() > MAX_OUTCOMES {
            return Err(Error::InvalidParameter(format!(
                "{} outcomes (expected 1..={MAX_OUTCOMES})",
                outcomes.len()
            )));
        }
        let outcomes = outcomes
            .into_iter()
            .map(|(label, m)| Ok((label, LocalOperator::single(site, m)?)))
            .collect::<Result<Vec<_>>>()?;
        let m = Self { site, outcomes };
        let deviation = m.completeness_defect();
        if deviation > TOL_IDENTITY {
            return Err(Error::IncompletePovm { deviation });
        }
        Ok(m)
    }

    /// Projective measurement of `u · σ` with outcomes ±1.
    pub fn projective(site: usize, u: [f64; 3]) -> Result<Self> {
        let sigma = pauli_component(u, site)?;
        let id = CMatrix::identity(2, 2);
        let proj = |a: f64| (&id + sigma.matrix() * c(a)) * c(0.5);
        Self::new(site, vec![(1.0, proj(1.0)), (-1.0, proj(-1.0))])
    }

    /// Single outcome `M = I`.
    pub fn trivial(site: usize) -> Self {
        Self::new(site, vec![(1.0, CMatrix::identity(2, 2))]).expect("identity is complete")
    }

    pub fn site(&self) -> usize {
        self.site
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[(f64, LocalOperator)] {
        &self.outcomes
    }

    pub fn labels(&self) -> Vec<f64> {
        self.outcomes.iter().map(|(a, _)| *a).collect()
    }

    /// POVM element `Π(α) = M(α)†M(α)` for each outcome.
    pub fn effects(&self) -> Vec<(f64, LocalOperator)> {
        self.outcomes
            .iter()
            .map(|(a, m)| (*a, m.dagger().compose(m).expect("same support")))
            .collect()
    }

    /// `D = Σ_α α Π(α)`.
    pub fn label_observable(&self) -> LocalOperator {
        let mut d = CMatrix::zeros(2, 2);
        for (a, p) in self.effects() {
            d += p.matrix() * c(a);
        }
        LocalOperator::single(self.site, d).expect("2x2 on one site")
    }

    pub fn completeness_defect(&self) -> f64 {
        let mut sum = CMatrix::zeros(2, 2);
        for (_, m) in &self.outcomes {
            sum += m.matrix().adjoint() * m.matrix();
        }
        max_abs_diff(&sum, &CMatrix::identity(2, 2))
    }

    /// Unnormalized branches `M(α)|ψ⟩` of a full-register vector.
    pub fn branches(&self, v: &CVector, n_sites: usize) -> Result<Vec<(f64, CVector)>> {
        self.outcomes
            .iter()
            .map(|(a, m)| Ok((*a, m.apply_to(v, n_sites)?)))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Branch {
    pub label: f64,
    pub probability: f64,
    pub state: StateVector,
}

#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub branches: Vec<Branch>,
    /// Labels of outcomes whose probability fell below [`MIN_PROBABILITY`].
    pub omitted: Vec<f64>,
}

impl MeasurementRecord {
    pub fn total_probability(&self) -> f64 {
        self.branches.iter().map(|b| b.probability).sum()
    }
}

/// Probabilities and normalized post-measurement states.
pub fn apply_measurement(state: &StateVector, m: &PovmMeasurement) -> Result<MeasurementRecord> {
    let deviation = m.completeness_defect();
    if deviation > TOL_IDENTITY {
        return Err(Error::IncompletePovm { deviation });
    }
    let n = state.n_sites();
    let mut branches = Vec::new();
    let mut omitted = Vec::new();
    for (label, v) in m.branches(state.amplitudes(), n)? {
        let p = v.norm_squared();
        if p < MIN_PROBABILITY {
            omitted.push(label);
            continue;
        }
        branches.push(Branch {
            label,
            probability: p,
            state: StateVector::normalized(n, v)?,
        });
    }
    Ok(MeasurementRecord { branches, omitted })
}
