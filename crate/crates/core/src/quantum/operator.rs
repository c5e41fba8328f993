use super::state::check_len;
use super::{c, hermiticity_defect, max_abs_diff, unitarity_defect, CMatrix, CVector, C64};
use crate::{Error, Result, TOL_CONSTRUCT};

/// Anything that can act on a register of qubits.
pub trait Operator: Send + Sync {
    fn n_sites(&self) -> usize;

    /// Matrix-vector product on the full 2^n space.
    fn apply(&self, v: &CVector) -> CVector;

    fn to_dense(&self) -> CMatrix;

    /// Max-entry deviation from Hermiticity.
    fn hermiticity_defect(&self) -> f64;

    fn dim(&self) -> usize {
        1usize << self.n_sites()
    }
}

/// Operator acting on an ordered set of sites; `support[0]` is the most
/// significant factor of `matrix`.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalOperator {
    support: Vec<usize>,
    matrix: CMatrix,
}

impl LocalOperator {
    pub fn new(support: Vec<usize>, matrix: CMatrix) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::InvalidSupport("empty support".into()));
        }
        for (i, s) in support.iter().enumerate() {
            if support[..i].contains(s) {
                return Err(Error::InvalidSupport(format!("site {s} repeated")));
            }
        }
        let dim = 1usize << support.len();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { support, matrix })
    }

    pub fn single(site: usize, matrix: CMatrix) -> Result<Self> {
        Self::new(vec![site], matrix)
    }

    pub fn identity(support: Vec<usize>) -> Result<Self> {
        let d = 1usize << support.len();
        Self::new(support, CMatrix::identity(d, d))
    }

    /// `a ⊗ b` on two distinct sites.
    pub fn two_site(site_a: usize, a: &CMatrix, site_b: usize, b: &CMatrix) -> Result<Self> {
        Self::new(vec![site_a, site_b], a.kronecker(b))
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            support: self.support.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn dagger(&self) -> Self {
        Self {
            support: self.support.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// `self · other`; both must have the same support.
    pub fn compose(&self, other: &LocalOperator) -> Result<Self> {
        if self.support != other.support {
            return Err(Error::InvalidSupport(format!(
                "compose on {:?} vs {:?}",
                self.support, other.support
            )));
        }
        Ok(Self {
            support: self.support.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    /// Max deviation of `O² = I`.
    pub fn involution_defect(&self) -> f64 {
        let d = self.matrix.nrows();
        max_abs_diff(&(&self.matrix * &self.matrix), &CMatrix::identity(d, d))
    }

    pub fn disjoint_from(&self, other: &LocalOperator) -> bool {
        self.support.iter().all(|s| !other.support.contains(s))
    }

    /// `exp(-i t O)` for Hermitian `O`, computed spectrally.
    pub fn unitary_exp(&self, t: f64) -> Result<Self> {
        let m = hermitize(&self.matrix)?;
        let (w, v) = super::linalg::eigh(&m)?;
        let phases = CMatrix::from_diagonal(&CVector::from_iterator(w.len(), w.iter().map(|&e| C64::from_polar(1.0, -t * e))));
        let u = &v * phases * v.adjoint();
        Self::new(self.support.clone(), u)
    }

    /// Matrix of this operator on the ordered site list `sites`, which must
    /// contain the support.
    pub fn embed_into(&self, sites: &[usize]) -> Result<CMatrix> {
        let positions: Vec<usize> = self
            .support
            .iter()
            .map(|s| {
                sites.iter().position(|x| x == s).ok_or_else(|| {
                    Error::InvalidSupport(format!("site {s} not in target {sites:?}"))
                })
            })
            .collect::<Result<_>>()?;
        let n = sites.len();
        let mask = support_mask(&positions, n)?;
        let offsets = local_offsets(&positions, n);
        let dim = 1usize << n;
        let mut out = CMatrix::zeros(dim, dim);
        for base in (0..dim).filter(|b| b & mask == 0) {
            for (r, &or) in offsets.iter().enumerate() {
                for (cc, &oc) in offsets.iter().enumerate() {
                    out[(base | or, base | oc)] = self.matrix[(r, cc)];
                }
            }
        }
        Ok(out)
    }

    /// Apply to a full-register vector without forming the embedded matrix.
    pub fn apply_to(&self, v: &CVector, n_sites: usize) -> Result<CVector> {
        check_len(n_sites, v.len())?;
        let mut out = CVector::zeros(v.len());
        self.accumulate(v, n_sites, &mut out, c(1.0))?;
        Ok(out)
    }

    /// `out += factor · O v`.
    pub(crate) fn accumulate(
        &self,
        v: &CVector,
        n_sites: usize,
        out: &mut CVector,
        factor: C64,
    ) -> Result<()> {
        let mask = support_mask(&self.support, n_sites)?;
        let offsets = local_offsets(&self.support, n_sites);
        let k = offsets.len();
        let mut local = vec![C64::new(0.0, 0.0); k];
        for base in (0..v.len()).filter(|b| b & mask == 0) {
            for (l, &o) in offsets.iter().enumerate() {
                local[l] = v[base | o];
            }
            for (r, &or) in offsets.iter().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for (cc, x) in local.iter().enumerate() {
                    acc += self.matrix[(r, cc)] * x;
                }
                out[base | or] += factor * acc;
            }
        }
        Ok(())
    }
}

/// Embed `op` into an `n_total`-site register (identity elsewhere).
pub fn embed_local(op: &LocalOperator, n_total: usize) -> Result<CMatrix> {
    let sites: Vec<usize> = (0..n_total).collect();
    for &s in op.support() {
        if s >= n_total {
            return Err(Error::SiteOutOfRange {
                site: s,
                n_sites: n_total,
            });
        }
    }
    op.embed_into(&sites)
}

/// Symmetrize `(O + O†)/2` when the anti-Hermitian part is negligible.
pub fn hermitize(m: &CMatrix) -> Result<CMatrix> {
    let defect = hermiticity_defect(m);
    let scale = m.iter().map(|x| x.norm()).fold(1.0, f64::max);
    if defect > TOL_CONSTRUCT * scale {
        return Err(Error::NotHermitian { deviation: defect });
    }
    Ok((m + m.adjoint()) * c(0.5))
}

/// Max entry of `[a, b]`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs_diff(&(a * b), &(b * a))
}

pub(crate) fn support_mask(support: &[usize], n_sites: usize) -> Result<usize> {
    let mut mask = 0usize;
    for &s in support {
        if s >= n_sites {
            return Err(Error::SiteOutOfRange { site: s, n_sites });
        }
        mask |= 1 << (n_sites - 1 - s);
    }
    Ok(mask)
}

/// Full-register bit offsets of each local basis index.
pub(crate) fn local_offsets(support: &[usize], n_sites: usize) -> Vec<usize> {
    let k = support.len();
    (0..1usize << k)
        .map(|l| {
            support
                .iter()
                .enumerate()
                .filter(|(i, _)| (l >> (k - 1 - i)) & 1 == 1)
                .map(|(_, &s)| 1usize << (n_sites - 1 - s))
                .sum()
        })
        .collect()
}

/// Sum of local terms plus a constant, applied matrix-free.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSum {
    n_sites: usize,
    terms: Vec<LocalOperator>,
    constant: f64,
}

impl LocalSum {
    pub fn new(n_sites: usize) -> Self {
        Self {
            n_sites,
            terms: Vec::new(),
            constant: 0.0,
        }
    }

    pub fn from(op: LocalOperator, n_sites: usize) -> Self {
        let mut s = Self::new(n_sites);
        s.push(op).expect("support checked by caller");
        s
    }

    pub fn push(&mut self, op: LocalOperator) -> Result<()> {
        support_mask(op.support(), self.n_sites)?;
        self.terms.push(op);
        Ok(())
    }

    pub fn with(mut self, op: LocalOperator) -> Result<Self> {
        self.push(op)?;
        Ok(self)
    }

    pub fn add_constant(&mut self, value: f64) {
        self.constant += value;
    }

    pub fn extend(&mut self, other: &LocalSum) -> Result<()> {
        if other.n_sites != self.n_sites {
            return Err(Error::DimensionMismatch {
                expected: self.n_sites,
                found: other.n_sites,
            });
        }
        self.terms.extend(other.terms.iter().cloned());
        self.constant += other.constant;
        Ok(())
    }

    pub fn terms(&self) -> &[LocalOperator] {
        &self.terms
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Union of all term supports, sorted.
    pub fn support(&self) -> Vec<usize> {
        let mut s: Vec<usize> = self.terms.iter().flat_map(|t| t.support().to_vec()).collect();
        s.sort_unstable();
        s.dedup();
        s
    }

    /// Matrix on `sites` (which must contain every term's support), constant included.
    pub fn matrix_on(&self, sites: &[usize]) -> Result<CMatrix> {
        let d = 1usize << sites.len();
        let mut m = CMatrix::identity(d, d) * c(self.constant);
        for t in &self.terms {
            m += t.embed_into(sites)?;
        }
        Ok(m)
    }
}

impl Operator for LocalSum {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn apply(&self, v: &CVector) -> CVector {
        let mut out = v * c(self.constant);
        for t in &self.terms {
            t.accumulate(v, self.n_sites, &mut out, c(1.0))
                .expect("term supports validated on push");
        }
        out
    }

    fn to_dense(&self) -> CMatrix {
        let sites: Vec<usize> = (0..self.n_sites).collect();
        self.matrix_on(&sites).expect("term supports validated on push")
    }

    fn hermiticity_defect(&self) -> f64 {
        self.terms
            .iter()
            .map(|t| t.hermiticity_defect())
            .fold(0.0, f64::max)
    }
}

/// Explicit full-register matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    n_sites: usize,
    matrix: CMatrix,
}

impl DenseOperator {
    pub fn new(n_sites: usize, matrix: CMatrix) -> Result<Self> {
        let dim = 1usize << n_sites;
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self { n_sites, matrix })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }
}

impl Operator for DenseOperator {
    fn n_sites(&self) -> usize {
        self.n_sites
    }

    fn apply(&self, v: &CVector) -> CVector {
        &self.matrix * v
    }

    fn to_dense(&self) -> CMatrix {
        self.matrix.clone()
    }

    fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }
}
