//! Exact small-instance references: quantum and classical Neyman–Pearson tests
//! and exact tails of sums of independent finite-support variables.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::SymmetricCqChannel;
use crate::error::{Error, Result};
use crate::largedev::{Increment, NsPair};
use crate::qcore::{CMatrix, DensityOperator, HermitianMatrix};

/// Cap on merged atoms in exact convolutions.
pub const SUPPORT_CAP: usize = 10_000_000;
/// Cap on the Hilbert-space dimension of materialized tensor powers.
pub const DIMENSION_CAP: usize = 1024;
/// Relative/absolute quantum used to merge log-likelihood values.
pub const MERGE_QUANTUM: f64 = 1e-12;

/// A test `0 ≤ Q ≤ I`.
#[derive(Debug, Clone)]
pub struct TestOperator {
    q: HermitianMatrix,
}

impl TestOperator {
    /// Validates the spectrum lies in `[−1e−12, 1 + 1e−12]` and clamps it into `[0, 1]`.
    pub fn new(q: HermitianMatrix) -> Result<Self> {
        let e = q.eigh();
        if e.min() < -1e-12 || e.max() > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter {
                name: "Q".into(),
                value: if e.min() < -1e-12 { e.min() } else { e.max() },
                reason: "test spectrum must lie in [0, 1]",
            });
        }
        Ok(Self { q: e.reconstruct(|l| l.clamp(0.0, 1.0)) })
    }

    pub fn identity(dim: usize) -> Self {
        Self { q: HermitianMatrix::identity(dim) }
    }

    pub fn zero(dim: usize) -> Self {
        Self { q: HermitianMatrix::zeros(dim) }
    }

    pub fn matrix(&self) -> &HermitianMatrix {
        &self.q
    }

    pub fn dim(&self) -> usize {
        self.q.dim()
    }

    /// A random test `U diag(u) U†` with Haar-like `U` and `u ~ Uniform[0,1]`.
    pub fn random<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Self {
        let g = CMatrix::from_fn(dim, dim, |_, _| {
            let (a, b): (f64, f64) = (rng.random(), rng.random());
            let (c, d): (f64, f64) = (rng.random(), rng.random());
            // Box–Muller pairs for complex Gaussian entries
            let r = (-2.0 * (1.0 - a).ln()).sqrt();
            let s = (-2.0 * (1.0 - c).ln()).sqrt();
            Complex64::new(r * (std::f64::consts::TAU * b).cos(), s * (std::f64::consts::TAU * d).cos())
        });
        let u = g.qr().q();
        let diag: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
        let mut scaled = u.clone();
        for (j, &w) in diag.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        let m = scaled * u.adjoint();
        let m = (&m + m.adjoint()) * Complex64::new(0.5, 0.0);
        Self::new(HermitianMatrix::new(m).expect("symmetrized")).expect("spectrum in [0,1]")
    }
}

/// `(α, β) = (Tr[(I − Q)ρ], Tr[Qσ])`.
pub fn type_errors(q: &TestOperator, rho: &DensityOperator, sigma: &DensityOperator) -> Result<(f64, f64)> {
    let a = 1.0 - q.q.trace_product(rho.as_hermitian())?;
    let b = q.q.trace_product(sigma.as_hermitian())?;
    Ok((a.clamp(0.0, 1.0), b.clamp(0.0, 1.0)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpResult {
    pub alpha_hat: f64,
    /// Threshold `t` of the optimal test `{ρ − tσ > 0}` plus kernel randomization.
    pub t: f64,
    pub beta: f64,
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidParameter { name: "mu".into(), value: mu, reason: "must lie in (0, 1]" });
    }
    Ok(())
}

/// Spectral data of `ρ − tσ`: eigenvalues with the `ρ`- and `σ`-weight of each eigenvector.
struct Split {
    values: Vec<f64>,
    rho_w: Vec<f64>,
    sigma_w: Vec<f64>,
}

fn split(rho: &HermitianMatrix, sigma: &HermitianMatrix, t: f64) -> Result<Split> {
    let a = rho.sub(&sigma.scale(t))?;
    let e = a.eigh();
    let v = &e.vectors;
    let diag_weights = |m: &HermitianMatrix| -> Vec<f64> {
        let mv = m.matrix() * v;
        (0..v.ncols())
            .map(|j| v.column(j).iter().zip(mv.column(j).iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>().max(0.0))
            .collect()
    };
    Ok(Split { rho_w: diag_weights(rho), sigma_w: diag_weights(sigma), values: e.values })
}

fn zero_tol(t: f64) -> f64 {
    1e-12 * (1.0 + t)
}

fn beta_plus(s: &Split, t: f64) -> f64 {
    let tol = zero_tol(t);
    s.values.iter().zip(&s.sigma_w).filter(|(l, _)| **l > tol).map(|(_, w)| w).sum()
}

/// Minimum type-I error `min {α(Q;ρ) : β(Q;σ) ≤ μ}` via the quantum Neyman–Pearson family.
pub fn min_type1(rho: &DensityOperator, sigma: &DensityOperator, mu: f64) -> Result<NpResult> {
    check_mu(mu)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    if mu >= 1.0 {
        return Ok(NpResult { alpha_hat: 0.0, t: 0.0, beta: 1.0 });
    }
    let (r, s) = (rho.as_hermitian(), sigma.as_hermitian());
    let s0 = split(r, s, 0.0)?;
    if beta_plus(&s0, 0.0) <= mu {
        // the support projector of ρ is feasible
        let b = beta_plus(&s0, 0.0);
        return Ok(NpResult { alpha_hat: 0.0, t: 0.0, beta: b });
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut hi_split = split(r, s, hi)?;
    while beta_plus(&hi_split, hi) > mu {
        lo = hi;
        hi *= 2.0;
        if hi > 1e300 {
            return Err(Error::NonConvergence { what: "Neyman-Pearson threshold bracket", iterations: 1000, best: lo, residual: mu });
        }
        hi_split = split(r, s, hi)?;
    }
    for _ in 0..300 {
        if hi - lo <= 1e-15 * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let sp = split(r, s, mid)?;
        if beta_plus(&sp, mid) > mu {
            lo = mid;
        } else {
            hi = mid;
            hi_split = sp;
        }
    }
    let tol = zero_tol(hi);
    let (mut a_plus, mut b_plus, mut a_zero, mut b_zero) = (0.0, 0.0, 0.0, 0.0);
    for ((l, rw), sw) in hi_split.values.iter().zip(&hi_split.rho_w).zip(&hi_split.sigma_w) {
        if *l > tol {
            a_plus += rw;
            b_plus += sw;
        } else if l.abs() <= tol {
            a_zero += rw;
            b_zero += sw;
        }
    }
    let c = if b_zero > 0.0 { ((mu - b_plus) / b_zero).clamp(0.0, 1.0) } else { 0.0 };
    let alpha_hat = (1.0 - a_plus - c * a_zero).clamp(0.0, 1.0);
    Ok(NpResult { alpha_hat, t: hi, beta: b_plus + c * b_zero })
}

/// [`min_type1`] on `W_{x_1} ⊗ … ⊗ W_{x_n}` against `σ^{⊗n}`.
pub fn min_type1_product(ch: &SymmetricCqChannel, xs: &[usize], sigma: &DensityOperator, mu: f64) -> Result<NpResult> {
    let (rho, sig) = product_states(ch, xs, sigma)?;
    min_type1(&rho, &sig, mu)
}

/// `(W_{x_1} ⊗ … ⊗ W_{x_n}, σ^{⊗n})`, refusing dimensions above [`DIMENSION_CAP`].
pub fn product_states(ch: &SymmetricCqChannel, xs: &[usize], sigma: &DensityOperator) -> Result<(DensityOperator, DensityOperator)> {
    if xs.is_empty() {
        return Err(Error::EmptySequence);
    }
    let dim = (ch.dim() as f64).powi(xs.len() as i32);
    if dim > DIMENSION_CAP as f64 {
        return Err(Error::DimensionCap { dim: dim as usize, cap: DIMENSION_CAP });
    }
    if sigma.dim() != ch.dim() {
        return Err(Error::DimensionMismatch { left: sigma.dim(), right: ch.dim() });
    }
    let rho = ch.product_output(xs)?;
    let mut sig = sigma.clone();
    for _ in 1..xs.len() {
        sig = sig.kron(sigma);
    }
    Ok((rho, sig))
}

/// Distribution of a sum of independent log-likelihood ratios `L = Σ log q/p`,
/// tracking `p`-mass and `q`-mass per value. Mass where some `q` vanishes sits at `L = −∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrDistribution {
    /// `(L, p-mass, q-mass)` sorted by `L`.
    pub atoms: Vec<(f64, f64, f64)>,
    /// `p`-mass at `L = −∞`.
    pub neg_inf_p: f64,
}

impl LlrDistribution {
    /// Point mass at zero (the empty sum).
    pub fn unit() -> Self {
        Self { atoms: vec![(0.0, 1.0, 1.0)], neg_inf_p: 0.0 }
    }

    pub fn from_ns(ns: &NsPair) -> Self {
        let mut d = Self { atoms: vec![], neg_inf_p: 0.0 };
        for k in 0..ns.len() {
            match ns.llr[k] {
                Some(l) => d.atoms.push((l, ns.p[k], ns.q[k])),
                None => d.neg_inf_p += ns.p[k],
            }
        }
        d.normalize_order();
        d
    }

    fn normalize_order(&mut self) {
        self.atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64, f64)> = Vec::with_capacity(self.atoms.len());
        for &(l, p, q) in &self.atoms {
            if let Some(last) = merged.last_mut() {
                if (l - last.0).abs() <= MERGE_QUANTUM * l.abs().max(1.0) {
                    last.1 += p;
                    last.2 += q;
                    continue;
                }
            }
            merged.push((l, p, q));
        }
        self.atoms = merged;
    }

    /// Distribution of the sum of two independent variables.
    pub fn convolve(&self, other: &Self) -> Result<Self> {
        let size = self.atoms.len() * other.atoms.len();
        if size > SUPPORT_CAP {
            return Err(Error::SupportBlowup { size, cap: SUPPORT_CAP });
        }
        let mut atoms = Vec::with_capacity(size);
        for &(l1, p1, q1) in &self.atoms {
            for &(l2, p2, q2) in &other.atoms {
                atoms.push((l1 + l2, p1 * p2, q1 * q2));
            }
        }
        let p_total = |d: &Self| d.atoms.iter().map(|a| a.1).sum::<f64>();
        let neg_inf_p = self.neg_inf_p * (p_total(other) + other.neg_inf_p) + p_total(self) * other.neg_inf_p;
        let mut out = Self { atoms, neg_inf_p };
        out.normalize_order();
        if out.atoms.len() > SUPPORT_CAP {
            return Err(Error::SupportBlowup { size: out.atoms.len(), cap: SUPPORT_CAP });
        }
        Ok(out)
    }

    /// Sum over a sequence of letters.
    pub fn of_sequence(letters: &[&NsPair]) -> Result<Self> {
        let mut acc = Self::unit();
        for ns in letters {
            acc = acc.convolve(&Self::from_ns(ns))?;
        }
        Ok(acc)
    }

    /// Sum over groups of identical letters, by repeated squaring.
    pub fn of_groups(groups: &[(&NsPair, usize)]) -> Result<Self> {
        let mut acc = Self::unit();
        for (ns, m) in groups {
            acc = acc.convolve(&Self::from_ns(ns).power(*m)?)?;
        }
        Ok(acc)
    }

    pub fn power(&self, mut m: usize) -> Result<Self> {
        let mut base = self.clone();
        let mut acc = Self::unit();
        while m > 0 {
            if m & 1 == 1 {
                acc = acc.convolve(&base)?;
            }
            m >>= 1;
            if m > 0 {
                base = base.convolve(&base)?;
            }
        }
        Ok(acc)
    }

    /// `(p-mass, q-mass)` of `{L ≥ c}` with values within the merge quantum of `c` counted in.
    pub fn upper_masses(&self, c: f64) -> (f64, f64) {
        let slack = MERGE_QUANTUM * c.abs().max(1.0);
        self.atoms.iter().filter(|a| a.0 >= c - slack).fold((0.0, 0.0), |acc, a| (acc.0 + a.1, acc.1 + a.2))
    }

    /// `Σ min(p, δq)` over all outcomes, the optimal classical `α + δβ`.
    pub fn min_mixture(&self, delta: f64) -> f64 {
        self.atoms.iter().map(|&(_, p, q)| p.min(delta * q)).sum()
    }

    /// Exact randomized Neyman–Pearson minimum type-I error at type-II level `μ`.
    pub fn np_min_type1(&self, mu: f64) -> Result<f64> {
        check_mu(mu)?;
        let mut budget = mu;
        // the −∞ atoms carry no q-mass and are accepted for free
        let mut accepted = self.neg_inf_p;
        for &(_, p, q) in &self.atoms {
            if q <= budget {
                budget -= q;
                accepted += p;
            } else {
                accepted += p * budget / q;
                break;
            }
        }
        Ok((1.0 - accepted).clamp(0.0, 1.0))
    }
}

/// Exact randomized Neyman–Pearson minimum type-I error for `pⁿ` vs `qⁿ` built
/// from one NS pair per letter.
pub fn classical_np_product(letters: &[&NsPair], mu: f64) -> Result<f64> {
    check_mu(mu)?;
    LlrDistribution::of_sequence(letters)?.np_min_type1(mu)
}

/// Distribution of a sum of independent real variables, merged at [`MERGE_QUANTUM`].
fn convolve_values(a: &[(f64, f64)], b: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    let size = a.len() * b.len();
    if size > SUPPORT_CAP {
        return Err(Error::SupportBlowup { size, cap: SUPPORT_CAP });
    }
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(size);
    for &(x, p) in a {
        for &(y, q) in b {
            out.push((x + y, p * q));
        }
    }
    out.sort_by(|u, v| u.0.total_cmp(&v.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(out.len());
    for (v, p) in out {
        if let Some(last) = merged.last_mut() {
            if (v - last.0).abs() <= MERGE_QUANTUM * v.abs().max(1.0) {
                last.1 += p;
                continue;
            }
        }
        merged.push((v, p));
    }
    Ok(merged)
}

/// Exact `Pr[(1/n) Σ Zᵢ ≥ z]` for independent increments given as
/// `(distribution, multiplicity)` groups. Atoms at `−∞` never reach the threshold.
pub fn exact_tail(groups: &[(&Increment, usize)], z: f64) -> Result<f64> {
    let n: usize = groups.iter().map(|g| g.1).sum();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let mut acc = vec![(0.0, 1.0)];
    for (inc, m) in groups {
        let atoms: Vec<(f64, f64)> = inc
            .values
            .iter()
            .zip(&inc.probs)
            .filter(|(v, p)| v.is_finite() && **p > 0.0)
            .map(|(v, p)| (*v, *p))
            .collect();
        let mut base = atoms;
        let mut k = *m;
        while k > 0 {
            if k & 1 == 1 {
                acc = convolve_values(&acc, &base)?;
            }
            k >>= 1;
            if k > 0 {
                base = convolve_values(&base, &base)?;
            }
        }
    }
    let c = n as f64 * z;
    let slack = MERGE_QUANTUM * c.abs().max(1.0) * n as f64;
    Ok(acc.iter().filter(|a| a.0 >= c - slack).map(|a| a.1).sum::<f64>().min(1.0))
}
