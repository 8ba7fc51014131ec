//! Symmetric classical-quantum channels `W_x = V^{x-1} W_1 (V†)^{x-1}`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::qcore::{self, CMatrix, CyclicUnitary, DensityOperator, HermitianMatrix};

/// Tolerance on `Σ P(x) = 1`.
pub const PROBABILITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct SymmetricCqChannel {
    w1: DensityOperator,
    v: CyclicUnitary,
    outputs: Vec<DensityOperator>,
    label: String,
}

impl SymmetricCqChannel {
    /// Builds the channel and caches every output state.
    pub fn new(w1: DensityOperator, v: CyclicUnitary) -> Result<Self> {
        if w1.dim() != v.dim() {
            return Err(Error::DimensionMismatch { left: w1.dim(), right: v.dim() });
        }
        let k = v.order();
        let mut outputs = Vec::with_capacity(k);
        let mut current = w1.clone();
        for _ in 0..k {
            outputs.push(current.clone());
            current = current.conjugate_by(v.matrix())?;
        }
        // W_{K+1} must come back to W_1
        let wrap = current.as_hermitian().sub(w1.as_hermitian())?.frobenius_norm();
        if wrap > 1e-10 {
            return Err(Error::CheckFailed(format!("cyclicity check failed: |W_(K+1) - W_1| = {wrap:e}")));
        }
        Ok(Self { w1, v, outputs, label: "custom".into() })
    }

    /// Validates raw matrices and builds the channel.
    pub fn from_matrices(w1: &CMatrix, v: &CMatrix, k: usize) -> Result<Self> {
        let (w1, v) = qcore::validate(w1, v, k)?;
        Self::new(w1, v)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn alphabet_size(&self) -> usize {
        self.outputs.len()
    }

    pub fn dim(&self) -> usize {
        self.w1.dim()
    }

    pub fn generator(&self) -> &DensityOperator {
        &self.w1
    }

    pub fn unitary(&self) -> &CyclicUnitary {
        &self.v
    }

    /// `W_x` for a 1-based symbol `x`.
    pub fn output(&self, x: usize) -> Result<&DensityOperator> {
        if x == 0 || x > self.alphabet_size() {
            return Err(Error::SymbolOutOfRange { symbol: x, alphabet: self.alphabet_size() });
        }
        Ok(&self.outputs[x - 1])
    }

    /// All outputs in symbol order.
    pub fn outputs(&self) -> &[DensityOperator] {
        &self.outputs
    }

    /// `Σ_x P(x) W_x^a`.
    pub fn mixture_power(&self, p: &ProbabilityVector, a: f64) -> Result<HermitianMatrix> {
        self.check_distribution(p)?;
        let mut acc = HermitianMatrix::zeros(self.dim());
        for (w, &px) in self.outputs.iter().zip(p.weights()) {
            if px > 0.0 {
                acc = acc.add(&w.power(a).scale(px))?;
            }
        }
        Ok(acc)
    }

    pub fn check_distribution(&self, p: &ProbabilityVector) -> Result<()> {
        if p.len() != self.alphabet_size() {
            return Err(Error::InvalidDistribution(format!(
                "length {} does not match alphabet size {}",
                p.len(),
                self.alphabet_size()
            )));
        }
        Ok(())
    }

    pub fn uniform(&self) -> ProbabilityVector {
        ProbabilityVector::uniform(self.alphabet_size())
    }

    /// `σ ↦ V σ V†`.
    pub fn rotate(&self, sigma: &HermitianMatrix) -> HermitianMatrix {
        sigma.conjugate_by(self.v.matrix())
    }

    /// `W_{x_1} ⊗ … ⊗ W_{x_n}` for 1-based symbols.
    pub fn product_output(&self, xs: &[usize]) -> Result<DensityOperator> {
        let (first, rest) = xs.split_first().ok_or(Error::EmptySequence)?;
        let mut acc = self.output(*first)?.clone();
        for &x in rest {
            acc = acc.kron(self.output(x)?);
        }
        Ok(acc)
    }
}

fn param(params: &BTreeMap<String, f64>, names: &[&str], default: Option<f64>) -> Result<f64> {
    let v = names
        .iter()
        .find_map(|n| params.get(*n).copied())
        .or(default)
        .ok_or_else(|| Error::InvalidParameter {
            name: names[0].to_string(),
            value: f64::NAN,
            reason: "missing required parameter",
        })?;
    if !(0.0..=1.0).contains(&v) {
        return Err(Error::InvalidParameter {
            name: names[0].to_string(),
            value: v,
            reason: "must lie in [0, 1]",
        });
    }
    Ok(v)
}

fn pauli_x() -> CMatrix {
    qcore::cmatrix_from_real(&[&[0.0, 1.0], &[1.0, 0.0]])
}

fn hadamard() -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    qcore::cmatrix_from_real(&[&[s, s], &[s, -s]])
}

/// Named channel presets: `bsc` (`p`), `bec` (`e`), `pure-hadamard`, and
/// `mixed-hadamard` (`eps`).
pub fn preset(name: &str, params: &BTreeMap<String, f64>) -> Result<SymmetricCqChannel> {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let ch = match name {
        "bsc" => {
            let p = param(params, &["p"], None)?;
            let w1 = HermitianMatrix::from_real_diagonal(&[1.0 - p, p]).into_matrix();
            SymmetricCqChannel::from_matrices(&w1, &pauli_x(), 2)?.with_label(format!("bsc(p={p})"))
        }
        "bec" => {
            let e = param(params, &["e", "eps", "epsilon"], None)?;
            let w1 = HermitianMatrix::from_real_diagonal(&[1.0 - e, e, 0.0]).into_matrix();
            let swap = qcore::cmatrix_from_real(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.0]]);
            SymmetricCqChannel::from_matrices(&w1, &swap, 2)?.with_label(format!("bec(e={e})"))
        }
        "pure-hadamard" => {
            let w1 = HermitianMatrix::projector(&[one, zero]).into_matrix();
            SymmetricCqChannel::from_matrices(&w1, &hadamard(), 2)?.with_label("pure-hadamard")
        }
        "mixed-hadamard" => {
            let eps = param(params, &["eps", "epsilon", "e"], None)?;
            let w1 = HermitianMatrix::from_real_diagonal(&[1.0 - eps / 2.0, eps / 2.0]).into_matrix();
            SymmetricCqChannel::from_matrices(&w1, &hadamard(), 2)?
                .with_label(format!("mixed-hadamard(eps={eps})"))
        }
        other => return Err(Error::UnknownPreset(other.to_string())),
    };
    Ok(ch)
}

/// Shorthand for [`preset`] with a single named parameter.
pub fn preset_with(name: &str, key: &str, value: f64) -> Result<SymmetricCqChannel> {
    let mut params = BTreeMap::new();
    params.insert(key.to_string(), value);
    preset(name, &params)
}

/// A probability distribution over the input alphabet (1-based symbols).
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector {
    weights: Vec<f64>,
}

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidDistribution("empty weight vector".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidDistribution(format!("weight {w} is not a finite nonnegative number")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > PROBABILITY_TOL {
            return Err(Error::InvalidDistribution(format!("weights sum to {total}")));
        }
        Ok(Self { weights })
    }

    /// Normalizes nonnegative weights.
    pub fn from_unnormalized(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::InvalidDistribution("weights have no mass".into()));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(k: usize) -> Self {
        Self { weights: vec![1.0 / k as f64; k] }
    }

    /// Point mass at the 1-based symbol `x`.
    pub fn point_mass(k: usize, x: usize) -> Result<Self> {
        if x == 0 || x > k {
            return Err(Error::SymbolOutOfRange { symbol: x, alphabet: k });
        }
        let mut weights = vec![0.0; k];
        weights[x - 1] = 1.0;
        Ok(Self { weights })
    }

    /// Uniform sample from the simplex.
    pub fn sample<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Self {
        let raw: Vec<f64> = (0..k).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let total: f64 = raw.iter().sum();
        let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
        // push the rounding residue onto the largest weight
        let resid = 1.0 - weights.iter().sum::<f64>();
        let imax = (0..k).max_by(|&a, &b| weights[a].total_cmp(&weights[b])).unwrap_or(0);
        weights[imax] += resid;
        Self { weights }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Weight of the 1-based symbol `x`.
    pub fn weight(&self, x: usize) -> f64 {
        self.weights[x - 1]
    }

    /// `(symbol, weight)` pairs with positive weight.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().enumerate().filter(|(_, &w)| w > 0.0).map(|(i, &w)| (i + 1, w))
    }
}

/// Type (empirical distribution) of a 1-based input sequence.
pub fn empirical_distribution(xs: &[usize], k: usize) -> Result<ProbabilityVector> {
    if xs.is_empty() {
        return Err(Error::EmptySequence);
    }
    let mut counts = vec![0usize; k];
    for &x in xs {
        if x == 0 || x > k {
            return Err(Error::SymbolOutOfRange { symbol: x, alphabet: k });
        }
        counts[x - 1] += 1;
    }
    let n = xs.len() as f64;
    Ok(ProbabilityVector { weights: counts.iter().map(|&c| c as f64 / n).collect() })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(ch: &SymmetricCqChannel, x: usize) -> Vec<f64> {
        let w = ch.output(x).unwrap();
        (0..w.dim()).map(|i| w.matrix()[(i, i)].re).collect()
    }

    fn all_presets() -> Vec<SymmetricCqChannel> {
        vec![
            preset_with("bsc", "p", 0.1).unwrap(),
            preset_with("bec", "e", 0.3).unwrap(),
            preset("pure-hadamard", &BTreeMap::new()).unwrap(),
            preset_with("mixed-hadamard", "eps", 0.1).unwrap(),
        ]
    }

    #[test]
    fn bsc_outputs() {
        let ch = preset_with("bsc", "p", 0.1).unwrap();
        assert_eq!(diag(&ch, 1), vec![0.9, 0.1]);
        assert_eq!(diag(&ch, 2), vec![0.1, 0.9]);
        assert!(matches!(ch.output(3), Err(Error::SymbolOutOfRange { .. })));
        assert!(matches!(ch.output(0), Err(Error::SymbolOutOfRange { .. })));
    }

    #[test]
    fn bec_outputs() {
        let ch = preset_with("bec", "e", 0.3).unwrap();
        let w2 = diag(&ch, 2);
        assert!((w2[0] - 0.0).abs() < 1e-15 && (w2[1] - 0.3).abs() < 1e-15 && (w2[2] - 0.7).abs() < 1e-15);
    }

    #[test]
    fn hadamard_conjugation() {
        let ch = preset("pure-hadamard", &BTreeMap::new()).unwrap();
        let w2 = ch.output(2).unwrap().matrix();
        for i in 0..2 {
            for j in 0..2 {
                assert!((w2[(i, j)] - Complex64::new(0.5, 0.0)).norm() < 1e-15);
            }
        }
        let w1 = ch.output(1).unwrap();
        assert_eq!(w1.matrix(), ch.generator().matrix());
    }

    #[test]
    fn preset_errors() {
        assert!(matches!(preset_with("bsc", "p", 1.5), Err(Error::InvalidParameter { .. })));
        assert!(matches!(preset("bsc", &BTreeMap::new()), Err(Error::InvalidParameter { .. })));
        assert!(matches!(preset_with("awgn", "p", 0.1), Err(Error::UnknownPreset(_))));
    }

    #[test]
    fn presets_produce_valid_states() {
        for ch in all_presets() {
            for x in 1..=ch.alphabet_size() {
                let w = ch.output(x).unwrap();
                assert!(DensityOperator::new(w.as_hermitian().clone()).is_ok());
            }
        }
    }

    #[test]
    fn uniform_average_commutes_with_v() {
        for ch in all_presets() {
            let avg = ch.mixture_power(&ch.uniform(), 1.0).unwrap();
            let v = ch.unitary().matrix();
            let comm = v * avg.matrix() - avg.matrix() * v;
            let norm = comm.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(norm <= 1e-10, "{}: {norm}", ch.label());
        }
    }

    #[test]
    fn empirical_examples() {
        let p = empirical_distribution(&[1, 1, 2, 1], 2).unwrap();
        assert_eq!(p.weights(), &[0.75, 0.25]);
        let p = empirical_distribution(&[2, 2, 2], 2).unwrap();
        assert_eq!(p.weights(), &[0.0, 1.0]);
        assert!(matches!(empirical_distribution(&[], 2), Err(Error::EmptySequence)));
        assert!(matches!(empirical_distribution(&[1, 3], 2), Err(Error::SymbolOutOfRange { .. })));
    }

    #[test]
    fn probability_vector_validation() {
        assert!(ProbabilityVector::new(vec![0.5, 0.6]).is_err());
        assert!(ProbabilityVector::new(vec![-0.1, 1.1]).is_err());
        assert!(ProbabilityVector::new(vec![0.25, 0.75]).is_ok());
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        use rand::SeedableRng;
        for _ in 0..100 {
            let p = ProbabilityVector::sample(5, &mut rng);
            assert!(ProbabilityVector::new(p.weights().to_vec()).is_ok());
        }
    }
}
