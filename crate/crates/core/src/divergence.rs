//! Petz Rényi divergences, mutual information, capacity and `R_inf`.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{ProbabilityVector, SymmetricCqChannel};
use crate::error::{Error, Result};
use crate::qcore::{eigh, power_scalar, DensityOperator, Eigh, HermitianMatrix, SUPPORT_CUTOFF};
use crate::value::ExtendedReal;

/// A divergence value: nonnegative real or `+inf`.
pub type DivergenceValue = ExtendedReal;

/// Leakage of `supp ρ` into `ker σ` above which `D(ρ‖σ)` is declared infinite.
const SUPPORT_LEAK_TOL: f64 = 1e-10;

/// Iteration cap for the `R_inf` solver.
pub const R_INF_MAX_ITER: usize = 10_000;
/// Residual target `λ_max(G) − 1` for the `R_inf` solver.
pub const R_INF_RESIDUAL: f64 = 1e-9;

/// `|⟨eᵢ|fⱼ⟩|²` for the eigenbases of two operators.
pub fn overlap_table(a: &Eigh, b: &Eigh) -> DMatrix<f64> {
    let m = a.vectors.adjoint() * &b.vectors;
    m.map(|z| z.norm_sqr())
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter {
            name: "alpha".into(),
            value: alpha,
            reason: "must lie in (0, 1]",
        });
    }
    Ok(())
}

fn clamp_nonneg(v: f64) -> f64 {
    if v < 0.0 {
        0.0
    } else {
        v
    }
}

/// `Tr[ρ^α σ^{1−α}]` evaluated in the joint eigensystem.
pub fn renyi_trace(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    let (er, es) = (rho.eigen(), sigma.eigen());
    let ov = overlap_table(er, es);
    let mut acc = 0.0;
    for (i, &l) in er.values.iter().enumerate() {
        let la = power_scalar(l, alpha);
        if la == 0.0 {
            continue;
        }
        for (j, &m) in es.values.iter().enumerate() {
            acc += la * power_scalar(m, 1.0 - alpha) * ov[(i, j)];
        }
    }
    Ok(acc)
}

/// Petz Rényi divergence `D_α(ρ‖σ)` for `α ∈ (0, 1]`; `α = 1` is the relative entropy.
pub fn petz_renyi(rho: &DensityOperator, sigma: &DensityOperator, alpha: f64) -> Result<DivergenceValue> {
    check_alpha(alpha)?;
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    if alpha < 1.0 {
        let tr = renyi_trace(rho, sigma, alpha)?;
        if tr <= SUPPORT_CUTOFF {
            return Ok(ExtendedReal::Infinite);
        }
        return Ok(ExtendedReal::Finite(clamp_nonneg(tr.ln() / (alpha - 1.0))));
    }
    relative_entropy(rho, sigma)
}

/// `Tr[ρ(log ρ − log σ)]`, infinite unless `supp ρ ⊆ supp σ`.
pub fn relative_entropy(rho: &DensityOperator, sigma: &DensityOperator) -> Result<DivergenceValue> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    let (er, es) = (rho.eigen(), sigma.eigen());
    let ov = overlap_table(er, es);
    let mut acc = 0.0;
    for (i, &l) in er.values.iter().enumerate() {
        if l <= SUPPORT_CUTOFF {
            continue;
        }
        acc += l * l.ln();
        let mut leak = 0.0;
        for (j, &m) in es.values.iter().enumerate() {
            if m > SUPPORT_CUTOFF {
                acc -= l * ov[(i, j)] * m.ln();
            } else {
                leak += ov[(i, j)];
            }
        }
        if leak > SUPPORT_LEAK_TOL {
            return Ok(ExtendedReal::Infinite);
        }
    }
    Ok(ExtendedReal::Finite(clamp_nonneg(acc)))
}

/// `Σ_x P(x) D_α(W_x‖σ)`.
pub fn conditional_renyi(
    ch: &SymmetricCqChannel,
    sigma: &DensityOperator,
    p: &ProbabilityVector,
    alpha: f64,
) -> Result<DivergenceValue> {
    ch.check_distribution(p)?;
    check_alpha(alpha)?;
    let mut acc = 0.0;
    for (x, px) in p.support() {
        match petz_renyi(ch.output(x)?, sigma, alpha)? {
            ExtendedReal::Finite(d) => acc += px * d,
            ExtendedReal::Infinite => return Ok(ExtendedReal::Infinite),
        }
    }
    Ok(ExtendedReal::Finite(acc))
}

/// Output average `Σ_x P(x) W_x` as a state.
pub fn average_output(ch: &SymmetricCqChannel, p: &ProbabilityVector) -> Result<DensityOperator> {
    DensityOperator::normalized(ch.mixture_power(p, 1.0)?)
}

/// `I(P, W) = D(W‖PW | P)`.
pub fn mutual_information(ch: &SymmetricCqChannel, p: &ProbabilityVector) -> Result<f64> {
    let avg = average_output(ch, p)?;
    let v = conditional_renyi(ch, &avg, p, 1.0)?;
    // supp W_x ⊆ supp PW for every x with P(x) > 0
    Ok(v.expect_finite("mutual information"))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Capacity {
    /// Mutual information at the uniform input.
    pub mutual_information_uniform: f64,
    /// Channel capacity; equal to the uniform value for symmetric channels.
    pub capacity: f64,
    /// Largest mutual information found among the random sample of inputs.
    pub sampled_max: f64,
}

/// Number of random inputs checked against the uniform one.
pub const CAPACITY_SAMPLES: usize = 50;

/// Capacity of a symmetric channel, certified against random input distributions.
pub fn mutual_information_and_capacity(ch: &SymmetricCqChannel) -> Result<Capacity> {
    let iu = mutual_information(ch, &ch.uniform())?;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_ca9a);
    let mut sampled_max = f64::NEG_INFINITY;
    for _ in 0..CAPACITY_SAMPLES {
        let p = ProbabilityVector::sample(ch.alphabet_size(), &mut rng);
        let ip = mutual_information(ch, &p)?;
        sampled_max = sampled_max.max(ip);
        if ip > iu + 1e-9 {
            return Err(Error::CheckFailed(format!(
                "I(P,W) = {ip} exceeds the uniform value {iu} for P = {:?}",
                p.weights()
            )));
        }
    }
    Ok(Capacity { mutual_information_uniform: iu, capacity: iu, sampled_max })
}

/// Outcome of the `R_inf` minimization.
#[derive(Debug, Clone)]
pub struct RInfinity {
    pub value: f64,
    pub sigma: DensityOperator,
    pub residual: f64,
    pub iterations: usize,
}

/// `R_inf = min_σ −(1/K) Σ_x log Tr[W_x⁰ σ]`.
pub fn r_infinity(ch: &SymmetricCqChannel) -> Result<f64> {
    Ok(r_infinity_solve(ch)?.value)
}

/// Solves for `R_inf` and returns the minimizing state with its optimality residual.
///
/// The residual is `λ_max(G) − 1` with `G = (1/K) Σ_x Π_x / Tr[Π_x σ]`; it
/// vanishes exactly at the minimizer.
pub fn r_infinity_solve(ch: &SymmetricCqChannel) -> Result<RInfinity> {
    let d = ch.dim();
    if ch.outputs().iter().all(DensityOperator::is_full_rank) {
        return Ok(RInfinity { value: 0.0, sigma: DensityOperator::maximally_mixed(d), residual: 0.0, iterations: 0 });
    }
    let projectors: Vec<HermitianMatrix> = ch.outputs().iter().map(DensityOperator::support_projector).collect();
    match common_eigenbasis(&projectors) {
        Some((basis, diags)) => solve_commuting(&basis, &diags),
        None => solve_general(&projectors),
    }
}

/// If all projectors commute, returns a shared eigenbasis and their diagonals in it.
fn common_eigenbasis(projectors: &[HermitianMatrix]) -> Option<(Eigh, Vec<Vec<f64>>)> {
    let d = projectors[0].dim();
    // generic positive weights make the spectrum of the sum nondegenerate
    // unless the projectors share structure
    let mut acc = HermitianMatrix::zeros(d);
    for (k, p) in projectors.iter().enumerate() {
        let w = 1.0 + (k as f64 + 1.0).sqrt() * 0.618_033_988_749_894_9;
        acc = acc.add(&p.scale(w)).ok()?;
    }
    let basis = eigh(&acc);
    let u = &basis.vectors;
    let mut diags = Vec::with_capacity(projectors.len());
    for p in projectors {
        let m = u.adjoint() * p.matrix() * u;
        let mut off = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                if i != j {
                    off = off.max(m[(i, j)].norm());
                }
            }
        }
        if off > 1e-10 {
            return None;
        }
        diags.push((0..d).map(|i| m[(i, i)].re.clamp(0.0, 1.0)).collect());
    }
    Some((basis, diags))
}

fn solve_commuting(basis: &Eigh, diags: &[Vec<f64>]) -> Result<RInfinity> {
    let d = basis.dim();
    let k = diags.len() as f64;
    let mut q = vec![1.0 / d as f64; d];
    let masses = |q: &[f64]| -> Vec<f64> {
        diags.iter().map(|pi| pi.iter().zip(q).map(|(a, b)| a * b).sum()).collect()
    };
    let mut residual = f64::INFINITY;
    for it in 0..=R_INF_MAX_ITER {
        let c = masses(&q);
        let g: Vec<f64> = (0..d).map(|i| diags.iter().zip(&c).map(|(pi, ci)| pi[i] / ci).sum::<f64>() / k).collect();
        residual = g.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - 1.0;
        if residual <= R_INF_RESIDUAL {
            let value = clamp_nonneg(-c.iter().map(|x| x.ln()).sum::<f64>() / k);
            let sigma = DensityOperator::normalized(basis.reconstruct_with(&q))?;
            return Ok(RInfinity { value, sigma, residual: residual.max(0.0), iterations: it });
        }
        for i in 0..d {
            q[i] *= g[i];
        }
        let s: f64 = q.iter().sum();
        q.iter_mut().for_each(|x| *x /= s);
    }
    let c = masses(&q);
    Err(Error::NonConvergence {
        what: "R_inf solver",
        iterations: R_INF_MAX_ITER,
        best: -c.iter().map(|x| x.ln()).sum::<f64>() / k,
        residual,
    })
}

fn objective(projectors: &[HermitianMatrix], sigma: &HermitianMatrix) -> Result<(f64, Vec<f64>)> {
    let c: Vec<f64> = projectors.iter().map(|p| p.trace_product(sigma)).collect::<Result<_>>()?;
    let k = projectors.len() as f64;
    let f = -c.iter().map(|x| x.max(f64::MIN_POSITIVE).ln()).sum::<f64>() / k;
    Ok((f, c))
}

fn solve_general(projectors: &[HermitianMatrix]) -> Result<RInfinity> {
    let d = projectors[0].dim();
    let k = projectors.len() as f64;
    let id = HermitianMatrix::identity(d);
    let mut sigma = id.scale(1.0 / d as f64);
    let (mut f, mut c) = objective(projectors, &sigma)?;
    let mut residual = f64::INFINITY;
    for it in 0..=R_INF_MAX_ITER {
        let mut g = HermitianMatrix::zeros(d);
        for (p, ci) in projectors.iter().zip(&c) {
            g = g.add(&p.scale(1.0 / (ci * k)))?;
        }
        residual = g.eigh().max() - 1.0;
        if residual <= R_INF_RESIDUAL {
            let sigma = DensityOperator::normalized(sigma)?;
            return Ok(RInfinity { value: clamp_nonneg(f), sigma, residual: residual.max(0.0), iterations: it });
        }
        // RρR step, diluted toward the identity until the objective decreases
        let mut eps = f64::INFINITY;
        let mut accepted = false;
        for _ in 0..60 {
            let r = if eps.is_infinite() { g.clone() } else { id.add(&g.scale(eps))? };
            let cand = sigma.conjugate_by(r.matrix());
            let cand = cand.scale(1.0 / cand.trace());
            let (fc, cc) = objective(projectors, &cand)?;
            if fc < f {
                sigma = cand;
                f = fc;
                c = cc;
                accepted = true;
                break;
            }
            eps = if eps.is_infinite() { 1.0 } else { eps * 0.5 };
        }
        if !accepted {
            break;
        }
    }
    Err(Error::NonConvergence { what: "R_inf solver", iterations: R_INF_MAX_ITER, best: f, residual })
}
