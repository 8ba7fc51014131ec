//! Nussbaum–Szkoła reduction, cumulant generating functions of log-likelihood
//! increments, Legendre transforms, and the Bahadur–Ranga Rao lower bound.

use crate::channel::ProbabilityVector;
use crate::divergence::{overlap_table, petz_renyi};
use crate::error::{Error, Result};
use crate::qcore::{DensityOperator, SUPPORT_CUTOFF};
use crate::search::{golden_section_max, golden_section_min};
use crate::value::ExtendedReal;

/// Overlaps `|⟨eᵢ|fⱼ⟩|²` below this are treated as structural zeros.
const OVERLAP_FLOOR: f64 = 1e-18;

/// `15 √(2π)`, the constant in the Berry–Esseen-type remainder.
pub fn k_constant() -> f64 {
    15.0 * (2.0 * std::f64::consts::PI).sqrt()
}

/// Nussbaum–Szkoła distributions of a pair of states, restricted to `supp p`.
///
/// Index pairs are 1-based, with both eigenbases ordered by decreasing
/// eigenvalue. `llr[k] = log q/p` is `None` where `q` vanishes.
#[derive(Debug, Clone, PartialEq)]
pub struct NsPair {
    pub support: Vec<(usize, usize)>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub llr: Vec<Option<f64>>,
}

/// Builds the NS pair of `(ρ, σ)` and checks that it reproduces `D_α(ρ‖σ)`.
pub fn nussbaum_szkola(rho: &DensityOperator, sigma: &DensityOperator) -> Result<NsPair> {
    let ns = nussbaum_szkola_unchecked(rho, sigma)?;
    for &alpha in &[0.3, 0.5, 0.7, 1.0] {
        let quantum = petz_renyi(rho, sigma, alpha)?;
        let classical = ns.renyi(alpha);
        let ok = match (quantum, classical) {
            (ExtendedReal::Finite(a), ExtendedReal::Finite(b)) => (a - b).abs() <= 1e-10 * a.abs().max(1.0),
            (ExtendedReal::Infinite, ExtendedReal::Infinite) => true,
            // the relative entropy can disagree on support leaks at the tolerance boundary
            _ => alpha == 1.0,
        };
        if !ok {
            return Err(Error::CheckFailed(format!(
                "NS pair does not preserve D_{alpha}: quantum {quantum}, classical {classical}"
            )));
        }
    }
    Ok(ns)
}

/// As [`nussbaum_szkola`] without the divergence check.
pub fn nussbaum_szkola_unchecked(rho: &DensityOperator, sigma: &DensityOperator) -> Result<NsPair> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch { left: rho.dim(), right: sigma.dim() });
    }
    let (er, es) = (rho.eigen(), sigma.eigen());
    let ov = overlap_table(er, es);
    let d = rho.dim();
    let mut out = NsPair { support: vec![], p: vec![], q: vec![], llr: vec![] };
    // decreasing eigenvalue order, ties kept in solver order
    let desc = |v: &[f64]| {
        let mut idx: Vec<usize> = (0..d).collect();
        idx.sort_by(|&a, &b| v[b].total_cmp(&v[a]));
        idx
    };
    let (oi, oj) = (desc(&er.values), desc(&es.values));
    for (ii, &i) in oi.iter().enumerate() {
        let l = er.values[i];
        if l <= SUPPORT_CUTOFF {
            continue;
        }
        for (jj, &j) in oj.iter().enumerate() {
            let o = ov[(i, j)];
            if o <= OVERLAP_FLOOR {
                continue;
            }
            let m = es.values[j];
            out.support.push((ii + 1, jj + 1));
            out.p.push(l * o);
            if m > SUPPORT_CUTOFF {
                out.q.push(m * o);
                out.llr.push(Some(m.ln() - l.ln()));
            } else {
                out.q.push(0.0);
                out.llr.push(None);
            }
        }
    }
    Ok(out)
}

impl NsPair {
    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Classical Rényi divergence `D_α(p‖q)` with the same conventions as the quantum one.
    pub fn renyi(&self, alpha: f64) -> ExtendedReal {
        if alpha < 1.0 {
            let tr: f64 = self
                .p
                .iter()
                .zip(&self.llr)
                .filter_map(|(p, l)| l.map(|l| p * ((1.0 - alpha) * l).exp()))
                .sum();
            if tr <= SUPPORT_CUTOFF {
                return ExtendedReal::Infinite;
            }
            return ExtendedReal::Finite((tr.ln() / (alpha - 1.0)).max(0.0));
        }
        let mut acc = 0.0;
        for (p, l) in self.p.iter().zip(&self.llr) {
            match l {
                Some(l) => acc -= p * l,
                None => return ExtendedReal::Infinite,
            }
        }
        ExtendedReal::Finite(acc.max(0.0))
    }

    /// `log q/p` under `p` (`j = 0`) or `log p/q` under `q` (`j = 1`).
    pub fn increment(&self, j: u8) -> Increment {
        match j {
            0 => Increment {
                values: self.llr.iter().map(|l| l.unwrap_or(f64::NEG_INFINITY)).collect(),
                probs: self.p.clone(),
            },
            _ => {
                let (values, probs) = self
                    .llr
                    .iter()
                    .zip(&self.q)
                    .filter_map(|(l, q)| l.map(|l| (-l, *q)))
                    .unzip();
                Increment { values, probs }
            }
        }
    }
}

/// A random variable with finite support; values may be `-inf`.
#[derive(Debug, Clone, PartialEq)]
pub struct Increment {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

/// `Λ(t) = log E[e^{tZ}]` with the mean, variance and third absolute central
/// moment of the tilted law.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CumulantReport {
    pub t: f64,
    pub lambda: f64,
    pub first: f64,
    pub second: f64,
    pub third_abs: f64,
}

impl CumulantReport {
    fn scaled_add(&mut self, w: f64, o: &CumulantReport) {
        self.lambda += w * o.lambda;
        self.first += w * o.first;
        self.second += w * o.second;
        self.third_abs += w * o.third_abs;
    }
}

impl Increment {
    pub fn new(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.len() != probs.len() {
            return Err(Error::DimensionMismatch { left: values.len(), right: probs.len() });
        }
        if probs.iter().any(|p| !(*p >= 0.0)) || values.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
            return Err(Error::InvalidDistribution("increment atoms must have p >= 0 and values < inf".into()));
        }
        Ok(Self { values, probs })
    }

    /// Finite atoms only.
    fn finite_atoms(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().zip(&self.probs).filter(|(v, p)| v.is_finite() && **p > 0.0).map(|(v, p)| (*v, *p))
    }

    pub fn min_value(&self) -> f64 {
        self.finite_atoms().map(|a| a.0).fold(f64::INFINITY, f64::min)
    }

    pub fn max_value(&self) -> f64 {
        self.finite_atoms().map(|a| a.0).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Cumulants at `t ≥ 0`. Atoms at `-inf` add their mass to `Λ(0)` only and
    /// never enter the tilted law.
    pub fn cumulants(&self, t: f64) -> Result<CumulantReport> {
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidParameter { name: "t".into(), value: t, reason: "must be finite and >= 0" });
        }
        let shift = if t > 0.0 { t * self.max_value() } else { 0.0 };
        let mut z = 0.0;
        let mut w = Vec::new();
        for (v, p) in self.finite_atoms() {
            let e = p * (t * v - shift).exp();
            w.push((v, e));
            z += e;
        }
        if w.is_empty() || !(z > 0.0) {
            return Err(Error::EmptyTiltedSupport);
        }
        let mut lambda = z.ln() + shift;
        if t == 0.0 {
            let infinite_mass: f64 =
                self.values.iter().zip(&self.probs).filter(|(v, _)| !v.is_finite()).map(|(_, p)| p).sum();
            lambda = (z + infinite_mass).ln();
        }
        let mean = w.iter().map(|(v, e)| v * e).sum::<f64>() / z;
        let var = w.iter().map(|(v, e)| (v - mean).powi(2) * e).sum::<f64>() / z;
        let third = w.iter().map(|(v, e)| (v - mean).abs().powi(3) * e).sum::<f64>() / z;
        Ok(CumulantReport { t, lambda, first: mean, second: var.max(0.0), third_abs: third })
    }
}

fn check_unit(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter { name: "t".into(), value: t, reason: "must lie in [0, 1]" });
    }
    Ok(())
}

/// `Λ₀(t) = log Σ p^{1−t} q^t` and its derivatives for `t ∈ [0, 1]`.
pub fn cumulants(ns: &NsPair, t: f64) -> Result<CumulantReport> {
    check_unit(t)?;
    ns.increment(0).cumulants(t)
}

/// `Λ₁(t) = log Σ_{supp p} p^t q^{1−t}` and its derivatives for `t ∈ [0, 1]`.
pub fn cumulants_dual(ns: &NsPair, t: f64) -> Result<CumulantReport> {
    check_unit(t)?;
    ns.increment(1).cumulants(t)
}

/// `Λ_{j,P}(t) = Σ_x P(x) Λ_{j,x}(t)` with matching derivatives.
pub fn mixture_cumulants(ns_list: &[NsPair], p: &ProbabilityVector, j: u8, t: f64) -> Result<CumulantReport> {
    check_unit(t)?;
    if ns_list.len() != p.len() {
        return Err(Error::DimensionMismatch { left: ns_list.len(), right: p.len() });
    }
    let mut acc = CumulantReport { t, lambda: 0.0, first: 0.0, second: 0.0, third_abs: 0.0 };
    for (x, px) in p.support() {
        let c = if j == 0 { cumulants(&ns_list[x - 1], t)? } else { cumulants_dual(&ns_list[x - 1], t)? };
        acc.scaled_add(px, &c);
    }
    Ok(acc)
}

/// `−(1+s) Λ_{0,P}(s/(1+s))`.
pub fn e0_from_cumulants(ns_list: &[NsPair], p: &ProbabilityVector, s: f64) -> Result<f64> {
    let t = s / (1.0 + s);
    Ok(-(1.0 + s) * mixture_cumulants(ns_list, p, 0, t)?.lambda)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LegendrePoint {
    pub value: f64,
    pub t_star: f64,
    /// The optimizer sits on `t = 0` or `t = 1`.
    pub boundary: bool,
}

/// `Λ*_{j,P}(z) = max_{t∈[0,1]} {tz − Λ_{j,P}(t)}`.
///
/// `Λ'` is increasing, so the maximizer is found by bisection on `Λ'(t) = z`.
pub fn legendre(ns_list: &[NsPair], p: &ProbabilityVector, j: u8, z: f64) -> Result<LegendrePoint> {
    legendre_with_tol(ns_list, p, j, z, 1e-12)
}

pub fn legendre_with_tol(ns_list: &[NsPair], p: &ProbabilityVector, j: u8, z: f64, tol: f64) -> Result<LegendrePoint> {
    let c = |t: f64| mixture_cumulants(ns_list, p, j, t);
    let (c0, c1) = (c(0.0)?, c(1.0)?);
    let slack = 1e-12 * z.abs().max(1.0);
    if z < c0.first - slack || z > c1.first + slack {
        return Err(Error::NotBracketable { z, lo: c0.first, hi: c1.first });
    }
    if z <= c0.first {
        return Ok(LegendrePoint { value: -c0.lambda, t_star: 0.0, boundary: true });
    }
    if z >= c1.first {
        return Ok(LegendrePoint { value: z - c1.lambda, t_star: 1.0, boundary: true });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut err = None;
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        match c(mid) {
            Ok(r) if r.first <= z => lo = mid,
            Ok(_) => hi = mid,
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    if let Some(e) = err {
        return Err(e);
    }
    let t = 0.5 * (lo + hi);
    let r = c(t)?;
    Ok(LegendrePoint { value: t * z - r.lambda, t_star: t, boundary: false })
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExtremalConstants {
    pub v_min: f64,
    pub v_max: f64,
    pub t_max: f64,
    pub k_max: f64,
    /// `A = e^{−K_max} / √(4π V_max)`.
    pub a_const: f64,
}

impl ExtremalConstants {
    pub fn from_extrema(v_min: f64, v_max: f64, t_max: f64) -> Self {
        let k_max = k_constant() * t_max / v_min;
        let a_const = (-k_max).exp() / (4.0 * std::f64::consts::PI * v_max).sqrt();
        Self { v_min, v_max, t_max, k_max, a_const }
    }

    /// `log A`, finite even when `A` underflows.
    pub fn log_a(&self) -> f64 {
        -self.k_max - 0.5 * (4.0 * std::f64::consts::PI * self.v_max).ln()
    }
}

const GRID: usize = 1001;

/// Grid-then-refine extremum of `f` on `[0, 1]`.
fn extremum(f: &dyn Fn(f64) -> f64, maximize: bool) -> f64 {
    let h = 1.0 / (GRID - 1) as f64;
    let vals: Vec<f64> = (0..GRID).map(|k| f(k as f64 * h)).collect();
    let better = |a: f64, b: f64| if maximize { a > b } else { a < b };
    let mut best = 0;
    for k in 1..GRID {
        if better(vals[k], vals[best]) {
            best = k;
        }
    }
    let lo = best.saturating_sub(1) as f64 * h;
    let hi = ((best + 1).min(GRID - 1)) as f64 * h;
    let refined = if maximize {
        golden_section_max(f, lo, hi, 1e-12).1
    } else {
        golden_section_min(f, lo, hi, 1e-12).1
    };
    if better(refined, vals[best]) {
        refined
    } else {
        vals[best]
    }
}

/// `V_min`, `V_max`, `T_max` of `Λ₀''` and `T₀` over `t ∈ [0, 1]` and all letters, with `K_max` and `A`.
pub fn extremal_constants(ns_list: &[NsPair]) -> Result<ExtremalConstants> {
    let mut v_min = f64::INFINITY;
    let mut v_max = f64::NEG_INFINITY;
    let mut t_max = f64::NEG_INFINITY;
    for ns in ns_list {
        let inc = ns.increment(0);
        inc.cumulants(0.5)?;
        let var = |t: f64| inc.cumulants(t).map(|c| c.second).unwrap_or(f64::NAN);
        let third = |t: f64| inc.cumulants(t).map(|c| c.third_abs).unwrap_or(f64::NAN);
        v_min = v_min.min(extremum(&var, false));
        v_max = v_max.max(extremum(&var, true));
        t_max = t_max.max(extremum(&third, true));
    }
    if !(v_min >= 1e-12) {
        return Err(Error::CheckFailed(format!(
            "V_min = {v_min:e} is degenerate; the rate is at or below R_inf"
        )));
    }
    Ok(ExtremalConstants::from_extrema(v_min, v_max, t_max))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BrrBound {
    /// The lower bound, `0` when the precondition fails.
    pub bound: f64,
    /// Logarithm of the bound formula, evaluated regardless of the precondition.
    pub log_formula: f64,
    pub t_star: f64,
    /// `Λ*_n(z)`.
    pub rate_function: f64,
    pub m2n: f64,
    pub m3n: f64,
    pub k_n: f64,
    pub precondition_ok: bool,
}

/// Upper end of the tilt search in [`brr_lower_bound`].
pub const TILT_CAP: f64 = 1e3;

/// Bahadur–Ranga Rao lower bound on `Pr[(1/n) Σ Zᵢ ≥ z]` for independent
/// increments given as `(distribution, multiplicity)` groups.
pub fn brr_lower_bound(groups: &[(&Increment, usize)], z: f64) -> Result<BrrBound> {
    let n: usize = groups.iter().map(|g| g.1).sum();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    let nf = n as f64;
    let total = |t: f64| -> Result<CumulantReport> {
        let mut acc = CumulantReport { t, lambda: 0.0, first: 0.0, second: 0.0, third_abs: 0.0 };
        for (inc, m) in groups {
            acc.scaled_add(*m as f64, &inc.cumulants(t)?);
        }
        Ok(acc)
    };
    let mean = total(0.0)?.first / nf;
    let max_mean = groups.iter().map(|(inc, m)| *m as f64 * inc.max_value()).sum::<f64>() / nf;
    if !(z > mean && z < max_mean) {
        return Err(Error::NotBracketable { z, lo: mean, hi: max_mean });
    }
    let mut hi = 1.0;
    while total(hi)?.first / nf < z {
        hi *= 2.0;
        if hi > TILT_CAP {
            return Err(Error::NotBracketable { z, lo: mean, hi: max_mean });
        }
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..200 {
        if hi - lo <= 1e-12 {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if total(mid)?.first / nf <= z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let t = 0.5 * (lo + hi);
    let c = total(t)?;
    let rate_function = t * z - c.lambda / nf;
    let (m2n, m3n) = (c.second, c.third_abs);
    let k_n = k_constant() * m3n / m2n;
    let log_formula = -nf * rate_function - k_n - (2.0 * (2.0 * std::f64::consts::PI * m2n).sqrt()).ln();
    let precondition_ok = m2n.sqrt() >= 1.0 + (1.0 + k_n).powi(2);
    let bound = if precondition_ok { log_formula.exp() } else { 0.0 };
    Ok(BrrBound { bound, log_formula, t_star: t, rate_function, m2n, m3n, k_n, precondition_ok })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::preset_with;
    use crate::exponent::{ns_pairs, ChannelContext};
    use num_complex::Complex64;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn bernoulli_pair() -> NsPair {
        let rho = DensityOperator::from_diagonal(&[0.9, 0.1]).unwrap();
        nussbaum_szkola(&rho, &DensityOperator::maximally_mixed(2)).unwrap()
    }

    #[test]
    fn ns_commuting() {
        let ns = bernoulli_pair();
        assert_eq!(ns.support, vec![(1, 1), (2, 2)]);
        assert!((ns.p[0] - 0.9).abs() < 1e-15 && (ns.p[1] - 0.1).abs() < 1e-15);
        assert!((ns.q[0] - 0.5).abs() < 1e-15 && (ns.q[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ns_pure_states() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let ns = nussbaum_szkola(&DensityOperator::pure(&[c(1.0), c(0.0)]), &DensityOperator::pure(&[c(s), c(s)])).unwrap();
        assert_eq!(ns.support, vec![(1, 1), (1, 2)]);
        assert!((ns.p[0] - 0.5).abs() < 1e-15 && (ns.p[1] - 0.5).abs() < 1e-15);
        assert!((ns.q[0] - 0.5).abs() < 1e-15 && ns.q[1] == 0.0);
    }

    #[test]
    fn ns_identical() {
        let rho = DensityOperator::from_diagonal(&[0.7, 0.3]).unwrap();
        let ns = nussbaum_szkola(&rho, &rho).unwrap();
        assert_eq!(ns.p, ns.q);
        assert!(ns.support.iter().all(|(i, j)| i == j));
    }

    #[test]
    fn cumulant_examples() {
        let ns = bernoulli_pair();
        assert!(cumulants(&ns, 0.0).unwrap().lambda.abs() < 1e-15);
        assert!(cumulants(&ns, 1.0).unwrap().lambda.abs() < 1e-15);
        let h = 1e-6;
        let d = cumulants(&ns, 0.5).unwrap().first;
        let fd = (cumulants(&ns, 0.5 + h).unwrap().lambda - cumulants(&ns, 0.5 - h).unwrap().lambda) / (2.0 * h);
        assert!((d - fd).abs() < 1e-6);
        assert!(cumulants(&ns, 1.5).is_err());
        assert!(cumulants(&ns, -0.1).is_err());
    }

    #[test]
    fn symmetry_of_dual() {
        let ctx = ChannelContext::new(preset_with("mixed-hadamard", "eps", 0.1).unwrap()).unwrap();
        let sp = ctx.sigma_star(0.5 * (ctx.r_inf + ctx.capacity)).unwrap();
        for ns in ns_pairs(&ctx.channel, &sp.sigma_star).unwrap() {
            for k in 0..=100 {
                let t = k as f64 / 100.0;
                let a = cumulants(&ns, t).unwrap();
                let b = cumulants_dual(&ns, 1.0 - t).unwrap();
                assert!((a.lambda - b.lambda).abs() <= 1e-12);
                assert!((a.first + b.first).abs() <= 1e-12);
                assert!((a.second - b.second).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn legendre_examples() {
        let ns = vec![bernoulli_pair()];
        let p = ProbabilityVector::uniform(1);
        let mid = mixture_cumulants(&ns, &p, 0, 0.5).unwrap();
        let lp = legendre(&ns, &p, 0, mid.first).unwrap();
        assert!((lp.value - (0.5 * mid.first - mid.lambda)).abs() < 1e-12);
        assert!((lp.t_star - 0.5).abs() < 1e-9);
        let z0 = mixture_cumulants(&ns, &p, 0, 0.0).unwrap().first;
        let lp = legendre(&ns, &p, 0, z0).unwrap();
        assert!(lp.value.abs() < 1e-15 && lp.t_star == 0.0 && lp.boundary);
        assert!(matches!(legendre(&ns, &p, 0, 10.0), Err(Error::NotBracketable { .. })));
    }

    #[test]
    fn extremal_examples() {
        let ctx = ChannelContext::new(preset_with("bsc", "p", 0.1).unwrap()).unwrap();
        let sp = ctx.sigma_star(0.2).unwrap();
        let ns = ns_pairs(&ctx.channel, &sp.sigma_star).unwrap();
        let k = extremal_constants(&ns).unwrap();
        assert!(k.v_min > 0.0 && k.v_min <= k.v_max && k.t_max >= 0.0);
        assert!(k.k_max >= 0.0);
        assert!(k.a_const <= 1.0 / (4.0 * std::f64::consts::PI * k.v_max).sqrt());
        for t in [0.0, 0.3, 0.9] {
            let a = cumulants(&ns[0], t).unwrap().lambda;
            let b = cumulants(&ns[1], t).unwrap().lambda;
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn brr_fair_coin_precondition_fails() {
        let coin = Increment::new(vec![0.0, 1.0], vec![0.5, 0.5]).unwrap();
        let b = brr_lower_bound(&[(&coin, 4)], 0.75).unwrap();
        assert!(!b.precondition_ok);
        assert_eq!(b.bound, 0.0);
        assert!(brr_lower_bound(&[(&coin, 4)], 0.25).is_err());
    }

    #[test]
    fn brr_rate_function_limit() {
        let coin = Increment::new(vec![-1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let z = 0.3;
        let single = brr_lower_bound(&[(&coin, 1)], z).unwrap().rate_function;
        let mut prev = f64::INFINITY;
        for n in (100..=1000).step_by(100) {
            let b = brr_lower_bound(&[(&coin, n)], z).unwrap();
            assert!((b.rate_function - single).abs() < 1e-10);
            assert!(b.log_formula <= prev);
            prev = b.log_formula;
        }
        // Λ*(z) for the Rademacher variable
        let expect = 0.5 * ((1.0 + z) * (1.0 + z).ln() + (1.0 - z) * (1.0 - z).ln());
        assert!((single - expect).abs() < 1e-10);
    }
}
