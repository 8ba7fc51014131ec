//! Finite-blocklength sphere-packing lower bound: thresholds, rate back-off,
//! prefactor, Taylor correction, and the exact errors of the Nagaoka test set.

use serde::Serialize;

use crate::channel::empirical_distribution;
use crate::error::{Error, Result};
use crate::exponent::{maximize_legendre, ns_pairs, ChannelContext};
use crate::largedev::{brr_lower_bound, extremal_constants, mixture_cumulants, BrrBound, ExtremalConstants, Increment, NsPair};
use crate::oracle::{LlrDistribution, MERGE_QUANTUM};
use crate::qcore::DensityOperator;
use crate::value::ExtendedReal;

/// Number of rates sampled on `[R − ξ, R]` when bounding the curvature.
pub const CURVATURE_GRID: usize = 9;

/// `γ_n = (½+γ)(ln n)/n`.
pub fn gamma_n(gamma: f64, n: u64) -> f64 {
    let nf = n as f64;
    (0.5 + gamma) * nf.ln() / nf
}

/// Default back-off slack: half the distance to `R_∞`, or `R/2` when `R_∞ = 0`.
pub fn default_xi(rate: f64, r_inf: f64) -> f64 {
    if r_inf > 0.0 {
        0.5 * (rate - r_inf)
    } else {
        0.5 * rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
    pub n0: f64,
}

/// Least `n` with `γ_m ≤ ξ` for every `m ≥ n`.
fn threshold_n1(gamma: f64, xi: f64) -> f64 {
    // γ_n increases up to n = 3 and decreases afterwards
    if gamma_n(gamma, 2) <= xi && gamma_n(gamma, 3) <= xi {
        return 1.0;
    }
    let mut lo: u64 = 3;
    let mut hi: u64 = 4;
    while gamma_n(gamma, hi) > xi {
        lo = hi;
        hi = hi.saturating_mul(2);
        if hi == u64::MAX {
            return f64::INFINITY;
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if gamma_n(gamma, mid) <= xi {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi as f64
}

/// Above this, consecutive integers are no longer all representable as `f64`.
const EXACT_INTEGER_LIMIT: f64 = 4503599627370496.0;

/// Least `n` with `√n ≥ x`.
fn least_sqrt_at_least(x: f64) -> f64 {
    if x <= 1.0 {
        return 1.0;
    }
    let mut n = (x * x).ceil();
    if n >= EXACT_INTEGER_LIMIT {
        return n;
    }
    while n > 1.0 && (n - 1.0).sqrt() >= x {
        n -= 1.0;
    }
    while n.sqrt() < x {
        n += 1.0;
    }
    n
}

/// Least `n` with `log A + γ ln n > 0`.
fn threshold_n3(log_a: f64, gamma: f64) -> f64 {
    if log_a > 0.0 {
        return 1.0;
    }
    let x = -log_a / gamma;
    if x > 700.0 {
        return f64::INFINITY;
    }
    let mut n = x.exp().floor().max(1.0);
    if n >= EXACT_INTEGER_LIMIT {
        // past the spacing of f64 integers the floor plus one is exact up to rounding
        return n + 1.0;
    }
    while n > 1.0 && log_a + gamma * (n - 1.0).ln() > 0.0 {
        n -= 1.0;
    }
    while log_a + gamma * n.ln() <= 0.0 {
        n += 1.0;
    }
    n
}

fn thresholds_from(consts: &ExtremalConstants, gamma: f64, xi: f64) -> Thresholds {
    let n1 = threshold_n1(gamma, xi);
    let n2 = least_sqrt_at_least((1.0 + (1.0 + consts.k_max).powi(2)) / consts.v_min.sqrt());
    let n3 = threshold_n3(consts.log_a(), gamma);
    Thresholds { n1, n2, n3, n0: n1.max(n2).max(n3) }
}

/// Everything in the bound that does not depend on `n`.
#[derive(Debug, Clone)]
pub struct BoundSetup {
    pub rate: f64,
    pub gamma: f64,
    pub xi: f64,
    pub esp_r: ExtendedReal,
    pub s_star: ExtendedReal,
    /// `σ*_R`, absent when `R ≤ R_∞`.
    pub sigma_star: Option<DensityOperator>,
    pub constants: Option<ExtremalConstants>,
    pub upsilon: Option<f64>,
    pub thresholds: Option<Thresholds>,
    ctx: ChannelContext,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub rate: f64,
    pub n: u64,
    pub gamma: f64,
    pub xi: f64,
    pub gamma_n: f64,
    pub rate_n: f64,
    pub esp_rn: ExtendedReal,
    pub esp_r: ExtendedReal,
    pub s_star_r: ExtendedReal,
    pub constants: Option<ExtremalConstants>,
    pub upsilon: Option<f64>,
    pub thresholds: Option<Thresholds>,
    pub direct_bound: f64,
    pub log_direct_bound: f64,
    pub theorem_bound: f64,
    pub log_theorem_bound: f64,
    /// `A · n^{−γ s*} · e^{−n γ_n² Υ / 2}`.
    pub correction: f64,
    pub log_correction: f64,
    pub valid: bool,
    /// `E_sp(R) = +∞`: the converse holds for every `n` and no finite bound is reported.
    pub infinite_exponent: bool,
}

impl BoundSetup {
    /// `ξ` defaults to [`default_xi`]; it must satisfy `0 < ξ < R − R_∞`.
    pub fn new(ctx: &ChannelContext, rate: f64, gamma: f64, xi: Option<f64>) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidParameter { name: "gamma".into(), value: gamma, reason: "must be finite and > 0" });
        }
        if !(rate >= 0.0) || rate >= ctx.capacity {
            return Err(Error::RateOutOfDomain { rate, lo: 0.0, hi: ctx.capacity });
        }
        let xi = xi.unwrap_or_else(|| default_xi(rate, ctx.r_inf));
        if rate <= ctx.r_inf {
            return Ok(Self {
                rate,
                gamma,
                xi,
                esp_r: ExtendedReal::Infinite,
                s_star: ExtendedReal::Infinite,
                sigma_star: None,
                constants: None,
                upsilon: None,
                thresholds: None,
                ctx: ctx.clone(),
            });
        }
        if !(xi > 0.0 && xi < rate - ctx.r_inf) {
            return Err(Error::InvalidParameter { name: "xi".into(), value: xi, reason: "must lie in (0, R - R_inf)" });
        }
        let sp = ctx.sigma_star(rate)?;
        let consts = extremal_constants(&ns_pairs(&ctx.channel, &sp.sigma_star)?)?;
        let lo_rate = rate - xi;
        let s_lo = ctx.esp_point(lo_rate)?.s_star.expect_finite("s* at R - xi");
        let mut v_min = f64::INFINITY;
        for k in 0..CURVATURE_GRID {
            let r = lo_rate + xi * k as f64 / (CURVATURE_GRID - 1) as f64;
            let v = if k + 1 == CURVATURE_GRID {
                consts.v_min
            } else {
                let s = ctx.sigma_star(r)?;
                extremal_constants(&ns_pairs(&ctx.channel, &s.sigma_star)?)?.v_min
            };
            v_min = v_min.min(v);
        }
        let upsilon = (1.0 + s_lo).powi(3) / v_min;
        Ok(Self {
            rate,
            gamma,
            xi,
            esp_r: sp.esp.into(),
            s_star: sp.s_star.into(),
            sigma_star: Some(sp.sigma_star),
            thresholds: Some(thresholds_from(&consts, gamma, xi)),
            constants: Some(consts),
            upsilon: Some(upsilon),
            ctx: ctx.clone(),
        })
    }

    pub fn report(&self, n: u64) -> Result<BoundReport> {
        if n == 0 {
            return Err(Error::InvalidParameter { name: "n".into(), value: 0.0, reason: "must be >= 1" });
        }
        let nf = n as f64;
        let g_n = gamma_n(self.gamma, n);
        let rate_n = self.rate - g_n;
        let mut report = BoundReport {
            rate: self.rate,
            n,
            gamma: self.gamma,
            xi: self.xi,
            gamma_n: g_n,
            rate_n,
            esp_rn: ExtendedReal::Infinite,
            esp_r: self.esp_r,
            s_star_r: self.s_star,
            constants: self.constants,
            upsilon: self.upsilon,
            thresholds: self.thresholds,
            direct_bound: 0.0,
            log_direct_bound: f64::NEG_INFINITY,
            theorem_bound: 0.0,
            log_theorem_bound: f64::NEG_INFINITY,
            correction: 0.0,
            log_correction: f64::NEG_INFINITY,
            valid: true,
            infinite_exponent: true,
        };
        let (Some(consts), Some(upsilon), Some(th)) = (self.constants, self.upsilon, self.thresholds) else {
            return Ok(report);
        };
        report.infinite_exponent = false;
        let log_a = consts.log_a();
        let esp_rn = if rate_n > self.ctx.r_inf { self.ctx.esp_point(rate_n)?.esp } else { ExtendedReal::Infinite };
        report.esp_rn = esp_rn;
        if let ExtendedReal::Finite(e) = esp_rn {
            report.log_direct_bound = log_a - 0.5 * nf.ln() - nf * e;
            report.direct_bound = report.log_direct_bound.exp();
        }
        let s = self.s_star.expect_finite("s*");
        let e_r = self.esp_r.expect_finite("E_sp(R)");
        report.log_correction = log_a - self.gamma * s * nf.ln() - 0.5 * nf * g_n * g_n * upsilon;
        report.correction = report.log_correction.exp();
        report.log_theorem_bound = -0.5 * (1.0 + s) * nf.ln() - nf * e_r + report.log_correction;
        report.theorem_bound = report.log_theorem_bound.exp();
        report.valid = nf >= th.n0;
        Ok(report)
    }

    /// `σ*_R`, or an error when `R ≤ R_∞`.
    pub fn sigma(&self) -> Result<&DensityOperator> {
        self.sigma_star
            .as_ref()
            .ok_or(Error::RateOutOfDomain { rate: self.rate, lo: self.ctx.r_inf, hi: self.ctx.capacity })
    }
}

/// `(N1, N2, N3, N0)` at rate `R`.
pub fn n_thresholds(ctx: &ChannelContext, rate: f64, gamma: f64, xi: Option<f64>) -> Result<Thresholds> {
    if !(rate > ctx.r_inf && rate < ctx.capacity) {
        return Err(Error::RateOutOfDomain { rate, lo: ctx.r_inf, hi: ctx.capacity });
    }
    Ok(BoundSetup::new(ctx, rate, gamma, xi)?.thresholds.expect("interior rate"))
}

/// The bound at a single blocklength.
pub fn sp_bound(ctx: &ChannelContext, rate: f64, n: u64, gamma: f64, xi: Option<f64>) -> Result<BoundReport> {
    BoundSetup::new(ctx, rate, gamma, xi)?.report(n)
}

#[derive(Debug, Clone, Serialize)]
pub struct NagaokaReport {
    pub n: usize,
    pub rate_n: f64,
    /// `φ_n(R_n) = sup_{s ≥ 0} {E₀(s) − s R_n}` from the NS cumulants of the type.
    pub phi_n: ExtendedReal,
    /// `e^{n R_n − n φ_n}`.
    pub delta: f64,
    /// `α(𝒰; pⁿ)`.
    pub alpha_u: f64,
    /// `β(𝒰; qⁿ)`.
    pub beta_u: f64,
    /// `Σ min(pⁿ, δ qⁿ)`, which equals `α(𝒰) + δ β(𝒰)`.
    pub min_mixture: f64,
    pub brr_alpha: Option<BrrBound>,
    pub brr_beta: Option<BrrBound>,
    /// Both exact errors dominate their BRR bounds wherever the precondition holds.
    pub threshold_holds: bool,
}

/// `φ_n(R_n)` for the letters' type, with NS pairs built against `σ`.
pub fn phi_n(ns_list: &[NsPair], p: &crate::channel::ProbabilityVector, rate_n: f64) -> Result<ExtendedReal> {
    let f = |s: f64| -> Result<(f64, f64)> {
        let c = mixture_cumulants(ns_list, p, 0, s / (1.0 + s))?;
        Ok((-(1.0 + s) * c.lambda, -c.lambda - c.first / (1.0 + s)))
    };
    match maximize_legendre(f, rate_n, 1e-13) {
        Ok((_, v)) => Ok(ExtendedReal::Finite(v)),
        Err(Error::Divergence { .. }) => Ok(ExtendedReal::Infinite),
        Err(e) => Err(e),
    }
}

/// Exact errors of the test set `𝒰 = {pⁿ e^{nφ_n} > qⁿ e^{nR_n}}` for the NS
/// distributions of `W_{x_1},…,W_{x_n}` against `σ`.
pub fn nagaoka_exact_errors(ctx: &ChannelContext, sigma: &DensityOperator, xs: &[usize], rate_n: f64) -> Result<NagaokaReport> {
    let ch = &ctx.channel;
    let ptype = empirical_distribution(xs, ch.alphabet_size())?;
    let ns_list = ns_pairs(ch, sigma)?;
    let n = xs.len();
    let nf = n as f64;
    let phi = phi_n(&ns_list, &ptype, rate_n)?;
    let letters: Vec<&NsPair> = xs.iter().map(|&x| &ns_list[x - 1]).collect();
    let dist = LlrDistribution::of_sequence(&letters)?;

    let (delta, alpha_u, beta_u) = match phi {
        ExtendedReal::Finite(phi) => {
            let threshold = nf * (phi - rate_n);
            let (a, _) = dist.upper_masses(threshold);
            let slack = MERGE_QUANTUM * threshold.abs().max(1.0);
            let b: f64 = dist.atoms.iter().filter(|x| x.0 < threshold - slack).map(|x| x.2).sum();
            ((nf * (rate_n - phi)).exp(), a, b)
        }
        // δ = 0 and 𝒰 is the support of pⁿ
        ExtendedReal::Infinite => (0.0, 0.0, dist.atoms.iter().map(|x| x.2).sum()),
    };

    let mut brr_alpha = None;
    let mut brr_beta = None;
    if let ExtendedReal::Finite(phi) = phi {
        let mut counts = vec![0usize; ch.alphabet_size()];
        for &x in xs {
            counts[x - 1] += 1;
        }
        let inc0: Vec<_> = ns_list.iter().map(|ns| ns.increment(0)).collect();
        let inc1: Vec<_> = ns_list.iter().map(|ns| ns.increment(1)).collect();
        fn groups<'a>(incs: &'a [Increment], counts: &[usize]) -> Vec<(&'a Increment, usize)> {
            incs.iter().zip(counts).filter(|(_, &c)| c > 0).map(|(i, &c)| (i, c)).collect()
        }
        brr_alpha = brr_lower_bound(&groups(&inc0, &counts), phi - rate_n).ok();
        brr_beta = brr_lower_bound(&groups(&inc1, &counts), rate_n - phi).ok();
    }
    let holds = |exact: f64, b: &Option<BrrBound>| match b {
        Some(b) if b.precondition_ok => exact >= b.bound * (1.0 - 1e-9),
        _ => true,
    };
    let threshold_holds = holds(alpha_u, &brr_alpha) && holds(beta_u, &brr_beta);
    Ok(NagaokaReport {
        n,
        rate_n,
        phi_n: phi,
        delta,
        alpha_u,
        beta_u,
        min_mixture: dist.min_mixture(delta),
        brr_alpha,
        brr_beta,
        threshold_holds,
    })
}

/// The ordering chain at a small blocklength: the exact Neyman–Pearson value on
/// `W_{x_1}⊗…⊗W_{x_n}` vs `σ*^{⊗n}` at level `e^{−nR_n}`, the direct bound, and the
/// Nagaoka inequality against random tests.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingReport {
    pub n: u64,
    pub rate: f64,
    pub rate_n: f64,
    pub mu: f64,
    pub alpha_hat: f64,
    pub direct_bound: f64,
    pub valid: bool,
    pub nagaoka: NagaokaReport,
    /// `min_Q α(Q) + δβ(Q)` over the random tests.
    pub min_random_objective: f64,
    /// `(α(𝒰) + δβ(𝒰)) / 2`.
    pub nagaoka_half: f64,
    pub holds: bool,
}

/// The cyclic input sequence `1, 2, …, K, 1, 2, …` of length `n`.
pub fn cyclic_sequence(k: usize, n: usize) -> Vec<usize> {
    (0..n).map(|i| i % k + 1).collect()
}

pub fn ordering_check(setup: &BoundSetup, xs: &[usize], tests: usize, seed: u64) -> Result<OrderingReport> {
    use crate::oracle::{min_type1_product, product_states, type_errors, TestOperator};
    use rand::SeedableRng;

    let sigma = setup.sigma()?;
    let n = xs.len() as u64;
    let report = setup.report(n)?;
    let mu = (-(n as f64) * report.rate_n).exp().min(1.0);
    let ch = &setup.ctx.channel;
    let alpha_hat = min_type1_product(ch, xs, sigma, mu)?.alpha_hat;
    let nagaoka = nagaoka_exact_errors(&setup.ctx, sigma, xs, report.rate_n)?;
    let (rho, sig) = product_states(ch, xs, sigma)?;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut min_obj = f64::INFINITY;
    for _ in 0..tests {
        let q = TestOperator::random(rho.dim(), &mut rng);
        let (a, b) = type_errors(&q, &rho, &sig)?;
        min_obj = min_obj.min(a + nagaoka.delta * b);
    }
    let half = 0.5 * (nagaoka.alpha_u + nagaoka.delta * nagaoka.beta_u);
    let holds = if report.valid { alpha_hat >= report.direct_bound } else { min_obj >= half - 1e-9 };
    Ok(OrderingReport {
        n,
        rate: setup.rate,
        rate_n: report.rate_n,
        mu,
        alpha_hat,
        direct_bound: report.direct_bound,
        valid: report.valid,
        nagaoka,
        min_random_objective: min_obj,
        nagaoka_half: half,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{preset_with, ProbabilityVector};
    use crate::largedev::legendre;
    use std::sync::OnceLock;

    fn bsc_ctx() -> &'static ChannelContext {
        static CTX: OnceLock<ChannelContext> = OnceLock::new();
        CTX.get_or_init(|| ChannelContext::new(preset_with("bsc", "p", 0.1).unwrap()).unwrap())
    }

    fn bsc_setup() -> &'static BoundSetup {
        static SETUP: OnceLock<BoundSetup> = OnceLock::new();
        SETUP.get_or_init(|| BoundSetup::new(bsc_ctx(), 0.2, 1.0, None).unwrap())
    }

    #[test]
    fn gamma_n_and_n1() {
        assert_eq!(gamma_n(1.0, 1), 0.0);
        let n1 = threshold_n1(1.0, 0.01);
        assert!(gamma_n(1.0, n1 as u64) <= 0.01);
        assert!(gamma_n(1.0, n1 as u64 - 1) > 0.01);
        assert_eq!(threshold_n1(1.0, 10.0), 1.0);
    }

    #[test]
    fn integer_threshold_helpers() {
        assert_eq!(least_sqrt_at_least(3.0), 9.0);
        assert_eq!(least_sqrt_at_least(3.01), 10.0);
        assert_eq!(least_sqrt_at_least(0.5), 1.0);
        // A = e^{-2}, γ = 1: n > e² ≈ 7.39
        assert_eq!(threshold_n3(-2.0, 1.0), 8.0);
        assert_eq!(threshold_n3(0.5, 1.0), 1.0);
    }

    #[test]
    fn thresholds_definition_and_monotonicity() {
        let th = bsc_setup().thresholds.unwrap();
        assert_eq!(th.n0, th.n1.max(th.n2).max(th.n3));
        let consts = bsc_setup().constants.unwrap();
        let doubled = thresholds_from(&consts, 2.0, bsc_setup().xi);
        assert!(doubled.n3 <= th.n3);
        let again = n_thresholds(bsc_ctx(), 0.2, 1.0, None).unwrap();
        assert_eq!(again, th);
    }

    #[test]
    fn bsc_thresholds_golden() {
        let th = bsc_setup().thresholds.unwrap();
        let golden: serde_json::Value =
            serde_json::from_str(include_str!("../tests/golden/bsc_thresholds.json")).unwrap();
        for key in ["n1", "n2", "n3", "n0"] {
            let want = golden[key].as_f64().unwrap();
            let got = serde_json::to_value(th).unwrap()[key].as_f64().unwrap();
            assert!((got - want).abs() <= 1e-9 * want, "{key}: {got} vs {want}");
        }
    }

    #[test]
    fn rate_domain() {
        let ctx = bsc_ctx();
        assert!(matches!(sp_bound(ctx, ctx.capacity, 10, 1.0, None), Err(Error::RateOutOfDomain { .. })));
        assert!(n_thresholds(ctx, 0.0, 1.0, None).is_err());
        let r = sp_bound(ctx, 0.0, 10, 1.0, None).unwrap();
        assert!(r.infinite_exponent && r.esp_r == ExtendedReal::Infinite);
    }

    #[test]
    fn small_n_is_invalid_but_reported() {
        let r = bsc_setup().report(100).unwrap();
        assert!(!r.valid);
        assert!(r.direct_bound >= 0.0 && r.log_direct_bound.is_finite());
        assert!(r.log_theorem_bound.is_finite());
    }

    #[test]
    fn direct_bound_exponent_converges() {
        let setup = bsc_setup();
        let esp = setup.esp_r.to_f64();
        let mut prev = f64::INFINITY;
        for k in 10..=20 {
            let r = setup.report(1u64 << k).unwrap();
            let e = -r.log_direct_bound / r.n as f64;
            assert!(e < prev);
            prev = e;
        }
        let r = setup.report(1_000_000).unwrap();
        let e = -r.log_direct_bound / 1e6;
        assert!((e - esp).abs() < 2e-3, "{e} vs {esp}");
    }

    #[test]
    fn taylor_form_below_direct_form_past_n1() {
        let setup = bsc_setup();
        let n1 = setup.thresholds.unwrap().n1 as u64;
        for n in [n1, 2 * n1, 10 * n1, 1000 * n1] {
            let r = setup.report(n).unwrap();
            assert!(r.log_theorem_bound <= r.log_direct_bound + 1e-9, "n={n}: {r:?}");
        }
    }

    fn bsc_pairs() -> (Vec<NsPair>, DensityOperator) {
        let sigma = bsc_setup().sigma().unwrap().clone();
        (ns_pairs(&bsc_ctx().channel, &sigma).unwrap(), sigma)
    }

    #[test]
    fn phi_matches_legendre_identity() {
        // at R_n = R and P uniform, φ equals E_sp(R) and solves Λ*₀(φ − R) = φ
        let (ns, _) = bsc_pairs();
        let u = ProbabilityVector::uniform(2);
        let phi = phi_n(&ns, &u, 0.2).unwrap().to_f64();
        assert!((phi - bsc_setup().esp_r.to_f64()).abs() < 1e-9);
        let lp = legendre(&ns, &u, 0, phi - 0.2).unwrap();
        assert!((lp.value - phi).abs() < 1e-8);
    }

    #[test]
    fn nagaoka_single_letter_matches_direct_sum() {
        let (ns, sigma) = bsc_pairs();
        let rate_n = 0.15;
        let rep = nagaoka_exact_errors(bsc_ctx(), &sigma, &[2], rate_n).unwrap();
        let phi = rep.phi_n.to_f64();
        let (mut a, mut b) = (0.0, 0.0);
        let pair = &ns[1];
        for k in 0..pair.len() {
            let in_u = pair.p[k] * phi.exp() > pair.q[k] * rate_n.exp();
            if in_u {
                b += pair.q[k];
            } else {
                a += pair.p[k];
            }
        }
        assert!((rep.alpha_u - a).abs() < 1e-14 && (rep.beta_u - b).abs() < 1e-14);
        assert!((rep.alpha_u + rep.delta * rep.beta_u - rep.min_mixture).abs() < 1e-14);
    }

    #[test]
    fn nagaoka_matches_enumeration() {
        let (ns, sigma) = bsc_pairs();
        let xs = [1, 2, 2, 1, 1, 1, 2, 1, 2, 2];
        let rate_n = 0.17;
        let rep = nagaoka_exact_errors(bsc_ctx(), &sigma, &xs, rate_n).unwrap();
        let n = xs.len() as f64;
        let phi = rep.phi_n.to_f64();
        let (mut a, mut b) = (0.0, 0.0);
        let sizes: Vec<usize> = xs.iter().map(|&x| ns[x - 1].len()).collect();
        let total: usize = sizes.iter().product();
        for mut code in 0..total {
            let (mut p, mut q) = (1.0, 1.0);
            for (i, &x) in xs.iter().enumerate() {
                let k = code % sizes[i];
                code /= sizes[i];
                p *= ns[x - 1].p[k];
                q *= ns[x - 1].q[k];
            }
            if (p.ln() + n * phi) > (q.ln() + n * rate_n) {
                b += q;
            } else {
                a += p;
            }
        }
        assert!((rep.alpha_u - a).abs() < 1e-12, "{} vs {a}", rep.alpha_u);
        assert!((rep.beta_u - b).abs() < 1e-12, "{} vs {b}", rep.beta_u);
        assert!(rep.threshold_holds);
    }

    #[test]
    fn exact_tail_dominates_brr_at_large_n() {
        let (ns, _) = bsc_pairs();
        let inc = ns[0].increment(0);
        let phi = bsc_setup().esp_r.to_f64();
        let z = phi - 0.2;
        let exact = crate::oracle::exact_tail(&[(&inc, 2000)], z).unwrap();
        let brr = brr_lower_bound(&[(&inc, 2000)], z).unwrap();
        assert!(exact > 0.0);
        if brr.precondition_ok {
            assert!(exact >= brr.bound);
        }
        // the raw formula stays below the exact tail even without the precondition
        assert!(exact.ln() >= brr.log_formula);
    }
}

#[cfg(test)]
mod ordering_tests {
    use super::*;
    use crate::channel::preset_with;

    #[test]
    fn ordering_chain_on_mixed_hadamard() {
        let ctx = ChannelContext::new(preset_with("mixed-hadamard", "eps", 0.1).unwrap()).unwrap();
        let rate = 0.5 * (ctx.r_inf + ctx.capacity);
        let setup = BoundSetup::new(&ctx, rate, 1.0, None).unwrap();
        for n in 2..=5 {
            let rep = ordering_check(&setup, &cyclic_sequence(2, n), 30, n as u64).unwrap();
            assert!(rep.holds, "{rep:?}");
            assert!(rep.alpha_hat + 1e-12 >= 0.0 && rep.alpha_hat <= 1.0);
        }
    }
}
