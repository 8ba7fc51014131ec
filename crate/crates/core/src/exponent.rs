//! The Gallager function `E₀`, the sphere-packing exponent, and the saddle point
//! `(α*, σ*)` of `F_{R,P}(α, σ) = ((α−1)/α)(R − D_α(W‖σ|P))`.

use crate::channel::{ProbabilityVector, SymmetricCqChannel};
use crate::divergence::{conditional_renyi, mutual_information_and_capacity, petz_renyi, r_infinity};
use crate::error::{Error, Result};
use crate::largedev::{extremal_constants, nussbaum_szkola};
use crate::qcore::{power_scalar, trace_distance, DensityOperator, HermitianMatrix, SUPPORT_CUTOFF};
use crate::search::golden_section_max;
use crate::value::ExtendedReal;

/// Upper end of the bracket for the maximizing `s`.
pub const S_CAP: f64 = 1e4;
pub const FIXED_POINT_MAX_ITER: usize = 10_000;

/// Numerical tolerances used throughout the exponent solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Trace-distance stopping rule of the fixed-point map.
    pub fixed_point: f64,
    /// Absolute tolerance on one-dimensional search arguments.
    pub search: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { fixed_point: 1e-12, search: 1e-12 }
    }
}

/// `E_sp(R)` together with its maximizer; `esp` and `s_star` are infinite at or below `R_inf`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentPoint {
    pub rate: f64,
    pub esp: ExtendedReal,
    pub s_star: ExtendedReal,
}

impl ExponentPoint {
    /// `E_sp'(R) = −s*`.
    pub fn slope(&self) -> f64 {
        -self.s_star.to_f64()
    }

    /// `α* = 1/(1+s*)`, zero when `s*` is infinite.
    pub fn alpha_star(&self) -> f64 {
        match self.s_star {
            ExtendedReal::Finite(s) => 1.0 / (1.0 + s),
            ExtendedReal::Infinite => 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SaddlePoint {
    pub rate: f64,
    pub alpha_star: f64,
    pub s_star: f64,
    pub sigma_star: DensityOperator,
    pub esp: f64,
    /// Trace distance between `σ*` and its image under the fixed-point map.
    pub fixed_point_residual: f64,
    /// `max_x |D_{α*}(W_x‖σ*) − D_{α*}(W_1‖σ*)|`.
    pub equalization_gap: f64,
}

#[derive(Debug, Clone)]
pub struct FixedPoint {
    pub sigma: DensityOperator,
    pub residual: f64,
    pub iterations: usize,
}

/// `Σ_x P(x) f(W_x)` through the cached spectra.
fn weighted_function(ch: &SymmetricCqChannel, p: &ProbabilityVector, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
    ch.check_distribution(p)?;
    let mut acc = HermitianMatrix::zeros(ch.dim());
    for (x, px) in p.support() {
        acc = acc.add(&ch.output(x)?.eigen().reconstruct(&f).scale(px))?;
    }
    Ok(acc)
}

fn check_s(s: f64) -> Result<()> {
    if !(s >= 0.0) || !s.is_finite() {
        return Err(Error::InvalidParameter { name: "s".into(), value: s, reason: "must be a finite s >= 0" });
    }
    Ok(())
}

/// `E₀(s, P) = −log Tr[(Σ_x P(x) W_x^{1/(1+s)})^{1+s}]`.
pub fn e0(ch: &SymmetricCqChannel, p: &ProbabilityVector, s: f64) -> Result<f64> {
    Ok(e0_with_derivative(ch, p, s)?.0)
}

/// `E₀(s, P)` and `∂E₀/∂s`.
///
/// With `M(s) = Σ P(x) W_x^{1/(1+s)}` and `T = Tr[M^{1+s}]`,
/// `T' = Tr[M^{1+s} log M] + (1+s) Tr[M^s M']` and `E₀' = −T'/T`.
pub fn e0_with_derivative(ch: &SymmetricCqChannel, p: &ProbabilityVector, s: f64) -> Result<(f64, f64)> {
    check_s(s)?;
    let a = 1.0 / (1.0 + s);
    let m = weighted_function(ch, p, |l| power_scalar(l, a))?;
    let dm = weighted_function(ch, p, |l| if l > SUPPORT_CUTOFF { l.powf(a) * l.ln() } else { 0.0 })?
        .scale(-a * a);
    let eig = m.eigh();
    let mut t = 0.0;
    let mut t_log = 0.0;
    for &mu in &eig.values {
        if mu > SUPPORT_CUTOFF {
            let v = mu.powf(1.0 + s);
            t += v;
            t_log += v * mu.ln();
        }
    }
    let ms = eig.reconstruct(|mu| power_scalar(mu, s));
    let dt = t_log + (1.0 + s) * ms.trace_product(&dm)?;
    let value = if s == 0.0 {
        debug_assert!(t.ln().abs() < 1e-10, "E0(0,P) = {}", -t.ln());
        0.0
    } else {
        -t.ln()
    };
    Ok((value, -dt / t))
}

/// The unnormalized closed form `(Σ_x P(x) W_x^α)^{1/α}` normalized to a state.
pub fn closed_form_sigma(ch: &SymmetricCqChannel, p: &ProbabilityVector, alpha: f64) -> Result<DensityOperator> {
    let m = weighted_function(ch, p, |l| power_scalar(l, alpha))?;
    normalized_power(&m, 1.0 / alpha)
}

/// `A^e / Tr[A^e]` for PSD `A`, scaled first so large exponents stay finite.
fn normalized_power(m: &HermitianMatrix, e: f64) -> Result<DensityOperator> {
    let eig = m.eigh();
    let top = eig.max();
    if !(top > 0.0) {
        return Err(Error::CheckFailed("operator has no positive spectrum".into()));
    }
    let h = eig.reconstruct(|l| {
        let r = l / top;
        if r > 0.0 {
            r.powf(e)
        } else {
            0.0
        }
    });
    DensityOperator::normalized(h)
}

/// One application of `σ ↦ normalize((Σ_x P(x) W_x^α / Tr[W_x^α σ^{1−α}])^{1/α})`.
pub fn fixed_point_map(
    ch: &SymmetricCqChannel,
    p: &ProbabilityVector,
    alpha: f64,
    sigma: &DensityOperator,
) -> Result<DensityOperator> {
    let sig = sigma.power(1.0 - alpha);
    let mut acc = HermitianMatrix::zeros(ch.dim());
    for (x, px) in p.support() {
        let wa = ch.output(x)?.power(alpha);
        let overlap = wa.trace_product(&sig)?;
        if overlap <= SUPPORT_CUTOFF {
            return Err(Error::SupportCollapse { symbol: x, overlap });
        }
        acc = acc.add(&wa.scale(px / overlap))?;
    }
    normalized_power(&acc, 1.0 / alpha)
}

fn check_alpha_open(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter { name: "alpha".into(), value: alpha, reason: "must lie in (0, 1)" });
    }
    Ok(())
}

/// Iterates [`fixed_point_map`] from `sigma0` until the trace-distance step is
/// at most `tol` or the iteration cap is reached.
pub fn saddle_fixed_point(
    ch: &SymmetricCqChannel,
    p: &ProbabilityVector,
    alpha: f64,
    sigma0: &DensityOperator,
    tol: f64,
) -> Result<FixedPoint> {
    ch.check_distribution(p)?;
    check_alpha_open(alpha)?;
    let mut sigma = sigma0.clone();
    let mut residual = f64::INFINITY;
    for it in 1..=FIXED_POINT_MAX_ITER {
        let next = fixed_point_map(ch, p, alpha, &sigma)?;
        residual = trace_distance(next.as_hermitian(), sigma.as_hermitian())?;
        sigma = next;
        if residual <= tol {
            return Ok(FixedPoint { sigma, residual, iterations: it });
        }
    }
    Ok(FixedPoint { sigma, residual, iterations: FIXED_POINT_MAX_ITER })
}

/// A channel with its capacity and `R_inf` precomputed.
#[derive(Debug, Clone)]
pub struct ChannelContext {
    pub channel: SymmetricCqChannel,
    pub capacity: f64,
    pub r_inf: f64,
    pub tol: Tolerances,
}

impl ChannelContext {
    pub fn new(channel: SymmetricCqChannel) -> Result<Self> {
        let capacity = mutual_information_and_capacity(&channel)?.capacity;
        let r_inf = r_infinity(&channel)?;
        Ok(Self { channel, capacity, r_inf, tol: Tolerances::default() })
    }

    pub fn with_tolerances(mut self, tol: Tolerances) -> Self {
        self.tol = tol;
        self
    }

    fn check_interior(&self, rate: f64) -> Result<()> {
        if !(rate > self.r_inf && rate < self.capacity) {
            return Err(Error::RateOutOfDomain { rate, lo: self.r_inf, hi: self.capacity });
        }
        Ok(())
    }

    /// `E_sp(R) = sup_{s≥0} {E₀(s, U) − sR}`.
    ///
    /// The objective is concave in `s`, so the maximizer is the root of
    /// `E₀'(s, U) = R`, bracketed by doubling up to [`S_CAP`] and refined by bisection.
    pub fn esp_point(&self, rate: f64) -> Result<ExponentPoint> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidParameter { name: "rate".into(), value: rate, reason: "must be finite and >= 0" });
        }
        if rate <= self.r_inf {
            return Ok(ExponentPoint { rate, esp: ExtendedReal::Infinite, s_star: ExtendedReal::Infinite });
        }
        if rate >= self.capacity {
            return Ok(ExponentPoint { rate, esp: 0.0.into(), s_star: 0.0.into() });
        }
        let u = self.channel.uniform();
        let (s, val) = maximize_legendre(|s| e0_with_derivative(&self.channel, &u, s), rate, self.tol.search)?;
        Ok(ExponentPoint { rate, esp: val.max(0.0).into(), s_star: s.into() })
    }

    /// The saddle point at rate `R`, with `σ* = (Σ U(x) W_x^{α*})^{1/α*} / Tr[·]`.
    pub fn sigma_star(&self, rate: f64) -> Result<SaddlePoint> {
        self.check_interior(rate)?;
        let pt = self.esp_point(rate)?;
        let s = pt.s_star.expect_finite("s*");
        let alpha = 1.0 / (1.0 + s);
        let u = self.channel.uniform();
        let sigma = closed_form_sigma(&self.channel, &u, alpha)?;
        let mapped = fixed_point_map(&self.channel, &u, alpha, &sigma)?;
        let residual = trace_distance(mapped.as_hermitian(), sigma.as_hermitian())?;
        let gap = equalization_gap(&self.channel, &sigma, alpha)?;
        let report = SaddlePoint {
            rate,
            alpha_star: alpha,
            s_star: s,
            sigma_star: sigma,
            esp: pt.esp.expect_finite("E_sp"),
            fixed_point_residual: residual,
            equalization_gap: gap,
        };
        let tol = self.tol.fixed_point.max(1e-10);
        if residual > tol || gap > 1e-8 {
            return Err(Error::CheckFailed(format!(
                "saddle point at R = {rate}: fixed-point residual {residual:e}, equalization gap {gap:e}"
            )));
        }
        Ok(report)
    }

    /// `F_{R,P}(α*, σ*) = ((α*−1)/α*)(R − D_{α*}(W‖σ*|P))`.
    pub fn invariance_check(&self, p: &ProbabilityVector, rate: f64) -> Result<f64> {
        let sp = self.sigma_star(rate)?;
        f_value(&self.channel, p, rate, sp.alpha_star, &sp.sigma_star)
    }

    /// `Υ = (1+s̄)³ / V_min` at rate `R̄`, certified against a finite-difference
    /// estimate of `E_sp''(R̄)`.
    pub fn curvature_bound(&self, rate: f64) -> Result<f64> {
        let (upsilon, fd) = self.curvature_with_estimate(rate)?;
        if fd > upsilon + 1e-4 {
            return Err(Error::CheckFailed(format!(
                "finite-difference E_sp'' = {fd} exceeds curvature bound {upsilon} at R = {rate}"
            )));
        }
        Ok(upsilon)
    }

    /// `(Υ, central finite difference of E_sp'' with step 1e−4)`.
    pub fn curvature_with_estimate(&self, rate: f64) -> Result<(f64, f64)> {
        self.check_interior(rate)?;
        let sp = self.sigma_star(rate)?;
        let ns = ns_pairs(&self.channel, &sp.sigma_star)?;
        let consts = extremal_constants(&ns)?;
        let upsilon = (1.0 + sp.s_star).powi(3) / consts.v_min;
        let h = 1e-4;
        let lo = (rate - h).max(self.r_inf + 0.5 * (rate - self.r_inf));
        let hi = (rate + h).min(rate + 0.5 * (self.capacity - rate));
        let step = (rate - lo).min(hi - rate);
        let e = |r: f64| -> Result<f64> { Ok(self.esp_point(r)?.esp.expect_finite("E_sp")) };
        let fd = (e(rate + step)? - 2.0 * sp.esp + e(rate - step)?) / (step * step);
        Ok((upsilon, fd))
    }

    /// `sup_α min_σ F_{R,P}(α, σ)` with the inner minimum from the fixed-point
    /// solver, warm-started across the golden-section probes. Returns `(value, α)`.
    pub fn esp_via_saddle(&self, p: &ProbabilityVector, rate: f64) -> Result<(f64, f64)> {
        let mut warm = DensityOperator::maximally_mixed(self.channel.dim());
        let mut failure: Option<Error> = None;
        let tol = self.tol.fixed_point;
        let (alpha, value) = golden_section_max(
            |alpha| {
                if failure.is_some() {
                    return f64::NEG_INFINITY;
                }
                let run = saddle_fixed_point(&self.channel, p, alpha, &warm, tol)
                    .and_then(|fp| Ok((f_value(&self.channel, p, rate, alpha, &fp.sigma)?, fp.sigma)));
                match run {
                    Ok((v, sigma)) => {
                        warm = sigma;
                        v
                    }
                    Err(e) => {
                        failure = Some(e);
                        f64::NEG_INFINITY
                    }
                }
            },
            1e-6,
            1.0 - 1e-6,
            1e-10,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        Ok((value, alpha))
    }

    /// Whether `P` belongs to the set of inputs with a strictly positive exponent at `R`.
    pub fn in_positive_set(&self, p: &ProbabilityVector, rate: f64) -> Result<bool> {
        Ok(self.esp_via_saddle(p, rate)?.0 > 1e-9)
    }
}

/// Maximizes `E(s) − sR` over `s ≥ 0` given `s ↦ (E(s), E'(s))` with `E` concave.
/// Returns `(s*, E(s*) − s*R)`.
pub fn maximize_legendre(
    mut f: impl FnMut(f64) -> Result<(f64, f64)>,
    rate: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    let (_, d0) = f(0.0)?;
    if d0 <= rate {
        return Ok((0.0, 0.0));
    }
    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        let (_, d) = f(hi)?;
        if d < rate {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > S_CAP {
            return Err(Error::Divergence { rate, cap: S_CAP });
        }
    }
    for _ in 0..400 {
        let width_tol = tol.max(4.0 * f64::EPSILON * hi);
        if hi - lo <= width_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (_, d) = f(mid)?;
        if d >= rate {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    let (v, _) = f(s)?;
    Ok((s, v - s * rate))
}

fn f_value(ch: &SymmetricCqChannel, p: &ProbabilityVector, rate: f64, alpha: f64, sigma: &DensityOperator) -> Result<f64> {
    let d = conditional_renyi(ch, sigma, p, alpha)?;
    let d = d.finite().ok_or(Error::SupportCollapse { symbol: 0, overlap: 0.0 })?;
    Ok((alpha - 1.0) / alpha * (rate - d))
}

/// `max_x |D_α(W_x‖σ) − D_α(W_1‖σ)|`.
pub fn equalization_gap(ch: &SymmetricCqChannel, sigma: &DensityOperator, alpha: f64) -> Result<f64> {
    let d1 = petz_renyi(ch.output(1)?, sigma, alpha)?.expect_finite("D_alpha(W_1||sigma*)");
    let mut gap = 0.0f64;
    for x in 2..=ch.alphabet_size() {
        let dx = petz_renyi(ch.output(x)?, sigma, alpha)?.expect_finite("D_alpha(W_x||sigma*)");
        gap = gap.max((dx - d1).abs());
    }
    Ok(gap)
}

/// Nussbaum–Szkoła pairs `(W_x, σ)` for every input symbol.
pub fn ns_pairs(ch: &SymmetricCqChannel, sigma: &DensityOperator) -> Result<Vec<crate::largedev::NsPair>> {
    ch.outputs().iter().map(|w| nussbaum_szkola(w, sigma)).collect()
}

/// Convenience wrapper computing capacity and `R_inf` on each call.
pub fn esp_point(ch: &SymmetricCqChannel, rate: f64) -> Result<ExponentPoint> {
    ChannelContext::new(ch.clone())?.esp_point(rate)
}

pub fn sigma_star(ch: &SymmetricCqChannel, rate: f64) -> Result<SaddlePoint> {
    ChannelContext::new(ch.clone())?.sigma_star(rate)
}

pub fn invariance_check(ch: &SymmetricCqChannel, p: &ProbabilityVector, rate: f64) -> Result<f64> {
    ChannelContext::new(ch.clone())?.invariance_check(p, rate)
}

pub fn curvature_bound(ch: &SymmetricCqChannel, rate: f64) -> Result<f64> {
    ChannelContext::new(ch.clone())?.curvature_bound(rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{preset, preset_with};
    use crate::qcore::HermitianMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::collections::BTreeMap;

    fn bsc() -> ChannelContext {
        ChannelContext::new(preset_with("bsc", "p", 0.1).unwrap()).unwrap()
    }

    fn mixed() -> ChannelContext {
        ChannelContext::new(preset_with("mixed-hadamard", "eps", 0.1).unwrap()).unwrap()
    }

    /// Classical BSC Gallager function with uniform input.
    fn gallager_bsc(p: f64, s: f64) -> f64 {
        let a = 1.0 / (1.0 + s);
        s * 2f64.ln() - (1.0 + s) * (p.powf(a) + (1.0 - p).powf(a)).ln()
    }

    #[test]
    fn e0_examples() {
        let ctx = bsc();
        let ch = &ctx.channel;
        assert_eq!(e0(ch, &ch.uniform(), 0.0).unwrap(), 0.0);
        let v = e0(ch, &ch.uniform(), 1.0).unwrap();
        let expect = 2f64.ln() - 2.0 * (0.1f64.sqrt() + 0.9f64.sqrt()).ln();
        assert!((v - expect).abs() < 1e-13, "{v} vs {expect}");
        assert!((v - 0.22314).abs() < 1e-5);
        let pm = ProbabilityVector::point_mass(2, 1).unwrap();
        assert!(e0(ch, &pm, 1.0).unwrap().abs() < 1e-14);
        assert!(e0(ch, &ch.uniform(), -0.5).is_err());
    }

    #[test]
    fn e0_derivative_matches_finite_difference() {
        for ctx in [bsc(), mixed()] {
            let ch = &ctx.channel;
            for &s in &[0.0, 0.3, 1.0, 4.0] {
                let (_, d) = e0_with_derivative(ch, &ch.uniform(), s).unwrap();
                let h = 1e-6;
                let lo = if s == 0.0 { 0.0 } else { s - h };
                let fd = (e0(ch, &ch.uniform(), s + h).unwrap() - e0(ch, &ch.uniform(), lo).unwrap()) / (s + h - lo);
                assert!((d - fd).abs() < 1e-5, "s={s}: {d} vs {fd}");
            }
            let (_, d0) = e0_with_derivative(ch, &ch.uniform(), 0.0).unwrap();
            assert!((d0 - ctx.capacity).abs() < 1e-10);
        }
    }

    #[test]
    fn esp_examples() {
        let ctx = bsc();
        let at_c = ctx.esp_point(ctx.capacity).unwrap();
        assert_eq!(at_c.esp, ExtendedReal::Finite(0.0));
        let pt = ctx.esp_point(0.2).unwrap();
        let esp = pt.esp.finite().unwrap();
        assert!((esp - 0.0403).abs() < 1e-3, "{esp}");
        let s = pt.s_star.finite().unwrap();
        assert!((s - 0.55).abs() < 0.05, "{s}");
        let (_, oracle) = golden_section_max(|s| gallager_bsc(0.1, s) - 0.2 * s, 0.0, 50.0, 1e-12);
        assert!((esp - oracle).abs() < 1e-10);
        let pure = ChannelContext::new(preset("pure-hadamard", &BTreeMap::new()).unwrap()).unwrap();
        assert_eq!(pure.esp_point(0.10).unwrap().esp, ExtendedReal::Infinite);
    }

    #[test]
    fn sigma_star_examples() {
        let ctx = bsc();
        let sp = ctx.sigma_star(0.2).unwrap();
        let m = sp.sigma_star.matrix();
        assert!(m[(0, 1)].norm() < 1e-12);
        let rot = ctx.channel.rotate(sp.sigma_star.as_hermitian());
        assert!(rot.sub(sp.sigma_star.as_hermitian()).unwrap().frobenius_norm() < 1e-10);
        assert!((sp.sigma_star.as_hermitian().trace() - 1.0).abs() < 1e-10);
        assert!((sp.alpha_star - 1.0 / (1.0 + sp.s_star)).abs() < 1e-12);

        let mh = mixed();
        let mid = 0.5 * (mh.r_inf + mh.capacity);
        let sp = mh.sigma_star(mid).unwrap();
        assert!(sp.equalization_gap <= 1e-8);
        assert!(mh.sigma_star(mh.capacity + 0.01).is_err());
    }

    #[test]
    fn fixed_point_examples() {
        let ctx = bsc();
        let ch = &ctx.channel;
        let pm = ProbabilityVector::point_mass(2, 2).unwrap();
        let mixed0 = DensityOperator::maximally_mixed(2);
        let fp = saddle_fixed_point(ch, &pm, 0.4, &mixed0, 1e-12).unwrap();
        assert!(fp.residual <= 1e-12);
        let diff = fp.sigma.as_hermitian().sub(ch.output(2).unwrap().as_hermitian()).unwrap();
        assert!(diff.frobenius_norm() < 1e-12);

        let fp = saddle_fixed_point(ch, &ch.uniform(), 0.65, &mixed0, 1e-12).unwrap();
        let cf = closed_form_sigma(ch, &ch.uniform(), 0.65).unwrap();
        assert!(trace_distance(fp.sigma.as_hermitian(), cf.as_hermitian()).unwrap() < 1e-9);

        let pure = preset("pure-hadamard", &BTreeMap::new()).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let minus = DensityOperator::pure(&[num_complex::Complex64::new(s, 0.0), num_complex::Complex64::new(-s, 0.0)]);
        let e = saddle_fixed_point(&pure, &ProbabilityVector::point_mass(2, 2).unwrap(), 0.5, &minus, 1e-12);
        assert!(matches!(e, Err(Error::SupportCollapse { .. })), "{e:?}");
    }

    #[test]
    fn invariance_over_random_inputs() {
        let ctx = bsc();
        let esp = ctx.esp_point(0.2).unwrap().esp.finite().unwrap();
        let u = ctx.invariance_check(&ctx.channel.uniform(), 0.2).unwrap();
        assert!((u - esp).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let p = ProbabilityVector::sample(2, &mut rng);
            assert!((ctx.invariance_check(&p, 0.2).unwrap() - esp).abs() <= 1e-8);
        }
        let pm = ProbabilityVector::point_mass(2, 1).unwrap();
        assert!((ctx.invariance_check(&pm, 0.2).unwrap() - esp).abs() <= 1e-8);
    }

    #[test]
    fn curvature_examples() {
        let ctx = bsc();
        let (ups, fd) = ctx.curvature_with_estimate(0.25).unwrap();
        assert!(ups > 0.0);
        assert!(fd <= ups + 1e-4, "{fd} vs {ups}");
        assert!(ctx.curvature_bound(ctx.capacity).is_err());
    }

    #[test]
    fn uniform_input_is_optimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for ctx in [bsc(), mixed()] {
            let ch = &ctx.channel;
            for _ in 0..50 {
                let p = ProbabilityVector::sample(2, &mut rng);
                for &s in &[0.1, 0.5, 1.0, 2.0] {
                    assert!(e0(ch, &ch.uniform(), s).unwrap() >= e0(ch, &p, s).unwrap() - 1e-10);
                }
            }
        }
    }

    #[test]
    fn e0_concave_in_s() {
        let ctx = mixed();
        let ch = &ctx.channel;
        let vals: Vec<f64> = (0..101).map(|k| e0(ch, &ch.uniform(), 0.05 * k as f64).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[0] - 2.0 * w[1] + w[2] <= 1e-8);
        }
    }

    #[test]
    fn envelope_slope() {
        for ctx in [bsc(), mixed()] {
            let r = 0.5 * (ctx.r_inf + ctx.capacity);
            let h = 1e-4;
            let e = |r| ctx.esp_point(r).unwrap().esp.finite().unwrap();
            let s = ctx.esp_point(r).unwrap().s_star.finite().unwrap();
            assert!(((e(r + h) - e(r - h)) / (2.0 * h) + s).abs() <= 1e-4);
        }
    }

    #[test]
    fn saddle_expression_agrees() {
        for ctx in [bsc(), mixed()] {
            let r = 0.5 * (ctx.r_inf + ctx.capacity);
            let direct = ctx.esp_point(r).unwrap().esp.finite().unwrap();
            let (via, _) = ctx.esp_via_saddle(&ctx.channel.uniform(), r).unwrap();
            assert!((direct - via).abs() <= 1e-7, "{direct} vs {via}");
            assert!(ctx.in_positive_set(&ctx.channel.uniform(), r).unwrap());
        }
    }

    #[test]
    fn closed_form_handles_large_exponent() {
        let ctx = bsc();
        let sigma = closed_form_sigma(&ctx.channel, &ctx.channel.uniform(), 1e-6).unwrap();
        let id = HermitianMatrix::identity(2).scale(0.5);
        assert!(sigma.as_hermitian().sub(&id).unwrap().frobenius_norm() < 1e-9);
    }
}
